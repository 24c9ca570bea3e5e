#include "promptpg/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "promptpg/errors.hpp"

namespace promptpg {

Dataset load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset file: " + path.string());
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    if (tab1 == std::string::npos || tab1 == 0)
      throw IoError("dataset line " + std::to_string(lineno) +
                    ": expected label<TAB>text in " + path.string());
    Example ex;
    ex.label = line.substr(0, tab1);
    const auto tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      ex.text_a = line.substr(tab1 + 1);
    } else {
      ex.text_a = line.substr(tab1 + 1, tab2 - tab1 - 1);
      ex.text_b = line.substr(tab2 + 1);
      if (ex.text_b.find('\t') != std::string::npos)
        throw IoError("dataset line " + std::to_string(lineno) +
                      ": too many columns in " + path.string());
    }
    data.push_back(std::move(ex));
  }
  if (data.empty()) throw IoError("dataset file is empty: " + path.string());
  return data;
}

void save_tsv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path.string());
  for (const Example& ex : dataset) {
    out << ex.label << '\t' << ex.text_a;
    if (!ex.text_b.empty()) out << '\t' << ex.text_b;
    out << '\n';
  }
  if (!out) throw IoError("failed writing dataset file: " + path.string());
}

std::vector<std::string> label_order(const Dataset& dataset) {
  std::vector<std::string> labels;
  for (const Example& ex : dataset)
    if (std::find(labels.begin(), labels.end(), ex.label) == labels.end())
      labels.push_back(ex.label);
  return labels;
}

}  // namespace promptpg
