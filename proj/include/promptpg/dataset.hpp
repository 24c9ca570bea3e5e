#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace promptpg {

// One labeled example; text_b is empty for single-sentence tasks.
struct Example {
  std::string label;
  std::string text_a;
  std::string text_b;

  bool operator==(const Example&) const = default;
};

using Dataset = std::vector<Example>;

// TSV with 2 or 3 columns: label<TAB>text or label<TAB>text_a<TAB>text_b.
Dataset load_tsv(const std::filesystem::path& path);

void save_tsv(const Dataset& dataset, const std::filesystem::path& path);

// Distinct labels in first-appearance order; the position is the class index.
std::vector<std::string> label_order(const Dataset& dataset);

}  // namespace promptpg
