#include "promptpg/metrics.hpp"

#include <cmath>
#include <vector>

#include "promptpg/errors.hpp"

namespace promptpg {

namespace {

struct Confusion {
  std::size_t num_classes;
  std::vector<std::size_t> cells;  // row = label, col = prediction
  std::size_t total = 0;

  Confusion(std::span<const std::size_t> predictions,
            std::span<const std::size_t> labels, std::size_t num_classes)
      : num_classes(num_classes), cells(num_classes * num_classes, 0) {
    if (predictions.size() != labels.size())
      throw InvalidInput("metrics: prediction/label length mismatch");
    if (predictions.empty()) throw InvalidInput("metrics: empty inputs");
    if (num_classes < 2) throw InvalidInput("metrics: need >= 2 classes");
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i] >= num_classes || labels[i] >= num_classes)
        throw InvalidInput("metrics: class index out of range");
      ++cells[labels[i] * num_classes + predictions[i]];
      ++total;
    }
  }

  std::size_t at(std::size_t label, std::size_t pred) const {
    return cells[label * num_classes + pred];
  }

  double class_f1(std::size_t c) const {
    std::size_t tp = at(c, c);
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (k == c) continue;
      fp += at(k, c);
      fn += at(c, k);
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
  }

  double mcc() const {
    // Multiclass correlation coefficient from the confusion matrix.
    double trace = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k)
      trace += static_cast<double>(at(k, k));
    const double n = static_cast<double>(total);
    double sum_lp = 0.0;  // sum over k of label_count_k * pred_count_k
    double sum_ll = 0.0;
    double sum_pp = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      double label_k = 0.0;
      double pred_k = 0.0;
      for (std::size_t j = 0; j < num_classes; ++j) {
        label_k += static_cast<double>(at(k, j));
        pred_k += static_cast<double>(at(j, k));
      }
      sum_lp += label_k * pred_k;
      sum_ll += label_k * label_k;
      sum_pp += pred_k * pred_k;
    }
    const double cov = trace * n - sum_lp;
    const double denom =
        std::sqrt(n * n - sum_pp) * std::sqrt(n * n - sum_ll);
    if (denom == 0.0) return 0.0;
    return cov / denom;
  }
};

}  // namespace

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::accuracy:
      return "accuracy";
    case Metric::f1:
      return "f1";
    case Metric::macro_f1:
      return "macro_f1";
    case Metric::mcc:
      return "mcc";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::accuracy, Metric::f1, Metric::macro_f1, Metric::mcc})
    if (name == metric_name(m)) return m;
  throw ConfigError("unknown metric: " + name);
}

double compute_metric(Metric metric, std::span<const std::size_t> predictions,
                      std::span<const std::size_t> labels,
                      std::size_t num_classes) {
  const Confusion c(predictions, labels, num_classes);
  switch (metric) {
    case Metric::accuracy: {
      std::size_t hit = 0;
      for (std::size_t k = 0; k < num_classes; ++k) hit += c.at(k, k);
      return static_cast<double>(hit) / static_cast<double>(c.total);
    }
    case Metric::f1:
      if (num_classes != 2)
        throw InvalidInput("metrics: f1 requires exactly 2 classes");
      return c.class_f1(1);
    case Metric::macro_f1: {
      double sum = 0.0;
      for (std::size_t k = 0; k < num_classes; ++k) sum += c.class_f1(k);
      return sum / static_cast<double>(num_classes);
    }
    case Metric::mcc:
      return c.mcc();
  }
  throw InvalidInput("metrics: unknown metric");
}

double accuracy(std::span<const std::size_t> predictions,
                std::span<const std::size_t> labels) {
  if (predictions.size() != labels.size())
    throw InvalidInput("metrics: prediction/label length mismatch");
  if (predictions.empty()) throw InvalidInput("metrics: empty inputs");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

}  // namespace promptpg
