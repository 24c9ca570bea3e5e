#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace promptpg {

enum class Metric { accuracy, f1, macro_f1, mcc };

const char* metric_name(Metric m);
Metric parse_metric(const std::string& name);

// Predictions and labels are class indices in [0, num_classes).
// f1 is the positive-class (index 1) F1 and requires num_classes == 2;
// mcc uses the multiclass generalization and is 0 when undefined.
double compute_metric(Metric metric, std::span<const std::size_t> predictions,
                      std::span<const std::size_t> labels,
                      std::size_t num_classes);

double accuracy(std::span<const std::size_t> predictions,
                std::span<const std::size_t> labels);

}  // namespace promptpg
