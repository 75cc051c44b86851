#pragma once

#include <string>
#include <vector>

#include "evidisc/matrix.hpp"

namespace evidisc {

/// n covariate vectors in R^d with class labels in {1..C}. `class_names`
/// keeps the original label spelling for each 1-based class index.
struct LabeledDataset {
  Matrix x;                              // n × d, row i = sample i
  std::vector<int> y;                    // 1-based labels
  int num_classes = 0;                   // C
  std::vector<std::string> class_names;  // size C

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }
};

inline void validate_dataset(const LabeledDataset& data) {
  if (data.size() == 0 || data.dim() == 0)
    throw std::invalid_argument("dataset: needs n >= 1 and d >= 1");
  if (data.x.rows() != data.size())
    throw std::invalid_argument("dataset: label/sample count mismatch");
  if (data.num_classes < 1) throw std::invalid_argument("dataset: needs C >= 1");
  for (std::size_t i = 0; i < data.y.size(); ++i)
    if (data.y[i] < 1 || data.y[i] > data.num_classes)
      throw std::invalid_argument("dataset: label out of range at row " + std::to_string(i));
}

inline std::vector<int> class_counts(const LabeledDataset& data) {
  std::vector<int> counts(data.num_classes, 0);
  for (int label : data.y) ++counts[label - 1];
  return counts;
}

/// Subset by row indices (order preserved); class set and names unchanged.
inline LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
  LabeledDataset out;
  out.x = Matrix(rows.size(), data.dim());
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = data.x.row(rows[i]);
    for (std::size_t j = 0; j < data.dim(); ++j) out.x(i, j) = src[j];
    out.y.push_back(data.y[rows[i]]);
  }
  out.num_classes = data.num_classes;
  out.class_names = data.class_names;
  return out;
}

}  // namespace evidisc
