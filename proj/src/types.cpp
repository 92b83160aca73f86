#include "sparselab/types.hpp"

#include <algorithm>

namespace sparselab {

bool Dictionary::columns_unit_to(double tol) const {
  for (Index j = 0; j < m(); ++j) {
    if (std::abs(entries.col(j).norm() - 1.0) > tol) return false;
  }
  return true;
}

SparseSignal SparseSignal::from_values(const Eigen::VectorXd& values) {
  SparseSignal s;
  s.values = values;
  s.support = support_of(values);
  return s;
}

SparseSignal SparseSignal::zeros(Index m) {
  SparseSignal s;
  s.values = Eigen::VectorXd::Zero(m);
  return s;
}

Index LabelVector::popcount() const {
  Index count = 0;
  for (auto b : bits) count += (b != 0);
  return count;
}

LabelVector labels_from_signal(const SparseSignal& x) {
  LabelVector labels;
  labels.bits.resize(static_cast<std::size_t>(x.dimension()), 0);
  for (Index i = 0; i < x.dimension(); ++i) {
    labels.bits[static_cast<std::size_t>(i)] = (x.values[i] != 0.0) ? 1 : 0;
  }
  return labels;
}

IndexSet support_of(const Eigen::VectorXd& values) {
  IndexSet support;
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) support.push_back(i);
  }
  return support;
}

bool same_support(const IndexSet& a, const IndexSet& b) { return a == b; }

}  // namespace sparselab
