#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emosid/errors.hpp"

namespace emosid {

/// Row-major observation sequence: one row per frame (or segment), fixed
/// dimensionality. The shared currency between the frontend, the prosody
/// extractor and the HMM engine.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }

  void push_row(std::span<const double> values) {
    if (values.size() != dim_)
      throw DimensionMismatch("expected row of dim " + std::to_string(dim_) +
                              ", got " + std::to_string(values.size()));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * dim_); }

  const std::vector<double> &data() const { return data_; }

  friend bool operator==(const FeatureMatrix &, const FeatureMatrix &) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Per-frame 16-dim MFCC+delta vectors: the acoustic observation sequence.
using FeatureSequence = FeatureMatrix;

}  // namespace emosid
