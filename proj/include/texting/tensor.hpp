#pragma once

#include <Eigen/Dense>
#include <vector>

#include "texting/util.hpp"

namespace texting {

template <class T>
using DenseMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using MapMat = Eigen::Map<DenseMat<T>>;

template <class T>
using CMapMat = Eigen::Map<const DenseMat<T>>;

template <class T>
using StridedMat = Eigen::Map<DenseMat<T>, 0, Eigen::OuterStride<>>;

template <class T>
using CStridedMat = Eigen::Map<const DenseMat<T>, 0, Eigen::OuterStride<>>;

// Dense batch-of-matrices tensor (B x rows x cols), row-major, zero-filled.
// Real nodes occupy the leading rows of each slab; padding stays zero.
template <class T>
class BatchTensor {
 public:
  BatchTensor() = default;
  BatchTensor(int batch, int rows, int cols)
      : batch_(batch), rows_(rows), cols_(cols),
        data_(size_t(batch) * rows * cols, T(0)) {}

  int batch() const { return batch_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T* slab_ptr(int b) { return data_.data() + size_t(b) * rows_ * cols_; }
  const T* slab_ptr(int b) const { return data_.data() + size_t(b) * rows_ * cols_; }

  MapMat<T> slab(int b) { return MapMat<T>(slab_ptr(b), rows_, cols_); }
  CMapMat<T> slab(int b) const { return CMapMat<T>(slab_ptr(b), rows_, cols_); }

  // Leading n rows of slab b (contiguous).
  MapMat<T> top(int b, int n) { return MapMat<T>(slab_ptr(b), n, cols_); }
  CMapMat<T> top(int b, int n) const { return CMapMat<T>(slab_ptr(b), n, cols_); }

  // Read-only views regardless of the tensor's constness (Eigen maps do not
  // convert between mutable and const element types).
  CMapMat<T> ctop(int b, int n) const { return CMapMat<T>(slab_ptr(b), n, cols_); }
  CStridedMat<T> cblock(int b, int r, int c) const {
    return CStridedMat<T>(slab_ptr(b), r, c, Eigen::OuterStride<>(cols_));
  }

  // Top-left r x c block of slab b (strided by the slab's column count).
  StridedMat<T> block(int b, int r, int c) {
    return StridedMat<T>(slab_ptr(b), r, c, Eigen::OuterStride<>(cols_));
  }
  CStridedMat<T> block(int b, int r, int c) const {
    return CStridedMat<T>(slab_ptr(b), r, c, Eigen::OuterStride<>(cols_));
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), T(0)); }

  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

 private:
  int batch_ = 0, rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

}  // namespace texting
