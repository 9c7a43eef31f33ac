#pragma once

#include <cstddef>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "summix/numcore/error.hpp"

namespace summix {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

inline constexpr std::size_t kTensorAlignment = 64;

// Every buffer starts on a cache line. Eigen picks its vectorised peeling from
// the base address, so a fixed alignment keeps reductions bit-reproducible
// from one allocation to the next.
template <typename T>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kTensorAlignment}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{kTensorAlignment}); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename Real>
using Storage = std::vector<Real, AlignedAllocator<Real>>;

// Dense row-major array.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(numel(shape_), fill) {}
  Tensor(Shape shape, Storage<Real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_size();
  }
  template <typename Alloc>
    requires(!std::is_same_v<Alloc, AlignedAllocator<Real>>)
  Tensor(Shape shape, const std::vector<Real, Alloc>& data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    check_size();
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> span() { return data_; }
  std::span<const Real> span() const { return data_; }
  Storage<Real>& vec() { return data_; }
  const Storage<Real>& vec() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real& operator()(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  const Real& operator()(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  Real& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const Real& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, Storage<Other>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_size() const {
    if (data_.size() != numel(shape_)) {
      throw DimensionError("Tensor", "data size", data_.size(),
                           "shape volume " + shape_string(shape_),
                           numel(shape_));
    }
  }

  Shape shape_;
  Storage<Real> data_;
};

}  // namespace summix
