#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgptycho/errors.hpp"

namespace pgptycho {

using complex_t = std::complex<double>;

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

// Top-left corner of a window, in pixels (row, column).
struct PixelOffset {
  std::ptrdiff_t row = 0;
  std::ptrdiff_t col = 0;

  friend bool operator==(const PixelOffset&, const PixelOffset&) = default;
};

/// Dense row-major 2-D array with a uniform square pixel pitch in meters.
///
/// Holds objects, probes, exit waves and propagated fields (complex) as well as
/// intensity frames and variance maps (real).
template <typename T>
class Field2D {
 public:
  using value_type = T;

  Field2D(Shape shape, double pitch, T fill = T{}) : shape_(shape), pitch_(pitch) {
    validate();
    data_.assign(shape_.size(), fill);
  }

  Field2D(Shape shape, double pitch, std::vector<T> data)
      : shape_(shape), pitch_(pitch), data_(std::move(data)) {
    validate();
    if (data_.size() != shape_.size()) {
      throw DimensionError("field data length " + std::to_string(data_.size()) +
                           " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }
  double pitch() const noexcept { return pitch_; }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * shape_.width + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * shape_.width + col];
  }
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

 private:
  void validate() const {
    if (shape_.height < 1 || shape_.width < 1) {
      throw ArgumentError("field shape must be at least 1x1, got " + to_string(shape_));
    }
    if (!(pitch_ > 0.0)) {
      throw ArgumentError("field pitch must be positive, got " + std::to_string(pitch_));
    }
  }

  Shape shape_;
  double pitch_;
  std::vector<T> data_;
};

using ComplexField = Field2D<complex_t>;
using RealField = Field2D<double>;

// Throws DimensionError naming `what` when the two shapes differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Copy of the `shape` window whose top-left corner sits at `top_left`.
/// Throws RangeError if any part of the window falls outside `field`.
ComplexField extract_region(const ComplexField& field, PixelOffset top_left, Shape shape);
RealField extract_region(const RealField& field, PixelOffset top_left, Shape shape);

/// Adjoint of extract_region: returns `target` with `patch` added at `top_left`.
ComplexField accumulate_region(ComplexField target, PixelOffset top_left,
                               const ComplexField& patch);

// In-place variant used by the solver's single-writer gradient buffer.
void accumulate_region_into(ComplexField& target, PixelOffset top_left,
                            const ComplexField& patch);

// <a, b> = sum conj(a) * b
complex_t inner_product(const ComplexField& a, const ComplexField& b);
double norm2(const ComplexField& field);
double norm2(const RealField& field);

RealField abs_squared(const ComplexField& field);

/// Unitary 2-D DFT: forward and inverse both scaled by 1/sqrt(H*W).
ComplexField fft2(const ComplexField& field);
ComplexField ifft2(const ComplexField& field);

// Scaled in place by 1/sqrt(H*W). `sign` is -1 for the forward transform.
void fft2_inplace(ComplexField& field, int sign);

}  // namespace pgptycho
