#include "pgptycho/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pgptycho {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width);
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": shape " + to_string(a) + " does not match " +
                         to_string(b));
  }
}

namespace {

void check_window(const Shape& outer, PixelOffset top_left, const Shape& window) {
  const auto h = static_cast<std::ptrdiff_t>(outer.height);
  const auto w = static_cast<std::ptrdiff_t>(outer.width);
  const auto wh = static_cast<std::ptrdiff_t>(window.height);
  const auto ww = static_cast<std::ptrdiff_t>(window.width);
  if (top_left.row < 0 || top_left.row + wh > h) {
    throw RangeError("region row " + std::to_string(top_left.row) + " with height " +
                     std::to_string(wh) + " exceeds field height " + std::to_string(h));
  }
  if (top_left.col < 0 || top_left.col + ww > w) {
    throw RangeError("region column " + std::to_string(top_left.col) + " with width " +
                     std::to_string(ww) + " exceeds field width " + std::to_string(w));
  }
}

template <typename T>
Field2D<T> extract_impl(const Field2D<T>& field, PixelOffset top_left, Shape shape) {
  check_window(field.shape(), top_left, shape);
  Field2D<T> out(shape, field.pitch());
  const auto r0 = static_cast<std::size_t>(top_left.row);
  const auto c0 = static_cast<std::size_t>(top_left.col);
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      out(r, c) = field(r0 + r, c0 + c);
    }
  }
  return out;
}

// FFTW planning is not thread-safe; execution on fresh arrays is. Plans are
// created once per (shape, sign) with FFTW_UNALIGNED so any std::vector buffer
// can be passed to fftw_execute_dft.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(h * w);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), scratch.data(),
                                      scratch.data(), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

ComplexField extract_region(const ComplexField& field, PixelOffset top_left, Shape shape) {
  return extract_impl(field, top_left, shape);
}

RealField extract_region(const RealField& field, PixelOffset top_left, Shape shape) {
  return extract_impl(field, top_left, shape);
}

void accumulate_region_into(ComplexField& target, PixelOffset top_left,
                            const ComplexField& patch) {
  check_window(target.shape(), top_left, patch.shape());
  const auto r0 = static_cast<std::size_t>(top_left.row);
  const auto c0 = static_cast<std::size_t>(top_left.col);
  for (std::size_t r = 0; r < patch.height(); ++r) {
    for (std::size_t c = 0; c < patch.width(); ++c) {
      target(r0 + r, c0 + c) += patch(r, c);
    }
  }
}

ComplexField accumulate_region(ComplexField target, PixelOffset top_left,
                               const ComplexField& patch) {
  accumulate_region_into(target, top_left, patch);
  return target;
}

complex_t inner_product(const ComplexField& a, const ComplexField& b) {
  require_same_shape(a.shape(), b.shape(), "inner_product");
  complex_t sum{};
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::conj(a[k]) * b[k];
  return sum;
}

double norm2(const ComplexField& field) {
  double sum = 0.0;
  for (const auto& z : field) sum += std::norm(z);
  return std::sqrt(sum);
}

double norm2(const RealField& field) {
  double sum = 0.0;
  for (double v : field) sum += v * v;
  return std::sqrt(sum);
}

RealField abs_squared(const ComplexField& field) {
  RealField out(field.shape(), field.pitch());
  for (std::size_t k = 0; k < field.size(); ++k) out[k] = std::norm(field[k]);
  return out;
}

void fft2_inplace(ComplexField& field, int sign) {
  fftw_plan plan = plan_cache().get(field.height(), field.width(),
                                    sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* buffer = reinterpret_cast<fftw_complex*>(field.data().data());
  fftw_execute_dft(plan, buffer, buffer);
  const double scale = 1.0 / std::sqrt(static_cast<double>(field.size()));
  for (auto& z : field) z *= scale;
}

ComplexField fft2(const ComplexField& field) {
  ComplexField out = field;
  fft2_inplace(out, -1);
  return out;
}

ComplexField ifft2(const ComplexField& field) {
  ComplexField out = field;
  fft2_inplace(out, +1);
  return out;
}

}  // namespace pgptycho
