#include "pgptycho/propagation.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace pgptycho {

void PropagatorSpec::validate() const {
  if (!(wavelength > 0.0)) throw ArgumentError("propagator wavelength must be positive");
  if (!(pitch > 0.0)) throw ArgumentError("propagator pitch must be positive");
  if (!std::isfinite(distance)) throw ArgumentError("propagator distance must be finite");
  if (shape.height < 1 || shape.width < 1) {
    throw ArgumentError("propagator shape must be at least 1x1, got " + to_string(shape));
  }
}

double dft_frequency(std::size_t k, std::size_t n, double pitch) {
  const auto half = static_cast<std::ptrdiff_t>((n - 1) / 2);
  auto index = static_cast<std::ptrdiff_t>(k);
  if (index > half) index -= static_cast<std::ptrdiff_t>(n);
  return static_cast<double>(index) / (static_cast<double>(n) * pitch);
}

namespace {

struct CacheEntry {
  std::shared_ptr<const std::vector<complex_t>> transfer;
  std::size_t propagating;
};

using CacheKey = std::tuple<std::size_t, std::size_t, double, double, double>;

CacheEntry compute_transfer(const PropagatorSpec& spec) {
  const double inv_lambda_sq = 1.0 / (spec.wavelength * spec.wavelength);
  auto transfer = std::make_shared<std::vector<complex_t>>(spec.shape.size());
  std::size_t propagating = 0;
  for (std::size_t r = 0; r < spec.shape.height; ++r) {
    const double fy = dft_frequency(r, spec.shape.height, spec.pitch);
    for (std::size_t c = 0; c < spec.shape.width; ++c) {
      const double fx = dft_frequency(c, spec.shape.width, spec.pitch);
      const double arg = inv_lambda_sq - fx * fx - fy * fy;
      complex_t h{0.0, 0.0};
      if (arg >= 0.0) {
        const double phase = 2.0 * std::numbers::pi * spec.distance * std::sqrt(arg);
        h = std::polar(1.0, phase);
        ++propagating;
      }
      (*transfer)[r * spec.shape.width + c] = h;
    }
  }
  return {std::move(transfer), propagating};
}

}  // namespace

Propagator build_propagator(const PropagatorSpec& spec) {
  spec.validate();
  static std::mutex mutex;
  static std::map<CacheKey, CacheEntry> cache;
  const CacheKey key{spec.shape.height, spec.shape.width, spec.wavelength, spec.distance,
                     spec.pitch};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_transfer(spec)).first;
  return Propagator(spec, it->second.transfer, it->second.propagating);
}

void Propagator::check_input(const ComplexField& field) const {
  require_same_shape(field.shape(), spec_.shape, "propagate");
  if (std::abs(field.pitch() - spec_.pitch) > 1e-9 * spec_.pitch) {
    throw DimensionError("propagate: field pitch " + std::to_string(field.pitch()) +
                         " does not match propagator pitch " + std::to_string(spec_.pitch));
  }
}

ComplexField Propagator::apply(const ComplexField& field, bool conjugate) const {
  check_input(field);
  ComplexField spectrum = field;
  fft2_inplace(spectrum, -1);
  const auto& h = *transfer_;
  if (conjugate) {
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= std::conj(h[k]);
  } else {
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= h[k];
  }
  fft2_inplace(spectrum, +1);
  return spectrum;
}

ComplexField Propagator::propagate(const ComplexField& field) const {
  return apply(field, false);
}

ComplexField Propagator::propagate_adjoint(const ComplexField& field) const {
  return apply(field, true);
}

ComplexField Propagator::band_limit(const ComplexField& field) const {
  check_input(field);
  ComplexField spectrum = fft2(field);
  const auto& h = *transfer_;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (h[k] == complex_t{0.0, 0.0}) spectrum[k] = 0.0;
  }
  return ifft2(spectrum);
}

}  // namespace pgptycho
