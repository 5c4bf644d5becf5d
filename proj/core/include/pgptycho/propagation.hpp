#pragma once

#include <memory>
#include <span>
#include <vector>

#include "pgptycho/field.hpp"

namespace pgptycho {

struct PropagatorSpec {
  double wavelength = 561e-9;  // m
  double distance = 37.7e-3;   // m, negative for back-propagation
  Shape shape;
  double pitch = 6.9e-6;  // m

  void validate() const;
};

/// Angular-spectrum free-space propagator.
///
/// Holds H(fx, fy) = exp(i 2 pi d sqrt(1/lambda^2 - fx^2 - fy^2)) sampled on the
/// DFT frequency grid, with evanescent samples set to exactly zero, so |H| is 0
/// or 1 everywhere. Immutable once built; safe to share across threads.
class Propagator {
 public:
  const PropagatorSpec& spec() const noexcept { return spec_; }
  std::span<const complex_t> transfer_function() const noexcept { return *transfer_; }
  // Number of frequency samples on the propagating band.
  std::size_t propagating_count() const noexcept { return propagating_; }

  ComplexField propagate(const ComplexField& field) const;
  ComplexField propagate_adjoint(const ComplexField& field) const;

  // Removes evanescent spectral content (projection onto the propagating band).
  ComplexField band_limit(const ComplexField& field) const;

 private:
  friend Propagator build_propagator(const PropagatorSpec& spec);
  Propagator(PropagatorSpec spec, std::shared_ptr<const std::vector<complex_t>> transfer,
             std::size_t propagating)
      : spec_(spec), transfer_(std::move(transfer)), propagating_(propagating) {}

  void check_input(const ComplexField& field) const;
  ComplexField apply(const ComplexField& field, bool conjugate) const;

  PropagatorSpec spec_;
  std::shared_ptr<const std::vector<complex_t>> transfer_;
  std::size_t propagating_ = 0;
};

// Transfer functions are cached per (shape, wavelength, distance, pitch).
Propagator build_propagator(const PropagatorSpec& spec);

// DFT sample frequency (cycles per meter) for index k of an n-point axis.
double dft_frequency(std::size_t k, std::size_t n, double pitch);

}  // namespace pgptycho
