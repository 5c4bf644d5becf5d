#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pgptycho/field.hpp"

namespace pgptycho {

using Rng = std::mt19937_64;

// Independent, reproducible generator for (seed, stream). Frame i of a dataset
// uses stream i; dark frames use kDarkStreamBase + i.
Rng stream_rng(std::uint64_t seed, std::uint64_t stream);
inline constexpr std::uint64_t kDarkStreamBase = std::uint64_t{1} << 40;

/// Mixed Poisson-Gaussian camera model in photoelectron counts.
struct NoiseModel {
  RealField variance;        // per-pixel readout variance sigma_k^2
  double gain_inv = 1.0;     // electrons per ADU
  double black_level = 0.0;  // counts
  std::uint64_t seed = 0;

  static NoiseModel uniform(const Shape& shape, double pitch, double sigma, double gain_inv = 1.0,
                            double black_level = 0.0, std::uint64_t seed = 0);
  void validate() const;
};

// Inversion below a mean of 10, transformed rejection (PTRS) above.
double sample_poisson(double mean, Rng& rng);

/// X = Poisson(I) + Normal(0, sigma_k^2) + black_level, per pixel.
RealField sample_frame(const RealField& intensity, const NoiseModel& model, Rng& rng);

/// `count` illumination-free frames drawn from the model's dark streams.
std::vector<RealField> sample_dark_stack(const NoiseModel& model, std::size_t count);

RealField mean_frame(const std::vector<RealField>& stack);

/// (raw - dark_mean) * gain_inv, in photoelectron counts. Negative values are kept.
RealField preprocess(const RealField& raw, const RealField& dark_mean, double gain_inv = 1.0);

/// Per-pixel unbiased variance of a dark stack, scaled by gain_inv^2 into counts^2.
RealField estimate_variance_map(const std::vector<RealField>& dark_stack, double gain_inv = 1.0);

}  // namespace pgptycho
