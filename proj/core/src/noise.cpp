#include "pgptycho/noise.hpp"

#include <cmath>
#include <numbers>

namespace pgptycho {

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5047u};
  return Rng(seq);
}

NoiseModel NoiseModel::uniform(const Shape& shape, double pitch, double sigma, double gain_inv,
                               double black_level, std::uint64_t seed) {
  if (sigma < 0.0) throw DomainError("readout sigma must be non-negative");
  NoiseModel model{RealField(shape, pitch, sigma * sigma), gain_inv, black_level, seed};
  model.validate();
  return model;
}

void NoiseModel::validate() const {
  for (double v : variance) {
    if (v < 0.0 || std::isnan(v)) throw DomainError("readout variance must be non-negative");
  }
  if (!(gain_inv > 0.0)) throw DomainError("inverse gain must be positive");
  if (black_level < 0.0) throw DomainError("black level must be non-negative");
}

namespace {

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

double poisson_inversion(double mean, Rng& rng) {
  const double limit = std::exp(-mean);
  double k = 0.0;
  double prod = uniform01(rng);
  while (prod > limit) {
    prod *= uniform01(rng);
    k += 1.0;
  }
  return k;
}

// Hormann's transformed rejection with squeeze.
double poisson_ptrs(double mean, Rng& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return k;
    }
  }
}

}  // namespace

double sample_poisson(double mean, Rng& rng) {
  if (mean < 0.0 || std::isnan(mean)) throw DomainError("Poisson mean must be non-negative");
  if (mean == 0.0) return 0.0;
  return mean < 10.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

RealField sample_frame(const RealField& intensity, const NoiseModel& model, Rng& rng) {
  require_same_shape(intensity.shape(), model.variance.shape(), "sample_frame");
  std::normal_distribution<double> normal(0.0, 1.0);
  RealField out(intensity.shape(), intensity.pitch());
  for (std::size_t k = 0; k < intensity.size(); ++k) {
    const double i = intensity[k];
    if (i < 0.0 || std::isnan(i)) {
      throw DomainError("intensity must be non-negative (pixel " + std::to_string(k) + ")");
    }
    const double shot = sample_poisson(i, rng);
    const double sigma = std::sqrt(model.variance[k]);
    const double read = sigma > 0.0 ? sigma * normal(rng) : 0.0;
    out[k] = shot + read + model.black_level;
  }
  return out;
}

std::vector<RealField> sample_dark_stack(const NoiseModel& model, std::size_t count) {
  const RealField dark(model.variance.shape(), model.variance.pitch(), 0.0);
  std::vector<RealField> stack;
  stack.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = stream_rng(model.seed, kDarkStreamBase + i);
    stack.push_back(sample_frame(dark, model, rng));
  }
  return stack;
}

RealField mean_frame(const std::vector<RealField>& stack) {
  if (stack.empty()) throw ArgumentError("mean_frame needs at least one frame");
  RealField out(stack.front().shape(), stack.front().pitch(), 0.0);
  for (const auto& frame : stack) {
    require_same_shape(frame.shape(), out.shape(), "mean_frame");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += frame[k];
  }
  const double n = static_cast<double>(stack.size());
  for (auto& v : out) v /= n;
  return out;
}

RealField preprocess(const RealField& raw, const RealField& dark_mean, double gain_inv) {
  require_same_shape(raw.shape(), dark_mean.shape(), "preprocess");
  if (!(gain_inv > 0.0)) throw DomainError("inverse gain must be positive");
  RealField out(raw.shape(), raw.pitch());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = (raw[k] - dark_mean[k]) * gain_inv;
  return out;
}

RealField estimate_variance_map(const std::vector<RealField>& dark_stack, double gain_inv) {
  if (dark_stack.size() < 2) {
    throw ArgumentError("variance estimation needs at least 2 dark frames, got " +
                        std::to_string(dark_stack.size()));
  }
  const RealField mean = mean_frame(dark_stack);
  RealField out(mean.shape(), mean.pitch(), 0.0);
  for (const auto& frame : dark_stack) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = frame[k] - mean[k];
      out[k] += d * d;
    }
  }
  const double scale = gain_inv * gain_inv / static_cast<double>(dark_stack.size() - 1);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace pgptycho
