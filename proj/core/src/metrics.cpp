#include "pgptycho/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pgptycho/forward.hpp"

namespace pgptycho {

std::size_t EvalRegion::count(std::size_t total) const {
  if (!mask) return total;
  return static_cast<std::size_t>(std::count(mask->begin(), mask->end(), std::uint8_t{1}));
}

double correlation(const ComplexField& truth, const ComplexField& estimate,
                   const EvalRegion& region) {
  require_same_shape(truth.shape(), estimate.shape(), "correlation");
  if (region.mask && region.mask->size() != truth.size()) {
    throw DimensionError("correlation: mask size " + std::to_string(region.mask->size()) +
                         " does not match field size " + std::to_string(truth.size()));
  }
  complex_t dot{};
  double norm_truth = 0.0;
  double norm_estimate = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (region.mask && !(*region.mask)[k]) continue;
    dot += std::conj(truth[k]) * estimate[k];
    norm_truth += std::norm(truth[k]);
    norm_estimate += std::norm(estimate[k]);
  }
  if (norm_truth == 0.0 || norm_estimate == 0.0) {
    throw DomainError("correlation undefined for a field that is zero on the region");
  }
  return std::min(1.0, std::abs(dot) / std::sqrt(norm_truth * norm_estimate));
}

ComplexField align_global_phase(const ComplexField& estimate, const ComplexField& truth) {
  const complex_t dot = inner_product(truth, estimate);
  ComplexField out = estimate;
  if (std::abs(dot) == 0.0) return out;
  const complex_t rotation = std::conj(dot) / std::abs(dot);
  for (auto& z : out) z *= rotation;
  return out;
}

EvalRegion illuminated_region(const Shape& object, const ComplexField& probe,
                              const std::vector<PixelOffset>& positions, double fraction) {
  validate_positions(object, probe.shape(), positions);
  double peak = 0.0;
  for (const auto& z : probe) peak = std::max(peak, std::norm(z));
  std::vector<std::uint8_t> mask(object.size(), 0);
  const double threshold = fraction * peak;
  for (const auto& pos : positions) {
    for (std::size_t r = 0; r < probe.height(); ++r) {
      for (std::size_t c = 0; c < probe.width(); ++c) {
        if (peak > 0.0 && std::norm(probe(r, c)) >= threshold) {
          const auto row = static_cast<std::size_t>(pos.row) + r;
          const auto col = static_cast<std::size_t>(pos.col) + c;
          mask[row * object.width + col] = 1;
        }
      }
    }
  }
  return EvalRegion{std::move(mask)};
}

double photon_budget(const ComplexField& probe) {
  double sum = 0.0;
  for (const auto& z : probe) sum += std::norm(z);
  return sum;
}

ComplexField rescale_to_budget(const ComplexField& probe, double budget) {
  if (!(budget > 0.0)) throw ArgumentError("photon budget must be positive");
  const double current = photon_budget(probe);
  if (current == 0.0) throw DomainError("cannot rescale a zero probe to a photon budget");
  ComplexField out = probe;
  const double factor = std::sqrt(budget / current);
  for (auto& z : out) z *= factor;
  return out;
}

SnrSummary snr_summary(const std::vector<RealField>& predicted, const RealField& variance) {
  SnrSummary out;
  std::size_t n = 0;
  for (const auto& frame : predicted) {
    require_same_shape(frame.shape(), variance.shape(), "snr_summary");
    for (std::size_t k = 0; k < frame.size(); ++k) {
      const double i = frame[k];
      const double noise = std::sqrt(i + variance[k]);
      out.mean_signal += i;
      out.peak_signal = std::max(out.peak_signal, i);
      out.mean_snr += noise > 0.0 ? i / noise : 0.0;
      ++n;
    }
  }
  if (n > 0) {
    out.mean_signal /= static_cast<double>(n);
    out.mean_snr /= static_cast<double>(n);
  }
  return out;
}

}  // namespace pgptycho
