#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pgptycho/field.hpp"

namespace pgptycho {

// Optional pixel mask restricting evaluation; empty means the full frame.
struct EvalRegion {
  std::optional<std::vector<std::uint8_t>> mask;

  std::size_t count(std::size_t total) const;
};

/// C = |<O_gt, O>| / (|O_gt| |O|) over the region, in [0, 1]. Invariant to a
/// global phase and a positive scale of either field. Throws DomainError if
/// either field vanishes on the region.
double correlation(const ComplexField& truth, const ComplexField& estimate,
                   const EvalRegion& region = {});

// estimate * exp(-i arg <truth, estimate>): global phase aligned to `truth`.
ComplexField align_global_phase(const ComplexField& estimate, const ComplexField& truth);

/// Pixels where at least one scan position delivers an illumination intensity
/// of at least `fraction` of the probe's peak intensity.
EvalRegion illuminated_region(const Shape& object, const ComplexField& probe,
                              const std::vector<PixelOffset>& positions, double fraction = 0.1);

// Expected photons per exposure: sum |P|^2.
double photon_budget(const ComplexField& probe);
ComplexField rescale_to_budget(const ComplexField& probe, double budget);

struct SnrSummary {
  double mean_signal = 0.0;  // mean noise-free counts per pixel
  double peak_signal = 0.0;
  double mean_snr = 0.0;  // mean over pixels of I / sqrt(I + sigma^2)
};

SnrSummary snr_summary(const std::vector<RealField>& predicted, const RealField& variance);

}  // namespace pgptycho
