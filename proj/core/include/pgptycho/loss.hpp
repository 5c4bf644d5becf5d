#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgptycho/field.hpp"

namespace pgptycho {

enum class LossVariant { Poisson, Gaussian, Mixed };

std::string_view to_string(LossVariant variant);
LossVariant parse_loss_variant(std::string_view name);

struct LossKind {
  LossVariant variant = LossVariant::Mixed;
  // Force negative measured values to zero before evaluation. Always applied
  // for Poisson, whose square root needs X >= 0.
  bool zero_crop = false;
  // Guard for the Poisson gradient at I -> 0.
  double epsilon = 1e-12;

  bool crops() const noexcept { return zero_crop || variant == LossVariant::Poisson; }
  void validate() const;
};

/// Scalar data-fidelity value plus its per-pixel derivative w.r.t. the
/// predicted intensity.
struct LossResult {
  double value = 0.0;
  RealField dL_dI;
};

RealField zero_cropped(const RealField& measured);

// sum (sqrt(X) - sqrt(I))^2, X cropped at zero.
LossResult loss_poisson(const RealField& measured, const RealField& predicted,
                        double epsilon = 1e-12);
// sum (X - I)^2
LossResult loss_gaussian(const RealField& measured, const RealField& predicted);
// sum ln(I + s) + (X - I)^2 / (I + s), with s the per-pixel readout variance.
LossResult loss_mixed(const RealField& measured, const RealField& predicted,
                      const RealField& variance);

/// Dispatches on `kind`, applying zero-cropping first where requested.
/// `variance` is required for the mixed loss (ConfigError otherwise).
LossResult evaluate_loss(const LossKind& kind, const RealField& measured,
                         const RealField& predicted, const RealField* variance);

struct RegularizerWeights {
  double alpha = 0.0;             // probe support L1
  double beta = 1e-4;             // object amplitude L1
  double gamma = 1e-3;            // object Fourier-magnitude L1
  double support_radius = 1.5e-3;  // m
  double l1_epsilon = 1e-8;       // |z| ~ sqrt(|z|^2 + eps^2)

  void validate() const;
};

// Regularizer value and its gradient in real coordinates, packed as
// dR/dRe + i dR/dIm. This is twice the Wirtinger gradient used by the forward
// model.
struct RegularizerTerm {
  double value = 0.0;
  ComplexField gradient;
};

// Pixels within `radius` meters of the geometric window center.
std::vector<std::uint8_t> disc_mask(const Shape& shape, double pitch, double radius);

RegularizerTerm reg_probe_support(const ComplexField& probe, double radius, double alpha,
                                  double l1_epsilon = 1e-8);
RegularizerTerm reg_object_amplitude(const ComplexField& object, double beta,
                                     double l1_epsilon = 1e-8);
RegularizerTerm reg_object_fourier(const ComplexField& object, double gamma,
                                   double l1_epsilon = 1e-8);

inline constexpr double kDominanceThreshold = 100.0;

/// fidelity / sum(regularizers); +inf when the regularizers sum to zero.
double fidelity_dominance_ratio(double fidelity, std::span<const double> regularizers);
inline bool dominance_warning(double ratio) { return ratio < kDominanceThreshold; }

}  // namespace pgptycho
