#include "pgptycho/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pgptycho {

std::string_view to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::Poisson: return "poisson";
    case LossVariant::Gaussian: return "gaussian";
    case LossVariant::Mixed: return "mixed";
  }
  return "unknown";
}

LossVariant parse_loss_variant(std::string_view name) {
  if (name == "poisson") return LossVariant::Poisson;
  if (name == "gaussian") return LossVariant::Gaussian;
  if (name == "mixed") return LossVariant::Mixed;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected poisson, gaussian, mixed)");
}

void LossKind::validate() const {
  if (!(epsilon > 0.0)) throw ArgumentError("loss epsilon must be positive");
}

void RegularizerWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
    throw ArgumentError("regularizer weights must be non-negative");
  }
  if (!(l1_epsilon > 0.0)) throw ArgumentError("l1 smoothing epsilon must be positive");
}

namespace {

void require_non_negative(const RealField& predicted) {
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    if (predicted[k] < 0.0 || std::isnan(predicted[k])) {
      throw DomainError("predicted intensity must be non-negative (pixel " + std::to_string(k) +
                        " = " + std::to_string(predicted[k]) + ")");
    }
  }
}

double smooth_abs(complex_t z, double eps) { return std::sqrt(std::norm(z) + eps * eps); }

}  // namespace

RealField zero_cropped(const RealField& measured) {
  RealField out = measured;
  for (auto& v : out) v = std::max(v, 0.0);
  return out;
}

LossResult loss_poisson(const RealField& measured, const RealField& predicted, double epsilon) {
  require_same_shape(measured.shape(), predicted.shape(), "loss_poisson");
  require_non_negative(predicted);
  LossResult out{0.0, RealField(predicted.shape(), predicted.pitch())};
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double x = std::max(measured[k], 0.0);
    const double i = predicted[k];
    const double diff = std::sqrt(x) - std::sqrt(i);
    out.value += diff * diff;
    out.dL_dI[k] = 1.0 - std::sqrt(x / std::max(i, epsilon));
  }
  return out;
}

LossResult loss_gaussian(const RealField& measured, const RealField& predicted) {
  require_same_shape(measured.shape(), predicted.shape(), "loss_gaussian");
  LossResult out{0.0, RealField(predicted.shape(), predicted.pitch())};
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double r = measured[k] - predicted[k];
    out.value += r * r;
    out.dL_dI[k] = -2.0 * r;
  }
  return out;
}

LossResult loss_mixed(const RealField& measured, const RealField& predicted,
                      const RealField& variance) {
  require_same_shape(measured.shape(), predicted.shape(), "loss_mixed");
  require_same_shape(variance.shape(), predicted.shape(), "loss_mixed variance");
  require_non_negative(predicted);
  LossResult out{0.0, RealField(predicted.shape(), predicted.pitch())};
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double s = variance[k];
    if (!(s > 0.0)) {
      throw DomainError("readout variance must be positive (pixel " + std::to_string(k) + " = " +
                        std::to_string(s) + ")");
    }
    const double total = predicted[k] + s;
    const double r = measured[k] - predicted[k];
    const double ratio = r / total;
    out.value += std::log(total) + r * ratio;
    out.dL_dI[k] = 1.0 / total - 2.0 * ratio - ratio * ratio;
  }
  return out;
}

LossResult evaluate_loss(const LossKind& kind, const RealField& measured,
                         const RealField& predicted, const RealField* variance) {
  switch (kind.variant) {
    case LossVariant::Poisson:
      return loss_poisson(measured, predicted, kind.epsilon);
    case LossVariant::Gaussian:
      return kind.zero_crop ? loss_gaussian(zero_cropped(measured), predicted)
                            : loss_gaussian(measured, predicted);
    case LossVariant::Mixed:
      if (variance == nullptr) {
        throw ConfigError("mixed loss requires a readout variance map");
      }
      return kind.zero_crop ? loss_mixed(zero_cropped(measured), predicted, *variance)
                            : loss_mixed(measured, predicted, *variance);
  }
  throw ArgumentError("unknown loss variant");
}

std::vector<std::uint8_t> disc_mask(const Shape& shape, double pitch, double radius) {
  std::vector<std::uint8_t> mask(shape.size(), 0);
  const double cy = 0.5 * static_cast<double>(shape.height - 1);
  const double cx = 0.5 * static_cast<double>(shape.width - 1);
  for (std::size_t r = 0; r < shape.height; ++r) {
    for (std::size_t c = 0; c < shape.width; ++c) {
      const double dy = (static_cast<double>(r) - cy) * pitch;
      const double dx = (static_cast<double>(c) - cx) * pitch;
      mask[r * shape.width + c] = (dx * dx + dy * dy <= radius * radius) ? 1 : 0;
    }
  }
  return mask;
}

RegularizerTerm reg_probe_support(const ComplexField& probe, double radius, double alpha,
                                  double l1_epsilon) {
  if (!(radius > 0.0)) throw ArgumentError("support radius must be positive");
  const auto inside = disc_mask(probe.shape(), probe.pitch(), radius);
  RegularizerTerm out{0.0, ComplexField(probe.shape(), probe.pitch())};
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (inside[k]) continue;
    const double a = smooth_abs(probe[k], l1_epsilon);
    out.value += a;
    out.gradient[k] = alpha * probe[k] / a;
  }
  out.value *= alpha;
  return out;
}

RegularizerTerm reg_object_amplitude(const ComplexField& object, double beta,
                                     double l1_epsilon) {
  RegularizerTerm out{0.0, ComplexField(object.shape(), object.pitch())};
  for (std::size_t k = 0; k < object.size(); ++k) {
    const double a = smooth_abs(object[k], l1_epsilon);
    out.value += a;
    out.gradient[k] = beta * object[k] / a;
  }
  out.value *= beta;
  return out;
}

RegularizerTerm reg_object_fourier(const ComplexField& object, double gamma, double l1_epsilon) {
  ComplexField spectrum = fft2(object);
  double value = 0.0;
  for (auto& z : spectrum) {
    const double a = smooth_abs(z, l1_epsilon);
    value += a;
    z = gamma * z / a;
  }
  // Unitary FFT: the adjoint is the inverse transform.
  return {gamma * value, ifft2(spectrum)};
}

double fidelity_dominance_ratio(double fidelity, std::span<const double> regularizers) {
  double sum = 0.0;
  for (double r : regularizers) sum += r;
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  return fidelity / sum;
}

}  // namespace pgptycho
