#include "pgptycho/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "pgptycho/forward.hpp"
#include "pgptycho/metrics.hpp"

namespace pgptycho {

double OptimizerSchedule::learning_rate(int epoch) const {
  return lr0 * std::exp(-decay * static_cast<double>(epoch));
}

void OptimizerSchedule::validate() const {
  if (!(lr0 > 0.0)) throw ArgumentError("lr0 must be positive");
  if (decay < 0.0) throw ArgumentError("lr decay must be non-negative");
  if (epochs < 0) throw ArgumentError("epochs must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("ADAM betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ArgumentError("ADAM epsilon must be positive");
}

std::string to_string(ReconstructionMode mode) {
  return mode == ReconstructionMode::ObjectOnly ? "object_only" : "joint_probe_object";
}

ReconstructionMode parse_reconstruction_mode(const std::string& name) {
  if (name == "object_only") return ReconstructionMode::ObjectOnly;
  if (name == "joint_probe_object") return ReconstructionMode::JointProbeObject;
  throw ConfigError("unknown reconstruction mode '" + name +
                    "' (expected object_only or joint_probe_object)");
}

std::size_t ReconstructionReport::dominance_warning_count() const {
  return static_cast<std::size_t>(
      std::count_if(epochs.begin(), epochs.end(), [](const auto& e) { return e.dominance_warning; }));
}

void adam_step(ComplexField& params, const ComplexField& gradient, AdamState& state, double lr,
               const OptimizerSchedule& constants) {
  require_same_shape(params.shape(), gradient.shape(), "adam_step");
  if (state.first.size() != params.size() || state.second.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state size does not match parameters");
  }
  const double b1 = constants.beta1;
  const double b2 = constants.beta2;
  ++state.step;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double eps = constants.adam_epsilon;

  auto update = [&](double g, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    return lr * m_hat / (std::sqrt(v_hat) + eps);
  };

  for (std::size_t k = 0; k < params.size(); ++k) {
    double m_re = state.first[k].real(), m_im = state.first[k].imag();
    double v_re = state.second[k].real(), v_im = state.second[k].imag();
    const double d_re = update(gradient[k].real(), m_re, v_re);
    const double d_im = update(gradient[k].imag(), m_im, v_im);
    state.first[k] = {m_re, m_im};
    state.second[k] = {v_re, v_im};
    params[k] -= complex_t{d_re, d_im};
  }
}

namespace {

struct PositionResult {
  double value = 0.0;
  std::optional<ComplexField> object_patch;
  std::optional<ComplexField> probe;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is handled
// by exactly one worker and writes only its own slot.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

void validate_against_dataset(const DiffractionDataset& dataset, const ComplexField& object,
                              const ComplexField& probe) {
  require_same_shape(object.shape(), dataset.object_shape, "object vs dataset");
  require_same_shape(probe.shape(), dataset.frame_shape(), "probe vs dataset frames");
}

}  // namespace

Objective evaluate_objective(const DiffractionDataset& dataset, const ComplexField& object,
                             const ComplexField& probe, const ReconstructionConfig& config,
                             bool with_probe) {
  return evaluate_objective(dataset, object, probe, config, with_probe, 0,
                            dataset.positions.size());
}

Objective evaluate_objective(const DiffractionDataset& dataset, const ComplexField& object,
                             const ComplexField& probe, const ReconstructionConfig& config,
                             bool with_probe, std::size_t first, std::size_t count) {
  validate_against_dataset(dataset, object, probe);
  if (first > dataset.positions.size() || count > dataset.positions.size() - first) {
    throw RangeError("evaluate_objective: position range out of bounds");
  }
  const Propagator propagator = build_propagator(dataset.propagator);
  const RealField* variance = dataset.variance ? &*dataset.variance : nullptr;
  if (config.loss.variant == LossVariant::Mixed && variance == nullptr) {
    throw ConfigError("mixed loss requires a readout variance map");
  }

  std::vector<PositionResult> results(count);
  parallel_for(count, config.threads, [&](std::size_t j) {
    const std::size_t i = first + j;
    const auto pass = forward_pass(object, probe, dataset.positions[i], propagator);
    auto loss = evaluate_loss(config.loss, dataset.frames[i], pass.intensity, variance);
    const std::size_t i_out = j;
    auto grads = backward_pass(pass, probe, loss.dL_dI, propagator, with_probe);
    results[i_out].value = loss.value;
    results[i_out].object_patch = std::move(grads.object_patch);
    results[i_out].probe = std::move(grads.probe);
  });

  // Fixed-order reduction keeps the result independent of the thread count.
  Objective out{0.0, 0.0, 0.0, 0.0, ComplexField(object.shape(), object.pitch()), std::nullopt};
  if (with_probe) out.probe_gradient = ComplexField(probe.shape(), probe.pitch());
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.fidelity += results[i].value;
    accumulate_region_into(out.object_gradient, dataset.positions[first + i],
                           *results[i].object_patch);
    if (with_probe) {
      auto& pg = *out.probe_gradient;
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += (*results[i].probe)[k];
    }
  }
  // Wirtinger -> real-coordinate gradient.
  for (auto& z : out.object_gradient) z *= 2.0;
  if (with_probe) {
    for (auto& z : *out.probe_gradient) z *= 2.0;
  }

  const auto& regs = config.regs;
  const double share = dataset.positions.empty()
                           ? 1.0
                           : static_cast<double>(count) /
                                 static_cast<double>(dataset.positions.size());
  if (regs.beta > 0.0) {
    auto term = reg_object_amplitude(object, regs.beta, regs.l1_epsilon);
    out.reg_object_amplitude = term.value;
    for (std::size_t k = 0; k < object.size(); ++k) {
      out.object_gradient[k] += share * term.gradient[k];
    }
  }
  if (regs.gamma > 0.0) {
    auto term = reg_object_fourier(object, regs.gamma, regs.l1_epsilon);
    out.reg_object_fourier = term.value;
    for (std::size_t k = 0; k < object.size(); ++k) {
      out.object_gradient[k] += share * term.gradient[k];
    }
  }
  // The support term only matters when the probe is a free parameter.
  if (config.mode == ReconstructionMode::JointProbeObject && regs.alpha > 0.0) {
    auto term = reg_probe_support(probe, regs.support_radius, regs.alpha, regs.l1_epsilon);
    out.reg_probe_support = term.value;
    if (with_probe) {
      auto& pg = *out.probe_gradient;
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += share * term.gradient[k];
    }
  }
  return out;
}

ComplexField disc_probe(const Shape& shape, double pitch, double radius, double budget) {
  const auto mask = disc_mask(shape, pitch, radius);
  ComplexField probe(shape, pitch);
  for (std::size_t k = 0; k < probe.size(); ++k) probe[k] = mask[k] ? 1.0 : 0.0;
  if (photon_budget(probe) == 0.0) {
    throw ArgumentError("probe disc radius is smaller than one pixel");
  }
  return rescale_to_budget(probe, budget);
}

double outside_support_fraction(const ComplexField& probe, double radius) {
  const auto inside = disc_mask(probe.shape(), probe.pitch(), radius);
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double e = std::norm(probe[k]);
    total += e;
    if (!inside[k]) outside += e;
  }
  if (total == 0.0) throw DomainError("probe carries no energy");
  return outside / total;
}

namespace {

double mean_frame_energy(const DiffractionDataset& dataset) {
  double sum = 0.0;
  for (const auto& frame : dataset.frames) {
    for (double v : frame) sum += std::max(v, 0.0);
  }
  return sum / static_cast<double>(dataset.frames.size());
}

double rms_amplitude(const ComplexField& probe) {
  double peak = 0.0;
  for (const auto& z : probe) peak = std::max(peak, std::norm(z));
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& z : probe) {
    if (std::norm(z) >= 0.1 * peak) {
      sum += std::norm(z);
      ++n;
    }
  }
  return n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 1.0;
}

}  // namespace

ReconstructionReport reconstruct(const DiffractionDataset& dataset,
                                 const ReconstructionConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  dataset.validate();
  config.loss.validate();
  config.regs.validate();
  config.schedule.validate();

  const bool joint = config.mode == ReconstructionMode::JointProbeObject;
  if (!joint && !config.initial_probe) {
    throw ConfigError("object_only reconstruction requires a supplied probe");
  }

  ComplexField object = config.initial_object
                            ? *config.initial_object
                            : ComplexField(dataset.object_shape, dataset.propagator.pitch, 1.0);
  ComplexField probe = config.initial_probe
                           ? *config.initial_probe
                           : disc_probe(dataset.frame_shape(), dataset.propagator.pitch,
                                        config.initial_probe_radius, mean_frame_energy(dataset));
  validate_against_dataset(dataset, object, probe);

  const double probe_scale = config.probe_lr_scale > 0.0 ? config.probe_lr_scale
                                                          : rms_amplitude(probe);
  AdamState object_state(object.size());
  AdamState probe_state(joint ? probe.size() : 0);

  ReconstructionReport report{object, std::nullopt, {}, 0.0, 0.0, 0.0, {}};
  report.epochs.reserve(static_cast<std::size_t>(config.schedule.epochs));

  const std::size_t n_positions = dataset.positions.size();
  const std::size_t batch = config.batch_size == 0 ? n_positions
                                                   : std::min(config.batch_size, n_positions);
  for (int epoch = 0; epoch < config.schedule.epochs; ++epoch) {
    const double lr = config.schedule.learning_rate(epoch);
    EpochRecord record{epoch, lr, 0.0, 0.0, 0.0, 0.0, 0.0, false};
    for (std::size_t first = 0; first < n_positions; first += batch) {
      const std::size_t count = std::min(batch, n_positions - first);
      Objective objective =
          evaluate_objective(dataset, object, probe, config, joint, first, count);
      if (!std::isfinite(objective.total())) throw DivergenceError(epoch, lr);
      record.fidelity += objective.fidelity;
      if (first == 0) {
        record.reg_probe_support = objective.reg_probe_support;
        record.reg_object_amplitude = objective.reg_object_amplitude;
        record.reg_object_fourier = objective.reg_object_fourier;
      }
      adam_step(object, objective.object_gradient, object_state, lr, config.schedule);
      if (joint) {
        adam_step(probe, *objective.probe_gradient, probe_state, lr * probe_scale,
                  config.schedule);
      }
    }
    const double regs[] = {record.reg_probe_support, record.reg_object_amplitude,
                           record.reg_object_fourier};
    record.dominance_ratio = fidelity_dominance_ratio(record.fidelity, regs);
    record.dominance_warning = dominance_warning(record.dominance_ratio);
    report.epochs.push_back(record);
  }

  const Objective final_objective = evaluate_objective(dataset, object, probe, config, false);
  if (!std::isfinite(final_objective.total())) {
    throw DivergenceError(config.schedule.epochs,
                          config.schedule.learning_rate(config.schedule.epochs));
  }
  report.final_fidelity = final_objective.fidelity;
  report.final_regularization = final_objective.regularization();
  if (const auto n = report.dominance_warning_count(); n > 0) {
    report.warnings.push_back(std::to_string(n) + " epoch(s) with fidelity/regularizer ratio below " +
                              std::to_string(static_cast<int>(kDominanceThreshold)));
  }
  report.object = std::move(object);
  if (joint) report.probe = std::move(probe);
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             started)
                       .count();
  return report;
}

CalibrationResult calibrate_probe(const DiffractionDataset& dataset,
                                  const ReconstructionConfig& config) {
  if (config.mode != ReconstructionMode::JointProbeObject) {
    throw ConfigError("probe calibration requires joint_probe_object mode");
  }
  auto report = reconstruct(dataset, config);
  ComplexField probe = *report.probe;
  const double outside = outside_support_fraction(probe, config.regs.support_radius);
  CalibrationResult result{std::move(probe), std::move(report), outside,
                           outside > kMaxOutsideSupportFraction};
  if (result.support_warning) {
    result.report.warnings.push_back("probe energy outside the support disc is " +
                                     std::to_string(100.0 * outside) + "% (limit 5%)");
  }
  return result;
}

}  // namespace pgptycho
