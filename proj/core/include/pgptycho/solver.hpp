#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgptycho/dataset.hpp"
#include "pgptycho/field.hpp"
#include "pgptycho/loss.hpp"

namespace pgptycho {

struct OptimizerSchedule {
  double lr0 = 0.1;
  double decay = 0.03;  // per epoch: lr_{n+1} = lr_n * exp(-decay)
  int epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // lr0 * exp(-decay * n)
  double learning_rate(int epoch) const;
  void validate() const;
};

enum class ReconstructionMode { ObjectOnly, JointProbeObject };

std::string to_string(ReconstructionMode mode);
ReconstructionMode parse_reconstruction_mode(const std::string& name);

struct ReconstructionConfig {
  LossKind loss;
  RegularizerWeights regs;
  OptimizerSchedule schedule;
  ReconstructionMode mode = ReconstructionMode::ObjectOnly;

  // Unset: uniform amplitude 1, phase 0.
  std::optional<ComplexField> initial_object;
  // Required in object-only mode. Unset in joint mode: a centered disc of
  // `initial_probe_radius` with flat phase, scaled to the mean frame energy.
  std::optional<ComplexField> initial_probe;
  double initial_probe_radius = 0.75e-3;  // m

  // Probe parameters step in units of this amplitude; 0 picks the RMS amplitude
  // of the initial probe inside its support.
  double probe_lr_scale = 0.0;

  // Positions per ADAM step, taken in dataset order; 0 uses all positions.
  std::size_t batch_size = 1;

  unsigned threads = 1;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double fidelity = 0.0;
  double reg_probe_support = 0.0;
  double reg_object_amplitude = 0.0;
  double reg_object_fourier = 0.0;
  double dominance_ratio = 0.0;
  bool dominance_warning = false;
};

struct ReconstructionReport {
  ComplexField object;
  std::optional<ComplexField> probe;  // set in joint mode
  std::vector<EpochRecord> epochs;
  double final_fidelity = 0.0;  // after the last update
  double final_regularization = 0.0;
  double wall_ms = 0.0;
  std::vector<std::string> warnings;

  std::size_t dominance_warning_count() const;
};

/// Per-parameter first and second moments, stored as (re, im) pairs.
struct AdamState {
  std::vector<complex_t> first;
  std::vector<complex_t> second;
  long step = 0;

  explicit AdamState(std::size_t size = 0) : first(size), second(size) {}
};

/// One bias-corrected ADAM update applied independently to the real and
/// imaginary parts. `gradient` is packed in real coordinates (dL/dRe + i dL/dIm).
void adam_step(ComplexField& params, const ComplexField& gradient, AdamState& state, double lr,
               const OptimizerSchedule& constants);

/// Full data-fidelity plus regularizer objective at (object, probe).
struct Objective {
  double fidelity = 0.0;
  double reg_probe_support = 0.0;
  double reg_object_amplitude = 0.0;
  double reg_object_fourier = 0.0;
  ComplexField object_gradient;               // real coordinates
  std::optional<ComplexField> probe_gradient;  // real coordinates, joint mode

  double regularization() const {
    return reg_probe_support + reg_object_amplitude + reg_object_fourier;
  }
  double total() const { return fidelity + regularization(); }
};

Objective evaluate_objective(const DiffractionDataset& dataset, const ComplexField& object,
                             const ComplexField& probe, const ReconstructionConfig& config,
                             bool with_probe);

/// Objective restricted to positions [first, first + count). Regularizer values
/// are reported in full; their gradients are weighted by count / positions.
Objective evaluate_objective(const DiffractionDataset& dataset, const ComplexField& object,
                             const ComplexField& probe, const ReconstructionConfig& config,
                             bool with_probe, std::size_t first, std::size_t count);

/// ADAM descent with lr0 * exp(-decay * n) in epoch n. Each epoch visits every
/// position once, stepping after each batch of `batch_size` positions. The
/// epoch record sums the fidelity of each batch as it was evaluated.
/// Deterministic for a given dataset and config, independent of `threads`.
/// Throws DivergenceError on a non-finite loss.
ReconstructionReport reconstruct(const DiffractionDataset& dataset,
                                 const ReconstructionConfig& config);

// Disc of `radius` with flat phase on the probe grid, carrying `budget` photons.
ComplexField disc_probe(const Shape& shape, double pitch, double radius, double budget);

// Fraction of sum |P|^2 outside the centered disc of `radius`.
double outside_support_fraction(const ComplexField& probe, double radius);

inline constexpr double kMaxOutsideSupportFraction = 0.05;

struct CalibrationResult {
  ComplexField probe;
  ReconstructionReport report;
  double outside_fraction = 0.0;
  bool support_warning = false;  // outside_fraction exceeds 5%
};

/// High-SNR joint object/probe reconstruction returning the recovered probe.
/// Requires joint mode.
CalibrationResult calibrate_probe(const DiffractionDataset& dataset,
                                  const ReconstructionConfig& config);

}  // namespace pgptycho
