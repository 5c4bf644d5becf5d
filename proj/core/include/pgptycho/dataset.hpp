#pragma once

#include <optional>
#include <vector>

#include "pgptycho/field.hpp"
#include "pgptycho/propagation.hpp"

namespace pgptycho {

/// Measured diffraction frames ready for reconstruction.
///
/// Frames are background-subtracted and expressed in photoelectron counts, so
/// they may hold negative values. `variance` is the per-pixel readout variance
/// from dark calibration, required by the mixed loss.
struct DiffractionDataset {
  std::vector<RealField> frames;
  std::vector<PixelOffset> positions;
  std::optional<RealField> variance;
  PropagatorSpec propagator;
  Shape object_shape;

  // Acquisition metadata, informational once frames are preprocessed.
  double gain_inv = 1.0;
  double black_level = 0.0;

  const Shape& frame_shape() const { return propagator.shape; }
  void validate() const;
};

}  // namespace pgptycho
