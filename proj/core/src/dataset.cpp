#include "pgptycho/dataset.hpp"

#include "pgptycho/forward.hpp"

namespace pgptycho {

void DiffractionDataset::validate() const {
  propagator.validate();
  if (frames.empty()) throw DimensionError("dataset has no frames");
  if (frames.size() != positions.size()) {
    throw DimensionError("dataset has " + std::to_string(frames.size()) + " frames but " +
                         std::to_string(positions.size()) + " positions");
  }
  for (const auto& frame : frames) {
    require_same_shape(frame.shape(), propagator.shape, "dataset frame vs propagator");
  }
  if (variance) require_same_shape(variance->shape(), propagator.shape, "dataset variance map");
  validate_positions(object_shape, propagator.shape, positions);
}

}  // namespace pgptycho
