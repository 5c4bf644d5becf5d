#pragma once

#include <optional>
#include <vector>

#include "pgptycho/field.hpp"
#include "pgptycho/propagation.hpp"

namespace pgptycho {

/// Thin-object ptychography model: object, probe, integer scan offsets and the
/// object-to-detector propagator. Validated on construction.
class Scenario {
 public:
  Scenario(ComplexField object, ComplexField probe, std::vector<PixelOffset> positions,
           const PropagatorSpec& propagator);

  const ComplexField& object() const noexcept { return object_; }
  const ComplexField& probe() const noexcept { return probe_; }
  const std::vector<PixelOffset>& positions() const noexcept { return positions_; }
  const Propagator& propagator() const noexcept { return propagator_; }
  std::size_t position_count() const noexcept { return positions_.size(); }
  const PixelOffset& position(std::size_t index) const;

  Scenario with_object(ComplexField object) const;
  Scenario with_probe(ComplexField probe) const;

 private:
  ComplexField object_;
  ComplexField probe_;
  std::vector<PixelOffset> positions_;
  Propagator propagator_;
};

// Throws RangeError naming the first position whose probe window leaves the object.
void validate_positions(const Shape& object, const Shape& probe,
                        const std::vector<PixelOffset>& positions);

// Intermediate quantities of one forward pass, kept for the adjoint.
struct ForwardPass {
  ComplexField object_patch;  // extract_region(O, position)
  ComplexField detector;      // E = propagate(P * O_patch)
  RealField intensity;        // |E|^2
};

ForwardPass forward_pass(const ComplexField& object, const ComplexField& probe,
                         PixelOffset position, const Propagator& propagator);

/// Wirtinger gradients g with the convention (dL/dRe, dL/dIm) = (2 Re g, 2 Im g).
struct PatchGradients {
  ComplexField object_patch;           // conj(P) * A^H(dL_dI * E), probe-window sized
  std::optional<ComplexField> probe;  // conj(O_patch) * A^H(dL_dI * E)
};

PatchGradients backward_pass(const ForwardPass& pass, const ComplexField& probe,
                             const RealField& dL_dI, const Propagator& propagator,
                             bool with_probe);

/// I = |propagate(P * extract_region(O, position))|^2.
RealField predict_intensity(const Scenario& scenario, std::size_t position_index);

/// Object gradient of a per-pixel loss with detector-plane derivative dL_dI,
/// scattered into object coordinates.
ComplexField gradient_object(const Scenario& scenario, std::size_t position_index,
                             const RealField& dL_dI);

ComplexField gradient_probe(const Scenario& scenario, std::size_t position_index,
                            const RealField& dL_dI);

}  // namespace pgptycho
