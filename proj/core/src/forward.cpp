#include "pgptycho/forward.hpp"

namespace pgptycho {

void validate_positions(const Shape& object, const Shape& probe,
                        const std::vector<PixelOffset>& positions) {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto& p = positions[i];
    if (p.row < 0 || p.col < 0 ||
        static_cast<std::size_t>(p.row) + probe.height > object.height ||
        static_cast<std::size_t>(p.col) + probe.width > object.width) {
      throw RangeError("scan position " + std::to_string(i) + " at (" + std::to_string(p.row) +
                       ", " + std::to_string(p.col) + ") places the " + to_string(probe) +
                       " probe outside the " + to_string(object) + " object");
    }
  }
}

Scenario::Scenario(ComplexField object, ComplexField probe, std::vector<PixelOffset> positions,
                   const PropagatorSpec& propagator)
    : object_(std::move(object)),
      probe_(std::move(probe)),
      positions_(std::move(positions)),
      propagator_(build_propagator(propagator)) {
  require_same_shape(probe_.shape(), propagator.shape, "scenario probe vs propagator");
  validate_positions(object_.shape(), probe_.shape(), positions_);
}

const PixelOffset& Scenario::position(std::size_t index) const {
  if (index >= positions_.size()) {
    throw RangeError("position index " + std::to_string(index) + " out of range (" +
                     std::to_string(positions_.size()) + " positions)");
  }
  return positions_[index];
}

Scenario Scenario::with_object(ComplexField object) const {
  return Scenario(std::move(object), probe_, positions_, propagator_.spec());
}

Scenario Scenario::with_probe(ComplexField probe) const {
  return Scenario(object_, std::move(probe), positions_, propagator_.spec());
}

ForwardPass forward_pass(const ComplexField& object, const ComplexField& probe,
                         PixelOffset position, const Propagator& propagator) {
  ComplexField patch = extract_region(object, position, probe.shape());
  ComplexField exit = probe;
  for (std::size_t k = 0; k < exit.size(); ++k) exit[k] *= patch[k];
  ComplexField detector = propagator.propagate(exit);
  RealField intensity = abs_squared(detector);
  return {std::move(patch), std::move(detector), std::move(intensity)};
}

PatchGradients backward_pass(const ForwardPass& pass, const ComplexField& probe,
                             const RealField& dL_dI, const Propagator& propagator,
                             bool with_probe) {
  require_same_shape(dL_dI.shape(), pass.detector.shape(), "dL_dI vs detector");
  ComplexField weighted = pass.detector;
  for (std::size_t k = 0; k < weighted.size(); ++k) weighted[k] *= dL_dI[k];
  ComplexField back = propagator.propagate_adjoint(weighted);

  PatchGradients out{back, std::nullopt};
  for (std::size_t k = 0; k < back.size(); ++k) out.object_patch[k] *= std::conj(probe[k]);
  if (with_probe) {
    ComplexField gp = std::move(back);
    for (std::size_t k = 0; k < gp.size(); ++k) gp[k] *= std::conj(pass.object_patch[k]);
    out.probe = std::move(gp);
  }
  return out;
}

RealField predict_intensity(const Scenario& scenario, std::size_t position_index) {
  const auto& pos = scenario.position(position_index);
  return forward_pass(scenario.object(), scenario.probe(), pos, scenario.propagator()).intensity;
}

ComplexField gradient_object(const Scenario& scenario, std::size_t position_index,
                             const RealField& dL_dI) {
  const auto& pos = scenario.position(position_index);
  const auto pass = forward_pass(scenario.object(), scenario.probe(), pos, scenario.propagator());
  auto grads = backward_pass(pass, scenario.probe(), dL_dI, scenario.propagator(), false);
  ComplexField full(scenario.object().shape(), scenario.object().pitch());
  accumulate_region_into(full, pos, grads.object_patch);
  return full;
}

ComplexField gradient_probe(const Scenario& scenario, std::size_t position_index,
                            const RealField& dL_dI) {
  const auto& pos = scenario.position(position_index);
  const auto pass = forward_pass(scenario.object(), scenario.probe(), pos, scenario.propagator());
  auto grads = backward_pass(pass, scenario.probe(), dL_dI, scenario.propagator(), true);
  return std::move(*grads.probe);
}

}  // namespace pgptycho
