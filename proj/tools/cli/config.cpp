#include "cli/config.hpp"

#include <string>

#include "cli/json_fields.hpp"

namespace pgptycho::cli {

ReconstructionConfig recon_config_from_json(const nlohmann::json& j) {
  ReconstructionConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError("reconstruction config must be a JSON object");

  std::string loss = std::string(to_string(c.loss.variant));
  read_field(j, "loss", loss);
  c.loss.variant = parse_loss_variant(loss);
  read_field(j, "zero_crop", c.loss.zero_crop);
  read_field(j, "loss_epsilon", c.loss.epsilon);

  std::string mode = to_string(c.mode);
  read_field(j, "mode", mode);
  c.mode = parse_reconstruction_mode(mode);
  read_field(j, "initial_probe_radius_m", c.initial_probe_radius);
  read_field(j, "probe_lr_scale", c.probe_lr_scale);
  read_field(j, "batch_size", c.batch_size);

  if (const auto it = j.find("regularizers"); it != j.end()) {
    read_field(*it, "alpha", c.regs.alpha);
    read_field(*it, "beta", c.regs.beta);
    read_field(*it, "gamma", c.regs.gamma);
    read_field(*it, "support_radius_m", c.regs.support_radius);
    read_field(*it, "l1_epsilon", c.regs.l1_epsilon);
  }
  if (const auto it = j.find("schedule"); it != j.end()) {
    read_field(*it, "lr0", c.schedule.lr0);
    read_field(*it, "decay_per_epoch", c.schedule.decay);
    read_field(*it, "epochs", c.schedule.epochs);
    read_field(*it, "adam_beta1", c.schedule.beta1);
    read_field(*it, "adam_beta2", c.schedule.beta2);
    read_field(*it, "adam_epsilon", c.schedule.adam_epsilon);
  }
  try {
    c.loss.validate();
    c.regs.validate();
    c.schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

nlohmann::json to_json(const ReconstructionConfig& c) {
  return {{"loss", std::string(to_string(c.loss.variant))},
          {"zero_crop", c.loss.zero_crop},
          {"loss_epsilon", c.loss.epsilon},
          {"mode", to_string(c.mode)},
          {"initial_probe_radius_m", c.initial_probe_radius},
          {"probe_lr_scale", c.probe_lr_scale},
          {"batch_size", c.batch_size},
          {"regularizers",
           {{"alpha", c.regs.alpha},
            {"beta", c.regs.beta},
            {"gamma", c.regs.gamma},
            {"support_radius_m", c.regs.support_radius},
            {"l1_epsilon", c.regs.l1_epsilon}}},
          {"schedule",
           {{"lr0", c.schedule.lr0},
            {"decay_per_epoch", c.schedule.decay},
            {"epochs", c.schedule.epochs},
            {"adam_beta1", c.schedule.beta1},
            {"adam_beta2", c.schedule.beta2},
            {"adam_epsilon", c.schedule.adam_epsilon}}}};
}

}  // namespace pgptycho::cli
