#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/json_fields.hpp"

#include <cstdint>
#include <string>

namespace crowdnav::ppo {

struct PpoConfig {
  std::int64_t total_steps = 10'000'000;
  double lr = 4e-5;
  double clip_eps = 0.2;
  int epochs = 5;
  int minibatches = 2;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  int num_envs = 12;
  int segment_length = 30;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;
  /// "constant", or "linear" decay to zero over num_updates().
  std::string lr_schedule = "constant";

  bool operator==(const PpoConfig&) const = default;

  std::int64_t steps_per_update() const { return static_cast<std::int64_t>(num_envs) * segment_length; }
  std::int64_t num_updates() const { return total_steps / steps_per_update(); }

  /// Learning rate for the update that follows `updates_done` completed ones.
  double lr_at(std::int64_t updates_done) const {
    if (lr_schedule == "linear") return lr * (1.0 - static_cast<double>(updates_done) / static_cast<double>(num_updates()));
    return lr;
  }

  void validate() const {
    if (!(lr >= 0.0)) throw ConfigError("lr", "must be >= 0");
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps", "must be in (0, 1)");
    if (epochs < 1) throw ConfigError("epochs", "must be >= 1");
    if (minibatches < 1) throw ConfigError("minibatches", "must be >= 1");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda", "must be in [0, 1]");
    if (!(value_coef >= 0.0)) throw ConfigError("value_coef", "must be >= 0");
    if (!(entropy_coef >= 0.0)) throw ConfigError("entropy_coef", "must be >= 0");
    if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm", "must be > 0");
    if (num_envs < 1) throw ConfigError("num_envs", "must be >= 1");
    if (num_envs % minibatches != 0) throw ConfigError("minibatches", "must divide num_envs");
    if (segment_length < 1) throw ConfigError("segment_length", "must be >= 1");
    if (total_steps < steps_per_update()) throw ConfigError("total_steps", "must cover at least one update");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("adam_beta1", "must be in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("adam_beta2", "must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps", "must be > 0");
    if (lr_schedule != "constant" && lr_schedule != "linear")
      throw ConfigError("lr_schedule", "unknown value '" + lr_schedule + "' (allowed: constant, linear)");
  }
};

inline Json to_json(const PpoConfig& c) {
  return {{"total_steps", c.total_steps},   {"lr", c.lr},
          {"clip_eps", c.clip_eps},         {"epochs", c.epochs},
          {"minibatches", c.minibatches},   {"gae_lambda", c.gae_lambda},
          {"value_coef", c.value_coef},     {"entropy_coef", c.entropy_coef},
          {"max_grad_norm", c.max_grad_norm}, {"num_envs", c.num_envs},
          {"segment_length", c.segment_length}, {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},     {"adam_eps", c.adam_eps},
          {"lr_schedule", c.lr_schedule}};
}

inline void read_ppo(FieldReader r, PpoConfig& c) {
  r.read("total_steps", c.total_steps).read("lr", c.lr).read("clip_eps", c.clip_eps).read("epochs", c.epochs);
  r.read("minibatches", c.minibatches).read("gae_lambda", c.gae_lambda).read("value_coef", c.value_coef);
  r.read("entropy_coef", c.entropy_coef).read("max_grad_norm", c.max_grad_norm).read("num_envs", c.num_envs);
  r.read("segment_length", c.segment_length).read("adam_beta1", c.adam_beta1).read("adam_beta2", c.adam_beta2);
  r.read("adam_eps", c.adam_eps).read("lr_schedule", c.lr_schedule);
  r.reject_unknown();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    std::string what = e.what();
    what = what.substr(e.field().size() + 2);
    throw ConfigError(r.field_path(e.field()), what);
  }
}

}  // namespace crowdnav::ppo
