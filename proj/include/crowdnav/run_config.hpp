#pragma once

// Composite config file: {"scenario": {...}, "network": {...}, "ppo": {...},
// "eval": {...}, "train": {...}}. Every section and key is optional.

#include "crowdnav/errors.hpp"
#include "crowdnav/json_fields.hpp"
#include "crowdnav/net/checkpoint.hpp"
#include "crowdnav/ppo/config.hpp"
#include "crowdnav/sim/config_io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace crowdnav {

struct EvalConfig {
  int n_episodes = 100;
  std::uint64_t seed_base = 1'000'000'000;
  bool operator==(const EvalConfig&) const = default;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  int checkpoint_every = 10;
  int metrics_window = 20;
  bool operator==(const TrainConfig&) const = default;
};

struct RunConfig {
  sim::ScenarioConfig scenario;
  net::NetworkDims network;
  ppo::PpoConfig ppo;
  EvalConfig eval;
  TrainConfig train;
  bool operator==(const RunConfig&) const = default;
};

inline Json to_json(const RunConfig& c) {
  return {{"scenario", sim::to_json(c.scenario)},
          {"network", net::dims_to_json(c.network)},
          {"ppo", ppo::to_json(c.ppo)},
          {"eval", {{"n_episodes", c.eval.n_episodes}, {"seed_base", c.eval.seed_base}}},
          {"train",
           {{"seed", c.train.seed},
            {"checkpoint_every", c.train.checkpoint_every},
            {"metrics_window", c.train.metrics_window}}}};
}

/// Overlays `j` onto `c` (defaults stay where keys are absent).
inline void read_run_config(const Json& j, RunConfig& c) {
  FieldReader root(j, "");
  sim::read_scenario(root.section("scenario"), c.scenario);
  FieldReader nr = root.section("network");
  {
    net::NetworkDims d = c.network;
    nr.read_enum("kind", d.kind, net::parse_network_kind, "ds_rnn, rnn_attn")
        .read("rnn_size", d.rnn_size)
        .read("attention_size", d.attention_size)
        .read("embed_size", d.embed_size);
    nr.reject_unknown();
    try {
      d.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(nr.field_path(e.field()), "must be >= 1");
    }
    c.network = d;
  }
  ppo::read_ppo(root.section("ppo"), c.ppo);

  FieldReader er = root.section("eval");
  er.read("n_episodes", c.eval.n_episodes).read("seed_base", c.eval.seed_base);
  er.reject_unknown();
  if (c.eval.n_episodes < 1) throw ConfigError(er.field_path("n_episodes"), "must be >= 1");

  FieldReader tr = root.section("train");
  tr.read("seed", c.train.seed).read("checkpoint_every", c.train.checkpoint_every);
  tr.read("metrics_window", c.train.metrics_window);
  tr.reject_unknown();
  if (c.train.checkpoint_every < 1) throw ConfigError(tr.field_path("checkpoint_every"), "must be >= 1");
  if (c.train.metrics_window < 1) throw ConfigError(tr.field_path("metrics_window"), "must be >= 1");
  root.reject_unknown();
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  read_run_config(j, c);
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace crowdnav
