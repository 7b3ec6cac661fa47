// crowdnav: train, eval, render, scenario.
// Exit codes: 0 ok, 1 user error, 2 internal error, 3 threshold not met.

#include "crowdnav/eval/render.hpp"
#include "crowdnav/eval/suites.hpp"
#include "crowdnav/ppo/trainer.hpp"
#include "crowdnav/run_config.hpp"
#include "crowdnav/sim/state_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace crowdnav;
namespace fs = std::filesystem;

namespace {

constexpr int kUserError = 1;
constexpr int kInternalError = 2;
constexpr int kThresholdFailed = 3;

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Relative run directories live under $CROWDNAV_RUN_ROOT when it is set.
fs::path resolve_run_dir(const fs::path& p) {
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("CROWDNAV_RUN_ROOT"); root && *root) return fs::path(root) / p;
  return p;
}

struct TrainArgs {
  std::string config;
  std::string run_dir;
  bool resume = false;
  std::int64_t resume_from = -1;
  std::optional<std::int64_t> total_steps;
  std::optional<double> lr;
  std::optional<std::string> lr_schedule;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_humans;
  std::optional<double> fov;
  std::optional<std::string> network;
  std::optional<int> checkpoint_every;
};

struct EvalArgs {
  std::string policy;
  std::string suite;
  std::string config;
  std::optional<int> n;
  std::optional<std::uint64_t> seed_base;
  std::string out;
  int trajectories = 0;
  std::optional<double> min_success;
  std::optional<double> max_collision;
  std::optional<double> max_timeout;
};

struct RenderArgs {
  std::string csv;
  std::string out;
  double fov = 360.0;
};

struct ScenarioArgs {
  std::string suite;
  std::string config;
  std::uint64_t seed = 0;
};

RunConfig load_config(const std::string& path) {
  RunConfig rc;
  if (!path.empty()) read_run_config(read_json_file(path), rc);
  return rc;
}

/// Flags win over the file; the merged config goes back through the same
/// validation a config file gets.
RunConfig merged_train_config(const TrainArgs& a) {
  Json j = to_json(load_config(a.config));
  if (a.total_steps) j["ppo"]["total_steps"] = *a.total_steps;
  if (a.lr) j["ppo"]["lr"] = *a.lr;
  if (a.lr_schedule) j["ppo"]["lr_schedule"] = *a.lr_schedule;
  if (a.seed) j["train"]["seed"] = *a.seed;
  if (a.n_humans) j["scenario"]["n_humans"] = *a.n_humans;
  if (a.fov) j["scenario"]["fov_deg"] = *a.fov;
  if (a.network) j["network"]["kind"] = *a.network;
  if (a.checkpoint_every) j["train"]["checkpoint_every"] = *a.checkpoint_every;
  return run_config_from_json(j);
}

int cmd_train(const TrainArgs& a) {
  if (a.resume) {
    if (a.run_dir.empty()) throw UserError("--resume needs --run-dir");
    const fs::path dir = resolve_run_dir(a.run_dir);
    ppo::Trainer t = ppo::Trainer::resume(dir, a.resume_from);
    std::cout << "resuming " << dir.string() << " at update " << t.update_idx() << '\n';
    t.run([](const ppo::MetricsRow& r) { std::cout << ppo::format_metrics_row(r) << '\n'; });
    return 0;
  }
  const RunConfig rc = merged_train_config(a);
  const fs::path dir = resolve_run_dir(a.run_dir.empty() ? "run-" + std::to_string(rc.train.seed) : a.run_dir);
  ppo::Trainer t(rc, dir);
  std::cout << "run " << dir.string() << ": " << rc.ppo.num_updates() << " updates\n" << ppo::kMetricsHeader << '\n';
  t.run([](const ppo::MetricsRow& r) { std::cout << ppo::format_metrics_row(r) << '\n'; });
  return 0;
}

/// Controller for a baseline name, a checkpoint file, or a run directory
/// (its latest checkpoint). Learned policies pick up the run's scenario as
/// the base the suite is layered on.
std::unique_ptr<eval::Controller> make_policy(const std::string& policy, const RunConfig& file_cfg,
                                             sim::ScenarioConfig& base) {
  if (auto b = eval::make_baseline(policy, file_cfg.scenario)) return b;

  fs::path path(policy);
  if (!fs::exists(path)) path = resolve_run_dir(policy);
  if (!fs::exists(path)) {
    std::string names;
    for (const auto& n : eval::baseline_names()) names += (names.empty() ? "" : ", ") + n;
    throw UserError("unknown policy '" + policy + "': not a checkpoint or run directory; baselines: " + names);
  }
  fs::path manifest;
  if (fs::is_directory(path)) {
    manifest = path / "manifest.json";
    if (!fs::exists(manifest)) throw UserError(path.string() + " has no manifest.json");
    const Json m = read_json_file(manifest);
    if (m.at("checkpoints").empty()) throw CheckpointError("manifest lists no checkpoints");
    path = path / (m.at("checkpoints").back().at("file").get<std::string>() + ".bin");
  } else if (fs::exists(path.parent_path().parent_path() / "manifest.json")) {
    manifest = path.parent_path().parent_path() / "manifest.json";
  }
  if (!manifest.empty()) base = run_config_from_json(read_json_file(manifest).at("config")).scenario;
  return eval::LearnedController::from_checkpoint(path);
}

int cmd_eval(const EvalArgs& a) {
  const RunConfig file_cfg = load_config(a.config);
  sim::ScenarioConfig base = file_cfg.scenario;
  std::unique_ptr<eval::Controller> ctrl = make_policy(a.policy, file_cfg, base);

  sim::ScenarioConfig scenario = base;
  std::string suite = a.suite;
  if (!suite.empty()) {
    auto s = eval::suite_config(suite, base);
    if (!s) {
      std::string names;
      for (const auto& n : eval::suite_names()) names += (names.empty() ? "" : ", ") + n;
      throw UserError("unknown suite '" + suite + "'; available: " + names);
    }
    scenario = *s;
  } else if (a.config.empty()) {
    throw UserError("eval needs --suite or --config");
  } else {
    suite = "custom";
  }

  const int n = a.n.value_or(file_cfg.eval.n_episodes);
  if (n < 1) throw UserError("--n must be >= 1");
  const std::uint64_t seed_base = a.seed_base.value_or(file_cfg.eval.seed_base);
  const eval::EvalReport r = eval::evaluate(*ctrl, scenario, n, seed_base, a.trajectories > 0);

  if (!a.out.empty()) {
    const fs::path out(a.out);
    fs::create_directories(out);
    Json summary = eval::report_summary_json(r, suite);
    summary["scenario"] = sim::to_json(scenario);
    summary["seed_base"] = seed_base;
    write_json_file(out / "summary.json", summary);
    std::ofstream csv(out / "episodes.csv", std::ios::trunc);
    eval::write_episode_csv(csv, r);
    for (int i = 0; i < std::min(a.trajectories, n); ++i) {
      const auto& e = r.episodes[static_cast<std::size_t>(i)];
      eval::export_trajectory(e, out / ("episode_" + std::to_string(e.seed)));
    }
  }
  std::cout << eval::table_row(r, suite) << '\n';

  bool ok = true;
  const auto check = [&](const char* what, bool pass, double value, double bound) {
    if (pass) return;
    std::cerr << "threshold failed: " << what << ' ' << value << " (bound " << bound << ")\n";
    ok = false;
  };
  if (a.min_success) check("success_rate", r.success_rate >= *a.min_success, r.success_rate, *a.min_success);
  if (a.max_collision) check("collision_rate", r.collision_rate <= *a.max_collision, r.collision_rate, *a.max_collision);
  if (a.max_timeout) check("timeout_rate", r.timeout_rate <= *a.max_timeout, r.timeout_rate, *a.max_timeout);
  return ok ? 0 : kThresholdFailed;
}

int cmd_render(const RenderArgs& a) {
  std::ifstream in(a.csv);
  if (!in) throw UserError("cannot open " + a.csv);
  const auto rows = sim::read_trajectory_csv(in);
  if (rows.empty()) throw UserError(a.csv + " has no rows");
  std::ofstream out(a.out, std::ios::trunc);
  if (!out) throw UserError("cannot write " + a.out);
  eval::write_svg(out, eval::scene_from_rows(rows, a.fov));
  return 0;
}

int cmd_scenario(const ScenarioArgs& a) {
  sim::ScenarioConfig c = load_config(a.config).scenario;
  if (!a.suite.empty()) {
    auto s = eval::suite_config(a.suite, c);
    if (!s) throw UserError("unknown suite '" + a.suite + "'");
    c = *s;
  }
  std::cout << sim::world_to_json(sim::generate_scenario(c, a.seed)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation with decentralized structural RNNs"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a policy with PPO");
  train->add_option("--config", ta.config, "composite JSON config file");
  train->add_option("--run-dir", ta.run_dir, "run directory (relative paths go under $CROWDNAV_RUN_ROOT)");
  train->add_flag("--resume", ta.resume, "continue an existing run from its latest checkpoint");
  train->add_option("--resume-from", ta.resume_from, "update index of the checkpoint to resume from");
  train->add_option("--total-steps", ta.total_steps);
  train->add_option("--lr", ta.lr);
  train->add_option("--lr-schedule", ta.lr_schedule, "constant or linear");
  train->add_option("--seed", ta.seed);
  train->add_option("--n-humans", ta.n_humans);
  train->add_option("--fov", ta.fov, "field of view in degrees");
  train->add_option("--network", ta.network, "ds_rnn or rnn_attn");
  train->add_option("--checkpoint-every", ta.checkpoint_every);

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "evaluate a policy on a suite");
  ev->add_option("--policy", ea.policy, "baseline name, checkpoint file, or run directory")->required();
  ev->add_option("--suite", ea.suite, "fov-90, fov-180, fov-360, group-10, group-15, group-20");
  ev->add_option("--config", ea.config, "config file; its scenario is used when --suite is absent");
  ev->add_option("--n", ea.n, "number of episodes");
  ev->add_option("--seed-base", ea.seed_base, "seed of the first episode");
  ev->add_option("--out", ea.out, "directory for summary.json and episodes.csv");
  ev->add_option("--trajectories", ea.trajectories, "export CSV and SVG for the first K episodes");
  ev->add_option("--min-success", ea.min_success);
  ev->add_option("--max-collision", ea.max_collision);
  ev->add_option("--max-timeout", ea.max_timeout);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "draw a trajectory CSV as SVG");
  render->add_option("--csv", ra.csv)->required();
  render->add_option("--out", ra.out)->required();
  render->add_option("--fov", ra.fov, "robot field of view in degrees");

  ScenarioArgs sa;
  auto* scen = app.add_subcommand("scenario", "print the initial world for a seed");
  scen->add_option("--suite", sa.suite);
  scen->add_option("--config", sa.config);
  scen->add_option("--seed", sa.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*ev) return cmd_eval(ea);
    if (*render) return cmd_render(ra);
    return cmd_scenario(sa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUserError;
  } catch (const sim::CsvParseError& e) {
    std::cerr << "csv error: " << e.what() << '\n';
    return kUserError;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kUserError;
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}
