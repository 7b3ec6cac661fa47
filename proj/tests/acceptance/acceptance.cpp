// Acceptance runner: one criterion per invocation, one PASS/FAIL line each.
//   crowdnav_acceptance <criterion> [--workdir DIR]

#include "crowdnav/eval/evaluate.hpp"
#include "crowdnav/ppo/trainer.hpp"
#include "support/head_on.hpp"
#include "support/net_fixtures.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

using namespace crowdnav;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string details;
};

struct Criterion {
  double budget_s;
  std::function<Verdict(const fs::path&)> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- kinematics

Verdict kinematics(const fs::path&) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0), vm(0.1, 3.0), dtd(0.05, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(u(rng), u(rng)), a(u(rng), u(rng));
    const double v_max = vm(rng), dt = dtd(rng);
    const auto next = sim::step_kinematics({p, Vec2(u(rng), u(rng))}, a, v_max, dt);
    // hand evaluation: scale the action onto the speed disc, then integrate
    const double speed = std::sqrt(a.x() * a.x() + a.y() * a.y());
    const double s = speed > v_max ? v_max / speed : 1.0;
    const double vx = a.x() * s, vy = a.y() * s;
    worst = std::max({worst, std::abs(next.velocity.x() - vx), std::abs(next.velocity.y() - vy),
                      std::abs(next.position.x() - (p.x() + vx * dt)), std::abs(next.position.y() - (p.y() + vy * dt))});
  }
  return {worst < 1e-12, fmt("max |error| %.3g over 1000 cases (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------- reward

Verdict reward(const fs::path&) {
  const double rho = 0.3;
  struct Case {
    double d_min;
    bool goal;
    double expected;
    sim::Terminal terminal;
  };
  const double shaping = 2.0 * (2.2 - 2.0);  // d_goal 2.2 -> 2.0
  const Case grid[] = {
      {-0.1, false, -20.0, sim::Terminal::Collision},   {-0.1, true, -20.0, sim::Terminal::Collision},
      {0.0, false, shaping, sim::Terminal::None},        {0.0, true, 10.0, sim::Terminal::ReachGoal},
      {0.1, false, 2.5 * (0.1 - 0.25), sim::Terminal::None}, {0.1, true, 2.5 * (0.1 - 0.25), sim::Terminal::ReachGoal},
      {0.24, false, 2.5 * (0.24 - 0.25), sim::Terminal::None}, {0.24, true, 2.5 * (0.24 - 0.25), sim::Terminal::ReachGoal},
      {0.26, false, shaping, sim::Terminal::None},       {0.26, true, 10.0, sim::Terminal::ReachGoal},
      {1.0, false, shaping, sim::Terminal::None},        {1.0, true, 10.0, sim::Terminal::ReachGoal},
  };
  int mismatches = 0;
  std::ostringstream seen;
  for (const Case& c : grid) {
    const double d_goal = c.goal ? 0.2 : 2.0;
    const sim::StepOutcome o = sim::reward_from_distances(c.d_min, d_goal, 2.2, rho, false);
    if (o.reward != c.expected || o.terminal != c.terminal) ++mismatches;
    seen << ' ' << o.reward;
  }

  // Telescoping over random goal-free robot walks with no humans.
  sim::ScenarioConfig cfg;
  cfg.n_humans = 0;
  cfg.horizon = 60;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int trajectories = 0;
  for (std::uint64_t seed = 1; trajectories < 100; ++seed) {
    sim::WorldState w = sim::generate_scenario(cfg, seed);
    const double d0 = w.robot.goal_distance();
    double sum = 0.0, d_end = d0;
    while (w.terminal == sim::Terminal::None) {
      const auto [obs, out] = sim::step_world(w, Vec2(u(rng), u(rng)));
      if (out.terminal == sim::Terminal::ReachGoal) break;
      sum += out.reward;
      d_end = out.d_goal;
    }
    worst = std::max(worst, std::abs(sum - 2.0 * (d0 - d_end)));
    ++trajectories;
  }
  const bool pass = mismatches == 0 && worst < 1e-9;
  return {pass, fmt("grid 12 cases, %d mismatches (exact), rewards%s; telescoping max |error| %.3g over 100 "
                    "trajectories (tol 1e-9)",
                    mismatches, seen.str().c_str(), worst)};
}

// ---------------------------------------------------------------- attention

net::NetworkDims small_dims() {
  net::NetworkDims d;
  d.rnn_size = 4;
  d.attention_size = 4;
  d.embed_size = 4;
  return d;
}

Verdict attention(const fs::path&) {
  const net::DsRnn ds(small_dims());
  std::mt19937_64 rng(21);
  double sum_err = 0.0, perm_err = 0.0, single_err = 0.0, uniform_err = 0.0;
  int calls = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const int n = 1 + trial % 6;
    const net::ParamSet p = fixtures::random_params(ds.zero_params(), rng, 0.8);
    sim::Observation obs = fixtures::random_observation(rng, n);
    net::HiddenState h = fixtures::random_hidden(rng, n, 4);

    const auto [out, next] = net::forward(ds, p, obs, h);
    ++calls;
    sum_err = std::max(sum_err, std::abs(out.attention_weights.sum() - 1.0));
    if (n == 1) single_err = std::max(single_err, std::abs(out.attention_weights(0) - 1.0));

    // permuting humans permutes alpha and leaves everything else alone
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    sim::Observation po = obs;
    net::HiddenState ph = h;
    for (int i = 0; i < n; ++i) {
      po.spatial_edges.row(i) = obs.spatial_edges.row(perm[static_cast<std::size_t>(i)]);
      ph.spatial.row(i) = h.spatial.row(perm[static_cast<std::size_t>(i)]);
    }
    const auto [pout, pnext] = net::forward(ds, p, po, ph);
    ++calls;
    perm_err = std::max({perm_err, std::abs(pout.value - out.value), (pout.action_mean - out.action_mean).cwiseAbs().maxCoeff(),
                         (pnext.node - next.node).cwiseAbs().maxCoeff()});
    for (int i = 0; i < n; ++i)
      perm_err = std::max(perm_err, std::abs(pout.attention_weights(i) - out.attention_weights(perm[static_cast<std::size_t>(i)])));

    // identical humans get equal weight
    sim::Observation io = obs;
    net::HiddenState ih = h;
    for (int i = 1; i < n; ++i) {
      io.spatial_edges.row(i) = obs.spatial_edges.row(0);
      ih.spatial.row(i) = h.spatial.row(0);
    }
    const auto [iout, inext] = net::forward(ds, p, io, ih);
    ++calls;
    uniform_err = std::max(uniform_err, (iout.attention_weights.array() - 1.0 / n).abs().maxCoeff());

    // a dedicated single-human call per trial
    const sim::Observation so = fixtures::random_observation(rng, 1);
    const auto [sout, snext] = net::forward(ds, p, so, fixtures::random_hidden(rng, 1, 4));
    ++calls;
    single_err = std::max(single_err, std::abs(sout.attention_weights(0) - 1.0));
  }
  const double tol = 1e-6;
  const bool pass = sum_err <= tol && perm_err <= tol && single_err <= tol && uniform_err <= tol;
  return {pass, fmt("%d forward calls; max |sum-1| %.2g, permutation %.2g, n=1 %.2g, identical->uniform %.2g (tol 1e-6)",
                    calls, sum_err, perm_err, single_err, uniform_err)};
}

// ---------------------------------------------------------------- forward oracle

Verdict forward_oracle(const fs::path&) {
  const net::DsRnn ds(small_dims());
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const net::ParamSet p = fixtures::random_params(ds.zero_params(), rng, 0.7);
    const sim::Observation obs = fixtures::random_observation(rng, 3);
    worst = std::max(worst, fixtures::oracle_gap(ds, p, obs, fixtures::random_hidden(rng, 3, 4)));
  }
  return {worst < 1e-10, fmt("100 instances (n=3, d_rnn=4, d_k=4), max |library - oracle| %.3g (tol 1e-10)", worst)};
}

// ---------------------------------------------------------------- gradient check

template <class Net>
void check_gradients(const Net& net, std::mt19937_64& rng, int per_instance, double& worst, int& checked) {
  const net::ParamSet p = fixtures::random_params(net.zero_params(), rng, 0.5);
  const net::SequenceBatch seq = fixtures::random_sequence(rng, 3, 5, 3, net.dims().rnn_size, 0.25);
  const fixtures::RandomLoss loss(rng, seq);
  const net::GradientResult g = net::compute_gradients(net, p, seq, loss);
  std::uniform_int_distribution<std::size_t> pick(0, p.scalar_count() - 1);
  for (int k = 0; k < per_instance; ++k) {
    const fixtures::FdResult r = fixtures::finite_difference(net, p, seq, loss, g.grads, pick(rng), 1e-5);
    worst = std::max(worst, r.rel_error);
    ++checked;
  }
}

Verdict gradient_check(const fs::path&) {
  const net::DsRnn ds(small_dims());
  net::NetworkDims ad = small_dims();
  ad.kind = net::NetworkKind::RnnAttn;
  const net::RnnAttn ra(ad);
  std::mt19937_64 rng(41);
  double worst_ds = 0.0, worst_ra = 0.0;
  int checked = 0;
  for (int instance = 0; instance < 10; ++instance) {
    if (instance < 7)
      check_gradients(ds, rng, 12, worst_ds, checked);
    else
      check_gradients(ra, rng, 12, worst_ra, checked);
  }
  const double worst = std::max(worst_ds, worst_ra);
  return {worst < 1e-4 && checked >= 100,
          fmt("%d parameters over 10 loss instances (7 ds_rnn, 3 rnn_attn), eps 1e-5; max relative error %.3g "
              "(ds_rnn %.3g, rnn_attn %.3g; tol 1e-4, denominator floor 1e-6)",
              checked, worst, worst_ds, worst_ra)};
}

// ---------------------------------------------------------------- ORCA

Verdict orca(const fs::path&) {
  double d_min = std::numeric_limits<double>::infinity(), mirror = 0.0;
  for (double lateral : {0.0, 0.05}) {
    const head_on::Trace tr = head_on::simulate(4.0, lateral, 200);
    d_min = std::min(d_min, tr.d_min);
    mirror = std::max(mirror, tr.mirror_error);
  }
  sim::ScenarioConfig sparse;
  sparse.fov_deg = 360.0;
  sparse.n_humans = 2;
  eval::OrcaController robot;
  const eval::EvalReport r = eval::evaluate(robot, sparse, 100, 1'000'000'000);
  const bool pass = d_min > 0.0 && mirror <= 1e-9 && r.collision_rate == 0.0;
  return {pass, fmt("head-on 200 steps: d_min %.4f (> 0), mirror error %.2g (tol 1e-9); sparse suite (360 deg, 2 "
                    "humans, 100 episodes): collision %.2f success %.2f timeout %.2f (need collision 0)",
                    d_min, mirror, r.collision_rate, r.success_rate, r.timeout_rate)};
}

// ---------------------------------------------------------------- training

std::vector<double> reward_column(const fs::path& metrics) {
  std::ifstream in(metrics);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 3; ++k) std::getline(ss, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

/// Mean of the finite values among the first (or last) `k` entries.
double window_mean(const std::vector<double>& v, std::size_t k, bool tail) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(k, v.size()); ++i) {
    const double x = tail ? v[v.size() - 1 - i] : v[i];
    if (std::isfinite(x)) s += x, ++n;
  }
  return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

fs::path train(const RunConfig& rc, const fs::path& dir) {
  fs::remove_all(dir);
  ppo::Trainer(rc, dir).run();
  return dir;
}

Verdict ppo_smoke(const fs::path& work) {
  RunConfig rc;
  rc.scenario.n_humans = 0;
  rc.ppo.total_steps = 100'000;
  rc.ppo.lr = 1e-3;
  rc.ppo.lr_schedule = "linear";
  rc.train.seed = 1;
  rc.train.checkpoint_every = 100;
  const fs::path dir = train(rc, work / "ppo_smoke");
  ppo::Trainer t = ppo::Trainer::resume(dir);
  eval::LearnedController lc(rc.network, t.params());
  const eval::EvalReport r = eval::evaluate(lc, rc.scenario, 100, rc.eval.seed_base);
  const auto rewards = reward_column(dir / "metrics.csv");
  const double early = window_mean(rewards, 10, false), late = window_mean(rewards, 10, true);
  return {r.success_rate > 0.95,
          fmt("0 humans, %lld steps, lr 1e-3 linear: success %.2f over 100 deterministic episodes (need > 0.95); "
              "training reward first 10 updates %.2f, last 10 %.2f",
              static_cast<long long>(rc.ppo.total_steps), r.success_rate, early, late)};
}

Verdict scaled_training(const fs::path& work) {
  RunConfig rc;
  rc.scenario.fov_deg = 360.0;
  rc.scenario.n_humans = 2;
  rc.ppo.total_steps = 1'000'000;
  rc.ppo.lr = 1e-3;
  rc.ppo.lr_schedule = "linear";
  rc.train.seed = 1;
  rc.train.checkpoint_every = 250;
  const fs::path dir = train(rc, work / "scaled_training");
  ppo::Trainer t = ppo::Trainer::resume(dir);
  const net::DsRnn ds(rc.network);
  eval::LearnedController untrained(rc.network, net::init_params(ds, rc.train.seed));
  eval::LearnedController trained(rc.network, t.params());
  const eval::EvalReport r0 = eval::evaluate(untrained, rc.scenario, 100, rc.eval.seed_base);
  const eval::EvalReport r1 = eval::evaluate(trained, rc.scenario, 100, rc.eval.seed_base);
  const bool pass = r1.success_rate >= 0.80 && r1.mean_reward >= r0.mean_reward + 5.0;
  return {pass, fmt("360 deg, 2 humans, 1e6 steps: success %.2f (need >= 0.80), collision %.2f, timeout %.2f; mean "
                    "reward %.2f vs untrained %.2f (need +5.0)",
                    r1.success_rate, r1.collision_rate, r1.timeout_rate, r1.mean_reward, r0.mean_reward)};
}

// ---------------------------------------------------------------- determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism(const fs::path& work) {
  RunConfig rc;
  rc.scenario.fov_deg = 90.0;
  rc.scenario.n_humans = 3;
  rc.scenario.horizon = 20;
  rc.network = small_dims();
  rc.network.rnn_size = 16;
  rc.ppo.num_envs = 4;
  rc.ppo.segment_length = 10;
  rc.ppo.total_steps = 4 * 10 * 8;
  rc.train.checkpoint_every = 3;

  const net::DsRnn ds(rc.network);
  const net::ParamSet p = net::init_params(ds, 3);
  ppo::VecEnv a = ppo::make_vec_env(rc.scenario, 4, rc.network.rnn_size, 9);
  ppo::VecEnv b = ppo::make_vec_env(rc.scenario, 4, rc.network.rnn_size, 9);
  bool bitwise = true;
  double replay = 0.0;
  for (int k = 0; k < 4; ++k) {
    const ppo::RolloutBuffer ba = ppo::collect_rollouts(ds, p, a, rc.ppo.segment_length);
    bitwise = bitwise && ba == ppo::collect_rollouts(ds, p, b, rc.ppo.segment_length);
    const auto tape = net::forward_sequence(ds, p, ppo::replay_batch(ba, {0, 1, 2, 3}));
    for (int t = 0; t < rc.ppo.segment_length; ++t)
      for (int e = 0; e < 4; ++e) {
        replay = std::max(replay, std::abs(tape.outputs[t].value(e) - ba.values(t, e)));
        const double lp = net::gaussian_log_prob(ba.actions[t].row(e).transpose(),
                                                 tape.outputs[t].action_mean.row(e).transpose(), net::log_std_of(p));
        replay = std::max(replay, std::abs(lp - ba.log_probs(t, e)));
      }
  }

  const fs::path full = work / "determinism_full", part = work / "determinism_part";
  train(rc, full);
  fs::remove_all(part);
  {
    ppo::Trainer t(rc, part);
    for (int k = 0; k < 5; ++k) t.step();  // stops after update 5, last checkpoint at 3
  }
  ppo::Trainer resumed = ppo::Trainer::resume(part);
  const std::int64_t from = resumed.update_idx();
  resumed.run();
  const bool log_same = slurp(full / "metrics.csv") == slurp(part / "metrics.csv");
  const bool params_same = resumed.params() == ppo::Trainer::resume(full).params();
  return {bitwise && replay < 1e-10 && log_same && params_same,
          fmt("rollout buffers bitwise %s; replay max |error| %.3g (tol 1e-10); resume from update %lld: metrics log "
              "%s, final params %s",
              bitwise ? "identical" : "DIFFER", replay, static_cast<long long>(from), log_same ? "identical" : "DIFFERS",
              params_same ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, Criterion> criteria = {
      {"kinematics", {1.0, kinematics}},
      {"reward", {5.0, reward}},
      {"attention", {30.0, attention}},
      {"forward_oracle", {30.0, forward_oracle}},
      {"gradient_check", {120.0, gradient_check}},
      {"orca", {60.0, orca}},
      {"ppo_smoke", {900.0, ppo_smoke}},
      {"scaled_training", {3.0 * 3600.0, scaled_training}},
      {"determinism", {300.0, determinism}},
  };

  CLI::App app{"Acceptance checks"};
  std::string name;
  fs::path workdir = fs::temp_directory_path() / "crowdnav_acceptance";
  app.add_option("criterion", name, "criterion to run")->required()->check([&](const std::string& s) {
    return criteria.count(s) ? std::string() : "unknown criterion " + s;
  });
  app.add_option("--workdir", workdir, "scratch directory for training runs");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(workdir);
  const Criterion& c = criteria.at(name);
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run(workdir);
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = v.pass && elapsed < c.budget_s;
  std::printf("%s %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", name.c_str(), v.details.c_str(), elapsed,
              c.budget_s);
  return pass ? 0 : 1;
}
