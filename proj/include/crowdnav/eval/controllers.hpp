#pragma once

#include "crowdnav/agents/orca.hpp"
#include "crowdnav/agents/social_force.hpp"
#include "crowdnav/errors.hpp"
#include "crowdnav/net/checkpoint.hpp"
#include "crowdnav/net/policy.hpp"
#include "crowdnav/sim/observation.hpp"
#include "crowdnav/sim/types.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace crowdnav::eval {

/// A robot controller driven through an episode: reset once, then one act()
/// per step with the observation the robot currently holds.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset(const sim::WorldState& world, std::uint64_t episode_seed) = 0;
  virtual Vec2 act(const sim::WorldState& world, const sim::Observation& obs) = 0;
};

/// DS-RNN or RNN+Attn, acting with the distribution mean.
class LearnedController final : public Controller {
 public:
  LearnedController(net::NetworkDims dims, net::ParamSet params, std::string label = "")
      : net_(net::make_network(dims)), params_(std::move(params)), label_(std::move(label)), rnn_size_(dims.rnn_size) {
    std::visit([&](const auto& n) { net::require_layout(n.zero_params(), params_, "policy parameters"); }, net_);
  }

  static std::unique_ptr<LearnedController> from_checkpoint(const std::filesystem::path& path) {
    net::Checkpoint ck = net::load_checkpoint(path);
    return std::make_unique<LearnedController>(ck.dims, std::move(ck.tensors), path.string());
  }

  std::string name() const override { return label_.empty() ? net::to_string(dims().kind) : label_; }
  const net::NetworkDims& dims() const {
    return std::visit([](const auto& n) -> const net::NetworkDims& { return n.dims(); }, net_);
  }

  void reset(const sim::WorldState& world, std::uint64_t) override {
    hidden_ = net::HiddenState::zeros(static_cast<int>(world.humans.size()), rnn_size_);
    first_ = true;
  }

  Vec2 act(const sim::WorldState&, const sim::Observation& obs) override {
    auto [out, next] = std::visit([&](const auto& n) { return net::forward(n, params_, obs, hidden_, !first_); }, net_);
    hidden_ = std::move(next);
    first_ = false;
    last_attention_ = out.attention_weights;
    return out.action_mean;
  }

  const Eigen::VectorXd& last_attention() const { return last_attention_; }

 private:
  net::AnyNetwork net_;
  net::ParamSet params_;
  std::string label_;
  int rnn_size_;
  net::HiddenState hidden_;
  bool first_ = true;
  Eigen::VectorXd last_attention_;
};

/// The robot as a controller agent: it sees humans where it believes they are
/// (FoV extrapolation included) with the velocity estimate from its belief cache.
inline std::vector<agents::AgentView> believed_humans(const sim::WorldState& world, const sim::Observation& obs) {
  std::vector<agents::AgentView> out;
  const Vec2 robot = world.robot.position();
  for (int i = 0; i < obs.n_humans(); ++i) {
    agents::AgentView v;
    v.position = robot + obs.spatial_edges.row(i).transpose();
    v.velocity = obs.last_seen[static_cast<std::size_t>(i)].velocity;
    v.radius = world.config.human_radius_max;
    v.v_max = world.config.human_v_max_max;
    v.goal = v.position;
    out.push_back(v);
  }
  return out;
}

inline agents::AgentView robot_view(const sim::RobotState& r) {
  agents::AgentView v;
  v.position = r.position();
  v.velocity = r.velocity();
  v.radius = r.rho;
  v.v_max = r.v_max;
  v.goal = r.goal();
  return v;
}

class OrcaController final : public Controller {
 public:
  explicit OrcaController(agents::OrcaParams params = {}) : params_(params) { params_.validate(); }
  std::string name() const override { return "orca"; }
  void reset(const sim::WorldState&, std::uint64_t) override {}
  Vec2 act(const sim::WorldState& world, const sim::Observation& obs) override {
    const auto others = believed_humans(world, obs);
    return agents::orca_velocity(robot_view(world.robot), others, params_, world.config.dt,
                                 agents::Responsibility::Full);
  }

 private:
  agents::OrcaParams params_;
};

class SocialForceController final : public Controller {
 public:
  explicit SocialForceController(agents::SocialForceParams params = {}) : params_(params) { params_.validate(); }
  std::string name() const override { return "social_force"; }
  void reset(const sim::WorldState&, std::uint64_t episode_seed) override { rng_.seed(episode_seed); }
  Vec2 act(const sim::WorldState& world, const sim::Observation& obs) override {
    const auto others = believed_humans(world, obs);
    return agents::social_force_velocity(robot_view(world.robot), others, params_, world.config.dt, rng_);
  }

 private:
  agents::SocialForceParams params_;
  std::mt19937_64 rng_;
};

/// Heads for the goal at full speed, ignoring everyone.
class StraightController final : public Controller {
 public:
  std::string name() const override { return "straight"; }
  void reset(const sim::WorldState&, std::uint64_t) override {}
  Vec2 act(const sim::WorldState& world, const sim::Observation&) override {
    return agents::preferred_velocity(robot_view(world.robot), world.config.dt);
  }
};

class IdleController final : public Controller {
 public:
  std::string name() const override { return "idle"; }
  void reset(const sim::WorldState&, std::uint64_t) override {}
  Vec2 act(const sim::WorldState&, const sim::Observation&) override { return Vec2::Zero(); }
};

inline const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names = {"orca", "social_force", "straight", "idle"};
  return names;
}

/// Builds a baseline by name; nullptr when unknown.
inline std::unique_ptr<Controller> make_baseline(const std::string& name, const sim::ScenarioConfig& cfg) {
  if (name == "orca") return std::make_unique<OrcaController>(cfg.orca);
  if (name == "social_force") return std::make_unique<SocialForceController>(cfg.social_force);
  if (name == "straight") return std::make_unique<StraightController>();
  if (name == "idle") return std::make_unique<IdleController>();
  return nullptr;
}

}  // namespace crowdnav::eval
