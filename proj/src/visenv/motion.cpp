#include "visenv/motion.hpp"

#include <cmath>

namespace visenv {

Vec3 random_unit_vector(Rng& rng) {
  const double z = 2.0 * uniform01(rng) - 1.0;
  const double phi = 2.0 * kPi * uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

PoltergeistState make_poltergeist_state(const PoltergeistParams& params, std::uint64_t seed,
                                        double now) {
  PoltergeistState state{Rng(seed), 0.0, 0};
  state.next_kick_time = now + uniform_in(state.rng, params.interval);
  return state;
}

WanderState make_wander_state(const WanderParams& params, std::uint64_t seed, double now) {
  WanderState state{Rng(seed), 0, 0.0};
  if (!params.waypoints.empty()) {
    state.target = static_cast<std::size_t>(uniform01(state.rng) *
                                            static_cast<double>(params.waypoints.size()));
  }
  state.next_switch_time = now + uniform_in(state.rng, params.interval);
  return state;
}

int poltergeist_update(RigidBody& body, const PoltergeistParams& params, PoltergeistState& state,
                       double now) {
  int kicks = 0;
  while (now + kClockEpsilon >= state.next_kick_time) {
    const Vec3 push_dir = random_unit_vector(state.rng);
    const double push = uniform_in(state.rng, params.force_impulse);
    const Vec3 twist_dir = random_unit_vector(state.rng);
    const double twist = uniform_in(state.rng, params.torque_impulse);
    body.linear_velocity += push * push_dir;
    body.angular_velocity += twist * twist_dir;
    state.next_kick_time += uniform_in(state.rng, params.interval);
    ++state.kicks;
    ++kicks;
  }
  return kicks;
}

void wander_update(Pose& pose, RigidBody& body, const WanderParams& params, WanderState& state,
                   double now, double dt) {
  if (params.waypoints.empty()) return;
  while (now + kClockEpsilon >= state.next_switch_time) {
    state.target = static_cast<std::size_t>(uniform01(state.rng) *
                                            static_cast<double>(params.waypoints.size()));
    state.next_switch_time += uniform_in(state.rng, params.interval);
  }
  const Vec3 to_target = params.waypoints[state.target] - pose.position;
  const double distance = to_target.norm();
  if (distance < params.speed * dt) {
    pose.position = params.waypoints[state.target];
    body.linear_velocity.setZero();
  } else {
    body.linear_velocity = params.speed * to_target / distance;
  }
}

void rotate_update(RigidBody& body, const RotateParams& params) {
  body.angular_velocity = params.angular_speed * params.axis;
}

namespace {

struct SegmentPos {
  std::size_t from = 0, to = 0;
  double s = 0.0;         // fraction through the segment
  double duration = 0.0;  // seconds per segment
};

SegmentPos locate(const MoverConfig& config, double t) {
  const std::size_t n = config.waypoints.size();
  SegmentPos seg;
  seg.duration = config.total_time / static_cast<double>(n);
  double local = std::fmod(t, config.total_time);
  if (local < 0.0) local += config.total_time;
  auto index = static_cast<std::size_t>(local / seg.duration);
  if (index >= n) index = n - 1;
  seg.from = index;
  seg.to = (index + 1) % n;
  seg.s = std::clamp((local - static_cast<double>(index) * seg.duration) / seg.duration, 0.0, 1.0);
  return seg;
}

}  // namespace

Pose waypoint_pose(const MoverConfig& config, double t) {
  if (config.waypoints.empty()) return {};
  if (config.waypoints.size() == 1) return config.waypoints.front();
  const auto seg = locate(config, t);
  const Pose& a = config.waypoints[seg.from];
  const Pose& b = config.waypoints[seg.to];
  return {a.position + seg.s * (b.position - a.position), nlerp(a.orientation, b.orientation, seg.s)};
}

MoverKinematics waypoint_velocity(const MoverConfig& config, double t) {
  if (config.waypoints.size() < 2) return {};
  const auto seg = locate(config, t);
  const Pose& a = config.waypoints[seg.from];
  const Pose& b = config.waypoints[seg.to];
  MoverKinematics k;
  k.linear_velocity = (b.position - a.position) / seg.duration;

  // d/dt of normalize(r(s)), r = (1-s) qa + s qb, then omega = 2 qdot q^-1.
  Eigen::Vector4d qb = b.orientation.coeffs();
  if (a.orientation.coeffs().dot(qb) < 0.0) qb = -qb;
  const Eigen::Vector4d r = (1.0 - seg.s) * a.orientation.coeffs() + seg.s * qb;
  const Eigen::Vector4d r_dot = (qb - a.orientation.coeffs()) / seg.duration;
  const double len = r.norm();
  const Eigen::Vector4d q = r / len;
  const Eigen::Vector4d q_dot = (r_dot - q * q.dot(r_dot)) / len;
  Quat qd, qn;
  qd.coeffs() = q_dot;
  qn.coeffs() = q;
  const Quat w = qd * qn.conjugate();
  k.angular_velocity = 2.0 * w.vec();
  return k;
}

void apply_follow(const MoverState& mover, std::vector<AgentState>& agents) {
  for (auto& agent : agents) {
    if (!agent.follow) continue;
    agent.pose = mover.pose;
    agent.linear_velocity = mover.linear_velocity;
    agent.angular_velocity = mover.angular_velocity;
  }
}

World make_world(std::shared_ptr<const Scene> scene, std::uint64_t seed, double dt) {
  World world;
  world.scene = std::move(scene);
  world.dt = dt;
  const auto& objects = world.scene->objects;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& obj = objects[i];
    if (obj.is_static || !obj.rigidbody) continue;
    DynamicBody body;
    body.object_index = i;
    body.instance_id = obj.instance_id;
    body.pose = obj.pose;
    body.body = *obj.rigidbody;
    for (const auto& cfg : obj.behaviors) {
      if (const auto* p = std::get_if<PoltergeistParams>(&cfg)) {
        body.behavior_states.emplace_back(
            make_poltergeist_state(*p, behavior_stream_seed(seed, obj.instance_id, p->seed)));
      } else if (const auto* w = std::get_if<WanderParams>(&cfg)) {
        body.behavior_states.emplace_back(
            make_wander_state(*w, behavior_stream_seed(seed, obj.instance_id, w->seed)));
      } else {
        body.behavior_states.emplace_back(RotateState{});
      }
    }
    world.bodies.push_back(std::move(body));
  }
  world.mover.pose = waypoint_pose(world.scene->mover, 0.0);
  const auto kin = waypoint_velocity(world.scene->mover, 0.0);
  world.mover.linear_velocity = kin.linear_velocity;
  world.mover.angular_velocity = kin.angular_velocity;
  return world;
}

void step_world(World& world, double dt) {
  const double now = world.time + dt;
  const auto& objects = world.scene->objects;
  for (auto& dyn : world.bodies) {
    const auto& behaviors = objects[dyn.object_index].behaviors;
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
      std::visit(
          [&](auto& state) {
            using S = std::decay_t<decltype(state)>;
            if constexpr (std::is_same_v<S, PoltergeistState>) {
              poltergeist_update(dyn.body, std::get<PoltergeistParams>(behaviors[i]), state, now);
            } else if constexpr (std::is_same_v<S, WanderState>) {
              wander_update(dyn.pose, dyn.body, std::get<WanderParams>(behaviors[i]), state, now, dt);
            } else {
              rotate_update(dyn.body, std::get<RotateParams>(behaviors[i]));
            }
          },
          dyn.behavior_states[i]);
    }
    dyn.pose.position += dyn.body.linear_velocity * dt;
    dyn.pose.orientation = integrate_rotation(dyn.pose.orientation, dyn.body.angular_velocity, dt);
  }

  auto& mover = world.mover;
  if (mover.mode == MoverMode::kWaypoint) {
    const auto& cfg = world.scene->mover;
    mover.cycle_time = std::fmod(mover.cycle_time + dt, cfg.total_time);
    mover.pose = waypoint_pose(cfg, mover.cycle_time);
    const auto kin = waypoint_velocity(cfg, mover.cycle_time);
    mover.linear_velocity = kin.linear_velocity;
    mover.angular_velocity = kin.angular_velocity;
  }
  apply_follow(mover, world.agents);

  world.time = now;
  ++world.tick;
}

void set_mover_position(World& world, const Vec3& position) {
  auto& mover = world.mover;
  mover.mode = MoverMode::kExternal;
  mover.pose.position = position;
  mover.linear_velocity.setZero();
  mover.angular_velocity.setZero();
  apply_follow(mover, world.agents);
}

void set_mover_orientation(World& world, const Quat& orientation) {
  auto& mover = world.mover;
  mover.mode = MoverMode::kExternal;
  mover.pose.orientation = orientation.normalized();
  mover.linear_velocity.setZero();
  mover.angular_velocity.setZero();
  apply_follow(mover, world.agents);
}

}  // namespace visenv
