#pragma once

#include "visenv/scene.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace visenv {

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits; stable across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform_in(Rng& rng, const Range& r) { return r.min + (r.max - r.min) * uniform01(rng); }

std::uint64_t behavior_stream_seed(std::uint64_t scene_seed, std::uint32_t instance_id,
                                   std::uint64_t behavior_seed);

struct PoltergeistState {
  Rng rng;
  double next_kick_time = 0.0;
  std::uint64_t kicks = 0;
};

struct WanderState {
  Rng rng;
  std::size_t target = 0;
  double next_switch_time = 0.0;
};

struct RotateState {};

using BehaviorState = std::variant<PoltergeistState, WanderState, RotateState>;

struct DynamicBody {
  std::size_t object_index = 0;
  std::uint32_t instance_id = 0;
  Pose pose;
  RigidBody body;
  std::vector<BehaviorState> behavior_states;  // parallel to SceneObject::behaviors
};

enum class MoverMode { kWaypoint, kExternal };

struct MoverState {
  Pose pose;
  MoverMode mode = MoverMode::kWaypoint;
  double cycle_time = 0.0;  // in [0, total_time)
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

struct AgentState {
  std::uint32_t agent_id = 0;
  Pose pose;
  bool follow = true;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

// Mutable simulation state for one scene. Owned by a single simulation thread.
struct World {
  std::shared_ptr<const Scene> scene;
  std::vector<DynamicBody> bodies;
  MoverState mover;
  std::vector<AgentState> agents;
  std::uint64_t tick = 0;
  double time = 0.0;  // simulation clock, seconds
  double dt = 1.0 / 60.0;

  AgentState* find_agent(std::uint32_t agent_id);
};

struct BodySnapshot {
  std::uint32_t instance_id = 0;
  std::size_t object_index = 0;
  Pose pose;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 center = Vec3::Zero();  // rotation center: object origin in world
};

// Immutable copy of all dynamic state at one tick. Static objects are read
// from the scene itself.
struct Snapshot {
  std::shared_ptr<const Scene> scene;
  std::uint64_t sequence = 0;
  double tick_time = 0.0;
  std::vector<BodySnapshot> bodies;
  Pose mover_pose;
  Vec3 mover_linear_velocity = Vec3::Zero();
  Vec3 mover_angular_velocity = Vec3::Zero();
  std::vector<AgentState> agents;

  const BodySnapshot* find_body(std::uint32_t instance_id) const;
  const AgentState* find_agent(std::uint32_t agent_id) const;
  std::uint64_t hash() const;
};

std::shared_ptr<const Snapshot> take_snapshot(const World& world, double tick_time,
                                              std::uint64_t sequence = 0);
inline std::shared_ptr<const Snapshot> take_snapshot(const World& world) {
  return take_snapshot(world, world.time, world.tick);
}

}  // namespace visenv
