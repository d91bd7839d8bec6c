#pragma once

#include "visenv/world.hpp"

namespace visenv {

inline constexpr double kDefaultTick = 1.0 / 60.0;

// Event times are compared against the simulation clock with this slack so
// that accumulated tick sums land on the intended step.
inline constexpr double kClockEpsilon = 1e-9;

struct MoverKinematics {
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();  // world frame
};

Vec3 random_unit_vector(Rng& rng);

PoltergeistState make_poltergeist_state(const PoltergeistParams& params, std::uint64_t seed,
                                        double now = 0.0);
WanderState make_wander_state(const WanderParams& params, std::uint64_t seed, double now = 0.0);

// Applies every kick whose scheduled time is at or before `now`. Returns the
// number of kicks applied.
int poltergeist_update(RigidBody& body, const PoltergeistParams& params, PoltergeistState& state,
                       double now);

// Retargets when the switch time elapses, then steers toward the target.
// Within one step of the target the body snaps onto it and stops.
void wander_update(Pose& pose, RigidBody& body, const WanderParams& params, WanderState& state,
                   double now, double dt);

void rotate_update(RigidBody& body, const RotateParams& params);

// Cyclic piecewise interpolation through the mover waypoints; N waypoints give
// N equal-duration segments, the last one closing W[N-1] -> W[0].
Pose waypoint_pose(const MoverConfig& config, double t);
MoverKinematics waypoint_velocity(const MoverConfig& config, double t);

void apply_follow(const MoverState& mover, std::vector<AgentState>& agents);

World make_world(std::shared_ptr<const Scene> scene, std::uint64_t seed, double dt = kDefaultTick);

// One semi-implicit Euler tick: behaviors set velocities, then positions and
// orientations integrate over dt, the mover advances and followers inherit it.
void step_world(World& world, double dt);
inline void step_world(World& world) { step_world(world, world.dt); }

// Client retargeting of the shared mover; switches it to externally-set mode.
void set_mover_position(World& world, const Vec3& position);
void set_mover_orientation(World& world, const Quat& orientation);

}  // namespace visenv
