#include "test_support.hpp"
#include "visenv/motion.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace visenv;

namespace {

const char* kRotatingBox = R"({"name": "spin", "primitive": {"kind": "box"}, "static": false, "mass": 1,
  "behaviors": [{"kind": "rotate", "axis": [0, 1, 0], "angular_speed": 3.141592653589793}]})";

Scene one_body_scene(const std::string& object) { return testkit::scene_with_objects(object); }

MoverConfig mover_of(std::vector<Vec3> positions, double total_time,
                     std::vector<Quat> orientations = {}) {
  MoverConfig cfg;
  cfg.total_time = total_time;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Pose p;
    p.position = positions[i];
    if (i < orientations.size()) p.orientation = orientations[i];
    cfg.waypoints.push_back(p);
  }
  return cfg;
}

// Hand-rolled segment interpolation, written independently of waypoint_pose.
Vec3 expected_position(const std::vector<Vec3>& w, double total, double t) {
  const double seg = total / static_cast<double>(w.size());
  double local = t - total * std::floor(t / total);
  int k = static_cast<int>(local / seg);
  if (k >= static_cast<int>(w.size())) k = static_cast<int>(w.size()) - 1;
  const double s = (local - k * seg) / seg;
  const Vec3& a = w[k];
  const Vec3& b = w[(k + 1) % w.size()];
  return {a.x() * (1 - s) + b.x() * s, a.y() * (1 - s) + b.y() * s, a.z() * (1 - s) + b.z() * s};
}

}  // namespace

TEST(StepWorld, OneEulerStepShiftsPosition) {
  const Scene s = one_body_scene(R"({"primitive": {"kind": "box"}, "static": false, "mass": 1, "velocity": [1, 0, 0]})");
  World world = make_world(testkit::share(s), 0);
  const Vec3 before = world.bodies.at(0).pose.position;
  step_world(world, 0.5);
  EXPECT_NEAR((world.bodies[0].pose.position - before - Vec3(0.5, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(world.time, 0.5);
  EXPECT_EQ(world.tick, 1u);
}

TEST(StepWorld, TwoHalfTurnsReturnToIdentity) {
  World world = make_world(testkit::share(one_body_scene(kRotatingBox)), 0);
  for (int i = 0; i < 120; ++i) step_world(world, 1.0 / 60.0);
  EXPECT_LT(rotation_distance(world.bodies[0].pose.orientation, Quat::Identity()), 1e-6);

  // Halfway is a half-turn about +y.
  World half = make_world(testkit::share(one_body_scene(kRotatingBox)), 0);
  for (int i = 0; i < 60; ++i) step_world(half, 1.0 / 60.0);
  const Quat half_turn(Eigen::AngleAxisd(kPi, Vec3::UnitY()));
  EXPECT_LT(rotation_distance(half.bodies[0].pose.orientation, half_turn), 1e-6);
}

TEST(StepWorld, AllStaticSceneIsUnchanged) {
  const Scene s = one_body_scene(R"({"primitive": {"kind": "box"}, "pose": {"position": [1, 2, 3]}})");
  World world = make_world(testkit::share(s), 0);
  EXPECT_TRUE(world.bodies.empty());
  const auto before = take_snapshot(world, 0.0, 0);
  for (int i = 0; i < 50; ++i) step_world(world);
  const auto after = take_snapshot(world, 0.0, 0);
  EXPECT_EQ(before->hash(), after->hash());
  EXPECT_EQ(world.scene->objects[0].pose.position, Vec3(1, 2, 3));
}

TEST(StepWorld, InertialSpeedsStayConstant) {
  const Scene s = one_body_scene(
      R"({"primitive": {"kind": "box"}, "static": false, "mass": 3, "velocity": [0.3, -1.2, 2], "angular_velocity": [1, 2, -0.5]})");
  World world = make_world(testkit::share(s), 0);
  const RigidBody start = world.bodies[0].body;
  for (int i = 0; i < 10000; ++i) step_world(world);
  EXPECT_EQ(world.bodies[0].body, start);
  EXPECT_NEAR(world.bodies[0].pose.orientation.norm(), 1.0, 1e-6);
}

TEST(StepWorld, DeterministicForSameSeed) {
  const auto scene = testkit::share(*find_builtin_scene("room_simple"));
  auto run = [&](std::uint64_t seed) {
    World w = testkit::world_with_agent(scene, seed);
    for (int i = 0; i < 900; ++i) step_world(w);
    return take_snapshot(w)->hash();
  };
  EXPECT_EQ(run(42), run(42));
  EXPECT_NE(run(42), run(43));
}

TEST(Poltergeist, ZeroRangesNeverChangeVelocity) {
  PoltergeistParams p;
  p.interval = {0.1, 0.3};
  auto state = make_poltergeist_state(p, 9);
  RigidBody body;
  body.linear_velocity = Vec3(1, 2, 3);
  int kicks = 0;
  for (int i = 1; i <= 600; ++i) kicks += poltergeist_update(body, p, state, i / 60.0);
  EXPECT_GT(kicks, 0);
  EXPECT_EQ(body.linear_velocity, Vec3(1, 2, 3));
  EXPECT_EQ(body.angular_velocity, Vec3::Zero());
}

TEST(Poltergeist, SameSeedSameKicks) {
  PoltergeistParams p{{0.1, 0.5}, {0.2, 1.0}, {0.2, 0.7}, 3};
  auto run = [&] {
    auto state = make_poltergeist_state(p, 77);
    RigidBody body;
    std::vector<std::pair<double, Vec3>> trace;
    for (int i = 1; i <= 300; ++i) {
      if (poltergeist_update(body, p, state, i / 60.0) > 0) trace.emplace_back(i / 60.0, body.linear_velocity);
    }
    return trace;
  };
  const auto a = run(), b = run();
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(Poltergeist, UnitIntervalGivesTenKicksInTenSeconds) {
  const Scene s = one_body_scene(R"({"primitive": {"kind": "box"}, "static": false, "mass": 2,
      "behaviors": [{"kind": "poltergeist", "force_impulse": [0.1, 0.2], "torque_impulse": [0.1, 0.2], "interval": [1, 1]}]})");
  World world = make_world(testkit::share(s), 5);
  for (int i = 0; i < 600; ++i) step_world(world);
  EXPECT_EQ(std::get<PoltergeistState>(world.bodies[0].behavior_states[0]).kicks, 10u);
}

TEST(Poltergeist, KickMagnitudesStayInRange) {
  PoltergeistParams p{{0.4, 0.6}, {1.0, 2.0}, {0.05, 0.05}, 0};
  auto state = make_poltergeist_state(p, 1);
  for (int i = 1; i <= 200; ++i) {
    RigidBody body;
    const int n = poltergeist_update(body, p, state, i * 0.05);
    ASSERT_EQ(n, 1);
    EXPECT_GE(body.linear_velocity.norm(), 0.4 - 1e-12);
    EXPECT_LE(body.linear_velocity.norm(), 0.6 + 1e-12);
    EXPECT_GE(body.angular_velocity.norm(), 1.0 - 1e-12);
    EXPECT_LE(body.angular_velocity.norm(), 2.0 + 1e-12);
  }
}

TEST(Wander, AtTargetVelocityIsZero) {
  WanderParams p{{Vec3(1, 2, 3), Vec3(-1, 0, 0)}, 1.5, {100, 100}, 0};
  auto state = make_wander_state(p, 4);
  Pose pose;
  pose.position = p.waypoints[state.target];
  RigidBody body;
  body.linear_velocity = Vec3(9, 9, 9);
  wander_update(pose, body, p, state, 0.0, 1.0 / 60.0);
  EXPECT_EQ(body.linear_velocity, Vec3::Zero());
  EXPECT_EQ(pose.position, p.waypoints[state.target]);
}

TEST(Wander, FarTargetGivesSpeedTowardIt) {
  WanderParams p{{Vec3(10, 0, 0), Vec3(10, 0, 0)}, 2.0, {100, 100}, 0};
  auto state = make_wander_state(p, 0);
  Pose pose;
  RigidBody body;
  wander_update(pose, body, p, state, 0.0, 1.0 / 60.0);
  EXPECT_NEAR((body.linear_velocity - Vec3(2, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Wander, SnapsWithinOneStep) {
  WanderParams p{{Vec3(0.01, 0, 0), Vec3(0.01, 0, 0)}, 1.0, {100, 100}, 0};
  auto state = make_wander_state(p, 0);
  Pose pose;
  RigidBody body;
  wander_update(pose, body, p, state, 0.0, 1.0 / 60.0);  // 0.01 < 1/60
  EXPECT_EQ(pose.position, Vec3(0.01, 0, 0));
  EXPECT_EQ(body.linear_velocity, Vec3::Zero());
}

TEST(Wander, SwitchScheduleIsReproducible) {
  WanderParams p{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, 0.5, {0.2, 0.9}, 0};
  auto run = [&](std::uint64_t seed) {
    auto state = make_wander_state(p, seed);
    Pose pose;
    RigidBody body;
    std::vector<std::size_t> targets;
    for (int i = 1; i <= 600; ++i) {
      wander_update(pose, body, p, state, i / 60.0, 1.0 / 60.0);
      pose.position += body.linear_velocity / 60.0;
      targets.push_back(state.target);
    }
    return targets;
  };
  EXPECT_EQ(run(8), run(8));
  EXPECT_NE(run(8), run(9));
}

TEST(Waypoint, TwoPointExamples) {
  const auto cfg = mover_of({Vec3(0, 0, 0), Vec3(2, 0, 0)}, 4.0);
  EXPECT_NEAR((waypoint_pose(cfg, 1.0).position - Vec3(1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((waypoint_pose(cfg, 3.0).position - Vec3(1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(waypoint_pose(cfg, 4.0), waypoint_pose(cfg, 0.0));
  EXPECT_NEAR((waypoint_pose(cfg, 2.0).position - Vec3(2, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(Waypoint, ThreePointsMatchHandInterpolation) {
  const std::vector<Vec3> w{Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(3, 6, -3)};
  const auto cfg = mover_of(w, 9.0);
  for (int i = 0; i < 20; ++i) {
    const double t = 0.47 * i;  // covers all three segments and the wrap
    EXPECT_NEAR((waypoint_pose(cfg, t).position - expected_position(w, 9.0, t)).norm(), 0.0, 1e-9) << t;
  }
}

TEST(Waypoint, OrientationUsesShortArcNlerp) {
  const Quat a = Quat::Identity();
  const Quat b(Eigen::AngleAxisd(kPi / 2, Vec3::UnitY()));
  Quat b_neg;
  b_neg.coeffs() = -b.coeffs();
  const auto cfg = mover_of({Vec3::Zero(), Vec3::UnitX()}, 2.0, {a, b_neg});
  const Quat mid = waypoint_pose(cfg, 0.5).orientation;
  // nlerp at s = 0.5 between equal-angle endpoints lands on the bisector.
  EXPECT_LT(rotation_distance(mid, Quat(Eigen::AngleAxisd(kPi / 4, Vec3::UnitY()))), 1e-12);
  EXPECT_NEAR(mid.norm(), 1.0, 1e-12);
}

TEST(Waypoint, ContinuousAtBoundariesAndWrap) {
  const std::vector<Quat> q{Quat::Identity(), Quat(Eigen::AngleAxisd(1.0, Vec3::UnitY())),
                            Quat(Eigen::AngleAxisd(-2.0, Vec3(1, 1, 0).normalized()))};
  const auto cfg = mover_of({Vec3(0, 0, 0), Vec3(4, 1, 0), Vec3(-2, 0, 5)}, 6.0, q);
  for (double t : {0.0, 2.0, 4.0, 6.0, 12.0}) {
    const Pose lo = waypoint_pose(cfg, t - 1e-6), hi = waypoint_pose(cfg, t + 1e-6);
    EXPECT_LT((lo.position - hi.position).norm(), 1e-4) << t;
    EXPECT_LT(rotation_distance(lo.orientation, hi.orientation), 1e-4) << t;
  }
}

TEST(Waypoint, AnalyticVelocityMatchesFiniteDifference) {
  const std::vector<Quat> q{Quat::Identity(), Quat(Eigen::AngleAxisd(1.2, Vec3::UnitY())),
                            Quat(Eigen::AngleAxisd(0.7, Vec3(0, 1, 1).normalized()))};
  const auto cfg = mover_of({Vec3(0, 0, 0), Vec3(4, 1, 0), Vec3(-2, 0, 5)}, 6.0, q);
  const double h = 1e-6;
  for (double t : {0.3, 1.1, 2.5, 3.9, 5.2}) {
    const auto k = waypoint_velocity(cfg, t);
    const Pose a = waypoint_pose(cfg, t - h), b = waypoint_pose(cfg, t + h);
    EXPECT_NEAR((k.linear_velocity - (b.position - a.position) / (2 * h)).norm(), 0.0, 1e-6);
    const Eigen::AngleAxisd delta(b.orientation * a.orientation.conjugate());
    const Vec3 omega_fd = delta.axis() * delta.angle() / (2 * h);
    EXPECT_NEAR((k.angular_velocity - omega_fd).norm(), 0.0, 1e-5) << t;
  }
}

TEST(Follow, OnlyFollowersTakeMoverPose) {
  MoverState mover;
  mover.pose.position = Vec3(1, 2, 3);
  mover.linear_velocity = Vec3(0, 1, 0);
  std::vector<AgentState> agents(2);
  agents[0].agent_id = 1;
  agents[1].agent_id = 2;
  agents[1].follow = false;
  agents[1].pose.position = Vec3(-5, 0, 0);
  apply_follow(mover, agents);
  EXPECT_EQ(agents[0].pose, mover.pose);
  EXPECT_EQ(agents[0].linear_velocity, mover.linear_velocity);
  EXPECT_EQ(agents[1].pose.position, Vec3(-5, 0, 0));

  std::vector<AgentState> none;
  apply_follow(mover, none);
  EXPECT_TRUE(none.empty());
}

TEST(Follow, ToggledOffKeepsLastInheritedPose) {
  World world = testkit::world_with_agent(testkit::share(*find_builtin_scene("room_simple")), 0);
  step_world(world);
  const Pose inherited = world.agents[0].pose;
  EXPECT_EQ(inherited, world.mover.pose);
  world.agents[0].follow = false;
  step_world(world);
  EXPECT_EQ(world.agents[0].pose, inherited);
  EXPECT_FALSE(world.mover.pose == inherited);
}

TEST(Mover, ExternalRetargetStopsWaypointMotion) {
  World world = testkit::world_with_agent(testkit::share(*find_builtin_scene("room_simple")), 0);
  set_mover_position(world, Vec3(0.5, 1, 0.5));
  EXPECT_EQ(world.mover.mode, MoverMode::kExternal);
  EXPECT_EQ(world.agents[0].pose.position, Vec3(0.5, 1, 0.5));
  for (int i = 0; i < 30; ++i) step_world(world);
  EXPECT_EQ(world.mover.pose.position, Vec3(0.5, 1, 0.5));
  const Quat q = quat_from_euler_deg(Vec3(0, 90, 0));
  set_mover_orientation(world, q);
  EXPECT_LT(rotation_distance(world.agents[0].pose.orientation, q), 1e-12);
}

TEST(Mover, CycleClockStaysInRange) {
  World world = make_world(testkit::share(*find_builtin_scene("room_simple")), 0);
  const double total = world.scene->mover.total_time;
  for (int i = 0; i < 3000; ++i) {
    step_world(world);
    ASSERT_GE(world.mover.cycle_time, 0.0);
    ASSERT_LT(world.mover.cycle_time, total);
  }
}
