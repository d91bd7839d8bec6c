#include "visenv/world.hpp"

#include <bit>
#include <cstring>

namespace visenv {

namespace {

struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;

  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Vec3& v) {
    f64(v.x());
    f64(v.y());
    f64(v.z());
  }
  void pose(const Pose& p) {
    vec(p.position);
    const auto& c = p.orientation.coeffs();
    for (int i = 0; i < 4; ++i) f64(c[i]);
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t behavior_stream_seed(std::uint64_t scene_seed, std::uint32_t instance_id,
                                   std::uint64_t behavior_seed) {
  return splitmix64(scene_seed ^ instance_id ^ splitmix64(behavior_seed));
}

AgentState* World::find_agent(std::uint32_t agent_id) {
  for (auto& a : agents) {
    if (a.agent_id == agent_id) return &a;
  }
  return nullptr;
}

const BodySnapshot* Snapshot::find_body(std::uint32_t instance_id) const {
  for (const auto& b : bodies) {
    if (b.instance_id == instance_id) return &b;
  }
  return nullptr;
}

const AgentState* Snapshot::find_agent(std::uint32_t agent_id) const {
  for (const auto& a : agents) {
    if (a.agent_id == agent_id) return &a;
  }
  return nullptr;
}

std::uint64_t Snapshot::hash() const {
  Fnv1a h;
  h.u64(sequence);
  h.f64(tick_time);
  for (const auto& b : bodies) {
    h.u64(b.instance_id);
    h.pose(b.pose);
    h.vec(b.linear_velocity);
    h.vec(b.angular_velocity);
    h.vec(b.center);
  }
  h.pose(mover_pose);
  h.vec(mover_linear_velocity);
  h.vec(mover_angular_velocity);
  for (const auto& a : agents) {
    h.u64(a.agent_id);
    h.pose(a.pose);
    h.u64(a.follow ? 1 : 0);
    h.vec(a.linear_velocity);
    h.vec(a.angular_velocity);
  }
  return h.state;
}

std::shared_ptr<const Snapshot> take_snapshot(const World& world, double tick_time,
                                              std::uint64_t sequence) {
  auto snap = std::make_shared<Snapshot>();
  snap->scene = world.scene;
  snap->sequence = sequence;
  snap->tick_time = tick_time;
  snap->bodies.reserve(world.bodies.size());
  for (const auto& b : world.bodies) {
    snap->bodies.push_back({b.instance_id, b.object_index, b.pose, b.body.linear_velocity,
                            b.body.angular_velocity, b.pose.position});
  }
  snap->mover_pose = world.mover.pose;
  snap->mover_linear_velocity = world.mover.linear_velocity;
  snap->mover_angular_velocity = world.mover.angular_velocity;
  snap->agents = world.agents;
  return snap;
}

}  // namespace visenv
