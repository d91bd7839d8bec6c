#include "test_support.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace visenv::testkit {

std::shared_ptr<const Scene> share(Scene scene) {
  return std::make_shared<const Scene>(std::move(scene));
}

World world_with_agent(std::shared_ptr<const Scene> scene, std::uint64_t seed, bool follow) {
  World world = make_world(std::move(scene), seed);
  AgentState agent;
  agent.agent_id = 1;
  agent.follow = follow;
  agent.pose = world.mover.pose;
  world.agents.push_back(agent);
  apply_follow(world.mover, world.agents);
  return world;
}

Scene scene_with_objects(const std::string& objects_json, const std::string& mover_json,
                         const std::string& camera_json) {
  std::string doc = R"({"name": "test", "categories": [{"id": 1, "name": "box"}, {"id": 2, "name": "wall"}, {"id": 3, "name": "thing"}],)";
  doc += R"("objects": [)" + objects_json + "],";
  if (!mover_json.empty()) doc += R"("mover": )" + mover_json + ",";
  doc += R"("light": {"direction": [0, 0, -1], "ambient": 0.2},)";
  doc += R"("camera": )" + camera_json + "}";
  return load_scene(doc);
}

namespace {

Mat3 rotation_by(const Vec3& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega.normalized()).toRotationMatrix();
}

}  // namespace

Snapshot advance_rigidly(const Snapshot& snapshot, double dt) {
  Snapshot out = snapshot;
  for (auto& b : out.bodies) {
    const Mat3 r = rotation_by(b.angular_velocity, dt);
    b.pose.position += b.linear_velocity * dt;
    b.pose.orientation = Quat(r * b.pose.orientation.toRotationMatrix());
    b.center = b.pose.position;
  }
  return out;
}

CameraKinematics advance_camera(const CameraKinematics& camera, double dt) {
  CameraKinematics out = camera;
  out.pose.rotation = rotation_by(camera.angular_velocity, dt) * camera.pose.rotation;
  out.pose.position += camera.linear_velocity * dt;
  return out;
}

FiniteDifferenceFlow finite_difference_flow(const Snapshot& snapshot,
                                            const CameraKinematics& camera,
                                            const CameraIntrinsics& k, const GBuffer& gb,
                                            double dt) {
  FiniteDifferenceFlow out;
  out.displacement.assign(gb.size() * 2, 0.0f);
  out.valid.assign(gb.size(), 0);

  const Snapshot later = advance_rigidly(snapshot, dt);
  const CameraKinematics later_cam = advance_camera(camera, dt);
  const GBuffer later_gb = rasterize(later, later_cam.pose, k, false);

  for (int y = 0; y < gb.height; ++y) {
    for (int x = 0; x < gb.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * gb.width + x;
      if (!gb.covered(i)) continue;
      const auto oi = static_cast<std::size_t>(gb.object_index[i]);

      // Surface point in world, then carried along with its body.
      const double z = gb.depth[i];
      const Vec3 pc((x + 0.5 - k.cx) / k.fx * z, (y + 0.5 - k.cy) / k.fy * z, z);
      Vec3 pw = camera.pose.rotation * pc + camera.pose.position;
      for (std::size_t b = 0; b < snapshot.bodies.size(); ++b) {
        if (snapshot.bodies[b].object_index != oi) continue;
        const auto& before = snapshot.bodies[b];
        pw = later.bodies[b].pose.position +
             rotation_by(before.angular_velocity, dt) * (pw - before.pose.position);
      }

      const Vec3 pc_later = later_cam.pose.rotation.transpose() * (pw - later_cam.pose.position);
      if (pc_later.z() <= 0.0) continue;
      const double u0 = k.fx * pc.x() / pc.z() + k.cx, v0 = k.fy * pc.y() / pc.z() + k.cy;
      const double u1 = k.fx * pc_later.x() / pc_later.z() + k.cx;
      const double v1 = k.fy * pc_later.y() / pc_later.z() + k.cy;

      const int xi = static_cast<int>(std::floor(u1)), yi = static_cast<int>(std::floor(v1));
      if (xi < 0 || yi < 0 || xi >= gb.width || yi >= gb.height) continue;
      const std::size_t j = static_cast<std::size_t>(yi) * gb.width + xi;
      if (later_gb.object_index[j] != gb.object_index[i]) continue;

      out.displacement[2 * i] = static_cast<float>(u1 - u0);
      out.displacement[2 * i + 1] = static_cast<float>(v1 - v0);
      out.valid[i] = 1;
      ++out.valid_count;
    }
  }
  return out;
}

WireClient::WireClient(std::uint16_t port, bool send_preamble)
    : socket_(net::connect_tcp("127.0.0.1", port)) {
  if (!send_preamble) return;
  net::send_all(socket_, wire::kPreamble);
  std::array<std::uint8_t, wire::kPreamble.size()> echo{};
  if (!net::recv_exact(socket_, echo)) throw std::runtime_error("server closed during preamble");
  wire::check_preamble(echo);
}

void WireClient::send_bytes(wire::ByteView bytes) { net::send_all(socket_, bytes); }

std::optional<wire::WireMessage> WireClient::read_message() {
  std::array<std::uint8_t, wire::kMessageHeaderSize> header{};
  if (!net::recv_exact(socket_, header)) return std::nullopt;
  wire::WireMessage m{header[0], wire::Bytes(wire::body_length_from_header(header))};
  if (!m.body.empty() && !net::recv_exact(socket_, m.body)) {
    throw std::runtime_error("server closed mid-message");
  }
  return m;
}

bool WireClient::closed_by_peer() {
  std::uint8_t byte = 0;
  try {
    return !net::recv_exact(socket_, std::span<std::uint8_t>(&byte, 1));
  } catch (const net::NetError&) {
    return true;  // reset counts as closed
  }
}

wire::WireMessage WireClient::request_raw(std::uint8_t opcode, const wire::Bytes& body) {
  send_bytes(wire::encode_message(opcode, body));
  auto reply = read_message();
  if (!reply) throw std::runtime_error("server closed instead of replying");
  return *reply;
}

wire::WireMessage WireClient::request(wire::Opcode op, const wire::Bytes& body) {
  return request_raw(static_cast<std::uint8_t>(op), body);
}

wire::RegisterReply WireClient::register_agent(std::uint32_t width, std::uint32_t height,
                                               std::uint8_t view_mask,
                                               wire::Compression compression) {
  const auto reply =
      request(wire::Opcode::kRegister, wire::encode_handshake({width, height, view_mask, compression}));
  if (reply.opcode != static_cast<std::uint8_t>(wire::Opcode::kRegisterReply)) {
    throw std::runtime_error("REGISTER failed: " + wire::decode_error(reply.body).message);
  }
  width_ = width;
  height_ = height;
  return wire::decode_register_reply(reply.body);
}

FrameViews WireClient::get_frame() {
  const auto reply = request(wire::Opcode::kGetFrame);
  if (reply.opcode != static_cast<std::uint8_t>(wire::Opcode::kFrameReply)) {
    throw std::runtime_error("GET_FRAME failed: " + wire::decode_error(reply.body).message);
  }
  return wire::unpack_views(reply.body, width_, height_);
}

bool eventually(const std::function<bool()>& condition, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (condition()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return condition();
}

}  // namespace visenv::testkit
