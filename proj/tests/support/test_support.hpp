#pragma once

#include "visenv/motion.hpp"
#include "visenv/net.hpp"
#include "visenv/protocol.hpp"
#include "visenv/render.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace visenv::testkit {

std::shared_ptr<const Scene> share(Scene scene);

// World with one agent (id 1) attached, optionally following the mover.
World world_with_agent(std::shared_ptr<const Scene> scene, std::uint64_t seed = 0,
                       bool follow = true);

// Single-object scene: `object_json` is one entry of the objects array.
// Camera at the origin looking down -z unless a mover is given.
Scene scene_with_objects(const std::string& objects_json, const std::string& mover_json = "",
                         const std::string& camera_json = R"({"near": 0.1, "far": 20, "fov_deg": 60})");

// Finite-difference motion oracle. Each covered pixel's surface point is moved
// rigidly with its body for dt, the camera is moved with its own velocities,
// and the point is reprojected. `valid` marks pixels whose point stays in
// frame and is still seen on the same object at t + dt.
struct FiniteDifferenceFlow {
  std::vector<float> displacement;  // px over dt, interleaved
  std::vector<std::uint8_t> valid;
  std::size_t valid_count = 0;
};

FiniteDifferenceFlow finite_difference_flow(const Snapshot& snapshot,
                                            const CameraKinematics& camera,
                                            const CameraIntrinsics& intrinsics,
                                            const GBuffer& gbuffer, double dt);

// Snapshot with every body moved rigidly by dt at its recorded velocities.
Snapshot advance_rigidly(const Snapshot& snapshot, double dt);
CameraKinematics advance_camera(const CameraKinematics& camera, double dt);

// Blocking loopback client speaking the wire protocol.
class WireClient {
 public:
  explicit WireClient(std::uint16_t port, bool send_preamble = true);

  wire::WireMessage request(wire::Opcode op, const wire::Bytes& body = {});
  wire::WireMessage request_raw(std::uint8_t opcode, const wire::Bytes& body);
  void send_bytes(wire::ByteView bytes);
  // nullopt on orderly EOF.
  std::optional<wire::WireMessage> read_message();
  bool closed_by_peer();

  wire::RegisterReply register_agent(std::uint32_t width, std::uint32_t height,
                                     std::uint8_t view_mask = kViewAll,
                                     wire::Compression compression = wire::Compression::kRaw);
  FrameViews get_frame();

  net::Socket& socket() { return socket_; }

 private:
  net::Socket socket_;
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
};

// Polls `condition` until it holds or `timeout` elapses.
bool eventually(const std::function<bool()>& condition,
                std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace visenv::testkit
