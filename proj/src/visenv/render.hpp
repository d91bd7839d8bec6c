#pragma once

#include "visenv/world.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace visenv {

struct CameraIntrinsics {
  int width = 1;
  int height = 1;
  double fx = 1.0, fy = 1.0;
  double cx = 0.5, cy = 0.5;
  double near = 0.1, far = 100.0;
};

// f_y from the vertical field of view, square pixels, principal point at the
// image center.
CameraIntrinsics intrinsics_for(const CameraDefaults& camera, int width, int height);

// Camera frame used for projection: x right, y down, z forward.
// `rotation` maps camera-frame vectors to world; `position` is the optical center.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation.transpose() * (world - position); }
  Vec3 to_world(const Vec3& cam) const { return rotation * cam + position; }
};

// Agent poses use +y up and look down -z.
CameraPose camera_from_pose(const Pose& agent_pose);

struct CameraKinematics {
  CameraPose pose;
  Vec3 linear_velocity = Vec3::Zero();   // world frame
  Vec3 angular_velocity = Vec3::Zero();  // world frame
};

CameraKinematics camera_kinematics(const AgentState& agent);

class NotProjectable : public std::domain_error {
 public:
  NotProjectable() : std::domain_error("point is not in front of the camera") {}
};

// Pinhole projection; throws NotProjectable for Z <= 0.
Eigen::Vector2d project(const Vec3& camera_point, const CameraIntrinsics& intrinsics);

struct GBuffer {
  int width = 0;
  int height = 0;
  double fx = 1.0, fy = 1.0, cx = 0.5, cy = 0.5;
  std::vector<std::int32_t> object_index;  // -1 for background
  std::vector<std::uint32_t> instance_id;  // 0 for background
  std::vector<double> depth;               // camera Z; +inf for background
  std::vector<Eigen::Vector3f> normal;     // world frame, unit; empty unless shaded
  std::vector<Bgr> albedo;                 // empty unless shaded

  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
  bool covered(std::size_t i) const { return object_index[i] >= 0; }
  // Camera-frame surface point on the ray through the center of pixel i.
  Vec3 point(int x, int y) const {
    const double z = depth[static_cast<std::size_t>(y) * width + x];
    return {(x + 0.5 - cx) / fx * z, (y + 0.5 - cy) / fy * z, z};
  }
};

// Without `shading`, normal and albedo are left empty (enough for every view
// but main).
GBuffer rasterize(const Snapshot& snapshot, const CameraPose& camera,
                  const CameraIntrinsics& intrinsics, bool shading = true);

enum ViewBits : std::uint8_t {
  kViewMain = 1u << 0,
  kViewCategory = 1u << 1,
  kViewObject = 1u << 2,
  kViewFlow = 1u << 3,
  kViewDepth = 1u << 4,
  kViewAll = 0x1F,
};

struct FrameViews {
  int width = 0;
  int height = 0;
  std::optional<std::vector<std::uint8_t>> main;      // H*W*3, B G R
  std::optional<std::vector<std::uint8_t>> category;  // H*W
  std::optional<std::vector<std::uint8_t>> object;    // H*W*3, id bytes low to high
  std::optional<std::vector<float>> flow;             // H*W*2, (v_x, v_y) px/s
  std::optional<std::vector<std::uint8_t>> depth;     // H*W

  std::uint8_t mask() const;
  friend bool operator==(const FrameViews&, const FrameViews&) = default;
};

std::vector<std::uint8_t> shade_main(const GBuffer& gbuffer, const Light& light);
std::vector<std::uint8_t> render_depth(const GBuffer& gbuffer, double near, double far);
std::uint8_t depth_byte(double z, double near, double far);
std::vector<std::uint8_t> render_category(const GBuffer& gbuffer, const Scene& scene);
std::vector<std::uint8_t> render_instance(const GBuffer& gbuffer);
Bgr encode_instance(std::uint32_t id);
std::uint32_t decode_instance(Bgr bgr);

// Instantaneous motion field in pixels per second, image y pointing down.
std::vector<float> compute_flow(const GBuffer& gbuffer, const Snapshot& snapshot,
                                const CameraKinematics& camera,
                                const CameraIntrinsics& intrinsics);

// Hue = flow direction, saturation 1, value = magnitude / frame max. B G R bytes.
std::vector<std::uint8_t> flow_to_hsv(const std::vector<float>& flow, int width, int height);

FrameViews render_views(const Snapshot& snapshot, const CameraKinematics& camera,
                        const CameraIntrinsics& intrinsics, std::uint8_t requested);

// Renders what a registered agent sees, using the scene's camera defaults.
FrameViews render_agent_views(const Snapshot& snapshot, std::uint32_t agent_id, int width,
                              int height, std::uint8_t requested);

// PNG for 1- or 3-channel byte images (3-channel input is B G R).
void write_png(const std::string& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels);

// "PIEH" magic, int32 width, int32 height, then interleaved float32 (v_x, v_y), little-endian.
void write_flo(const std::string& path, int width, int height, const std::vector<float>& flow);
std::vector<float> read_flo(const std::string& path, int& width, int& height);

}  // namespace visenv
