#include "visenv/render.hpp"

#include <algorithm>
#include <cmath>

namespace visenv {

std::uint8_t FrameViews::mask() const {
  std::uint8_t m = 0;
  if (main) m |= kViewMain;
  if (category) m |= kViewCategory;
  if (object) m |= kViewObject;
  if (flow) m |= kViewFlow;
  if (depth) m |= kViewDepth;
  return m;
}

std::vector<std::uint8_t> shade_main(const GBuffer& gb, const Light& light) {
  if (gb.normal.size() != gb.size() || gb.albedo.size() != gb.size()) {
    throw std::invalid_argument("shade_main: G-buffer was rasterized without shading");
  }
  std::vector<std::uint8_t> out(gb.size() * 3, 0);
  const Eigen::Vector3f to_light = (-light.direction).cast<float>();
  for (std::size_t i = 0; i < gb.size(); ++i) {
    if (!gb.covered(i)) continue;
    const double lambert = std::max(0.0, static_cast<double>(gb.normal[i].dot(to_light)));
    const double k = light.ambient + lambert * (1.0 - light.ambient);
    const Bgr a = gb.albedo[i];
    out[3 * i + 0] = clamp_to_byte(a.b * k);
    out[3 * i + 1] = clamp_to_byte(a.g * k);
    out[3 * i + 2] = clamp_to_byte(a.r * k);
  }
  return out;
}

std::uint8_t depth_byte(double z, double near, double far) {
  return clamp_to_byte(255.0 * (far - z) / (far - near));
}

std::vector<std::uint8_t> render_depth(const GBuffer& gb, double near, double far) {
  std::vector<std::uint8_t> out(gb.size(), 0);
  for (std::size_t i = 0; i < gb.size(); ++i) {
    if (gb.covered(i)) out[i] = depth_byte(gb.depth[i], near, far);
  }
  return out;
}

std::vector<std::uint8_t> render_category(const GBuffer& gb, const Scene& scene) {
  std::vector<std::uint8_t> out(gb.size(), 0);
  for (std::size_t i = 0; i < gb.size(); ++i) {
    if (!gb.covered(i)) continue;
    const auto oi = static_cast<std::size_t>(gb.object_index[i]);
    if (oi >= scene.objects.size() || scene.objects[oi].instance_id != gb.instance_id[i]) {
      throw std::logic_error("g-buffer references instance " + std::to_string(gb.instance_id[i]) +
                             " which is not in the scene");
    }
    out[i] = scene.objects[oi].category_id;
  }
  return out;
}

Bgr encode_instance(std::uint32_t id) {
  return {static_cast<std::uint8_t>(id & 0xFF), static_cast<std::uint8_t>((id >> 8) & 0xFF),
          static_cast<std::uint8_t>((id >> 16) & 0xFF)};
}

std::uint32_t decode_instance(Bgr c) {
  return static_cast<std::uint32_t>(c.b) | (static_cast<std::uint32_t>(c.g) << 8) |
         (static_cast<std::uint32_t>(c.r) << 16);
}

std::vector<std::uint8_t> render_instance(const GBuffer& gb) {
  std::vector<std::uint8_t> out(gb.size() * 3, 0);
  for (std::size_t i = 0; i < gb.size(); ++i) {
    if (!gb.covered(i)) continue;
    const Bgr c = encode_instance(gb.instance_id[i]);
    out[3 * i + 0] = c.b;
    out[3 * i + 1] = c.g;
    out[3 * i + 2] = c.r;
  }
  return out;
}

std::vector<float> compute_flow(const GBuffer& gb, const Snapshot& snapshot,
                                const CameraKinematics& camera, const CameraIntrinsics& k) {
  std::vector<float> out(gb.size() * 2, 0.0f);
  std::vector<const BodySnapshot*> body_of;
  if (snapshot.scene) body_of.assign(snapshot.scene->objects.size(), nullptr);
  for (const auto& b : snapshot.bodies) {
    if (b.object_index < body_of.size()) body_of[b.object_index] = &b;
  }

  const Mat3 rt = camera.pose.rotation.transpose();
  const Vec3 cam_omega = rt * camera.angular_velocity;
  for (int y = 0; y < gb.height; ++y) {
    for (int x = 0; x < gb.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * gb.width + x;
      if (!gb.covered(i)) continue;
      const Vec3 p = gb.point(x, y);
      Vec3 world_vel = Vec3::Zero();
      const auto oi = static_cast<std::size_t>(gb.object_index[i]);
      if (oi < body_of.size() && body_of[oi]) {
        const BodySnapshot& b = *body_of[oi];
        world_vel = b.linear_velocity + b.angular_velocity.cross(camera.pose.to_world(p) - b.center);
      }
      const Vec3 p_dot = rt * (world_vel - camera.linear_velocity) - cam_omega.cross(p);
      const double z2 = p.z() * p.z();
      out[2 * i + 0] = static_cast<float>(k.fx * (p_dot.x() * p.z() - p.x() * p_dot.z()) / z2);
      out[2 * i + 1] = static_cast<float>(k.fy * (p_dot.y() * p.z() - p.y() * p_dot.z()) / z2);
    }
  }
  return out;
}

std::vector<std::uint8_t> flow_to_hsv(const std::vector<float>& flow, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> out(n * 3, 0);
  double max_mag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_mag = std::max(max_mag, std::hypot(double{flow[2 * i]}, double{flow[2 * i + 1]}));
  }
  if (max_mag == 0.0) return out;

  for (std::size_t i = 0; i < n; ++i) {
    const double vx = flow[2 * i], vy = flow[2 * i + 1];
    const double value = std::min(1.0, std::hypot(vx, vy) / max_mag);
    if (value == 0.0) continue;
    double hue = rad_to_deg(std::atan2(vy, vx));
    if (hue < 0.0) hue += 360.0;
    if (hue >= 360.0) hue -= 360.0;
    // HSV -> RGB with S = 1, so chroma = value and the minimum channel is 0.
    const double h = hue / 60.0;
    const double x = value * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = value; g = x; break;
      case 1: r = x; g = value; break;
      case 2: g = value; b = x; break;
      case 3: g = x; b = value; break;
      case 4: r = x; b = value; break;
      default: r = value; b = x; break;
    }
    out[3 * i + 0] = clamp_to_byte(255.0 * b);
    out[3 * i + 1] = clamp_to_byte(255.0 * g);
    out[3 * i + 2] = clamp_to_byte(255.0 * r);
  }
  return out;
}

FrameViews render_views(const Snapshot& snapshot, const CameraKinematics& camera,
                        const CameraIntrinsics& k, std::uint8_t requested) {
  FrameViews views;
  views.width = k.width;
  views.height = k.height;
  if ((requested & kViewAll) == 0 || !snapshot.scene) return views;

  const GBuffer gb = rasterize(snapshot, camera.pose, k, (requested & kViewMain) != 0);
  const Scene& scene = *snapshot.scene;
  if (requested & kViewMain) views.main = shade_main(gb, scene.light);
  if (requested & kViewCategory) views.category = render_category(gb, scene);
  if (requested & kViewObject) views.object = render_instance(gb);
  if (requested & kViewFlow) views.flow = compute_flow(gb, snapshot, camera, k);
  if (requested & kViewDepth) views.depth = render_depth(gb, k.near, k.far);
  return views;
}

FrameViews render_agent_views(const Snapshot& snapshot, std::uint32_t agent_id, int width,
                              int height, std::uint8_t requested) {
  const AgentState* agent = snapshot.find_agent(agent_id);
  if (!agent) throw std::logic_error("agent " + std::to_string(agent_id) + " is not in the snapshot");
  const auto k = intrinsics_for(snapshot.scene->camera, width, height);
  return render_views(snapshot, camera_kinematics(*agent), k, requested);
}

}  // namespace visenv
