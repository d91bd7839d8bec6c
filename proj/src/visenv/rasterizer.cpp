#include "visenv/render.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace visenv {

CameraIntrinsics intrinsics_for(const CameraDefaults& camera, int width, int height) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fy = (height / 2.0) / std::tan(deg_to_rad(camera.vertical_fov_deg) / 2.0);
  k.fx = k.fy;
  k.cx = width / 2.0;
  k.cy = height / 2.0;
  k.near = camera.near;
  k.far = camera.far;
  return k;
}

CameraPose camera_from_pose(const Pose& agent_pose) {
  CameraPose cam;
  cam.rotation = agent_pose.orientation.toRotationMatrix() * Vec3(1.0, -1.0, -1.0).asDiagonal();
  cam.position = agent_pose.position;
  return cam;
}

CameraKinematics camera_kinematics(const AgentState& agent) {
  return {camera_from_pose(agent.pose), agent.linear_velocity, agent.angular_velocity};
}

Eigen::Vector2d project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) throw NotProjectable();
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

namespace {

struct ClipVertex {
  Vec3 cam;
  Vec3 normal;  // world
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.cam + t * (b.cam - a.cam), a.normal + t * (b.normal - a.normal)};
}

// Sutherland-Hodgman against the plane Z = near; a triangle yields at most a quad.
int clip_near(const std::array<ClipVertex, 3>& in, double near, std::array<ClipVertex, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const auto& cur = in[i];
    const auto& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.cam.z() >= near;
    const bool nxt_in = nxt.cam.z() >= near;
    if (cur_in) out[n++] = cur;
    if (cur_in != nxt_in) {
      const double t = (near - cur.cam.z()) / (nxt.cam.z() - cur.cam.z());
      ClipVertex v = lerp(cur, nxt, t);
      v.cam.z() = near;
      out[n++] = v;
    }
  }
  return n;
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Shared edges are walked in opposite directions by their two triangles, so
// exactly one of them owns pixels lying on the edge.
bool owns_edge(double ax, double ay, double bx, double by) {
  const double dy = by - ay;
  return dy > 0.0 || (dy == 0.0 && bx - ax < 0.0);
}

class TriangleRasterizer {
 public:
  TriangleRasterizer(GBuffer& gb, const CameraIntrinsics& k, bool shading)
      : gb_(gb), k_(k), shading_(shading) {}

  void draw(ClipVertex v0, ClipVertex v1, ClipVertex v2, std::int32_t object_index,
            std::uint32_t instance_id, Bgr albedo) {
    double x0 = k_.fx * v0.cam.x() / v0.cam.z() + k_.cx, y0 = k_.fy * v0.cam.y() / v0.cam.z() + k_.cy;
    double x1 = k_.fx * v1.cam.x() / v1.cam.z() + k_.cx, y1 = k_.fy * v1.cam.y() / v1.cam.z() + k_.cy;
    double x2 = k_.fx * v2.cam.x() / v2.cam.z() + k_.cx, y2 = k_.fy * v2.cam.y() / v2.cam.z() + k_.cy;
    double area = edge(x0, y0, x1, y1, x2, y2);
    if (area == 0.0 || !std::isfinite(area)) return;
    if (area < 0.0) {
      std::swap(v1, v2);
      std::swap(x1, x2);
      std::swap(y1, y2);
      area = -area;
    }

    const int i_min = std::max(0, static_cast<int>(std::ceil(std::min({x0, x1, x2}) - 0.5)));
    const int i_max = std::min(k_.width - 1, static_cast<int>(std::floor(std::max({x0, x1, x2}) - 0.5)));
    const int j_min = std::max(0, static_cast<int>(std::ceil(std::min({y0, y1, y2}) - 0.5)));
    const int j_max = std::min(k_.height - 1, static_cast<int>(std::floor(std::max({y0, y1, y2}) - 0.5)));
    if (i_min > i_max || j_min > j_max) return;

    const bool own0 = owns_edge(x1, y1, x2, y2);
    const bool own1 = owns_edge(x2, y2, x0, y0);
    const bool own2 = owns_edge(x0, y0, x1, y1);
    const double inv_z0 = 1.0 / v0.cam.z(), inv_z1 = 1.0 / v1.cam.z(), inv_z2 = 1.0 / v2.cam.z();

    for (int j = j_min; j <= j_max; ++j) {
      const double py = j + 0.5;
      for (int i = i_min; i <= i_max; ++i) {
        const double px = i + 0.5;
        const double w0 = edge(x1, y1, x2, y2, px, py);
        const double w1 = edge(x2, y2, x0, y0, px, py);
        const double w2 = edge(x0, y0, x1, y1, px, py);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        if ((w0 == 0.0 && !own0) || (w1 == 0.0 && !own1) || (w2 == 0.0 && !own2)) continue;

        const double b0 = w0 / area, b1 = w1 / area, b2 = w2 / area;
        const double inv_z = b0 * inv_z0 + b1 * inv_z1 + b2 * inv_z2;
        const double z = 1.0 / inv_z;
        if (z < k_.near * (1.0 - 1e-12) || z > k_.far) continue;
        const std::size_t idx = static_cast<std::size_t>(j) * k_.width + i;
        if (!(z < gb_.depth[idx])) continue;

        gb_.depth[idx] = z;
        gb_.object_index[idx] = object_index;
        gb_.instance_id[idx] = instance_id;
        if (!shading_) continue;
        const Vec3 n = z * (b0 * inv_z0 * v0.normal + b1 * inv_z1 * v1.normal +
                            b2 * inv_z2 * v2.normal);
        const double len = n.norm();
        gb_.normal[idx] = (len > 0.0 ? n / len : v0.normal).cast<float>();
        gb_.albedo[idx] = albedo;
      }
    }
  }

 private:
  GBuffer& gb_;
  const CameraIntrinsics& k_;
  bool shading_;
};

}  // namespace

GBuffer rasterize(const Snapshot& snapshot, const CameraPose& camera, const CameraIntrinsics& k,
                  bool shading) {
  GBuffer gb;
  gb.width = k.width;
  gb.height = k.height;
  gb.fx = k.fx;
  gb.fy = k.fy;
  gb.cx = k.cx;
  gb.cy = k.cy;
  const std::size_t n = gb.size();
  gb.object_index.assign(n, -1);
  gb.instance_id.assign(n, 0);
  gb.depth.assign(n, std::numeric_limits<double>::infinity());
  if (shading) {
    gb.normal.assign(n, Eigen::Vector3f::Zero());
    gb.albedo.assign(n, Bgr{});
  }
  if (!snapshot.scene) return gb;

  const auto& objects = snapshot.scene->objects;
  std::vector<const Pose*> poses(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) poses[i] = &objects[i].pose;
  for (const auto& b : snapshot.bodies) {
    if (b.object_index < poses.size()) poses[b.object_index] = &b.pose;
  }

  const Mat3 world_to_cam = camera.rotation.transpose();
  TriangleRasterizer raster(gb, k, shading);
  std::vector<Vec3> cam_vertices;
  std::vector<Vec3> world_normals;
  for (std::size_t oi = 0; oi < objects.size(); ++oi) {
    const auto& obj = objects[oi];
    const Mat3 rot = poses[oi]->orientation.toRotationMatrix();
    const Vec3& pos = poses[oi]->position;
    const auto& mesh = obj.mesh;
    cam_vertices.resize(mesh.vertices.size());
    world_normals.resize(mesh.normals.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      cam_vertices[v] = world_to_cam * (rot * mesh.vertices[v] + pos - camera.position);
      world_normals[v] = rot * mesh.normals[v];
    }
    for (const auto& t : mesh.triangles) {
      const std::array<ClipVertex, 3> tri{ClipVertex{cam_vertices[t.a], world_normals[t.a]},
                                          ClipVertex{cam_vertices[t.b], world_normals[t.b]},
                                          ClipVertex{cam_vertices[t.c], world_normals[t.c]}};
      const double z_min = std::min({tri[0].cam.z(), tri[1].cam.z(), tri[2].cam.z()});
      const double z_max = std::max({tri[0].cam.z(), tri[1].cam.z(), tri[2].cam.z()});
      if (z_max < k.near || z_min > k.far) continue;
      std::array<ClipVertex, 4> poly;
      const int count = clip_near(tri, k.near, poly);
      for (int f = 1; f + 1 < count; ++f) {
        raster.draw(poly[0], poly[f], poly[f + 1], static_cast<std::int32_t>(oi), obj.instance_id,
                    obj.albedo);
      }
    }
  }
  return gb;
}

}  // namespace visenv
