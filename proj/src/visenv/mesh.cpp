#include "visenv/scene.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace visenv {

namespace {

void add_quad(Mesh& mesh, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
              const Vec3& normal) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (const Vec3* v : {&a, &b, &c, &d}) {
    mesh.vertices.push_back(*v);
    mesh.normals.push_back(normal);
  }
  mesh.triangles.push_back({base, base + 1, base + 2});
  mesh.triangles.push_back({base, base + 2, base + 3});
}

}  // namespace

Mesh make_box(const Vec3& extents) {
  const Vec3 h = extents / 2.0;
  Mesh mesh;
  // +x, -x, +y, -y, +z, -z
  add_quad(mesh, {h.x(), -h.y(), -h.z()}, {h.x(), h.y(), -h.z()}, {h.x(), h.y(), h.z()},
           {h.x(), -h.y(), h.z()}, Vec3::UnitX());
  add_quad(mesh, {-h.x(), -h.y(), h.z()}, {-h.x(), h.y(), h.z()}, {-h.x(), h.y(), -h.z()},
           {-h.x(), -h.y(), -h.z()}, -Vec3::UnitX());
  add_quad(mesh, {-h.x(), h.y(), -h.z()}, {-h.x(), h.y(), h.z()}, {h.x(), h.y(), h.z()},
           {h.x(), h.y(), -h.z()}, Vec3::UnitY());
  add_quad(mesh, {-h.x(), -h.y(), h.z()}, {-h.x(), -h.y(), -h.z()}, {h.x(), -h.y(), -h.z()},
           {h.x(), -h.y(), h.z()}, -Vec3::UnitY());
  add_quad(mesh, {-h.x(), -h.y(), h.z()}, {h.x(), -h.y(), h.z()}, {h.x(), h.y(), h.z()},
           {-h.x(), h.y(), h.z()}, Vec3::UnitZ());
  add_quad(mesh, {h.x(), -h.y(), -h.z()}, {-h.x(), -h.y(), -h.z()}, {-h.x(), h.y(), -h.z()},
           {h.x(), h.y(), -h.z()}, -Vec3::UnitZ());
  return mesh;
}

Mesh make_plane(double size_x, double size_z) {
  const double hx = size_x / 2.0, hz = size_z / 2.0;
  Mesh mesh;
  add_quad(mesh, {-hx, 0.0, -hz}, {-hx, 0.0, hz}, {hx, 0.0, hz}, {hx, 0.0, -hz}, Vec3::UnitY());
  return mesh;
}

Mesh make_cylinder(double diameter, double height, int segments) {
  const double r = diameter / 2.0, hy = height / 2.0;
  Mesh mesh;
  // Side: one ring of vertices top and bottom, smooth radial normals.
  for (int i = 0; i <= segments; ++i) {
    const double a = 2.0 * kPi * i / segments;
    const Vec3 n(std::cos(a), 0.0, std::sin(a));
    mesh.vertices.push_back({r * n.x(), -hy, r * n.z()});
    mesh.normals.push_back(n);
    mesh.vertices.push_back({r * n.x(), hy, r * n.z()});
    mesh.normals.push_back(n);
  }
  for (int i = 0; i < segments; ++i) {
    const auto b0 = static_cast<std::uint32_t>(2 * i);
    mesh.triangles.push_back({b0, b0 + 1, b0 + 3});
    mesh.triangles.push_back({b0, b0 + 3, b0 + 2});
  }
  for (double side : {-1.0, 1.0}) {
    const auto center = static_cast<std::uint32_t>(mesh.vertices.size());
    const Vec3 n(0.0, side, 0.0);
    mesh.vertices.push_back({0.0, side * hy, 0.0});
    mesh.normals.push_back(n);
    for (int i = 0; i <= segments; ++i) {
      const double a = 2.0 * kPi * i / segments;
      mesh.vertices.push_back({r * std::cos(a), side * hy, r * std::sin(a)});
      mesh.normals.push_back(n);
    }
    for (int i = 0; i < segments; ++i) {
      const auto v = center + 1 + static_cast<std::uint32_t>(i);
      mesh.triangles.push_back({center, v, v + 1});
    }
  }
  return mesh;
}

Mesh make_sphere(double diameter, int stacks, int slices) {
  const double r = diameter / 2.0;
  Mesh mesh;
  for (int i = 0; i <= stacks; ++i) {
    const double phi = kPi * i / stacks;
    for (int j = 0; j <= slices; ++j) {
      const double theta = 2.0 * kPi * j / slices;
      const Vec3 n(std::sin(phi) * std::cos(theta), std::cos(phi), std::sin(phi) * std::sin(theta));
      mesh.vertices.push_back(r * n);
      mesh.normals.push_back(n);
    }
  }
  const auto row = static_cast<std::uint32_t>(slices + 1);
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      const auto a = static_cast<std::uint32_t>(i) * row + static_cast<std::uint32_t>(j);
      const auto b = a + row;
      if (i != 0) mesh.triangles.push_back({a, b, a + 1});
      if (i != stacks - 1) mesh.triangles.push_back({a + 1, b, b + 1});
    }
  }
  return mesh;
}

// Triangulated Wavefront OBJ: positions and normals only. Every face corner
// becomes its own vertex so normals stay per-vertex.
Mesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::kIo, "cannot open OBJ file: " + path);

  std::vector<Vec3> positions, normals;
  Mesh mesh;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw SceneError(SceneError::Kind::kParse,
                     path + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) fail("bad vector");
      (tag == "v" ? positions : normals).push_back(v);
    } else if (tag == "f") {
      std::vector<std::pair<long, long>> corners;
      std::string tok;
      while (ls >> tok) {
        // v, v/vt, v//vn or v/vt/vn
        long vi = 0, ni = 0;
        std::vector<std::string> parts;
        std::istringstream ts(tok);
        for (std::string part; std::getline(ts, part, '/');) parts.push_back(part);
        try {
          vi = std::stol(parts.at(0));
          if (parts.size() >= 3 && !parts[2].empty()) ni = std::stol(parts[2]);
        } catch (const std::exception&) {
          fail("bad face index '" + tok + "'");
        }
        if (vi < 0) vi += static_cast<long>(positions.size()) + 1;
        if (ni < 0) ni += static_cast<long>(normals.size()) + 1;
        if (vi < 1 || vi > static_cast<long>(positions.size())) fail("vertex index out of range");
        if (ni > static_cast<long>(normals.size())) fail("normal index out of range");
        corners.emplace_back(vi, ni);
      }
      if (corners.size() != 3) fail("only triangulated faces are supported");
      const Vec3 p0 = positions[corners[0].first - 1];
      const Vec3 p1 = positions[corners[1].first - 1];
      const Vec3 p2 = positions[corners[2].first - 1];
      Vec3 face_n = (p1 - p0).cross(p2 - p0);
      face_n = face_n.norm() > 0.0 ? face_n.normalized() : Vec3::UnitY();
      const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
      for (const auto& [vi, ni] : corners) {
        mesh.vertices.push_back(positions[vi - 1]);
        Vec3 n = ni > 0 ? normals[ni - 1] : face_n;
        mesh.normals.push_back(n.norm() > 0.0 ? n.normalized() : face_n);
      }
      mesh.triangles.push_back({base, base + 1, base + 2});
    }
  }
  if (mesh.triangles.empty()) {
    throw SceneError(SceneError::Kind::kParse, path + ": no triangles");
  }
  return mesh;
}

Mesh build_mesh(const MeshSource& source, const std::string& base_dir) {
  if (const auto* obj = std::get_if<ObjFileSpec>(&source)) {
    std::filesystem::path p(obj->path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_obj(p.string());
  }
  const auto& prim = std::get<PrimitiveSpec>(source);
  switch (prim.kind) {
    case PrimitiveSpec::Kind::kBox: return make_box(prim.size);
    case PrimitiveSpec::Kind::kPlane: return make_plane(prim.size.x(), prim.size.z());
    case PrimitiveSpec::Kind::kCylinder: return make_cylinder(prim.size.x(), prim.size.y());
    case PrimitiveSpec::Kind::kSphere: return make_sphere(prim.size.x());
  }
  return {};
}

}  // namespace visenv
