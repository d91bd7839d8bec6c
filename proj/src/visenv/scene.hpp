#pragma once

#include "visenv/math.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace visenv {

inline constexpr std::uint32_t kMaxInstanceId = (1u << 24) - 1;

struct Bgr {
  std::uint8_t b = 0, g = 0, r = 0;
  friend bool operator==(const Bgr&, const Bgr&) = default;
};

struct Triangle {
  std::uint32_t a, b, c;
  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;  // per vertex
  std::vector<Triangle> triangles;
};

// Where an object's mesh came from; kept so a scene can be written back out.
struct PrimitiveSpec {
  enum class Kind { kBox, kPlane, kCylinder, kSphere };
  Kind kind = Kind::kBox;
  Vec3 size = Vec3::Ones();  // box: extents; plane: (x, -, z); cylinder: (diameter, height, -); sphere: (diameter, -, -)
  friend bool operator==(const PrimitiveSpec&, const PrimitiveSpec&) = default;
};

struct ObjFileSpec {
  std::string path;
  friend bool operator==(const ObjFileSpec&, const ObjFileSpec&) = default;
};

using MeshSource = std::variant<PrimitiveSpec, ObjFileSpec>;

struct Range {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct PoltergeistParams {
  Range force_impulse;   // delta-v magnitude, m/s
  Range torque_impulse;  // delta-omega magnitude, rad/s
  Range interval{1.0, 1.0};
  std::uint64_t seed = 0;
  friend bool operator==(const PoltergeistParams&, const PoltergeistParams&) = default;
};

struct WanderParams {
  std::vector<Vec3> waypoints;
  double speed = 1.0;
  Range interval{1.0, 1.0};
  std::uint64_t seed = 0;
  friend bool operator==(const WanderParams&, const WanderParams&) = default;
};

struct RotateParams {
  Vec3 axis = Vec3::UnitY();
  double angular_speed = 0.0;  // rad/s
  friend bool operator==(const RotateParams&, const RotateParams&) = default;
};

using BehaviorConfig = std::variant<PoltergeistParams, WanderParams, RotateParams>;

struct RigidBody {
  double mass = 1.0;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  friend bool operator==(const RigidBody&, const RigidBody&) = default;
};

struct Category {
  std::uint8_t id = 0;
  std::string name;
  friend bool operator==(const Category&, const Category&) = default;
};

struct SceneObject {
  std::uint32_t instance_id = 0;
  std::string name;
  MeshSource mesh_source;
  Mesh mesh;
  Bgr albedo;
  Pose pose;
  std::uint8_t category_id = 0;
  bool is_static = true;
  std::optional<RigidBody> rigidbody;
  std::vector<BehaviorConfig> behaviors;
};

struct MoverConfig {
  std::vector<Pose> waypoints;
  double total_time = 1.0;
};

struct Light {
  Vec3 direction = Vec3(0.0, -1.0, 0.0);  // unit, direction the light travels
  double ambient = 0.2;
};

struct CameraDefaults {
  double near = 0.1;
  double far = 100.0;
  double vertical_fov_deg = 60.0;
};

struct Scene {
  std::string name;
  std::vector<SceneObject> objects;
  std::vector<Category> categories;
  MoverConfig mover;
  Light light;
  CameraDefaults camera;

  const SceneObject* find_object(std::uint32_t instance_id) const;
};

class SceneError : public std::runtime_error {
 public:
  enum class Kind { kParse, kValidation, kIo };
  SceneError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Parses and validates a scene-description JSON document. Relative OBJ paths
// resolve against base_dir.
Scene load_scene(std::string_view document, const std::string& base_dir = ".");
Scene load_scene_file(const std::string& path);

// Writes the scene back out in the same schema load_scene accepts.
std::string serialize_scene(const Scene& scene);

// Throws SceneError(kValidation) on the first violated invariant.
void validate_scene(const Scene& scene);

std::map<std::uint8_t, std::string> category_table(const Scene& scene);

// Deep equality of the data model (meshes compared by source, not vertices).
bool same_scene(const Scene& a, const Scene& b);

// Built-in catalog, stable order: room_simple, optical.
const std::vector<Scene>& builtin_scenes();
std::vector<std::string> builtin_scene_documents();
const Scene* find_builtin_scene(std::string_view name);

Mesh make_box(const Vec3& extents);
Mesh make_plane(double size_x, double size_z);
Mesh make_cylinder(double diameter, double height, int segments = 32);
Mesh make_sphere(double diameter, int stacks = 16, int slices = 32);
Mesh load_obj(const std::string& path);
Mesh build_mesh(const MeshSource& source, const std::string& base_dir);

}  // namespace visenv
