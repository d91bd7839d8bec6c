#include "visenv/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace visenv {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) {
  throw SceneError(SceneError::Kind::kParse, msg);
}

[[noreturn]] void invalid(const std::string& msg) {
  throw SceneError(SceneError::Kind::kValidation, msg);
}

Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) parse_fail(std::string(what) + ": expected [x, y, z]");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!is_finite(v)) invalid(std::string(what) + ": non-finite component");
  return v;
}

json write_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Pose read_pose(const json& j) {
  Pose pose;
  if (!j.is_object()) parse_fail("pose: expected object");
  if (j.contains("position")) pose.position = read_vec3(j["position"], "pose.position");
  if (j.contains("quaternion")) {
    const auto& q = j["quaternion"];
    if (!q.is_array() || q.size() != 4) parse_fail("pose.quaternion: expected [w, x, y, z]");
    pose.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                            q[3].get<double>());
    const double n = pose.orientation.norm();
    if (!std::isfinite(n) || n == 0.0) invalid("pose.quaternion: degenerate");
    if (std::abs(n - 1.0) > 1e-6) pose.orientation.normalize();
  } else if (j.contains("euler_deg")) {
    pose.orientation = quat_from_euler_deg(read_vec3(j["euler_deg"], "pose.euler_deg"));
  }
  return pose;
}

json write_pose(const Pose& p) {
  const Quat& q = p.orientation;
  return json{{"position", write_vec3(p.position)},
              {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Range read_range(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& r = j[key];
  if (!r.is_array() || r.size() != 2) parse_fail(std::string(key) + ": expected [min, max]");
  return {r[0].get<double>(), r[1].get<double>()};
}

json write_range(const Range& r) { return json::array({r.min, r.max}); }

const char* primitive_name(PrimitiveSpec::Kind kind) {
  switch (kind) {
    case PrimitiveSpec::Kind::kBox: return "box";
    case PrimitiveSpec::Kind::kPlane: return "plane";
    case PrimitiveSpec::Kind::kCylinder: return "cylinder";
    case PrimitiveSpec::Kind::kSphere: return "sphere";
  }
  return "box";
}

PrimitiveSpec read_primitive(const json& j) {
  PrimitiveSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "box") {
    spec.kind = PrimitiveSpec::Kind::kBox;
    spec.size = j.contains("size") ? read_vec3(j["size"], "primitive.size") : Vec3::Ones();
  } else if (kind == "plane") {
    spec.kind = PrimitiveSpec::Kind::kPlane;
    spec.size = j.contains("size") ? read_vec3(j["size"], "primitive.size") : Vec3(1, 0, 1);
  } else if (kind == "cylinder") {
    spec.kind = PrimitiveSpec::Kind::kCylinder;
    spec.size = Vec3(j.value("diameter", 1.0), j.value("height", 1.0), 0.0);
  } else if (kind == "sphere") {
    spec.kind = PrimitiveSpec::Kind::kSphere;
    spec.size = Vec3(j.value("diameter", 1.0), 0.0, 0.0);
  } else {
    parse_fail("unknown primitive kind '" + kind + "'");
  }
  return spec;
}

json write_primitive(const PrimitiveSpec& spec) {
  json j{{"kind", primitive_name(spec.kind)}};
  switch (spec.kind) {
    case PrimitiveSpec::Kind::kBox:
    case PrimitiveSpec::Kind::kPlane: j["size"] = write_vec3(spec.size); break;
    case PrimitiveSpec::Kind::kCylinder:
      j["diameter"] = spec.size.x();
      j["height"] = spec.size.y();
      break;
    case PrimitiveSpec::Kind::kSphere: j["diameter"] = spec.size.x(); break;
  }
  return j;
}

BehaviorConfig read_behavior(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "poltergeist") {
    PoltergeistParams p;
    p.force_impulse = read_range(j, "force_impulse", {0.0, 1.0});
    p.torque_impulse = read_range(j, "torque_impulse", {0.0, 1.0});
    p.interval = read_range(j, "interval", {1.0, 3.0});
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
  }
  if (kind == "wander") {
    WanderParams p;
    for (const auto& w : j.at("waypoints")) p.waypoints.push_back(read_vec3(w, "wander.waypoints"));
    p.speed = j.value("speed", 1.0);
    p.interval = read_range(j, "interval", {2.0, 5.0});
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
  }
  if (kind == "rotate") {
    RotateParams p;
    Vec3 axis = j.contains("axis") ? read_vec3(j["axis"], "rotate.axis") : Vec3::UnitY();
    if (axis.norm() == 0.0) invalid("rotate.axis: zero vector");
    p.axis = std::abs(axis.norm() - 1.0) > 1e-6 ? axis.normalized() : axis;
    if (j.contains("angular_speed")) {
      p.angular_speed = j["angular_speed"].get<double>();
    } else {
      p.angular_speed = deg_to_rad(j.value("angular_speed_deg", 0.0));
    }
    return p;
  }
  parse_fail("unknown behavior kind '" + kind + "'");
}

json write_behavior(const BehaviorConfig& b) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoltergeistParams>) {
          return json{{"kind", "poltergeist"},
                      {"force_impulse", write_range(p.force_impulse)},
                      {"torque_impulse", write_range(p.torque_impulse)},
                      {"interval", write_range(p.interval)},
                      {"seed", p.seed}};
        } else if constexpr (std::is_same_v<T, WanderParams>) {
          json wps = json::array();
          for (const auto& w : p.waypoints) wps.push_back(write_vec3(w));
          return json{{"kind", "wander"},
                      {"waypoints", wps},
                      {"speed", p.speed},
                      {"interval", write_range(p.interval)},
                      {"seed", p.seed}};
        } else {
          return json{{"kind", "rotate"},
                      {"axis", write_vec3(p.axis)},
                      {"angular_speed", p.angular_speed}};
        }
      },
      b);
}

SceneObject read_object(const json& j, std::size_t index, const std::string& base_dir) {
  SceneObject obj;
  obj.name = j.value("name", "object" + std::to_string(index));
  const auto id = j.value("id", static_cast<std::int64_t>(index + 1));
  if (id < 1 || id > kMaxInstanceId) {
    invalid("object '" + obj.name + "': instance id " + std::to_string(id) + " outside [1, 2^24-1]");
  }
  obj.instance_id = static_cast<std::uint32_t>(id);

  if (j.contains("primitive")) {
    obj.mesh_source = read_primitive(j["primitive"]);
  } else if (j.contains("obj_file")) {
    obj.mesh_source = ObjFileSpec{j["obj_file"].get<std::string>()};
  } else {
    parse_fail("object '" + obj.name + "': needs 'primitive' or 'obj_file'");
  }
  obj.mesh = build_mesh(obj.mesh_source, base_dir);

  if (j.contains("albedo")) {
    const auto& a = j["albedo"];
    if (!a.is_array() || a.size() != 3) parse_fail("albedo: expected [b, g, r]");
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i) {
      c[i] = a[i].get<int>();
      if (c[i] < 0 || c[i] > 255) invalid("object '" + obj.name + "': albedo channel out of [0,255]");
    }
    obj.albedo = {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
                  static_cast<std::uint8_t>(c[2])};
  } else {
    obj.albedo = {180, 180, 180};
  }
  if (j.contains("pose")) obj.pose = read_pose(j["pose"]);

  const auto cat = j.value("category", 0);
  if (cat < 0 || cat > 255) invalid("object '" + obj.name + "': category id outside [0,255]");
  obj.category_id = static_cast<std::uint8_t>(cat);

  obj.is_static = j.value("static", true);
  if (j.contains("behaviors")) {
    for (const auto& b : j["behaviors"]) obj.behaviors.push_back(read_behavior(b));
  }
  if (!obj.is_static) {
    if (!j.contains("mass")) invalid("object '" + obj.name + "': moving objects must define a mass");
    RigidBody body;
    body.mass = j["mass"].get<double>();
    if (j.contains("velocity")) body.linear_velocity = read_vec3(j["velocity"], "velocity");
    if (j.contains("angular_velocity")) {
      body.angular_velocity = read_vec3(j["angular_velocity"], "angular_velocity");
    }
    obj.rigidbody = body;
  }
  return obj;
}

json write_object(const SceneObject& obj) {
  json j{{"name", obj.name},
         {"id", obj.instance_id},
         {"albedo", json::array({obj.albedo.b, obj.albedo.g, obj.albedo.r})},
         {"pose", write_pose(obj.pose)},
         {"category", obj.category_id},
         {"static", obj.is_static}};
  if (const auto* prim = std::get_if<PrimitiveSpec>(&obj.mesh_source)) {
    j["primitive"] = write_primitive(*prim);
  } else {
    j["obj_file"] = std::get<ObjFileSpec>(obj.mesh_source).path;
  }
  if (obj.rigidbody) {
    j["mass"] = obj.rigidbody->mass;
    j["velocity"] = write_vec3(obj.rigidbody->linear_velocity);
    j["angular_velocity"] = write_vec3(obj.rigidbody->angular_velocity);
  }
  if (!obj.behaviors.empty()) {
    json bs = json::array();
    for (const auto& b : obj.behaviors) bs.push_back(write_behavior(b));
    j["behaviors"] = bs;
  }
  return j;
}

void validate_range(const Range& r, const std::string& what, bool positive_min) {
  if (!(r.min >= 0.0 && r.min <= r.max) || !std::isfinite(r.max)) {
    invalid(what + ": need 0 <= min <= max");
  }
  if (positive_min && !(r.min > 0.0)) invalid(what + ": min must be > 0");
}

void validate_behavior(const BehaviorConfig& b, const std::string& owner) {
  if (const auto* p = std::get_if<PoltergeistParams>(&b)) {
    validate_range(p->force_impulse, owner + ": poltergeist force_impulse", false);
    validate_range(p->torque_impulse, owner + ": poltergeist torque_impulse", false);
    validate_range(p->interval, owner + ": poltergeist interval", true);
  } else if (const auto* w = std::get_if<WanderParams>(&b)) {
    if (w->waypoints.size() < 2) invalid(owner + ": wander needs at least 2 waypoints");
    if (!(w->speed > 0.0)) invalid(owner + ": wander speed must be > 0");
    validate_range(w->interval, owner + ": wander interval", true);
  } else {
    const auto& r = std::get<RotateParams>(b);
    if (std::abs(r.axis.norm() - 1.0) > 1e-6) invalid(owner + ": rotate axis must be unit length");
    if (!std::isfinite(r.angular_speed)) invalid(owner + ": rotate speed must be finite");
  }
}

void validate_mesh(const Mesh& mesh, const std::string& owner) {
  if (mesh.triangles.empty()) invalid(owner + ": mesh has no triangles");
  if (mesh.normals.size() != mesh.vertices.size()) invalid(owner + ": normal count mismatch");
  const auto n = mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    if (t.a >= n || t.b >= n || t.c >= n) invalid(owner + ": triangle index out of range");
  }
  for (const auto& nrm : mesh.normals) {
    if (std::abs(nrm.norm() - 1.0) > 1e-4) invalid(owner + ": normals must be unit length");
  }
}

}  // namespace

const SceneObject* Scene::find_object(std::uint32_t instance_id) const {
  for (const auto& obj : objects) {
    if (obj.instance_id == instance_id) return &obj;
  }
  return nullptr;
}

void validate_scene(const Scene& scene) {
  std::set<std::uint8_t> category_ids;
  for (const auto& c : scene.categories) {
    if (c.id == 0) invalid("category id 0 is reserved for background");
    if (c.name.empty()) invalid("category " + std::to_string(c.id) + " has an empty name");
    if (!category_ids.insert(c.id).second) {
      invalid("duplicate category id " + std::to_string(c.id));
    }
  }
  std::set<std::uint32_t> instance_ids;
  for (const auto& obj : scene.objects) {
    const std::string owner = "object '" + obj.name + "'";
    if (obj.instance_id < 1 || obj.instance_id > kMaxInstanceId) {
      invalid(owner + ": instance id outside [1, 2^24-1]");
    }
    if (!instance_ids.insert(obj.instance_id).second) {
      invalid("duplicate instance id " + std::to_string(obj.instance_id));
    }
    if (obj.category_id != 0 && !category_ids.count(obj.category_id)) {
      invalid(owner + ": unknown category id " + std::to_string(obj.category_id));
    }
    if (obj.is_static && (obj.rigidbody || !obj.behaviors.empty())) {
      invalid(owner + ": static objects cannot carry a rigidbody or behaviors");
    }
    if (!obj.behaviors.empty() && !obj.rigidbody) invalid(owner + ": behaviors need a rigidbody");
    if (!obj.is_static && !obj.rigidbody) invalid(owner + ": moving objects need a rigidbody");
    if (obj.rigidbody) {
      if (!(obj.rigidbody->mass > 0.0) || !std::isfinite(obj.rigidbody->mass)) {
        invalid(owner + ": mass must be > 0");
      }
      if (!is_finite(obj.rigidbody->linear_velocity) ||
          !is_finite(obj.rigidbody->angular_velocity)) {
        invalid(owner + ": velocities must be finite");
      }
    }
    if (!is_finite(obj.pose.position)) invalid(owner + ": non-finite position");
    if (std::abs(obj.pose.orientation.norm() - 1.0) > 1e-6) invalid(owner + ": orientation not unit");
    validate_mesh(obj.mesh, owner);
    for (const auto& b : obj.behaviors) validate_behavior(b, owner);
  }
  if (scene.mover.waypoints.empty()) invalid("mover needs at least one waypoint");
  if (!(scene.mover.total_time > 0.0) || !std::isfinite(scene.mover.total_time)) {
    invalid("mover total_time must be > 0");
  }
  const auto& cam = scene.camera;
  if (!(cam.near > 0.0 && cam.near < cam.far) || !std::isfinite(cam.far)) {
    invalid("camera needs 0 < near < far");
  }
  if (!(cam.vertical_fov_deg > 0.0 && cam.vertical_fov_deg < 180.0)) {
    invalid("camera fov_deg must be in (0, 180)");
  }
  if (!(scene.light.ambient >= 0.0 && scene.light.ambient <= 1.0)) {
    invalid("light ambient must be in [0, 1]");
  }
  if (std::abs(scene.light.direction.norm() - 1.0) > 1e-6) invalid("light direction must be unit");
}

Scene load_scene(std::string_view document, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("malformed scene document: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("scene document must be a JSON object");

  Scene scene;
  try {
    scene.name = doc.value("name", std::string("unnamed"));
    if (doc.contains("categories")) {
      for (const auto& c : doc["categories"]) {
        const auto id = c.at("id").get<int>();
        if (id < 1 || id > 255) invalid("category id " + std::to_string(id) + " outside [1,255]");
        scene.categories.push_back({static_cast<std::uint8_t>(id), c.at("name").get<std::string>()});
      }
    }
    if (doc.contains("objects")) {
      std::size_t index = 0;
      for (const auto& o : doc["objects"]) scene.objects.push_back(read_object(o, index++, base_dir));
    }
    if (doc.contains("mover")) {
      const auto& m = doc["mover"];
      for (const auto& w : m.at("waypoints")) scene.mover.waypoints.push_back(read_pose(w));
      scene.mover.total_time = m.value("total_time", 1.0);
    } else {
      scene.mover.waypoints.push_back(Pose{});
    }
    if (doc.contains("light")) {
      const auto& l = doc["light"];
      if (l.contains("direction")) {
        const Vec3 d = read_vec3(l["direction"], "light.direction");
        if (d.norm() == 0.0) invalid("light.direction: zero vector");
        scene.light.direction = std::abs(d.norm() - 1.0) > 1e-12 ? d.normalized() : d;
      }
      scene.light.ambient = l.value("ambient", scene.light.ambient);
    }
    if (doc.contains("camera")) {
      const auto& c = doc["camera"];
      scene.camera.near = c.value("near", scene.camera.near);
      scene.camera.far = c.value("far", scene.camera.far);
      scene.camera.vertical_fov_deg = c.value("fov_deg", scene.camera.vertical_fov_deg);
    }
  } catch (const json::exception& e) {
    parse_fail(std::string("malformed scene document: ") + e.what());
  }
  validate_scene(scene);
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::kIo, "cannot open scene file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return load_scene(buf.str(), dir.empty() ? "." : dir.string());
}

std::string serialize_scene(const Scene& scene) {
  json cats = json::array();
  for (const auto& c : scene.categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  json objs = json::array();
  for (const auto& o : scene.objects) objs.push_back(write_object(o));
  json wps = json::array();
  for (const auto& w : scene.mover.waypoints) wps.push_back(write_pose(w));
  json doc{{"name", scene.name},
           {"categories", cats},
           {"objects", objs},
           {"mover", {{"waypoints", wps}, {"total_time", scene.mover.total_time}}},
           {"light",
            {{"direction", write_vec3(scene.light.direction)}, {"ambient", scene.light.ambient}}},
           {"camera",
            {{"near", scene.camera.near},
             {"far", scene.camera.far},
             {"fov_deg", scene.camera.vertical_fov_deg}}}};
  return doc.dump(2);
}

std::map<std::uint8_t, std::string> category_table(const Scene& scene) {
  std::map<std::uint8_t, std::string> table;
  for (const auto& c : scene.categories) table.emplace(c.id, c.name);
  return table;
}

bool same_scene(const Scene& a, const Scene& b) {
  if (a.name != b.name || a.categories != b.categories || a.objects.size() != b.objects.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i];
    const auto& y = b.objects[i];
    if (x.instance_id != y.instance_id || x.name != y.name || x.mesh_source != y.mesh_source ||
        x.albedo != y.albedo || !(x.pose == y.pose) || x.category_id != y.category_id ||
        x.is_static != y.is_static || x.rigidbody != y.rigidbody || x.behaviors != y.behaviors) {
      return false;
    }
  }
  if (a.mover.total_time != b.mover.total_time ||
      a.mover.waypoints.size() != b.mover.waypoints.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.mover.waypoints.size(); ++i) {
    if (!(a.mover.waypoints[i] == b.mover.waypoints[i])) return false;
  }
  return a.light.direction == b.light.direction && a.light.ambient == b.light.ambient &&
         a.camera.near == b.camera.near && a.camera.far == b.camera.far &&
         a.camera.vertical_fov_deg == b.camera.vertical_fov_deg;
}

}  // namespace visenv
