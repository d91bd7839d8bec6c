#include "visenv/scene.hpp"

namespace visenv {

namespace {

// Flat-shaded room: furniture proxies, a toy plane flying between waypoints,
// a few objects that get shoved around, and a mover circling the room.
constexpr const char* kRoomSimple = R"json({
  "name": "room_simple",
  "categories": [
    {"id": 1, "name": "floor"},
    {"id": 2, "name": "wall"},
    {"id": 3, "name": "bed"},
    {"id": 4, "name": "dining table"},
    {"id": 5, "name": "chair"},
    {"id": 6, "name": "couch"},
    {"id": 7, "name": "airplane"},
    {"id": 8, "name": "bottle"},
    {"id": 9, "name": "ball"}
  ],
  "objects": [
    {"name": "floor", "id": 1, "primitive": {"kind": "plane", "size": [8, 0, 8]},
     "albedo": [90, 120, 150], "category": 1},
    {"name": "wall_north", "id": 2, "primitive": {"kind": "box", "size": [8, 3, 0.1]},
     "albedo": [200, 210, 215], "pose": {"position": [0, 1.5, -4]}, "category": 2},
    {"name": "wall_south", "id": 3, "primitive": {"kind": "box", "size": [8, 3, 0.1]},
     "albedo": [200, 210, 215], "pose": {"position": [0, 1.5, 4]}, "category": 2},
    {"name": "wall_east", "id": 4, "primitive": {"kind": "box", "size": [0.1, 3, 8]},
     "albedo": [185, 200, 210], "pose": {"position": [4, 1.5, 0]}, "category": 2},
    {"name": "wall_west", "id": 5, "primitive": {"kind": "box", "size": [0.1, 3, 8]},
     "albedo": [185, 200, 210], "pose": {"position": [-4, 1.5, 0]}, "category": 2},
    {"name": "bed", "id": 6, "primitive": {"kind": "box", "size": [1.6, 0.5, 2.1]},
     "albedo": [160, 110, 60], "pose": {"position": [-2.8, 0.25, -2.6]}, "category": 3},
    {"name": "dining_table", "id": 7, "primitive": {"kind": "box", "size": [1.4, 0.75, 0.9]},
     "albedo": [40, 80, 130], "pose": {"position": [1.5, 0.375, -1.5]}, "category": 4},
    {"name": "chair_a", "id": 8, "primitive": {"kind": "box", "size": [0.45, 0.9, 0.45]},
     "albedo": [30, 60, 100], "pose": {"position": [0.5, 0.45, -1.5]}, "category": 5},
    {"name": "chair_b", "id": 9, "primitive": {"kind": "box", "size": [0.45, 0.9, 0.45]},
     "albedo": [30, 60, 100], "pose": {"position": [2.5, 0.45, -1.5], "euler_deg": [0, 180, 0]},
     "category": 5},
    {"name": "couch", "id": 10, "primitive": {"kind": "box", "size": [2.2, 0.8, 0.9]},
     "albedo": [70, 140, 60], "pose": {"position": [-1.5, 0.4, 3.2]}, "category": 6},
    {"name": "toy_plane", "id": 11, "primitive": {"kind": "box", "size": [0.7, 0.15, 0.3]},
     "albedo": [50, 90, 170], "pose": {"position": [0, 2.3, 0]}, "category": 7,
     "static": false, "mass": 0.8,
     "behaviors": [
       {"kind": "wander", "speed": 1.2, "interval": [2.0, 5.0], "seed": 11,
        "waypoints": [[-2.5, 2.3, -2.5], [2.5, 2.4, -2.5], [2.5, 2.2, 2.5], [-2.5, 2.5, 2.5]]}
     ]},
    {"name": "bottle", "id": 12, "primitive": {"kind": "cylinder", "diameter": 0.12, "height": 0.3},
     "albedo": [60, 160, 60], "pose": {"position": [1.5, 0.9, -1.5]}, "category": 8,
     "static": false, "mass": 0.5,
     "behaviors": [
       {"kind": "poltergeist", "force_impulse": [0.05, 0.2], "torque_impulse": [0.5, 2.0],
        "interval": [2.0, 4.0], "seed": 12}
     ]},
    {"name": "ball", "id": 13, "primitive": {"kind": "sphere", "diameter": 0.3},
     "albedo": [30, 30, 200], "pose": {"position": [-0.8, 0.15, 0.8]}, "category": 9,
     "static": false, "mass": 0.4,
     "behaviors": [
       {"kind": "poltergeist", "force_impulse": [0.05, 0.25], "torque_impulse": [0.5, 3.0],
        "interval": [1.5, 3.5], "seed": 13}
     ]}
  ],
  "mover": {
    "waypoints": [
      {"position": [0, 1.5, 2.8], "euler_deg": [-10, 0, 0]},
      {"position": [2.8, 1.5, 0], "euler_deg": [-10, 90, 0]},
      {"position": [0, 1.5, -2.8], "euler_deg": [-10, 180, 0]},
      {"position": [-2.8, 1.5, 0], "euler_deg": [-10, 270, 0]}
    ],
    "total_time": 24
  },
  "light": {"direction": [-0.3, -1.0, -0.4], "ambient": 0.3},
  "camera": {"near": 0.1, "far": 20, "fov_deg": 60}
})json";

// Two uniformly colored rotating cubes and a rotating cylinder in front of a
// fixed camera; a debugging scene for the motion field.
constexpr const char* kOptical = R"json({
  "name": "optical",
  "categories": [
    {"id": 1, "name": "cube"},
    {"id": 2, "name": "cylinder"}
  ],
  "objects": [
    {"name": "cube_left", "id": 1, "primitive": {"kind": "box", "size": [1, 1, 1]},
     "albedo": [40, 40, 210], "pose": {"position": [-1.3, 0.4, -4], "euler_deg": [20, 30, 0]},
     "category": 1, "static": false, "mass": 1.0,
     "behaviors": [{"kind": "rotate", "axis": [0, 1, 0], "angular_speed": 1.2}]},
    {"name": "cube_right", "id": 2, "primitive": {"kind": "box", "size": [1, 1, 1]},
     "albedo": [200, 80, 40], "pose": {"position": [1.3, 0.4, -4.5], "euler_deg": [0, 10, 35]},
     "category": 1, "static": false, "mass": 1.0,
     "behaviors": [{"kind": "rotate", "axis": [0.6, 0.8, 0], "angular_speed": 1.6}]},
    {"name": "cylinder", "id": 3, "primitive": {"kind": "cylinder", "diameter": 0.8, "height": 1.4},
     "albedo": [60, 190, 60], "pose": {"position": [0, -0.9, -5], "euler_deg": [0, 0, 90]},
     "category": 2, "static": false, "mass": 1.0,
     "behaviors": [{"kind": "rotate", "axis": [0, 0, 1], "angular_speed": 0.9}]}
  ],
  "mover": {"waypoints": [{"position": [0, 0, 0]}], "total_time": 10},
  "light": {"direction": [-0.4, -0.6, -0.7], "ambient": 0.25},
  "camera": {"near": 0.1, "far": 20, "fov_deg": 60}
})json";

}  // namespace

std::vector<std::string> builtin_scene_documents() { return {kRoomSimple, kOptical}; }

const std::vector<Scene>& builtin_scenes() {
  static const std::vector<Scene> scenes = [] {
    std::vector<Scene> out;
    for (const auto& doc : builtin_scene_documents()) out.push_back(load_scene(doc));
    return out;
  }();
  return scenes;
}

const Scene* find_builtin_scene(std::string_view name) {
  for (const auto& s : builtin_scenes()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace visenv
