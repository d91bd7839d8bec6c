#pragma once

#include "visenv/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace visenv {

struct DumpOptions {
  double seconds = 1.0;
  double fps = 10.0;
  int width = 256;
  int height = 192;
  std::string outdir = ".";
  std::uint64_t seed = 0;
};

// Simulates `scene` with one agent following the mover and writes, per sampled
// tick, t<tick>_{main,depth,category,object,flow_hsv}.png and t<tick>_flow.flo.
// Returns the written paths. Throws std::runtime_error on I/O failure.
std::vector<std::string> run_dump(const Scene& scene, const DumpOptions& options);

}  // namespace visenv
