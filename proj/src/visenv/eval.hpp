#pragma once

#include "visenv/render.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace visenv {

struct BlockMatchParams {
  int block_size = 8;
  int search_radius = 4;
  int pyramid_levels = 3;

  // Largest displacement the pyramid can reach, in full-resolution pixels.
  int max_displacement() const { return search_radius * ((1 << pyramid_levels) - 1); }
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;
};

// Rec. 601 luma from a B G R byte image.
GrayImage to_grayscale(const std::vector<std::uint8_t>& bgr, int width, int height);

// Dense displacement field (px/frame) mapping frame_a onto frame_b, interleaved
// (dx, dy) per pixel like the engine flow. Throws std::invalid_argument when the
// frames differ in shape or the parameters are invalid.
std::vector<float> estimate_flow_blockmatch(const GrayImage& frame_a, const GrayImage& frame_b,
                                            const BlockMatchParams& params = {});

struct EndpointError {
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;
};

// Per-pixel Euclidean distance between two interleaved flow fields. With a
// mask, only pixels where mask[i] != 0 count.
EndpointError endpoint_error(const std::vector<float>& flow_est, const std::vector<float>& flow_ref,
                             const std::vector<std::uint8_t>* mask = nullptr);

// Masks are row-major, nonzero = set.
double iou(const std::vector<std::uint8_t>& mask_a, const std::vector<std::uint8_t>& mask_b);
double bounding_box_iou(const std::vector<std::uint8_t>& mask_a,
                        const std::vector<std::uint8_t>& mask_b, int width, int height);

struct Resolution {
  int width = 0;
  int height = 0;
};

std::vector<Resolution> default_bench_resolutions();

struct TimingRecord {
  Resolution resolution;
  std::string method;  // "engine" or "blockmatch"
  double mean_s = 0.0;
  double ci95_s = 0.0;  // half-width
  std::size_t samples = 0;
};

// Mean and Student-t 95% half-width; needs at least two samples.
TimingRecord summarize_timings(Resolution resolution, std::string method,
                               const std::vector<double>& seconds);

struct BenchOptions {
  std::vector<Resolution> resolutions = default_bench_resolutions();
  std::size_t samples = 100;
  std::size_t warmup = 5;
  std::uint64_t seed = 0;
  BlockMatchParams blockmatch;
};

// Times engine flow (flow-only render) against block matching on consecutive
// main views, per resolution. The agent follows the scene's mover and the world
// advances one tick between samples.
std::vector<TimingRecord> benchmark_flow(const Scene& scene, const BenchOptions& options = {});

void write_bench_csv(std::ostream& out, const std::vector<TimingRecord>& records);
void write_bench_table(std::ostream& out, const std::vector<TimingRecord>& records);

}  // namespace visenv
