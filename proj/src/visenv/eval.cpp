#include "visenv/eval.hpp"

#include "visenv/motion.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace visenv {

namespace {

GrayImage downsample(const GrayImage& in) {
  GrayImage out;
  out.width = std::max(1, in.width / 2);
  out.height = std::max(1, in.height / 2);
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      float sum = 0.0f;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sx = 2 * x + dx, sy = 2 * y + dy;
          if (sx < in.width && sy < in.height) {
            sum += in.pixels[static_cast<std::size_t>(sy) * in.width + sx];
            ++n;
          }
        }
      }
      out.pixels[static_cast<std::size_t>(y) * out.width + x] = sum / static_cast<float>(n);
    }
  }
  return out;
}

struct Displacement {
  int dx = 0;
  int dy = 0;
};

struct BlockGrid {
  int cols = 0;
  int rows = 0;
  int block = 0;
  std::vector<Displacement> d;
};

float block_sad(const GrayImage& a, const GrayImage& b, int x0, int y0, int x1, int y1, int dx,
                int dy) {
  float sad = 0.0f;
  const bool inside = x0 + dx >= 0 && y0 + dy >= 0 && x1 + dx <= b.width && y1 + dy <= b.height;
  for (int y = y0; y < y1; ++y) {
    const float* row_a = a.pixels.data() + static_cast<std::size_t>(y) * a.width;
    if (inside) {
      const float* row_b = b.pixels.data() + static_cast<std::size_t>(y + dy) * b.width + dx;
      for (int x = x0; x < x1; ++x) sad += std::abs(row_a[x] - row_b[x]);
    } else {
      // Edge replication outside frame_b.
      const int by = std::clamp(y + dy, 0, b.height - 1);
      const float* row_b = b.pixels.data() + static_cast<std::size_t>(by) * b.width;
      for (int x = x0; x < x1; ++x) {
        sad += std::abs(row_a[x] - row_b[std::clamp(x + dx, 0, b.width - 1)]);
      }
    }
  }
  return sad;
}

BlockGrid match_level(const GrayImage& a, const GrayImage& b, int block, int radius,
                      const BlockGrid* coarser) {
  BlockGrid grid;
  grid.block = block;
  grid.cols = (a.width + block - 1) / block;
  grid.rows = (a.height + block - 1) / block;
  grid.d.resize(static_cast<std::size_t>(grid.cols) * grid.rows);

  for (int by = 0; by < grid.rows; ++by) {
    for (int bx = 0; bx < grid.cols; ++bx) {
      const int x0 = bx * block, y0 = by * block;
      const int x1 = std::min(x0 + block, a.width), y1 = std::min(y0 + block, a.height);

      Displacement guess;
      if (coarser) {
        const int cx = std::clamp(((x0 + x1) / 2) / 2 / coarser->block, 0, coarser->cols - 1);
        const int cy = std::clamp(((y0 + y1) / 2) / 2 / coarser->block, 0, coarser->rows - 1);
        const auto& c = coarser->d[static_cast<std::size_t>(cy) * coarser->cols + cx];
        guess = {2 * c.dx, 2 * c.dy};
      }

      Displacement best = guess;
      float best_cost = std::numeric_limits<float>::infinity();
      int best_norm = 0;
      for (int dy = guess.dy - radius; dy <= guess.dy + radius; ++dy) {
        for (int dx = guess.dx - radius; dx <= guess.dx + radius; ++dx) {
          const float cost = block_sad(a, b, x0, y0, x1, y1, dx, dy);
          const int norm = dx * dx + dy * dy;
          if (cost < best_cost || (cost == best_cost && norm < best_norm)) {
            best_cost = cost;
            best_norm = norm;
            best = {dx, dy};
          }
        }
      }
      grid.d[static_cast<std::size_t>(by) * grid.cols + bx] = best;
    }
  }
  return grid;
}

}  // namespace

GrayImage to_grayscale(const std::vector<std::uint8_t>& bgr, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width < 1 || height < 1 || bgr.size() != 3 * n) {
    throw std::invalid_argument("to_grayscale: buffer does not match " + std::to_string(width) +
                                "x" + std::to_string(height) + "x3");
  }
  GrayImage out{width, height, std::vector<float>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.pixels[i] = 0.114f * bgr[3 * i] + 0.587f * bgr[3 * i + 1] + 0.299f * bgr[3 * i + 2];
  }
  return out;
}

std::vector<float> estimate_flow_blockmatch(const GrayImage& frame_a, const GrayImage& frame_b,
                                            const BlockMatchParams& params) {
  if (frame_a.width != frame_b.width || frame_a.height != frame_b.height) {
    throw std::invalid_argument("estimate_flow_blockmatch: frames differ in shape");
  }
  const std::size_t n = static_cast<std::size_t>(frame_a.width) * frame_a.height;
  if (frame_a.width < 1 || frame_a.height < 1 || frame_a.pixels.size() != n ||
      frame_b.pixels.size() != n) {
    throw std::invalid_argument("estimate_flow_blockmatch: malformed frame");
  }
  if (params.block_size < 1 || params.block_size % 2 != 0 || params.search_radius < 1 ||
      params.pyramid_levels < 1 || params.pyramid_levels > 16) {
    throw std::invalid_argument("estimate_flow_blockmatch: invalid parameters");
  }

  std::vector<GrayImage> pyr_a{frame_a}, pyr_b{frame_b};
  for (int l = 1; l < params.pyramid_levels; ++l) {
    pyr_a.push_back(downsample(pyr_a.back()));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  std::optional<BlockGrid> grid;
  for (int l = params.pyramid_levels - 1; l >= 0; --l) {
    grid = match_level(pyr_a[l], pyr_b[l], params.block_size, params.search_radius,
                       grid ? &*grid : nullptr);
  }

  std::vector<float> flow(2 * n);
  for (int y = 0; y < frame_a.height; ++y) {
    for (int x = 0; x < frame_a.width; ++x) {
      const auto& d = grid->d[static_cast<std::size_t>(y / grid->block) * grid->cols + x / grid->block];
      const std::size_t i = static_cast<std::size_t>(y) * frame_a.width + x;
      flow[2 * i] = static_cast<float>(d.dx);
      flow[2 * i + 1] = static_cast<float>(d.dy);
    }
  }
  return flow;
}

EndpointError endpoint_error(const std::vector<float>& flow_est, const std::vector<float>& flow_ref,
                             const std::vector<std::uint8_t>* mask) {
  if (flow_est.size() != flow_ref.size() || flow_est.size() % 2 != 0) {
    throw std::invalid_argument("endpoint_error: flow fields differ in shape");
  }
  const std::size_t n = flow_est.size() / 2;
  if (mask && mask->size() != n) throw std::invalid_argument("endpoint_error: mask shape mismatch");

  std::vector<double> errors;
  errors.reserve(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask && !(*mask)[i]) continue;
    const double dx = static_cast<double>(flow_est[2 * i]) - flow_ref[2 * i];
    const double dy = static_cast<double>(flow_est[2 * i + 1]) - flow_ref[2 * i + 1];
    const double e = std::hypot(dx, dy);
    errors.push_back(e);
    sum += e;
  }

  EndpointError out;
  out.count = errors.size();
  if (errors.empty()) return out;
  out.mean = sum / static_cast<double>(errors.size());
  const auto mid = errors.size() / 2;
  std::nth_element(errors.begin(), errors.begin() + mid, errors.end());
  out.median = errors[mid];
  if (errors.size() % 2 == 0) {
    const double lower = *std::max_element(errors.begin(), errors.begin() + mid);
    out.median = 0.5 * (out.median + lower);
  }
  return out;
}

double iou(const std::vector<std::uint8_t>& mask_a, const std::vector<std::uint8_t>& mask_b) {
  if (mask_a.size() != mask_b.size()) throw std::invalid_argument("iou: mask shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < mask_a.size(); ++i) {
    const bool a = mask_a[i] != 0, b = mask_b[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Box {
  int x0, y0, x1, y1;  // half-open
  long long area() const { return static_cast<long long>(x1 - x0) * (y1 - y0); }
};

std::optional<Box> tight_box(const std::vector<std::uint8_t>& mask, int width, int height) {
  Box box{width, height, 0, 0};
  bool any = false;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!mask[static_cast<std::size_t>(y) * width + x]) continue;
      any = true;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return box;
}

}  // namespace

double bounding_box_iou(const std::vector<std::uint8_t>& mask_a,
                        const std::vector<std::uint8_t>& mask_b, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0);
  if (mask_a.size() != n || mask_b.size() != n) {
    throw std::invalid_argument("bounding_box_iou: mask shape mismatch");
  }
  const auto a = tight_box(mask_a, width, height);
  const auto b = tight_box(mask_b, width, height);
  if (!a && !b) return 1.0;
  if (!a || !b) return 0.0;
  const int ix = std::max(0, std::min(a->x1, b->x1) - std::max(a->x0, b->x0));
  const int iy = std::max(0, std::min(a->y1, b->y1) - std::max(a->y0, b->y0));
  const long long inter = static_cast<long long>(ix) * iy;
  return static_cast<double>(inter) / static_cast<double>(a->area() + b->area() - inter);
}

std::vector<Resolution> default_bench_resolutions() {
  return {{160, 120}, {256, 192}, {320, 240}, {512, 384}, {640, 480}, {800, 600}};
}

TimingRecord summarize_timings(Resolution resolution, std::string method,
                               const std::vector<double>& seconds) {
  if (seconds.size() < 2) throw std::invalid_argument("summarize_timings: need at least 2 samples");
  const double n = static_cast<double>(seconds.size());
  double mean = 0.0;
  for (double s : seconds) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  var /= n - 1.0;

  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));

  TimingRecord r;
  r.resolution = resolution;
  r.method = std::move(method);
  r.mean_s = mean;
  r.ci95_s = t * std::sqrt(var / n);
  r.samples = seconds.size();
  return r;
}

std::vector<TimingRecord> benchmark_flow(const Scene& scene, const BenchOptions& options) {
  if (options.samples < 2) throw std::invalid_argument("benchmark_flow: need at least 2 samples");
  using Clock = std::chrono::steady_clock;
  const auto shared = std::make_shared<const Scene>(scene);
  constexpr std::uint32_t kAgent = 1;

  std::vector<TimingRecord> records;
  volatile float sink = 0.0f;
  for (const auto res : options.resolutions) {
    const auto k = intrinsics_for(scene.camera, res.width, res.height);
    World world = make_world(shared, options.seed);
    AgentState agent;
    agent.agent_id = kAgent;
    world.agents.push_back(agent);
    apply_follow(world.mover, world.agents);

    auto snapshot = take_snapshot(world);
    auto main_a = *render_views(*snapshot, camera_kinematics(*snapshot->find_agent(kAgent)), k,
                                kViewMain).main;

    std::vector<double> engine_s, blockmatch_s;
    for (std::size_t i = 0; i < options.warmup + options.samples; ++i) {
      const auto kin = camera_kinematics(*snapshot->find_agent(kAgent));

      const auto t0 = Clock::now();
      const auto flow = render_views(*snapshot, kin, k, kViewFlow);
      const auto t1 = Clock::now();
      sink = sink + flow.flow->front();

      step_world(world);
      snapshot = take_snapshot(world);
      auto main_b = *render_views(*snapshot, camera_kinematics(*snapshot->find_agent(kAgent)), k,
                                  kViewMain).main;

      const auto t2 = Clock::now();
      const auto est = estimate_flow_blockmatch(to_grayscale(main_a, res.width, res.height),
                                                to_grayscale(main_b, res.width, res.height),
                                                options.blockmatch);
      const auto t3 = Clock::now();
      sink = sink + est.front();
      main_a = std::move(main_b);

      if (i >= options.warmup) {
        engine_s.push_back(std::chrono::duration<double>(t1 - t0).count());
        blockmatch_s.push_back(std::chrono::duration<double>(t3 - t2).count());
      }
    }
    records.push_back(summarize_timings(res, "engine", engine_s));
    records.push_back(summarize_timings(res, "blockmatch", blockmatch_s));
  }
  return records;
}

void write_bench_csv(std::ostream& out, const std::vector<TimingRecord>& records) {
  out << "resolution,method,mean_s,ci95_s,n\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(9);
  for (const auto& r : records) {
    out << r.resolution.width << 'x' << r.resolution.height << ',' << r.method << ','
        << r.mean_s << ',' << r.ci95_s << ',' << r.samples << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void write_bench_table(std::ostream& out, const std::vector<TimingRecord>& records) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(12) << "resolution" << std::setw(12) << "method" << std::right
      << std::setw(14) << "mean (ms)" << std::setw(14) << "+/- 95% (ms)" << std::setw(6) << "n"
      << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& r : records) {
    const std::string res = std::to_string(r.resolution.width) + "x" + std::to_string(r.resolution.height);
    out << std::left << std::setw(12) << res << std::setw(12) << r.method << std::right
        << std::setw(14) << r.mean_s * 1e3 << std::setw(14) << r.ci95_s * 1e3 << std::setw(6)
        << r.samples << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace visenv
