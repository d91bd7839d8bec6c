#include "visenv/dump.hpp"

#include "visenv/motion.hpp"
#include "visenv/render.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace visenv {

std::vector<std::string> run_dump(const Scene& scene, const DumpOptions& options) {
  if (!(options.seconds > 0.0) || !(options.fps > 0.0)) {
    throw std::invalid_argument("dump: seconds and fps must be > 0");
  }
  if (options.width < 1 || options.height < 1) {
    throw std::invalid_argument("dump: resolution must be at least 1x1");
  }
  std::error_code ec;
  std::filesystem::create_directories(options.outdir, ec);
  if (ec) throw std::runtime_error("dump: cannot create " + options.outdir + ": " + ec.message());

  constexpr std::uint32_t kAgent = 1;
  World world = make_world(std::make_shared<const Scene>(scene), options.seed);
  AgentState agent;
  agent.agent_id = kAgent;
  world.agents.push_back(agent);
  apply_follow(world.mover, world.agents);

  const auto frames = static_cast<std::size_t>(std::llround(options.seconds * options.fps));
  const int w = options.width, h = options.height;
  std::vector<std::string> written;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / options.fps;
    while (world.time + kClockEpsilon < t) step_world(world);

    const auto snapshot = take_snapshot(world);
    const auto views = render_agent_views(*snapshot, kAgent, w, h, kViewAll);

    char stem[32];
    std::snprintf(stem, sizeof stem, "t%06llu", static_cast<unsigned long long>(world.tick));
    const auto base = (std::filesystem::path(options.outdir) / stem).string();
    auto emit = [&](const std::string& suffix, int channels, const std::vector<std::uint8_t>& px) {
      write_png(base + suffix, w, h, channels, px);
      written.push_back(base + suffix);
    };
    emit("_main.png", 3, *views.main);
    emit("_depth.png", 1, *views.depth);
    emit("_category.png", 1, *views.category);
    emit("_object.png", 3, *views.object);
    emit("_flow_hsv.png", 3, flow_to_hsv(*views.flow, w, h));
    write_flo(base + "_flow.flo", w, h, *views.flow);
    written.push_back(base + "_flow.flo");
  }
  return written;
}

}  // namespace visenv
