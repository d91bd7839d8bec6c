// visenv command line: serve | dump | bench | scenes.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "visenv/visenv.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int runtime_failure(const std::string& what) {
  std::cerr << "error: " << what << ": " << visenv_last_error() << '\n';
  return kExitRuntime;
}

// Scene handle that releases itself.
struct SceneHandle {
  visenv_scene* scene = nullptr;
  ~SceneHandle() { visenv_scene_destroy(scene); }
};

struct ServeArgs {
  std::string bind = "0.0.0.0";
  int port = 8085;
  double tick_rate = 60.0;
  std::vector<std::string> scenes;
  std::uint64_t seed = 0;
  bool quiet = false;
};

struct DumpArgs {
  std::string scene = "optical";
  double seconds = 1.0;
  double fps = 10.0;
  unsigned width = 256;
  unsigned height = 192;
  std::string outdir = "dump";
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string scene = "optical";
  std::size_t samples = 100;
  std::size_t warmup = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> resolutions;
  std::string csv;
};

int run_serve(const ServeArgs& a) {
  visenv_server_config config;
  visenv_server_config_init(&config);
  config.bind_address = a.bind.c_str();
  config.port = static_cast<std::uint16_t>(a.port);
  config.tick_rate = a.tick_rate;
  std::vector<const char*> files;
  for (const auto& s : a.scenes) files.push_back(s.c_str());
  config.scene_files = files.data();
  config.scene_file_count = files.size();
  config.seed = a.seed;
  config.log = a.quiet ? 0 : 1;
  if (visenv_serve(&config) != VISENV_OK) return runtime_failure("serve");
  return 0;
}

int run_dump(const DumpArgs& a) {
  SceneHandle scene;
  if (visenv_scene_resolve(a.scene.c_str(), &scene.scene) != VISENV_OK) {
    return runtime_failure("scene '" + a.scene + "'");
  }
  visenv_dump_options options;
  visenv_dump_options_init(&options);
  options.seconds = a.seconds;
  options.fps = a.fps;
  options.width = a.width;
  options.height = a.height;
  options.outdir = a.outdir.c_str();
  options.seed = a.seed;
  std::size_t files = 0;
  if (visenv_dump(scene.scene, &options, &files) != VISENV_OK) return runtime_failure("dump");
  std::cout << "wrote " << files << " files to " << a.outdir << '\n';
  return 0;
}

int run_bench(const BenchArgs& a) {
  std::vector<std::uint32_t> resolutions;
  static const std::regex kResolution(R"((\d{1,5})x(\d{1,5}))");
  for (const auto& r : a.resolutions) {
    std::smatch m;
    if (!std::regex_match(r, m, kResolution)) {
      std::cerr << "error: resolution '" << r << "' is not WIDTHxHEIGHT\n";
      return kExitUsage;
    }
    resolutions.push_back(static_cast<std::uint32_t>(std::stoul(m[1])));
    resolutions.push_back(static_cast<std::uint32_t>(std::stoul(m[2])));
  }

  SceneHandle scene;
  if (visenv_scene_resolve(a.scene.c_str(), &scene.scene) != VISENV_OK) {
    return runtime_failure("scene '" + a.scene + "'");
  }
  visenv_bench_options options;
  visenv_bench_options_init(&options);
  options.samples = a.samples;
  options.warmup = a.warmup;
  options.seed = a.seed;
  if (!resolutions.empty()) {
    options.resolutions = resolutions.data();
    options.resolution_count = resolutions.size() / 2;
  }

  visenv_bench_report* report = nullptr;
  if (visenv_bench_run(scene.scene, &options, &report) != VISENV_OK) {
    return runtime_failure("bench");
  }
  std::cout << visenv_bench_table(report);
  int rc = 0;
  if (a.csv.empty()) {
    std::cout << '\n' << visenv_bench_csv(report);
  } else {
    std::ofstream out(a.csv);
    out << visenv_bench_csv(report);
    if (!out) {
      std::cerr << "error: cannot write " << a.csv << '\n';
      rc = kExitRuntime;
    }
  }
  visenv_bench_destroy(report);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headless visual environment server, frame dumper and flow benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(visenv_version()));

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the frame server until SIGINT/SIGTERM");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks a free port)")
      ->envname("VISENV_PORT")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  serve_cmd->add_option("--bind", serve.bind, "Bind address")->capture_default_str();
  serve_cmd->add_option("--tick-rate", serve.tick_rate, "Simulation rate in Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve_cmd->add_option("--scene", serve.scenes, "Scene file to serve (repeatable; default: built-ins)")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--seed", serve.seed, "Global behavior seed")->capture_default_str();
  serve_cmd->add_flag("--quiet", serve.quiet, "Suppress session log lines");

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("dump", "Write annotated views of a scene to PNG and .flo files");
  dump_cmd->add_option("--scene", dump.scene, "Built-in scene name or scene file")->capture_default_str();
  dump_cmd->add_option("--seconds", dump.seconds, "Simulated duration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dump_cmd->add_option("--fps", dump.fps, "Frames written per simulated second")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dump_cmd->add_option("--width", dump.width, "Image width")->check(CLI::Range(1u, 16384u))->capture_default_str();
  dump_cmd->add_option("--height", dump.height, "Image height")->check(CLI::Range(1u, 16384u))->capture_default_str();
  dump_cmd->add_option("--out", dump.outdir, "Output directory (created if missing)")->capture_default_str();
  dump_cmd->add_option("--seed", dump.seed, "Behavior seed")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time engine flow against block matching");
  bench_cmd->add_option("--scene", bench.scene, "Built-in scene name or scene file")->capture_default_str();
  bench_cmd->add_option("--samples", bench.samples, "Timed samples per resolution and method")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed warm-up iterations")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Behavior seed")->capture_default_str();
  bench_cmd->add_option("--resolution", bench.resolutions,
                        "WIDTHxHEIGHT to time (repeatable; default: six sizes 160x120..800x600)");
  bench_cmd->add_option("--csv", bench.csv, "Write the CSV report here instead of stdout");

  app.add_subcommand("scenes", "List the built-in scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*serve_cmd) return run_serve(serve);
  if (*dump_cmd) return run_dump(dump);
  if (*bench_cmd) return run_bench(bench);
  for (std::size_t i = 0; i < visenv_builtin_scene_count(); ++i) {
    std::cout << i << ' ' << visenv_builtin_scene_name(i) << '\n';
  }
  return 0;
}
