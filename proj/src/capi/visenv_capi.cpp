#include "visenv/visenv.h"

#include "visenv/dump.hpp"
#include "visenv/eval.hpp"
#include "visenv/server.hpp"

#include <csignal>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

#include <pthread.h>

struct visenv_scene {
  visenv::Scene scene;
};

struct visenv_server {
  std::unique_ptr<visenv::Server> server;
};

struct visenv_bench_report {
  std::vector<visenv::TimingRecord> records;
  std::string csv;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

visenv_status fail(visenv_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps the engine's exception types onto status codes.
template <typename Fn>
visenv_status guarded(Fn&& fn) {
  try {
    fn();
    return VISENV_OK;
  } catch (const visenv::SceneError& e) {
    return fail(e.kind() == visenv::SceneError::Kind::kIo ? VISENV_ERR_IO : VISENV_ERR_SCENE,
                e.what());
  } catch (const visenv::net::NetError& e) {
    return fail(VISENV_ERR_NETWORK, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(VISENV_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(VISENV_ERR_IO, e.what());
  } catch (const std::runtime_error& e) {
    return fail(VISENV_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(VISENV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VISENV_ERR_INTERNAL, "unknown exception");
  }
}

#define VISENV_REQUIRE(cond, what) \
  if (!(cond)) return fail(VISENV_ERR_INVALID_ARGUMENT, what)

visenv::ServerConfig to_config(const visenv_server_config& c) {
  visenv::ServerConfig out;
  if (c.bind_address) out.bind_address = c.bind_address;
  out.port = c.port;
  out.tick_rate = c.tick_rate;
  for (std::size_t i = 0; i < c.scene_file_count; ++i) {
    if (!c.scene_files[i]) throw std::invalid_argument("scene file path is NULL");
    out.scene_files.emplace_back(c.scene_files[i]);
  }
  out.seed = c.seed;
  out.log = c.log != 0;
  return out;
}

}  // namespace

extern "C" {

const char* visenv_last_error(void) { return g_last_error.c_str(); }

const char* visenv_status_string(visenv_status status) {
  switch (status) {
    case VISENV_OK: return "ok";
    case VISENV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VISENV_ERR_SCENE: return "scene error";
    case VISENV_ERR_NOT_FOUND: return "not found";
    case VISENV_ERR_NETWORK: return "network error";
    case VISENV_ERR_IO: return "i/o error";
    case VISENV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* visenv_version(void) { return "0.1.0"; }

size_t visenv_builtin_scene_count(void) { return visenv::builtin_scenes().size(); }

const char* visenv_builtin_scene_name(size_t index) {
  const auto& scenes = visenv::builtin_scenes();
  return index < scenes.size() ? scenes[index].name.c_str() : nullptr;
}

visenv_status visenv_scene_builtin(const char* name, visenv_scene** out) {
  VISENV_REQUIRE(name && out, "visenv_scene_builtin: NULL argument");
  const visenv::Scene* scene = visenv::find_builtin_scene(name);
  if (!scene) return fail(VISENV_ERR_NOT_FOUND, std::string("no built-in scene named '") + name + "'");
  return guarded([&] { *out = new visenv_scene{*scene}; });
}

visenv_status visenv_scene_load_file(const char* path, visenv_scene** out) {
  VISENV_REQUIRE(path && out, "visenv_scene_load_file: NULL argument");
  return guarded([&] { *out = new visenv_scene{visenv::load_scene_file(path)}; });
}

visenv_status visenv_scene_resolve(const char* name_or_path, visenv_scene** out) {
  VISENV_REQUIRE(name_or_path && out, "visenv_scene_resolve: NULL argument");
  if (visenv::find_builtin_scene(name_or_path)) return visenv_scene_builtin(name_or_path, out);
  std::error_code ec;
  if (!std::filesystem::exists(name_or_path, ec)) {
    std::string names;
    for (const auto& s : visenv::builtin_scenes()) names += (names.empty() ? "" : ", ") + s.name;
    return fail(VISENV_ERR_NOT_FOUND, std::string("'") + name_or_path +
                                          "' is neither a built-in scene (" + names +
                                          ") nor an existing file");
  }
  return visenv_scene_load_file(name_or_path, out);
}

const char* visenv_scene_name(const visenv_scene* scene) {
  return scene ? scene->scene.name.c_str() : nullptr;
}

size_t visenv_scene_object_count(const visenv_scene* scene) {
  return scene ? scene->scene.objects.size() : 0;
}

void visenv_scene_destroy(visenv_scene* scene) { delete scene; }

void visenv_server_config_init(visenv_server_config* config) {
  if (!config) return;
  const visenv::ServerConfig defaults;
  config->bind_address = nullptr;
  config->port = defaults.port;
  config->tick_rate = defaults.tick_rate;
  config->scene_files = nullptr;
  config->scene_file_count = 0;
  config->seed = defaults.seed;
  config->log = 1;
}

visenv_status visenv_server_create(const visenv_server_config* config, visenv_server** out) {
  VISENV_REQUIRE(config && out, "visenv_server_create: NULL argument");
  VISENV_REQUIRE(config->scene_file_count == 0 || config->scene_files,
                 "visenv_server_create: scene_files is NULL");
  return guarded([&] {
    auto handle = std::make_unique<visenv_server>();
    handle->server = std::make_unique<visenv::Server>(to_config(*config));
    *out = handle.release();
  });
}

visenv_status visenv_server_start(visenv_server* server) {
  VISENV_REQUIRE(server, "visenv_server_start: NULL server");
  return guarded([&] { server->server->start(); });
}

uint16_t visenv_server_port(const visenv_server* server) {
  return server ? server->server->port() : 0;
}

size_t visenv_server_scene_count(const visenv_server* server) {
  return server ? server->server->scene_count() : 0;
}

size_t visenv_server_live_sessions(const visenv_server* server) {
  return server ? server->server->live_sessions() : 0;
}

void visenv_server_stop(visenv_server* server) {
  if (server) server->server->stop();
}

void visenv_server_destroy(visenv_server* server) { delete server; }

visenv_status visenv_serve(const visenv_server_config* config) {
  VISENV_REQUIRE(config, "visenv_serve: NULL config");
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  if (pthread_sigmask(SIG_BLOCK, &signals, nullptr) != 0) {
    return fail(VISENV_ERR_INTERNAL, "cannot block shutdown signals");
  }

  visenv_server* server = nullptr;
  visenv_status status = visenv_server_create(config, &server);
  if (status == VISENV_OK) status = visenv_server_start(server);
  if (status == VISENV_OK) {
    int received = 0;
    sigwait(&signals, &received);
    visenv_server_stop(server);
  }
  visenv_server_destroy(server);
  return status;
}

void visenv_dump_options_init(visenv_dump_options* options) {
  if (!options) return;
  const visenv::DumpOptions defaults;
  options->seconds = defaults.seconds;
  options->fps = defaults.fps;
  options->width = static_cast<uint32_t>(defaults.width);
  options->height = static_cast<uint32_t>(defaults.height);
  options->outdir = nullptr;
  options->seed = defaults.seed;
}

visenv_status visenv_dump(const visenv_scene* scene, const visenv_dump_options* options,
                          size_t* files_written) {
  VISENV_REQUIRE(scene && options, "visenv_dump: NULL argument");
  VISENV_REQUIRE(options->width <= 16384 && options->height <= 16384,
                 "visenv_dump: resolution above 16384");
  return guarded([&] {
    visenv::DumpOptions o;
    o.seconds = options->seconds;
    o.fps = options->fps;
    o.width = static_cast<int>(options->width);
    o.height = static_cast<int>(options->height);
    if (options->outdir) o.outdir = options->outdir;
    o.seed = options->seed;
    const auto files = visenv::run_dump(scene->scene, o);
    if (files_written) *files_written = files.size();
  });
}

void visenv_bench_options_init(visenv_bench_options* options) {
  if (!options) return;
  const visenv::BenchOptions defaults;
  options->samples = defaults.samples;
  options->warmup = defaults.warmup;
  options->seed = defaults.seed;
  options->resolutions = nullptr;
  options->resolution_count = 0;
}

visenv_status visenv_bench_run(const visenv_scene* scene, const visenv_bench_options* options,
                               visenv_bench_report** out) {
  VISENV_REQUIRE(scene && options && out, "visenv_bench_run: NULL argument");
  VISENV_REQUIRE(options->samples >= 2, "visenv_bench_run: samples must be >= 2");
  return guarded([&] {
    visenv::BenchOptions o;
    o.samples = options->samples;
    o.warmup = options->warmup;
    o.seed = options->seed;
    if (options->resolutions && options->resolution_count > 0) {
      o.resolutions.clear();
      for (std::size_t i = 0; i < options->resolution_count; ++i) {
        const auto w = options->resolutions[2 * i], h = options->resolutions[2 * i + 1];
        if (w < 1 || h < 1 || w > 16384 || h > 16384) {
          throw std::invalid_argument("benchmark resolution out of range");
        }
        o.resolutions.push_back({static_cast<int>(w), static_cast<int>(h)});
      }
    }
    auto report = std::make_unique<visenv_bench_report>();
    report->records = visenv::benchmark_flow(scene->scene, o);
    std::ostringstream csv, table;
    visenv::write_bench_csv(csv, report->records);
    visenv::write_bench_table(table, report->records);
    report->csv = csv.str();
    report->table = table.str();
    *out = report.release();
  });
}

size_t visenv_bench_record_count(const visenv_bench_report* report) {
  return report ? report->records.size() : 0;
}

visenv_status visenv_bench_record(const visenv_bench_report* report, size_t index,
                                  visenv_timing_record* out) {
  VISENV_REQUIRE(report && out, "visenv_bench_record: NULL argument");
  if (index >= report->records.size()) return fail(VISENV_ERR_NOT_FOUND, "record index out of range");
  const auto& r = report->records[index];
  out->width = static_cast<uint32_t>(r.resolution.width);
  out->height = static_cast<uint32_t>(r.resolution.height);
  out->method = r.method.c_str();
  out->mean_s = r.mean_s;
  out->ci95_s = r.ci95_s;
  out->samples = r.samples;
  return VISENV_OK;
}

const char* visenv_bench_csv(const visenv_bench_report* report) {
  return report ? report->csv.c_str() : nullptr;
}

const char* visenv_bench_table(const visenv_bench_report* report) {
  return report ? report->table.c_str() : nullptr;
}

void visenv_bench_destroy(visenv_bench_report* report) { delete report; }

}  // extern "C"
