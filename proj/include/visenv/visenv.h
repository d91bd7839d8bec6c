/* C interface to the visenv engine: scene loading, the frame server, the
 * frame dumper and the flow benchmark. All handles are opaque. Functions that
 * can fail return a visenv_status; on failure visenv_last_error() describes the
 * problem (thread-local, valid until the next failing call on that thread). */
#ifndef VISENV_VISENV_H
#define VISENV_VISENV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VISENV_API __declspec(dllexport)
#else
#define VISENV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum visenv_status {
  VISENV_OK = 0,
  VISENV_ERR_INVALID_ARGUMENT = 1,
  VISENV_ERR_SCENE = 2,   /* scene parse or validation failure */
  VISENV_ERR_NOT_FOUND = 3,
  VISENV_ERR_NETWORK = 4, /* bind, accept or socket failure */
  VISENV_ERR_IO = 5,
  VISENV_ERR_INTERNAL = 6
} visenv_status;

VISENV_API const char* visenv_last_error(void);
VISENV_API const char* visenv_status_string(visenv_status status);
VISENV_API const char* visenv_version(void);

/* ---- scenes ---- */

typedef struct visenv_scene visenv_scene;

VISENV_API size_t visenv_builtin_scene_count(void);
/* NULL when index is out of range. */
VISENV_API const char* visenv_builtin_scene_name(size_t index);

VISENV_API visenv_status visenv_scene_builtin(const char* name, visenv_scene** out);
VISENV_API visenv_status visenv_scene_load_file(const char* path, visenv_scene** out);
/* Built-in name first, then a scene file path. */
VISENV_API visenv_status visenv_scene_resolve(const char* name_or_path, visenv_scene** out);
VISENV_API const char* visenv_scene_name(const visenv_scene* scene);
VISENV_API size_t visenv_scene_object_count(const visenv_scene* scene);
VISENV_API void visenv_scene_destroy(visenv_scene* scene);

/* ---- server ---- */

typedef struct visenv_server visenv_server;

typedef struct visenv_server_config {
  const char* bind_address; /* NULL: 0.0.0.0 */
  uint16_t port;            /* 0: ephemeral */
  double tick_rate;         /* Hz */
  const char* const* scene_files;
  size_t scene_file_count;  /* 0: built-in catalog */
  uint64_t seed;
  int log;                  /* nonzero: one log line per session event */
} visenv_server_config;

/* Defaults: 0.0.0.0:8085, 60 Hz, built-in scenes, seed 0, logging on. */
VISENV_API void visenv_server_config_init(visenv_server_config* config);

VISENV_API visenv_status visenv_server_create(const visenv_server_config* config,
                                              visenv_server** out);
VISENV_API visenv_status visenv_server_start(visenv_server* server);
VISENV_API uint16_t visenv_server_port(const visenv_server* server);
VISENV_API size_t visenv_server_scene_count(const visenv_server* server);
VISENV_API size_t visenv_server_live_sessions(const visenv_server* server);
/* Closes the listener and all connections; idempotent. */
VISENV_API void visenv_server_stop(visenv_server* server);
VISENV_API void visenv_server_destroy(visenv_server* server);

/* Creates and starts a server, then blocks until SIGINT or SIGTERM. Blocks
 * those signals in the calling thread before any server thread starts. */
VISENV_API visenv_status visenv_serve(const visenv_server_config* config);

/* ---- frame dump ---- */

typedef struct visenv_dump_options {
  double seconds;
  double fps;
  uint32_t width;
  uint32_t height;
  const char* outdir;
  uint64_t seed;
} visenv_dump_options;

/* Defaults: 1 s at 10 fps, 256x192, current directory, seed 0. */
VISENV_API void visenv_dump_options_init(visenv_dump_options* options);
VISENV_API visenv_status visenv_dump(const visenv_scene* scene, const visenv_dump_options* options,
                                     size_t* files_written);

/* ---- flow benchmark ---- */

typedef struct visenv_bench_report visenv_bench_report;

typedef struct visenv_bench_options {
  size_t samples;
  size_t warmup;
  uint64_t seed;
  const uint32_t* resolutions; /* width,height pairs; NULL: six default sizes */
  size_t resolution_count;     /* number of pairs */
} visenv_bench_options;

typedef struct visenv_timing_record {
  uint32_t width;
  uint32_t height;
  const char* method; /* owned by the report */
  double mean_s;
  double ci95_s;
  size_t samples;
} visenv_timing_record;

/* Defaults: 100 samples after 5 warm-up iterations, seed 0. */
VISENV_API void visenv_bench_options_init(visenv_bench_options* options);
VISENV_API visenv_status visenv_bench_run(const visenv_scene* scene,
                                          const visenv_bench_options* options,
                                          visenv_bench_report** out);
VISENV_API size_t visenv_bench_record_count(const visenv_bench_report* report);
VISENV_API visenv_status visenv_bench_record(const visenv_bench_report* report, size_t index,
                                             visenv_timing_record* out);
/* NUL-terminated text owned by the report. */
VISENV_API const char* visenv_bench_csv(const visenv_bench_report* report);
VISENV_API const char* visenv_bench_table(const visenv_bench_report* report);
VISENV_API void visenv_bench_destroy(visenv_bench_report* report);

#ifdef __cplusplus
}
#endif

#endif
