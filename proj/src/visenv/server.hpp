#pragma once

#include "visenv/motion.hpp"
#include "visenv/net.hpp"
#include "visenv/protocol.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace visenv {

struct ServerConfig {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = wire::kDefaultPort;
  double tick_rate = 60.0;
  std::vector<std::string> scene_files;  // empty: built-in catalog
  std::uint64_t seed = 0;
  bool log = true;
};

// Owns one scene's World and the thread that ticks it. The thread runs only
// while at least one agent is registered. Mutations are queued and applied at
// the next tick boundary; readers only ever see published immutable snapshots.
class SceneRunner {
 public:
  using Command = std::function<void(World&)>;

  SceneRunner(std::shared_ptr<const Scene> scene, std::uint64_t seed, double tick_rate);
  ~SceneRunner();
  SceneRunner(const SceneRunner&) = delete;
  SceneRunner& operator=(const SceneRunner&) = delete;

  // Adds the agent (starting the tick thread if idle) and waits until a
  // snapshot containing it is published.
  std::shared_ptr<const Snapshot> add_agent(const AgentState& agent);
  // Removes the agent; stops the tick thread when the scene becomes unobserved.
  void remove_agent(std::uint32_t agent_id);

  // Queues `command`, returns the first snapshot that reflects it.
  std::shared_ptr<const Snapshot> apply(Command command);

  std::shared_ptr<const Snapshot> latest() const;
  std::uint64_t published_ticks() const { return published_ticks_.load(); }
  bool running() const { return running_.load(); }
  const Scene& scene() const { return *scene_; }
  std::shared_ptr<const Scene> scene_ptr() const { return scene_; }

 private:
  void start_locked();
  void stop_locked();
  void loop();

  std::shared_ptr<const Scene> scene_;
  double tick_rate_;
  World world_;  // touched only by the tick thread while running

  std::mutex lifecycle_mutex_;
  std::size_t agent_count_ = 0;
  std::thread thread_;
  std::atomic<bool> running_{false};

  mutable std::mutex mutex_;
  std::condition_variable published_cv_;
  std::condition_variable wake_cv_;
  bool stop_requested_ = false;
  std::vector<std::pair<std::uint64_t, Command>> pending_;
  std::uint64_t next_ticket_ = 1;
  std::uint64_t applied_ticket_ = 0;
  std::shared_ptr<const Snapshot> latest_;
  std::atomic<std::uint64_t> published_ticks_{0};
};

struct AgentSession {
  bool registered = false;
  bool closed = false;
  std::uint32_t agent_id = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t view_mask = kViewAll;
  wire::Compression compression = wire::Compression::kRaw;
  bool follow = true;
  std::size_t scene_index = 0;
};

class Server {
 public:
  // Loads config.scene_files (or the built-in catalog); throws SceneError.
  explicit Server(ServerConfig config);
  Server(ServerConfig config, std::vector<Scene> scenes);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting; throws net::NetError on bind failure.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }

  std::size_t scene_count() const { return runners_.size(); }
  const SceneRunner& runner(std::size_t scene_index) const { return *runners_.at(scene_index); }
  std::size_t live_sessions() const { return live_sessions_.load(); }
  std::size_t open_connections() const;

  // Request dispatch, independent of the transport.
  wire::WireMessage handle_request(AgentSession& session, const wire::WireMessage& request);
  // Unregisters the session's agent, if any.
  void close_session(AgentSession& session);

 private:
  struct Connection {
    std::shared_ptr<net::Socket> socket;
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void serve_connection(std::shared_ptr<net::Socket> socket, std::uint64_t connection_id);
  void reap_finished_locked();

  wire::WireMessage on_register(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_change_scene(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_get_frame(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_set_position(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_set_rotation(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_toggle_follow(AgentSession& s, wire::ByteView body);
  wire::WireMessage on_delete(AgentSession& s, wire::ByteView body);

  wire::CategoryList categories_of(std::size_t scene_index) const;
  void attach(AgentSession& s, std::size_t scene_index);

  ServerConfig config_;
  std::vector<std::unique_ptr<SceneRunner>> runners_;
  std::atomic<std::uint32_t> next_agent_id_{1};
  std::atomic<std::size_t> live_sessions_{0};

  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::thread accept_thread_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex connections_mutex_;
  std::list<Connection> connections_;
  std::uint64_t next_connection_id_ = 1;
};

std::vector<Scene> load_scene_catalog(const std::vector<std::string>& scene_files);

}  // namespace visenv
