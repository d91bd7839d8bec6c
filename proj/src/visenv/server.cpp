#include "visenv/server.hpp"

#include <spdlog/spdlog.h>

namespace visenv {

namespace {

constexpr auto kApplyTimeout = std::chrono::seconds(5);

wire::WireMessage reply(wire::Opcode op, wire::Bytes body = {}) {
  return {static_cast<std::uint8_t>(op), std::move(body)};
}

wire::WireMessage error_reply(wire::ErrorCode code, const std::string& message) {
  return reply(wire::Opcode::kError, wire::encode_error({code, message.substr(0, 0xFFFF)}));
}

}  // namespace

// ---------------------------------------------------------------------------
// SceneRunner

SceneRunner::SceneRunner(std::shared_ptr<const Scene> scene, std::uint64_t seed, double tick_rate)
    : scene_(std::move(scene)),
      tick_rate_(tick_rate),
      world_(make_world(scene_, seed, 1.0 / tick_rate)) {}

SceneRunner::~SceneRunner() {
  std::lock_guard lifecycle(lifecycle_mutex_);
  if (running_) stop_locked();
}

void SceneRunner::start_locked() {
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = false;
  }
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void SceneRunner::stop_locked() {
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = true;
  }
  wake_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  running_ = false;
}

void SceneRunner::loop() {
  using Clock = std::chrono::steady_clock;
  const auto period =
      std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / tick_rate_));
  const double dt = 1.0 / tick_rate_;
  auto next = Clock::now();

  std::unique_lock lock(mutex_);
  while (!wake_cv_.wait_until(lock, next, [this] { return stop_requested_; })) {
    auto batch = std::move(pending_);
    pending_.clear();
    lock.unlock();

    std::uint64_t last_ticket = 0;
    for (auto& [ticket, command] : batch) {
      command(world_);
      last_ticket = ticket;
    }
    step_world(world_, dt);
    auto snapshot = take_snapshot(world_, world_.time, world_.tick);

    lock.lock();
    latest_ = std::move(snapshot);
    if (last_ticket) applied_ticket_ = last_ticket;
    published_ticks_.fetch_add(1);
    published_cv_.notify_all();

    next += period;
    // Drop missed ticks instead of bursting to catch up.
    if (Clock::now() - next > 4 * period) next = Clock::now();
  }
}

std::shared_ptr<const Snapshot> SceneRunner::apply(Command command) {
  std::unique_lock lock(mutex_);
  const auto ticket = next_ticket_++;
  pending_.emplace_back(ticket, std::move(command));
  // Slow tick rates still get a couple of periods to reach the boundary.
  const auto timeout = std::max<std::chrono::duration<double>>(kApplyTimeout, std::chrono::duration<double>(3.0 / tick_rate_));
  if (!published_cv_.wait_for(lock, timeout, [&] { return applied_ticket_ >= ticket; })) {
    throw std::runtime_error("scene '" + scene_->name + "' did not apply the request in time");
  }
  return latest_;
}

std::shared_ptr<const Snapshot> SceneRunner::add_agent(const AgentState& agent) {
  std::lock_guard lifecycle(lifecycle_mutex_);
  if (agent_count_++ == 0) start_locked();
  try {
    return apply([agent](World& w) {
      AgentState a = agent;
      a.pose = w.mover.pose;
      if (a.follow) {
        a.linear_velocity = w.mover.linear_velocity;
        a.angular_velocity = w.mover.angular_velocity;
      }
      w.agents.push_back(a);
    });
  } catch (...) {
    if (--agent_count_ == 0) stop_locked();
    throw;
  }
}

void SceneRunner::remove_agent(std::uint32_t agent_id) {
  std::lock_guard lifecycle(lifecycle_mutex_);
  try {
    apply([agent_id](World& w) {
      std::erase_if(w.agents, [&](const AgentState& a) { return a.agent_id == agent_id; });
    });
  } catch (const std::exception& e) {
    spdlog::warn("removing agent {} from '{}': {}", agent_id, scene_->name, e.what());
  }
  if (agent_count_ > 0 && --agent_count_ == 0) stop_locked();
}

std::shared_ptr<const Snapshot> SceneRunner::latest() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

// ---------------------------------------------------------------------------
// Server

std::vector<Scene> load_scene_catalog(const std::vector<std::string>& scene_files) {
  if (scene_files.empty()) return builtin_scenes();
  std::vector<Scene> scenes;
  for (const auto& path : scene_files) scenes.push_back(load_scene_file(path));
  return scenes;
}

Server::Server(ServerConfig config) : Server(config, load_scene_catalog(config.scene_files)) {}

Server::Server(ServerConfig config, std::vector<Scene> scenes) : config_(std::move(config)) {
  if (!(config_.tick_rate > 0.0)) throw std::invalid_argument("tick rate must be > 0");
  if (scenes.empty()) throw std::invalid_argument("server needs at least one scene");
  if (scenes.size() > 255) throw std::invalid_argument("at most 255 scenes can be served");
  for (auto& scene : scenes) {
    runners_.push_back(std::make_unique<SceneRunner>(std::make_shared<const Scene>(std::move(scene)),
                                                     config_.seed, config_.tick_rate));
  }
}

Server::~Server() { stop(); }

void Server::start() {
  listener_ = net::listen_tcp(config_.bind_address, config_.port);
  port_ = net::local_port(listener_);
  stopping_ = false;
  accept_thread_ = std::thread([this] { accept_loop(); });
  if (config_.log) {
    spdlog::info("listening on {}:{} with {} scene(s)", config_.bind_address, port_, runners_.size());
  }
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.close();

  std::list<Connection> connections;
  {
    std::lock_guard lock(connections_mutex_);
    connections.swap(connections_);
  }
  for (auto& c : connections) c.socket->shutdown();
  for (auto& c : connections) {
    if (c.thread.joinable()) c.thread.join();
  }
}

std::size_t Server::open_connections() const {
  std::lock_guard lock(connections_mutex_);
  std::size_t n = 0;
  for (const auto& c : connections_) n += c.done->load() ? 0 : 1;
  return n;
}

void Server::reap_finished_locked() {
  for (auto it = connections_.begin(); it != connections_.end();) {
    if (it->done->load()) {
      it->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::accept_loop() {
  while (!stopping_) {
    net::Socket accepted = net::accept_tcp(listener_);
    if (!accepted.valid()) break;
    auto socket = std::make_shared<net::Socket>(std::move(accepted));
    std::lock_guard lock(connections_mutex_);
    reap_finished_locked();
    if (stopping_) break;
    const auto id = next_connection_id_++;
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread worker([this, socket, id, done] {
      serve_connection(socket, id);
      done->store(true);
    });
    connections_.push_back({socket, std::move(worker), done});
  }
}

void Server::serve_connection(std::shared_ptr<net::Socket> socket, std::uint64_t connection_id) {
  AgentSession session;
  if (config_.log) spdlog::info("connection {} opened", connection_id);
  try {
    std::array<std::uint8_t, wire::kPreamble.size()> preamble{};
    if (net::recv_exact(*socket, preamble)) {
      wire::check_preamble(preamble);
      net::send_all(*socket, wire::kPreamble);
      for (;;) {
        std::array<std::uint8_t, wire::kMessageHeaderSize> header{};
        if (!net::recv_exact(*socket, header)) break;
        std::uint32_t length = 0;
        try {
          length = wire::body_length_from_header(header);
        } catch (const wire::ProtocolError& e) {
          const auto err = error_reply(wire::ErrorCode::kBadRequest, e.what());
          net::send_all(*socket, wire::encode_message(err.opcode, err.body));
          break;
        }
        wire::WireMessage request{header[0], wire::Bytes(length)};
        if (length > 0 && !net::recv_exact(*socket, request.body)) break;
        const auto response = handle_request(session, request);
        net::send_all(*socket, wire::encode_message(response.opcode, response.body));
        if (session.closed) break;
      }
    }
  } catch (const std::exception& e) {
    if (config_.log) spdlog::warn("connection {}: {}", connection_id, e.what());
  }
  const bool had_agent = session.registered;
  close_session(session);
  socket->close();
  if (config_.log) {
    if (had_agent) {
      spdlog::info("connection {} closed, agent {} reaped", connection_id, session.agent_id);
    } else {
      spdlog::info("connection {} closed", connection_id);
    }
  }
}

void Server::close_session(AgentSession& s) {
  if (!s.registered) return;
  runners_[s.scene_index]->remove_agent(s.agent_id);
  s.registered = false;
  live_sessions_.fetch_sub(1);
}

wire::CategoryList Server::categories_of(std::size_t scene_index) const {
  wire::CategoryList out;
  for (const auto& [id, name] : category_table(runners_[scene_index]->scene())) {
    out.emplace_back(id, name);
  }
  return out;
}

void Server::attach(AgentSession& s, std::size_t scene_index) {
  AgentState agent;
  agent.agent_id = s.agent_id;
  agent.follow = s.follow;
  runners_[scene_index]->add_agent(agent);
  s.scene_index = scene_index;
}

wire::WireMessage Server::handle_request(AgentSession& session, const wire::WireMessage& request) {
  using wire::Opcode;
  try {
    const auto op = static_cast<Opcode>(request.opcode);
    if (op == Opcode::kRegister) return on_register(session, request.body);
    if (!session.registered) {
      return error_reply(wire::ErrorCode::kBadRequest, "agent is not registered");
    }
    switch (op) {
      case Opcode::kChangeScene: return on_change_scene(session, request.body);
      case Opcode::kGetFrame: return on_get_frame(session, request.body);
      case Opcode::kSetPosition: return on_set_position(session, request.body);
      case Opcode::kSetRotation: return on_set_rotation(session, request.body);
      case Opcode::kToggleFollow: return on_toggle_follow(session, request.body);
      case Opcode::kDelete: return on_delete(session, request.body);
      default: break;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02X", request.opcode);
    return error_reply(wire::ErrorCode::kBadRequest, std::string("unknown opcode ") + buf);
  } catch (const wire::ProtocolError& e) {
    return error_reply(wire::ErrorCode::kBadRequest, e.what());
  } catch (const std::exception& e) {
    return error_reply(wire::ErrorCode::kInternal, e.what());
  }
}

wire::WireMessage Server::on_register(AgentSession& s, wire::ByteView body) {
  if (s.registered) return error_reply(wire::ErrorCode::kBadRequest, "agent already registered");
  const auto hs = wire::decode_handshake(body);
  s.agent_id = next_agent_id_.fetch_add(1);
  s.width = hs.width;
  s.height = hs.height;
  s.view_mask = hs.view_mask;
  s.compression = hs.compression;
  s.follow = true;
  attach(s, 0);
  s.registered = true;
  live_sessions_.fetch_add(1);
  if (config_.log) {
    spdlog::info("agent {} registered ({}x{}, views 0x{:02X}, {}) on '{}'", s.agent_id, s.width,
                 s.height, s.view_mask, s.compression == wire::Compression::kGzip ? "gzip" : "raw",
                 runners_[0]->scene().name);
  }

  wire::RegisterReply out;
  out.agent_id = s.agent_id;
  for (const auto& r : runners_) out.scenes.push_back(r->scene().name);
  out.categories = categories_of(0);
  return reply(wire::Opcode::kRegisterReply, wire::encode_register_reply(out));
}

wire::WireMessage Server::on_change_scene(AgentSession& s, wire::ByteView body) {
  const auto index = wire::decode_scene_index(body);
  if (index >= runners_.size()) {
    return error_reply(wire::ErrorCode::kUnknownScene,
                       "scene index " + std::to_string(index) + " out of range (" +
                           std::to_string(runners_.size()) + " scenes)");
  }
  runners_[s.scene_index]->remove_agent(s.agent_id);
  try {
    attach(s, index);
  } catch (...) {
    s.registered = false;
    live_sessions_.fetch_sub(1);
    throw;
  }
  if (config_.log) {
    spdlog::info("agent {} changed scene to '{}'", s.agent_id, runners_[index]->scene().name);
  }
  return reply(wire::Opcode::kChangeSceneReply, wire::encode_category_list(categories_of(index)));
}

wire::WireMessage Server::on_get_frame(AgentSession& s, wire::ByteView body) {
  wire::expect_empty(body);
  const auto snapshot = runners_[s.scene_index]->latest();
  if (!snapshot) return error_reply(wire::ErrorCode::kInternal, "no snapshot published yet");
  const auto views = render_agent_views(*snapshot, s.agent_id, static_cast<int>(s.width),
                                        static_cast<int>(s.height), s.view_mask);
  return reply(wire::Opcode::kFrameReply, wire::pack_views(views, s.compression));
}

wire::WireMessage Server::on_set_position(AgentSession& s, wire::ByteView body) {
  const auto v = wire::decode_vec3f(body);
  const Vec3 p(v.x, v.y, v.z);
  if (!is_finite(p)) return error_reply(wire::ErrorCode::kBadRequest, "position must be finite");
  const auto id = s.agent_id;
  if (s.follow) {
    runners_[s.scene_index]->apply([p](World& w) { set_mover_position(w, p); });
  } else {
    runners_[s.scene_index]->apply([id, p](World& w) {
      if (auto* a = w.find_agent(id)) a->pose.position = p;
    });
  }
  return reply(wire::Opcode::kSetPositionAck);
}

wire::WireMessage Server::on_set_rotation(AgentSession& s, wire::ByteView body) {
  const auto v = wire::decode_vec3f(body);
  const Vec3 euler(v.x, v.y, v.z);
  if (!is_finite(euler)) return error_reply(wire::ErrorCode::kBadRequest, "rotation must be finite");
  const Quat q = quat_from_euler_deg(euler);
  const auto id = s.agent_id;
  if (s.follow) {
    runners_[s.scene_index]->apply([q](World& w) { set_mover_orientation(w, q); });
  } else {
    runners_[s.scene_index]->apply([id, q](World& w) {
      if (auto* a = w.find_agent(id)) a->pose.orientation = q;
    });
  }
  return reply(wire::Opcode::kSetRotationAck);
}

wire::WireMessage Server::on_toggle_follow(AgentSession& s, wire::ByteView body) {
  wire::expect_empty(body);
  const bool follow = !s.follow;
  const auto id = s.agent_id;
  runners_[s.scene_index]->apply([id, follow](World& w) {
    AgentState* a = w.find_agent(id);
    if (!a) return;
    a->follow = follow;
    if (follow) {
      a->pose = w.mover.pose;
      a->linear_velocity = w.mover.linear_velocity;
      a->angular_velocity = w.mover.angular_velocity;
    } else {
      a->linear_velocity.setZero();
      a->angular_velocity.setZero();
    }
  });
  s.follow = follow;
  return reply(wire::Opcode::kToggleFollowReply, wire::encode_follow_state(follow));
}

wire::WireMessage Server::on_delete(AgentSession& s, wire::ByteView body) {
  wire::expect_empty(body);
  if (config_.log) spdlog::info("agent {} deleted", s.agent_id);
  close_session(s);
  s.closed = true;
  return reply(wire::Opcode::kDeleteAck);
}

}  // namespace visenv
