#include "swarmguide/server.hpp"

#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace swarmguide {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Frame = std::shared_ptr<const std::string>;

namespace {

class Client;

struct Inbound {
  enum class Kind { Connect, Text, Disconnect };
  Kind kind;
  std::uint64_t client;
  std::string text;
};

// State shared between the I/O thread and the simulation thread.
struct Hub {
  std::size_t queue_limit = 256;
  std::atomic<long> dropped{0};

  std::mutex inbox_mutex;
  std::deque<Inbound> inbox;

  std::mutex clients_mutex;
  std::map<std::uint64_t, std::weak_ptr<Client>> clients;

  void push(Inbound in) {
    std::lock_guard lock(inbox_mutex);
    inbox.push_back(std::move(in));
  }

  std::deque<Inbound> drain() {
    std::deque<Inbound> out;
    std::lock_guard lock(inbox_mutex);
    out.swap(inbox);
    return out;
  }
};

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, std::shared_ptr<Hub> hub, std::uint64_t id)
      : ws_(std::move(socket)), hub_(std::move(hub)), id_(id) {}

  void run() {
    asio::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->on_run(); });
  }

  void send(Frame frame) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)] { self->enqueue(frame); });
  }

  void close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void on_run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Client::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    {
      std::lock_guard lock(hub_->clients_mutex);
      hub_->clients[id_] = weak_from_this();
    }
    hub_->push({Inbound::Kind::Connect, id_, {}});
    do_read();
  }

  void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&Client::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      queue_.clear();
      {
        std::lock_guard lock(hub_->clients_mutex);
        hub_->clients.erase(id_);
      }
      hub_->push({Inbound::Kind::Disconnect, id_, {}});
      return;
    }
    hub_->push({Inbound::Kind::Text, id_, beast::buffers_to_string(buffer_.data())});
    buffer_.consume(buffer_.size());
    do_read();
  }

  void enqueue(const Frame& frame) {
    if (closed_) return;
    if (queue_.size() >= hub_->queue_limit) {
      ++hub_->dropped;
      return;
    }
    queue_.push_back(frame);
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.async_write(asio::buffer(*queue_.front()), beast::bind_front_handler(&Client::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Hub> hub_;
  std::uint64_t id_;
  std::deque<Frame> queue_;
  bool closed_ = false;
};

Frame make_frame(const nlohmann::json& j) { return std::make_shared<const std::string>(j.dump()); }

}  // namespace

struct SessionServer::Impl {
  Impl(SessionCore c, ServerOptions o) : core(std::move(c)), options(std::move(o)), acceptor(io) {
    hub->queue_limit = options.client_queue_limit;
  }

  SessionCore core;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::shared_ptr<Hub> hub = std::make_shared<Hub>();
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  std::atomic<long> ticks{0};
  std::atomic<long> overruns{0};
  std::uint64_t next_client = 1;
  bool started = false;
  std::uint16_t bound_port = 0;

  void do_accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Client>(std::move(socket), hub, next_client++)->run();
      do_accept();
    });
  }

  std::shared_ptr<Client> find(std::uint64_t id) {
    std::lock_guard lock(hub->clients_mutex);
    auto it = hub->clients.find(id);
    return it == hub->clients.end() ? nullptr : it->second.lock();
  }

  void broadcast(const nlohmann::json& j) {
    const Frame frame = make_frame(j);
    std::vector<std::shared_ptr<Client>> targets;
    {
      std::lock_guard lock(hub->clients_mutex);
      for (auto& [id, weak] : hub->clients) {
        if (auto c = weak.lock()) targets.push_back(std::move(c));
      }
    }
    for (auto& c : targets) c->send(frame);
  }

  void reply(std::uint64_t id, const nlohmann::json& j) {
    if (auto c = find(id)) c->send(make_frame(j));
  }

  void process_inbox() {
    for (auto& in : hub->drain()) {
      switch (in.kind) {
        case Inbound::Kind::Connect: reply(in.client, core.scenario_frame()); break;
        case Inbound::Kind::Disconnect: core.on_disconnect(); break;
        case Inbound::Kind::Text: {
          auto r = core.handle_message(in.text);
          for (const auto& j : r.reply) reply(in.client, j);
          for (const auto& j : r.broadcast) broadcast(j);
          break;
        }
      }
    }
  }

  void sim_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(core.scenario().sample_time));
    auto next = clock::now();
    auto next_heartbeat = next + options.heartbeat;
    while (!stopping) {
      next += period;
      const auto now = clock::now();
      if (now < next) {
        std::this_thread::sleep_until(next);
      } else if (now - next > period) {
        // Late by more than a tick: count it and re-anchor instead of bursting.
        ++overruns;
        next = now;
      }
      process_inbox();
      for (const auto& j : core.tick()) broadcast(j);
      ticks = core.simulator().tick();
      if (clock::now() >= next_heartbeat) {
        broadcast(core.heartbeat_frame(overruns, hub->dropped));
        next_heartbeat += options.heartbeat;
      }
    }
  }
};

SessionServer::SessionServer(SessionCore core, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(core), std::move(options))) {}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
  if (impl_->started) return;
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    impl_->acceptor.close();
    throw std::system_error(e.code(), e.what());
  }
  impl_->bound_port = impl_->acceptor.local_endpoint().port();
  impl_->do_accept();
  impl_->started = true;
  impl_->io_thread = std::thread([this] { impl_->io.run(); });
  impl_->sim_thread = std::thread([this] { impl_->sim_loop(); });
}

void SessionServer::stop() {
  if (!impl_ || !impl_->started) return;
  impl_->stopping = true;
  if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
  {
    std::lock_guard lock(impl_->hub->clients_mutex);
    for (auto& [id, weak] : impl_->hub->clients) {
      if (auto c = weak.lock()) c->close();
    }
  }
  asio::post(impl_->io, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->io.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->started = false;
}

std::uint16_t SessionServer::port() const { return impl_->bound_port; }

ServerStats SessionServer::stats() const {
  ServerStats s;
  s.ticks = impl_->ticks;
  s.overruns = impl_->overruns;
  s.dropped_frames = impl_->hub->dropped;
  std::lock_guard lock(impl_->hub->clients_mutex);
  s.clients = static_cast<long>(impl_->hub->clients.size());
  return s;
}

const SessionCore& SessionServer::core() const { return impl_->core; }

}  // namespace swarmguide
