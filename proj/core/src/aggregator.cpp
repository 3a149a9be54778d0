#include "holo/aggregator.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace holo::proto {

namespace {

struct Inbound {
  std::size_t conn = 0;
  std::optional<Message> msg;  // empty: the connection dropped
};

class Inbox {
 public:
  void push(Inbound in) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(in));
    }
    cv_.notify_one();
  }

  std::optional<Inbound> pop_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_until(lock, deadline, [&] { return !queue_.empty(); })) return std::nullopt;
    Inbound in = std::move(queue_.front());
    queue_.pop_front();
    return in;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Inbound> queue_;
};

struct Connection {
  std::unique_ptr<transport::Stream> stream;
  bool alive = true;
};

bool try_send(Connection& c, const Message& m) {
  if (!c.alive) return false;
  try {
    transport::send_message(*c.stream, m);
    return true;
  } catch (const Error&) {
    c.alive = false;
    return false;
  }
}

}  // namespace

ServeResult aggregator_serve(std::vector<std::unique_ptr<transport::Stream>> streams,
                             const AggregatorConfig& cfg) {
  if (cfg.expected_clients < 1) {
    throw Error("proto.invalid_config", "expected_clients must be >= 1");
  }
  cfg.initial.validate();

  std::vector<Connection> conns;
  for (auto& s : streams) conns.push_back({std::move(s), true});

  Inbox inbox;
  std::vector<std::thread> readers;
  for (std::size_t i = 0; i < conns.size(); ++i) {
    readers.emplace_back([&inbox, &conns, i] {
      while (true) {
        try {
          inbox.push({i, transport::receive_message(*conns[i].stream)});
        } catch (const Error&) {
          inbox.push({i, std::nullopt});
          return;
        }
      }
    });
  }

  ServeResult result;
  fl::ModelParams global = cfg.initial;
  const std::size_t param_count = global.layout.param_count();
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const auto round = static_cast<std::uint32_t>(r);
    global.version = round;
    for (auto& c : conns) try_send(c, GlobalModelMessage{round, global.values});

    RoundLog log;
    log.round = round;
    std::map<std::uint32_t, UpdateMessage> barrier;
    const auto start = std::chrono::steady_clock::now();
    const auto deadline = start + cfg.timeout;
    while (barrier.size() < cfg.expected_clients) {
      if (std::none_of(conns.begin(), conns.end(), [](const Connection& c) { return c.alive; })) {
        break;  // nothing more can arrive
      }
      auto in = inbox.pop_until(deadline);
      if (!in) {
        log.timed_out = true;
        break;
      }
      Connection& c = conns[in->conn];
      if (!in->msg) {
        c.alive = false;
        ++log.disconnects;
        continue;
      }
      auto* up = std::get_if<UpdateMessage>(&*in->msg);
      if (!up) continue;  // only updates flow client -> aggregator
      if (up->round != round) {
        log.late_discarded.push_back({up->client_id, up->round});
        try_send(c, AckMessage{up->round, up->client_id, AckStatus::LateRound});
        continue;
      }
      if (up->params.size() != param_count || up->n_samples == 0) {
        try_send(c, AckMessage{round, up->client_id, AckStatus::BadLayout});
        continue;
      }
      if (barrier.contains(up->client_id)) {
        log.duplicates_rejected.push_back(up->client_id);
        try_send(c, AckMessage{round, up->client_id, AckStatus::Duplicate});
        continue;
      }
      try_send(c, AckMessage{round, up->client_id, AckStatus::Accepted});
      barrier.emplace(up->client_id, std::move(*up));
    }
    log.wait_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();

    if (!barrier.empty()) {
      std::vector<fl::ClientUpdate> updates;
      for (auto& [id, m] : barrier) {
        log.participants.push_back(id);
        updates.push_back({id, fl::ModelParams{global.layout, std::move(m.params), round},
                           m.n_samples, round});
      }
      global = fl::aggregate(updates);
      log.aggregated = true;
    } else {
      global.version = round + 1;
    }
    result.rounds.push_back(std::move(log));
  }

  global.version = static_cast<std::uint32_t>(cfg.rounds);
  for (auto& c : conns) try_send(c, GlobalModelMessage{global.version, global.values});
  for (auto& c : conns) c.stream->close();
  for (auto& t : readers) t.join();
  result.final_global = std::move(global);
  return result;
}

ServeResult aggregator_serve(transport::TcpListener& listener, const AggregatorConfig& cfg,
                             std::chrono::milliseconds accept_timeout) {
  std::vector<std::unique_ptr<transport::Stream>> streams;
  while (streams.size() < cfg.expected_clients) {
    auto s = listener.accept(accept_timeout);
    if (!s) break;
    streams.push_back(std::move(s));
  }
  return aggregator_serve(std::move(streams), cfg);
}

SessionError::SessionError(const std::string& message, std::int64_t last_completed_round)
    : Error("proto.session_disconnected", message), last_round_(last_completed_round) {}

SessionResult client_session(transport::Stream& stream, const fl::ClientDataset& local_data,
                             const fl::FLConfig& cfg) {
  const fl::Layout layout = cfg.layout();
  SessionResult result;
  std::int64_t last_completed = -1;
  while (true) {
    Message msg;
    try {
      msg = transport::receive_message(stream);
    } catch (const Error& e) {
      throw SessionError(std::string("lost aggregator: ") + e.what(), last_completed);
    }
    if (auto* ack = std::get_if<AckMessage>(&msg)) {
      result.acks.push_back(*ack);
      continue;
    }
    auto* g = std::get_if<GlobalModelMessage>(&msg);
    if (!g) continue;
    fl::ModelParams global{layout, std::move(g->params), g->round};
    global.validate();
    if (g->round >= cfg.rounds) {
      result.final_global = std::move(global);
      return result;
    }
    SessionRound sr;
    sr.round = g->round;
    sr.global_accuracy = fl::accuracy(global, local_data);
    const fl::ClientUpdate up = fl::client_update(global, local_data, cfg);
    sr.local_accuracy = fl::accuracy(up.params, local_data);
    try {
      transport::send_message(stream, UpdateMessage{up.round, up.client_id, up.n_samples,
                                                    up.params.values});
    } catch (const Error& e) {
      throw SessionError(std::string("lost aggregator: ") + e.what(), last_completed);
    }
    last_completed = g->round;
    result.rounds.push_back(sr);
  }
}

}  // namespace holo::proto
