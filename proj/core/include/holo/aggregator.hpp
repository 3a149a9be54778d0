#pragma once

// Round-barrier FedAvg aggregator and the matching edge-node client session,
// both speaking the proto wire format over a transport::Stream.

#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

#include "holo/error.hpp"
#include "holo/fedlearn.hpp"
#include "holo/transport.hpp"

namespace holo::proto {

struct AggregatorConfig {
  std::size_t expected_clients = 1;
  std::chrono::milliseconds timeout{30'000};
  std::size_t rounds = 1;
  fl::ModelParams initial;
};

struct LateUpdate {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
};

struct RoundLog {
  std::uint32_t round = 0;
  std::vector<std::uint32_t> participants;  // sorted client ids
  std::vector<std::uint32_t> duplicates_rejected;
  std::vector<LateUpdate> late_discarded;
  std::size_t disconnects = 0;
  bool timed_out = false;
  bool aggregated = false;
  double wait_ms = 0.0;  // time spent at the barrier
};

struct ServeResult {
  std::vector<RoundLog> rounds;
  fl::ModelParams final_global;
};

/// Serves `cfg.rounds` rounds over already connected streams. Each round
/// broadcasts the global model, waits until `expected_clients` distinct
/// clients have reported or the timeout fires, aggregates the received
/// updates in client-id order and moves on. The final global model is
/// broadcast with round == cfg.rounds before the streams are closed.
ServeResult aggregator_serve(std::vector<std::unique_ptr<transport::Stream>> connections,
                             const AggregatorConfig& cfg);

/// Accepts up to `cfg.expected_clients` TCP clients (waiting at most
/// `accept_timeout` for each) and then serves as above.
ServeResult aggregator_serve(transport::TcpListener& listener, const AggregatorConfig& cfg,
                             std::chrono::milliseconds accept_timeout);

struct SessionRound {
  std::uint32_t round = 0;
  double global_accuracy = 0.0;  // received model on the local data
  double local_accuracy = 0.0;   // after local training
};

struct SessionResult {
  std::vector<SessionRound> rounds;
  std::vector<AckMessage> acks;
  fl::ModelParams final_global;
};

class SessionError : public Error {
 public:
  SessionError(const std::string& message, std::int64_t last_completed_round);
  /// -1 when no round completed.
  std::int64_t last_completed_round() const noexcept { return last_round_; }

 private:
  std::int64_t last_round_;
};

/// Receives each global model, trains locally with fl::client_update, sends
/// the update, and returns once the global for round cfg.rounds arrives.
SessionResult client_session(transport::Stream& stream, const fl::ClientDataset& local_data,
                             const fl::FLConfig& cfg);

}  // namespace holo::proto
