#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "holo/aggregator.hpp"
#include "holo/fedlearn.hpp"
#include "holo/transport.hpp"

using namespace holo;
using namespace std::chrono_literals;
using proto::AckStatus;

namespace {

fl::FLConfig small_fl(std::size_t clients, std::size_t rounds) {
  fl::FLConfig cfg;
  cfg.num_clients = clients;
  cfg.rounds = rounds;
  cfg.samples_per_client = 120;
  cfg.test_samples = 140;
  return cfg;
}

proto::AggregatorConfig agg_config(const fl::FLConfig& cfg, std::size_t expected,
                                   std::chrono::milliseconds timeout) {
  return {expected, timeout, cfg.rounds, fl::init_params(cfg.layout(), cfg.seed)};
}

struct Harness {
  std::vector<std::unique_ptr<transport::Stream>> server_ends;
  std::vector<std::unique_ptr<transport::Stream>> client_ends;

  explicit Harness(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [s, c] = transport::make_memory_pair();
      server_ends.push_back(std::move(s));
      client_ends.push_back(std::move(c));
    }
  }
};

std::future<proto::SessionResult> spawn_session(transport::Stream& s, const fl::ClientDataset& d,
                                                const fl::FLConfig& cfg) {
  return std::async(std::launch::async, [&s, &d, cfg] { return proto::client_session(s, d, cfg); });
}

proto::GlobalModelMessage expect_global(transport::Stream& s) {
  auto m = transport::receive_message(s);
  auto* g = std::get_if<proto::GlobalModelMessage>(&m);
  if (!g) throw std::runtime_error("expected a global model frame");
  return *g;
}

proto::AckMessage expect_ack(transport::Stream& s) {
  auto m = transport::receive_message(s);
  auto* a = std::get_if<proto::AckMessage>(&m);
  if (!a) throw std::runtime_error("expected an ack frame");
  return *a;
}

fl::ClientUpdate local_update(const fl::ModelParams& global, const fl::ClientDataset& d,
                              const fl::FLConfig& cfg) {
  return fl::client_update(global, d, cfg);
}

}  // namespace

TEST(Aggregator, ThreeClientsMatchInProcessFedAvg) {
  const fl::FLConfig cfg = small_fl(3, 4);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(3);
  std::vector<std::future<proto::SessionResult>> sessions;
  for (std::size_t k = 0; k < 3; ++k) sessions.push_back(spawn_session(*h.client_ends[k], data.clients[k], cfg));
  const auto served = proto::aggregator_serve(std::move(h.server_ends), agg_config(cfg, 3, 10s));

  const auto reference = fl::run_fedavg(cfg, data);
  EXPECT_EQ(served.final_global.values, reference.final_params.values);
  ASSERT_EQ(served.rounds.size(), 4u);
  for (const auto& log : served.rounds) {
    EXPECT_EQ(log.participants, (std::vector<std::uint32_t>{0, 1, 2}));
    EXPECT_FALSE(log.timed_out);
  }
  for (auto& f : sessions) {
    const auto r = f.get();
    EXPECT_EQ(r.rounds.size(), 4u);
    EXPECT_EQ(r.final_global.values, reference.final_params.values);
    for (const auto& a : r.acks) EXPECT_EQ(a.status, AckStatus::Accepted);
  }
}

TEST(Aggregator, SingleClientMatchesFedAvg) {
  const fl::FLConfig cfg = small_fl(1, 5);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(1);
  auto session = spawn_session(*h.client_ends[0], data.clients[0], cfg);
  const auto served = proto::aggregator_serve(std::move(h.server_ends), agg_config(cfg, 1, 10s));
  EXPECT_EQ(served.final_global.values, fl::run_fedavg(cfg, data).final_params.values);
  EXPECT_EQ(session.get().rounds.size(), 5u);
}

TEST(Aggregator, PartialRoundAfterTimeoutEqualsAggregateOfReceived) {
  const fl::FLConfig cfg = small_fl(3, 1);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(3);
  auto s0 = spawn_session(*h.client_ends[0], data.clients[0], cfg);
  auto s1 = spawn_session(*h.client_ends[1], data.clients[1], cfg);
  // Client 2 stays connected but silent.
  const auto acfg = agg_config(cfg, 3, 300ms);
  const auto served = proto::aggregator_serve(std::move(h.server_ends), acfg);

  fl::ModelParams g0 = acfg.initial;
  const auto expected = fl::aggregate({local_update(g0, data.clients[0], cfg),
                                       local_update(g0, data.clients[1], cfg)});
  EXPECT_EQ(served.final_global.values, expected.values);
  EXPECT_TRUE(served.rounds[0].timed_out);
  EXPECT_EQ(served.rounds[0].participants, (std::vector<std::uint32_t>{0, 1}));
  s0.get();
  s1.get();
}

TEST(Aggregator, DuplicateSubmissionRejected) {
  const fl::FLConfig cfg = small_fl(2, 1);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(2);
  const auto acfg = agg_config(cfg, 2, 5s);
  auto server = std::async(std::launch::async, [&] {
    return proto::aggregator_serve(std::move(h.server_ends), acfg);
  });

  transport::Stream& a = *h.client_ends[0];
  const auto g = expect_global(a);
  const fl::ModelParams global{cfg.layout(), g.params, g.round};
  const auto first = local_update(global, data.clients[0], cfg);
  proto::UpdateMessage msg{0, 0, first.n_samples, first.params.values};
  transport::send_message(a, msg);
  EXPECT_EQ(expect_ack(a).status, AckStatus::Accepted);
  msg.params.assign(msg.params.size(), 9.0f);
  transport::send_message(a, msg);
  EXPECT_EQ(expect_ack(a).status, AckStatus::Duplicate);

  auto other = spawn_session(*h.client_ends[1], data.clients[1], cfg);
  const auto served = server.get();
  const auto expected = fl::aggregate({first, local_update(global, data.clients[1], cfg)});
  EXPECT_EQ(served.final_global.values, expected.values);
  EXPECT_EQ(served.rounds[0].duplicates_rejected, (std::vector<std::uint32_t>{0}));
  other.get();
}

TEST(Aggregator, LateUpdateDiscarded) {
  const fl::FLConfig cfg = small_fl(1, 2);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(1);
  const auto acfg = agg_config(cfg, 1, 5s);
  auto server = std::async(std::launch::async, [&] {
    return proto::aggregator_serve(std::move(h.server_ends), acfg);
  });
  transport::Stream& c = *h.client_ends[0];
  auto g = expect_global(c);
  const auto up = local_update({cfg.layout(), g.params, g.round}, data.clients[0], cfg);
  transport::send_message(c, proto::UpdateMessage{0, 0, up.n_samples, up.params.values});
  EXPECT_EQ(expect_ack(c).status, AckStatus::Accepted);
  g = expect_global(c);
  ASSERT_EQ(g.round, 1u);
  transport::send_message(c, proto::UpdateMessage{0, 0, up.n_samples, up.params.values});
  EXPECT_EQ(expect_ack(c).status, AckStatus::LateRound);
  const auto up1 = local_update({cfg.layout(), g.params, g.round}, data.clients[0], cfg);
  transport::send_message(c, proto::UpdateMessage{1, 0, up1.n_samples, up1.params.values});
  EXPECT_EQ(expect_ack(c).status, AckStatus::Accepted);
  EXPECT_EQ(expect_global(c).round, 2u);
  const auto served = server.get();
  ASSERT_EQ(served.rounds[1].late_discarded.size(), 1u);
  EXPECT_EQ(served.rounds[1].late_discarded[0].round, 0u);
  EXPECT_EQ(served.final_global.values, up1.params.values);
}

TEST(Aggregator, ClientKilledMidRound) {
  const fl::FLConfig cfg = small_fl(3, 2);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  Harness h(3);
  auto s0 = spawn_session(*h.client_ends[0], data.clients[0], cfg);
  auto s1 = spawn_session(*h.client_ends[1], data.clients[1], cfg);
  transport::Stream& doomed = *h.client_ends[2];
  auto killer = std::async(std::launch::async, [&] {
    expect_global(doomed);
    doomed.close();
  });
  const auto acfg = agg_config(cfg, 3, 300ms);
  const auto served = proto::aggregator_serve(std::move(h.server_ends), acfg);
  killer.get();

  EXPECT_EQ(served.rounds[0].disconnects, 1u);
  EXPECT_EQ(served.rounds[0].participants, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_TRUE(served.rounds[1].aggregated);
  fl::ModelParams g = acfg.initial;
  for (std::uint32_t r = 0; r < 2; ++r) {
    g.version = r;
    g = fl::aggregate({local_update(g, data.clients[0], cfg), local_update(g, data.clients[1], cfg)});
  }
  EXPECT_EQ(served.final_global.values, g.values);
  EXPECT_EQ(s0.get().rounds.size(), 2u);
  s1.get();
}

TEST(Aggregator, BarrierWaitBoundedByTimeout) {
  const fl::FLConfig cfg = small_fl(2, 1);
  Harness h(2);
  const auto served = proto::aggregator_serve(std::move(h.server_ends), agg_config(cfg, 2, 200ms));
  const auto& log = served.rounds[0];
  EXPECT_TRUE(log.timed_out);
  EXPECT_FALSE(log.aggregated);
  EXPECT_GE(log.wait_ms, 200.0);
  EXPECT_LT(log.wait_ms, 300.0);
  EXPECT_EQ(served.final_global.values, agg_config(cfg, 2, 200ms).initial.values);
}

TEST(Session, DisconnectReportsLastCompletedRound) {
  const fl::FLConfig cfg = small_fl(1, 5);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  auto [server, client] = transport::make_memory_pair();
  auto session = spawn_session(*client, data.clients[0], cfg);
  const fl::ModelParams init = fl::init_params(cfg.layout(), cfg.seed);
  transport::send_message(*server, proto::GlobalModelMessage{0, init.values});
  transport::receive_message(*server);
  transport::send_message(*server, proto::GlobalModelMessage{1, init.values});
  transport::receive_message(*server);
  server->close();
  try {
    session.get();
    FAIL();
  } catch (const proto::SessionError& e) {
    EXPECT_EQ(e.last_completed_round(), 1);
    EXPECT_EQ(e.code(), "proto.session_disconnected");
  }
}

TEST(Tcp, LoopbackFedAvgMatchesInProcess) {
  const fl::FLConfig cfg = small_fl(3, 3);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  transport::TcpListener listener(0);
  const std::uint16_t port = listener.port();
  std::vector<std::future<proto::SessionResult>> sessions;
  for (std::size_t k = 0; k < 3; ++k) {
    sessions.push_back(std::async(std::launch::async, [&, k] {
      auto s = transport::tcp_connect("127.0.0.1", port, 5s);
      return proto::client_session(*s, data.clients[k], cfg);
    }));
  }
  const auto served = proto::aggregator_serve(listener, agg_config(cfg, 3, 10s), 5s);
  EXPECT_EQ(served.final_global.values, fl::run_fedavg(cfg, data).final_params.values);
  for (auto& f : sessions) EXPECT_EQ(f.get().rounds.size(), 3u);
}

TEST(Tcp, AcceptTimesOut) {
  transport::TcpListener listener(0);
  EXPECT_EQ(listener.accept(50ms), nullptr);
}

TEST(Memory, ClosedPeerSurfacesAsError) {
  auto [a, b] = transport::make_memory_pair();
  b->close();
  std::uint8_t byte = 0;
  try {
    a->read_exact({&byte, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "transport.closed");
  }
}
