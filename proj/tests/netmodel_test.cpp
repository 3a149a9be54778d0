#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "holo/error.hpp"
#include "holo/netmodel.hpp"

using namespace holo::net;

namespace {

std::vector<SimTime> latency_multiset(const Timeline& tl) {
  std::vector<SimTime> out;
  for (const auto& i : tl.interactions) out.push_back(i.latency);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Analytic, Latencies) {
  EXPECT_EQ(latency_ms(ArchProfile::cloud_default()), 170.0);
  EXPECT_EQ(latency_ms(ArchProfile::edge_default()), 35.0);
}

TEST(Analytic, Bandwidths) {
  EXPECT_EQ(bandwidth_MBps(ArchProfile::cloud_default()), 90.0);
  EXPECT_NEAR(bandwidth_MBps(ArchProfile::edge_default()), 0.28, 1e-12);
}

TEST(Analytic, ReportAndReduction) {
  const AnalyticReport r = analytic_report(ArchProfile::cloud_default(), ArchProfile::edge_default());
  EXPECT_NEAR(r.bandwidth_reduction_percent, (90.0 - 0.28) / 90.0 * 100.0, 1e-9);
  EXPECT_GT(r.bandwidth_reduction_percent, 99.0);
  EXPECT_NEAR(r.bandwidth_reduction_percent, 99.69, 0.005);
  EXPECT_TRUE(r.edge.within_interaction_bound);
  EXPECT_FALSE(r.cloud.within_interaction_bound);
  EXPECT_FALSE(r.cgh_fits_frame_budget.has_value());
}

TEST(Analytic, FrameBudgetFlag) {
  const auto cloud = ArchProfile::cloud_default();
  const auto edge = ArchProfile::edge_default();
  EXPECT_TRUE(*analytic_report(cloud, edge, 27.0).cgh_fits_frame_budget);
  EXPECT_FALSE(*analytic_report(cloud, edge, 40.0).cgh_fits_frame_budget);
  EXPECT_NEAR(kFrameBudgetMs, 33.3, 0.05);
}

TEST(Analytic, ZeroCloudBandwidthRejected) {
  ArchProfile cloud = ArchProfile::cloud_default();
  cloud.stream_bandwidth_MBps = 0.0;
  try {
    analytic_report(cloud, ArchProfile::edge_default());
    FAIL();
  } catch (const holo::Error& e) {
    EXPECT_EQ(e.code(), "net.zero_cloud_bandwidth");
  }
  ArchProfile bad = ArchProfile::edge_default();
  bad.rtt_ms = -1.0;
  EXPECT_THROW(bad.validate(), holo::Error);
}

TEST(Simulation, EdgeLatencyIsExact) {
  const Timeline tl = simulate_pipeline(ArchProfile::edge_default(), {1, 10});
  ASSERT_EQ(tl.interactions.size(), 10u);
  for (const auto& i : tl.interactions) EXPECT_EQ(to_ms(i.latency), 35.0);
  EXPECT_EQ(tl.mean_latency_ms(), 35.0);
}

TEST(Simulation, AgreesWithAnalyticForBothArchitectures) {
  for (const auto& p : {ArchProfile::cloud_default(), ArchProfile::edge_default()}) {
    const Timeline tl = simulate_pipeline(p, {4, 50, 100.0, true});
    for (const auto& i : tl.interactions) ASSERT_EQ(to_ms(i.latency), latency_ms(p));
    EXPECT_EQ(tl.mean_latency_ms(), latency_ms(p));
  }
}

TEST(Simulation, FlTrafficDoesNotTouchRenderPath) {
  for (auto p : {ArchProfile::cloud_default(), ArchProfile::edge_default()}) {
    p.update_bytes = 4'200'000;
    PipelineOptions off{3, 400, 100.0, false};
    PipelineOptions on = off;
    on.fl_enabled = true;
    const Timeline a = simulate_pipeline(p, off);
    const Timeline b = simulate_pipeline(p, on);
    EXPECT_GT(b.events.size(), a.events.size());
    EXPECT_EQ(latency_multiset(a), latency_multiset(b));
  }
}

TEST(Simulation, UploadCadence) {
  const Timeline tl = simulate_pipeline(ArchProfile::edge_default(), {3, 600, 100.0, true});
  std::map<std::uint32_t, int> uploads, downloads;
  for (const auto& e : tl.events) {
    if (e.kind == EventKind::UpdateUploaded) ++uploads[e.user_id];
    if (e.kind == EventKind::GlobalDownloaded) ++downloads[e.user_id];
  }
  ASSERT_EQ(uploads.size(), 3u);
  for (const auto& [user, n] : uploads) {
    EXPECT_EQ(n, 4) << "user " << user;
    EXPECT_EQ(downloads[user], 4);
  }
  for (const auto& u : tl.users) EXPECT_EQ(u.updates_uploaded, 4u);
}

TEST(Simulation, EventsSortedAndDeterministic) {
  const PipelineOptions o{2, 30, 100.0, true, 3.0, 9};
  const Timeline a = simulate_pipeline(ArchProfile::cloud_default(), o);
  EXPECT_TRUE(std::is_sorted(a.events.begin(), a.events.end(),
                             [](const Event& x, const Event& y) { return x.t < y.t; }));
  EXPECT_EQ(a.events, simulate_pipeline(ArchProfile::cloud_default(), o).events);
}

TEST(Ordering, GeneratedTimelinesAreValid) {
  for (double jitter : {0.0, 5.0}) {
    const Timeline tl = simulate_pipeline(ArchProfile::edge_default(), {3, 200, 100.0, true, jitter, 1});
    EXPECT_TRUE(verify_ordering(tl).empty());
  }
}

TEST(Ordering, DisplayBeforeCommandIsOneViolation) {
  Timeline tl;
  const auto at = [](EventKind k, int ms) { return Event{k, 1, SimTime(ms * 1000), 0}; };
  tl.events = {at(EventKind::InputCaptured, 0), at(EventKind::StateExtracted, 0),
               at(EventKind::InferenceDone, 20), at(EventKind::FrameDisplayed, 25),
               at(EventKind::CommandSent, 27), at(EventKind::FrameRendered, 27)};
  const auto v = verify_ordering(tl);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].first.kind, EventKind::FrameDisplayed);
  EXPECT_EQ(v[0].second.kind, EventKind::CommandSent);
  EXPECT_NE(v[0].message.find("FrameDisplayed"), std::string::npos);
  EXPECT_NE(v[0].message.find("CommandSent"), std::string::npos);
}

TEST(Ordering, ShuffledTimelinesAreCaught) {
  const Timeline valid = simulate_pipeline(ArchProfile::cloud_default(), {2, 20, 100.0, true});
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Timeline shuffled = valid;
    std::shuffle(shuffled.events.begin(), shuffled.events.end(), rng);
    EXPECT_FALSE(verify_ordering(shuffled).empty());
  }
}

TEST(Ordering, CaptureWithoutDisplayIsFlagged) {
  Timeline tl;
  tl.events = {Event{EventKind::InputCaptured, 2, SimTime(0), 0}};
  EXPECT_EQ(verify_ordering(tl).size(), 1u);
}
