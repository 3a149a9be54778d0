#pragma once

// Analytic cloud-vs-edge latency/bandwidth comparison and a deterministic
// discrete-event simulation of the interaction and learning loop.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holo::net {

enum class Arch : std::uint8_t { Cloud, Edge };

std::string_view to_string(Arch a) noexcept;

struct ArchProfile {
  Arch arch = Arch::Edge;
  double rtt_ms = 0.0;
  double processing_ms = 0.0;
  double stream_bandwidth_MBps = 0.0;  // sustained volumetric stream
  std::uint64_t update_bytes = 0;      // model update per interval
  double update_interval_s = 15.0;

  std::string_view name() const noexcept { return to_string(arch); }
  void validate() const;

  /// 150 ms RTT, 20 ms processing, 90 MB/s volumetric stream.
  static ArchProfile cloud_default();
  /// 15 ms RTT, 20 ms processing, 4.2 MB update every 15 s.
  static ArchProfile edge_default();
};

inline constexpr double kInteractionBoundMs = 50.0;
inline constexpr double kFrameBudgetMs = 1000.0 / 30.0;

double latency_ms(const ArchProfile& p) noexcept;
/// Cloud: the stream rate. Edge: update_bytes / interval, in MB/s (1 MB = 1e6 B).
double bandwidth_MBps(const ArchProfile& p);

struct ArchReport {
  Arch arch = Arch::Edge;
  double latency_ms = 0.0;
  double bandwidth_MBps = 0.0;
  bool within_interaction_bound = false;  // latency < 50 ms
};

struct AnalyticReport {
  ArchReport cloud;
  ArchReport edge;
  double bandwidth_reduction_percent = 0.0;
  double latency_reduction_percent = 0.0;
  /// Set when a CGH frame time was supplied: does it fit 1/30 s?
  std::optional<bool> cgh_fits_frame_budget;
};

/// Throws net.zero_cloud_bandwidth when the reduction ratio is undefined.
AnalyticReport analytic_report(const ArchProfile& cloud, const ArchProfile& edge,
                               std::optional<double> cgh_frame_ms = std::nullopt);

enum class EventKind : std::uint8_t {
  InputCaptured,
  StateExtracted,
  InferenceDone,
  CommandSent,
  FrameRendered,
  FrameDisplayed,
  UpdateUploaded,
  GlobalDownloaded,
};

std::string_view to_string(EventKind k) noexcept;

/// Simulated time in integer microseconds keeps every sum exact.
using SimTime = std::chrono::microseconds;

double to_ms(SimTime t) noexcept;
SimTime from_ms(double ms);

struct Event {
  EventKind kind = EventKind::InputCaptured;
  std::uint32_t user_id = 0;
  SimTime t{0};
  std::uint64_t chain = 0;  // interaction index, or an FL exchange index

  bool operator==(const Event&) const = default;
};

struct InteractionLatency {
  std::uint32_t user_id = 0;
  std::uint64_t chain = 0;
  SimTime latency{0};
};

struct UserStats {
  std::uint32_t user_id = 0;
  std::size_t interactions = 0;
  double mean_latency_ms = 0.0;
  double min_latency_ms = 0.0;
  double max_latency_ms = 0.0;
  std::size_t updates_uploaded = 0;
};

struct Timeline {
  std::vector<Event> events;  // sorted by time, ties in emission order
  std::vector<InteractionLatency> interactions;
  std::vector<UserStats> users;

  double mean_latency_ms() const;
};

struct PipelineOptions {
  std::size_t n_users = 1;
  std::size_t n_interactions = 1;  // per user
  double interaction_period_ms = 100.0;
  bool fl_enabled = false;
  double jitter_ms = 0.0;  // uniform +-jitter on the processing stage
  std::uint64_t seed = 42;
};

/// Interaction chain per user: capture -> extract (+0) -> inference
/// (+processing) -> command (+rtt/2) -> render (+0) -> display (+rtt/2).
/// With FL on, each user uploads every update_interval_s within the scenario
/// duration (n_interactions * period) and downloads the global one RTT later.
Timeline simulate_pipeline(const ArchProfile& profile, const PipelineOptions& opts);

struct Violation {
  Event first;
  Event second;
  std::string message;
};

/// Empty iff every chain follows the causal kind order with non-decreasing
/// timestamps, and every capture reaches a display. At most one violation is
/// reported per chain.
std::vector<Violation> verify_ordering(const Timeline& tl);

}  // namespace holo::net
