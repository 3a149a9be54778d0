#include "holo/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "holo/error.hpp"
#include "holo/rng.hpp"

namespace holo::net {

std::string_view to_string(Arch a) noexcept {
  return a == Arch::Cloud ? "cloud" : "edge";
}

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::InputCaptured: return "InputCaptured";
    case EventKind::StateExtracted: return "StateExtracted";
    case EventKind::InferenceDone: return "InferenceDone";
    case EventKind::CommandSent: return "CommandSent";
    case EventKind::FrameRendered: return "FrameRendered";
    case EventKind::FrameDisplayed: return "FrameDisplayed";
    case EventKind::UpdateUploaded: return "UpdateUploaded";
    case EventKind::GlobalDownloaded: return "GlobalDownloaded";
  }
  return "Unknown";
}

void ArchProfile::validate() const {
  if (!(rtt_ms >= 0.0) || !(processing_ms >= 0.0) || !(stream_bandwidth_MBps >= 0.0)) {
    throw Error("net.invalid_profile", std::string(name()) + " profile has negative values");
  }
  if (update_bytes > 0 && !(update_interval_s > 0.0)) {
    throw Error("net.invalid_profile", "update_interval_s must be > 0 when updates are sent");
  }
}

ArchProfile ArchProfile::cloud_default() {
  return {Arch::Cloud, 150.0, 20.0, 90.0, 0, 15.0};
}

ArchProfile ArchProfile::edge_default() {
  return {Arch::Edge, 15.0, 20.0, 0.0, 4'200'000, 15.0};
}

double latency_ms(const ArchProfile& p) noexcept { return p.rtt_ms + p.processing_ms; }

double bandwidth_MBps(const ArchProfile& p) {
  p.validate();
  if (p.arch == Arch::Cloud) return p.stream_bandwidth_MBps;
  if (p.update_bytes == 0) return 0.0;
  return static_cast<double>(p.update_bytes) / p.update_interval_s / 1e6;
}

AnalyticReport analytic_report(const ArchProfile& cloud, const ArchProfile& edge,
                               std::optional<double> cgh_frame_ms) {
  cloud.validate();
  edge.validate();
  auto arch_report = [](const ArchProfile& p) {
    ArchReport r{p.arch, latency_ms(p), bandwidth_MBps(p), false};
    r.within_interaction_bound = r.latency_ms < kInteractionBoundMs;
    return r;
  };
  AnalyticReport rep;
  rep.cloud = arch_report(cloud);
  rep.edge = arch_report(edge);
  if (!(rep.cloud.bandwidth_MBps > 0.0)) {
    throw Error("net.zero_cloud_bandwidth", "cloud bandwidth must be > 0 for a reduction ratio");
  }
  rep.bandwidth_reduction_percent =
      (rep.cloud.bandwidth_MBps - rep.edge.bandwidth_MBps) / rep.cloud.bandwidth_MBps * 100.0;
  if (rep.cloud.latency_ms > 0.0) {
    rep.latency_reduction_percent =
        (rep.cloud.latency_ms - rep.edge.latency_ms) / rep.cloud.latency_ms * 100.0;
  }
  if (cgh_frame_ms) rep.cgh_fits_frame_budget = *cgh_frame_ms <= kFrameBudgetMs;
  return rep;
}

double to_ms(SimTime t) noexcept { return static_cast<double>(t.count()) / 1000.0; }

SimTime from_ms(double ms) {
  if (!std::isfinite(ms)) throw Error("net.invalid_time", "non-finite duration");
  return SimTime(std::llround(ms * 1000.0));
}

double Timeline::mean_latency_ms() const {
  if (interactions.empty()) return 0.0;
  std::int64_t total = 0;
  for (const auto& i : interactions) total += i.latency.count();
  return static_cast<double>(total) / 1000.0 / static_cast<double>(interactions.size());
}

namespace {

struct Pending {
  Event event;
  std::uint64_t seq;
};

bool is_fl(EventKind k) noexcept {
  return k == EventKind::UpdateUploaded || k == EventKind::GlobalDownloaded;
}

int render_rank(EventKind k) noexcept {
  return static_cast<int>(k);  // InputCaptured .. FrameDisplayed are 0..5
}

int fl_rank(EventKind k) noexcept { return k == EventKind::UpdateUploaded ? 0 : 1; }

}  // namespace

Timeline simulate_pipeline(const ArchProfile& profile, const PipelineOptions& opts) {
  profile.validate();
  if (opts.n_users < 1 || opts.n_interactions < 1) {
    throw Error("net.invalid_options", "n_users and n_interactions must be >= 1");
  }
  if (!(opts.interaction_period_ms > 0.0) || !(opts.jitter_ms >= 0.0)) {
    throw Error("net.invalid_options", "period must be > 0 and jitter >= 0");
  }
  const SimTime half_rtt = from_ms(profile.rtt_ms / 2.0);
  const SimTime rtt = half_rtt + half_rtt;
  const SimTime processing = from_ms(profile.processing_ms);
  const SimTime period = from_ms(opts.interaction_period_ms);
  Pcg64 rng(opts.seed);

  std::vector<Pending> pending;
  std::uint64_t seq = 0;
  auto emit = [&](EventKind kind, std::uint32_t user, SimTime t, std::uint64_t chain) {
    pending.push_back({{kind, user, t, chain}, seq++});
  };

  Timeline tl;
  for (std::size_t u = 0; u < opts.n_users; ++u) {
    const auto user = static_cast<std::uint32_t>(u + 1);
    for (std::size_t j = 0; j < opts.n_interactions; ++j) {
      SimTime proc = processing;
      if (opts.jitter_ms > 0.0) {
        const double jitter = (2.0 * uniform01(rng) - 1.0) * opts.jitter_ms;
        proc = std::max(SimTime(0), processing + from_ms(jitter));
      }
      const SimTime captured = period * static_cast<std::int64_t>(j);
      const SimTime extracted = captured;
      const SimTime inferred = extracted + proc;
      const SimTime sent = inferred + half_rtt;
      const SimTime rendered = sent;
      const SimTime displayed = rendered + half_rtt;
      emit(EventKind::InputCaptured, user, captured, j);
      emit(EventKind::StateExtracted, user, extracted, j);
      emit(EventKind::InferenceDone, user, inferred, j);
      emit(EventKind::CommandSent, user, sent, j);
      emit(EventKind::FrameRendered, user, rendered, j);
      emit(EventKind::FrameDisplayed, user, displayed, j);
      tl.interactions.push_back({user, j, displayed - captured});
    }
    if (opts.fl_enabled && profile.update_bytes > 0) {
      const SimTime duration = period * static_cast<std::int64_t>(opts.n_interactions);
      const SimTime interval = from_ms(profile.update_interval_s * 1000.0);
      std::uint64_t k = 0;
      for (SimTime t = interval; t <= duration; t += interval, ++k) {
        const std::uint64_t chain = opts.n_interactions + k;
        emit(EventKind::UpdateUploaded, user, t, chain);
        emit(EventKind::GlobalDownloaded, user, t + rtt, chain);
      }
    }
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return a.event.t < b.event.t;
  });
  tl.events.reserve(pending.size());
  for (const auto& p : pending) tl.events.push_back(p.event);

  std::map<std::uint32_t, UserStats> stats;
  for (const auto& i : tl.interactions) {
    auto& s = stats[i.user_id];
    const double l = to_ms(i.latency);
    if (s.interactions == 0) {
      s.user_id = i.user_id;
      s.min_latency_ms = s.max_latency_ms = l;
    }
    s.min_latency_ms = std::min(s.min_latency_ms, l);
    s.max_latency_ms = std::max(s.max_latency_ms, l);
    s.mean_latency_ms += l;
    ++s.interactions;
  }
  for (const auto& e : tl.events) {
    if (e.kind == EventKind::UpdateUploaded) ++stats[e.user_id].updates_uploaded;
  }
  for (auto& [id, s] : stats) {
    if (s.interactions) s.mean_latency_ms /= static_cast<double>(s.interactions);
    tl.users.push_back(s);
  }
  return tl;
}

std::vector<Violation> verify_ordering(const Timeline& tl) {
  struct ChainState {
    Event last_max{};
    int max_rank = -1;
    bool fl = false;
    bool broken = false;
    bool has_capture = false;
    bool has_display = false;
    Event first{};
  };
  std::map<std::pair<std::uint32_t, std::uint64_t>, ChainState> chains;
  std::vector<Violation> out;
  for (const auto& e : tl.events) {
    auto [it, fresh] = chains.try_emplace({e.user_id, e.chain});
    ChainState& c = it->second;
    if (fresh) {
      c.fl = is_fl(e.kind);
      c.first = e;
    }
    if (e.kind == EventKind::InputCaptured) c.has_capture = true;
    if (e.kind == EventKind::FrameDisplayed) c.has_display = true;
    if (c.broken) continue;
    if (is_fl(e.kind) != c.fl) {
      out.push_back({c.first, e, "chain mixes render-path and learning-loop events"});
      c.broken = true;
      continue;
    }
    const int rank = c.fl ? fl_rank(e.kind) : render_rank(e.kind);
    if (c.max_rank >= 0 && (rank <= c.max_rank || e.t < c.last_max.t)) {
      const std::string what = rank <= c.max_rank ? "causal order" : "timestamp order";
      out.push_back({c.last_max, e,
                     std::string(to_string(c.last_max.kind)) + " precedes " +
                         std::string(to_string(e.kind)) + " (" + what + ")"});
      c.broken = true;
      continue;
    }
    c.max_rank = rank;
    c.last_max = e;
  }
  for (const auto& [key, c] : chains) {
    if (c.broken) continue;
    if (c.has_capture && !c.has_display) {
      out.push_back({c.first, c.last_max, "InputCaptured without a matching FrameDisplayed"});
    }
  }
  return out;
}

}  // namespace holo::net
