#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <sstream>

#include "holo/aggregator.hpp"
#include "holo/cgh.hpp"
#include "holo/csv.hpp"
#include "holo/digest.hpp"
#include "holo/error.hpp"
#include "holo/fedlearn.hpp"
#include "holo/netmodel.hpp"
#include "holo/pgm.hpp"
#include "holo/scene.hpp"
#include "holo/transport.hpp"

namespace holo::cli {

namespace fs = std::filesystem;
using csv::format_number;

namespace {

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = {
      {"seed", KeyType::UInt, "42", "Seed for every random stream"},
      {"out", KeyType::Text, "holo_out", "Output directory"},

      {"cloud_rtt_ms", KeyType::Real, "150", "Cloud round-trip time (ms)"},
      {"cloud_processing_ms", KeyType::Real, "20", "Cloud processing time (ms)"},
      {"cloud_stream_MBps", KeyType::Real, "90", "Cloud volumetric stream (MB/s)"},
      {"edge_rtt_ms", KeyType::Real, "15", "Edge round-trip time (ms)"},
      {"edge_processing_ms", KeyType::Real, "20", "Edge processing time (ms)"},
      {"param_count", KeyType::UInt, "1050000", "Parameters per model update"},
      {"bytes_per_param", KeyType::UInt, "4", "Bytes per parameter"},
      {"update_interval_s", KeyType::Real, "15", "Seconds between model uploads"},
      {"sim_users", KeyType::UInt, "3", "Users in the event simulation"},
      {"sim_interactions", KeyType::UInt, "600", "Interactions per simulated user"},
      {"interaction_period_ms", KeyType::Real, "100", "Time between interactions (ms)"},
      {"jitter_ms", KeyType::Real, "0", "Uniform +- jitter on processing (ms)"},
      {"fl_traffic", KeyType::Bool, "true", "Interleave model uploads/downloads"},
      {"cgh_frame_ms", KeyType::Real, "", "Hologram frame time to test against 30 FPS", true},

      {"width", KeyType::UInt, "256", "Hologram width (power of two)"},
      {"height", KeyType::UInt, "256", "Hologram height (power of two)"},
      {"iterations", KeyType::UInt, "100", "Gerchberg-Saxton iterations"},
      {"target", KeyType::Text, "", "Amplitude target PGM (built-in pattern when empty)", true},
      {"wavelength_nm", KeyType::Real, "532", "Wavelength recorded with the phase map"},
      {"pixel_pitch_um", KeyType::Real, "8", "Pixel pitch recorded with the phase map"},
      {"multiplex", KeyType::Bool, "true", "Run the two-viewer multiplexing demo"},
      {"scaling", KeyType::Bool, "true", "Run the timing sweep"},
      {"scaling_sizes", KeyType::List, "4096,16384,65536,262144", "Pixel counts for the sweep"},
      {"scaling_iterations", KeyType::UInt, "10", "Iterations per timed run"},
      {"scaling_repeats", KeyType::UInt, "3", "Timed runs per size (best kept)"},

      {"clients", KeyType::UInt, "10", "Federated clients"},
      {"rounds", KeyType::UInt, "20", "Communication rounds"},
      {"local_epochs", KeyType::UInt, "1", "Local epochs per round"},
      {"batch_size", KeyType::UInt, "32", "Mini-batch size"},
      {"learning_rate", KeyType::Real, "0.05", "SGD step size"},
      {"partition", KeyType::Text, "iid", "iid or dirichlet"},
      {"dirichlet_alpha", KeyType::Real, "0.5", "Dirichlet concentration"},
      {"samples_per_client", KeyType::UInt, "600", "Training samples per client"},
      {"test_samples", KeyType::UInt, "1400", "Held-out test samples"},
      {"input_dim", KeyType::UInt, "16", "Feature dimension"},
      {"hidden_dim", KeyType::UInt, "32", "Hidden units"},
      {"separation", KeyType::Real, "3", "Distance scale of the class means"},
      {"noise_std", KeyType::Real, "1", "Feature noise standard deviation"},
      {"tolerance_pp", KeyType::Real, "2", "Allowed federated vs centralized gap (points)"},

      {"users", KeyType::UInt, "3", "Viewers sharing the scene"},
      {"inputs", KeyType::List, "smile,voice,none", "Per-user input: smile, voice, none or an emotion"},
      {"asset_id", KeyType::Text, "mona_lisa", "Base scene asset"},

      {"host", KeyType::Text, "127.0.0.1", "Aggregator host"},
      {"port", KeyType::UInt, "7878", "Aggregator TCP port (0 picks one)"},
      {"client_id", KeyType::UInt, "0", "Which synthetic client shard to train on"},
      {"timeout_ms", KeyType::UInt, "30000", "Round barrier timeout (ms)"},
      {"accept_timeout_ms", KeyType::UInt, "30000", "Connect/accept timeout (ms)"},

      {"wire_clients", KeyType::UInt, "3", "Clients in the loopback wire run"},
      {"wire_rounds", KeyType::UInt, "5", "Rounds in the loopback wire run"},
  };
  return keys;
}

const std::vector<std::string> kNetsimKeys = {
    "cloud_rtt_ms", "cloud_processing_ms", "cloud_stream_MBps", "edge_rtt_ms",
    "edge_processing_ms", "param_count", "bytes_per_param", "update_interval_s",
    "sim_users", "sim_interactions", "interaction_period_ms", "jitter_ms",
    "fl_traffic", "cgh_frame_ms"};
const std::vector<std::string> kCghKeys = {
    "width", "height", "iterations", "target", "wavelength_nm", "pixel_pitch_um",
    "multiplex", "scaling", "scaling_sizes", "scaling_iterations", "scaling_repeats"};
const std::vector<std::string> kFlKeys = {
    "clients", "rounds", "local_epochs", "batch_size", "learning_rate", "partition",
    "dirichlet_alpha", "samples_per_client", "test_samples", "input_dim", "hidden_dim",
    "separation", "noise_std", "tolerance_pp"};
const std::vector<std::string> kComposeKeys = {"users", "inputs", "asset_id"};
const std::vector<std::string> kServeKeys = {"host", "port", "timeout_ms", "accept_timeout_ms"};

std::vector<std::string> names_for(std::string_view command) {
  std::vector<std::string> names{"seed", "out"};
  const auto add = [&](const std::vector<std::string>& more) {
    names.insert(names.end(), more.begin(), more.end());
  };
  if (command == "netsim") add(kNetsimKeys);
  if (command == "cgh") add(kCghKeys);
  if (command == "fedsim") add(kFlKeys);
  if (command == "compose") add(kComposeKeys);
  if (command == "serve") {
    add(kFlKeys);
    add(kServeKeys);
  }
  if (command == "client") {
    add(kFlKeys);
    add(kServeKeys);
    names.push_back("client_id");
  }
  if (command == "all") {
    add(kNetsimKeys);
    add(kCghKeys);
    add(kFlKeys);
    add(kComposeKeys);
    names.push_back("timeout_ms");
    names.push_back("wire_clients");
    names.push_back("wire_rounds");
  }
  return names;
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string params_digest(const fl::ModelParams& p) {
  return sha256_hex({reinterpret_cast<const char*>(p.values.data()),
                     p.values.size() * sizeof(float)});
}

std::string yes_no(bool v) { return v ? "true" : "false"; }

void save_metrics(const fs::path& path,
                  const std::vector<std::pair<std::string, std::string>>& rows) {
  csv::Table t({"metric", "value"});
  for (const auto& [k, v] : rows) t.add_row({k, v});
  t.save(path.string());
}

fs::path out_dir(const Settings& s) {
  const fs::path dir = s.text("out");
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- netsim

void netsim(const Settings& s, const fs::path& dir, std::ostream& log) {
  net::ArchProfile cloud = net::ArchProfile::cloud_default();
  cloud.rtt_ms = s.real("cloud_rtt_ms");
  cloud.processing_ms = s.real("cloud_processing_ms");
  cloud.stream_bandwidth_MBps = s.real("cloud_stream_MBps");
  cloud.update_interval_s = s.real("update_interval_s");

  net::ArchProfile edge = net::ArchProfile::edge_default();
  edge.rtt_ms = s.real("edge_rtt_ms");
  edge.processing_ms = s.real("edge_processing_ms");
  edge.update_bytes = fl::update_size(s.uint("param_count"), s.uint("bytes_per_param"));
  edge.update_interval_s = s.real("update_interval_s");

  const net::AnalyticReport rep = net::analytic_report(cloud, edge, s.optional_real("cgh_frame_ms"));

  csv::Table report({"arch", "latency_ms", "bandwidth_MBps"});
  for (const auto& a : {rep.cloud, rep.edge}) {
    report.add_row({std::string(net::to_string(a.arch)), format_number(a.latency_ms),
                    format_number(a.bandwidth_MBps)});
  }
  report.save((dir / "netsim_report.csv").string());

  net::PipelineOptions opts;
  opts.n_users = s.uint("sim_users");
  opts.n_interactions = s.uint("sim_interactions");
  opts.interaction_period_ms = s.real("interaction_period_ms");
  opts.fl_enabled = s.flag("fl_traffic");
  opts.jitter_ms = s.real("jitter_ms");
  opts.seed = s.uint("seed");

  std::vector<std::pair<std::string, std::string>> metrics = {
      {"cloud_latency_ms", format_number(rep.cloud.latency_ms)},
      {"edge_latency_ms", format_number(rep.edge.latency_ms)},
      {"cloud_bandwidth_MBps", format_number(rep.cloud.bandwidth_MBps)},
      {"edge_bandwidth_MBps", format_number(rep.edge.bandwidth_MBps)},
      {"update_bytes", std::to_string(edge.update_bytes)},
      {"bandwidth_reduction_percent", format_number(rep.bandwidth_reduction_percent)},
      {"latency_reduction_percent", format_number(rep.latency_reduction_percent)},
      {"cloud_within_50ms", yes_no(rep.cloud.within_interaction_bound)},
      {"edge_within_50ms", yes_no(rep.edge.within_interaction_bound)},
  };
  if (rep.cgh_fits_frame_budget) {
    metrics.emplace_back("cgh_fits_frame_budget", yes_no(*rep.cgh_fits_frame_budget));
  }

  for (const auto& [profile, analytic] : {std::pair{cloud, rep.cloud}, std::pair{edge, rep.edge}}) {
    const std::string name(profile.name());
    const net::Timeline tl = net::simulate_pipeline(profile, opts);
    const auto violations = net::verify_ordering(tl);
    if (!violations.empty()) throw Error("net.ordering_violation", violations.front().message);

    csv::Table events({"t_ms", "kind", "user_id"});
    for (const auto& e : tl.events) {
      events.add_row({format_number(net::to_ms(e.t)), std::string(net::to_string(e.kind)),
                      std::to_string(e.user_id)});
    }
    events.save((dir / ("timeline_" + name + ".csv")).string());

    const bool all_exact = std::all_of(tl.interactions.begin(), tl.interactions.end(),
                                       [&](const net::InteractionLatency& i) {
                                         return net::to_ms(i.latency) == analytic.latency_ms;
                                       });
    std::size_t uploads = 0;
    for (const auto& u : tl.users) uploads = std::max(uploads, u.updates_uploaded);
    metrics.emplace_back(name + "_des_mean_latency_ms", format_number(tl.mean_latency_ms()));
    metrics.emplace_back(name + "_des_matches_analytic", yes_no(all_exact));
    metrics.emplace_back(name + "_uploads_per_user", std::to_string(uploads));
  }
  save_metrics(dir / "netsim_summary.csv", metrics);

  log << "cloud: " << format_number(rep.cloud.latency_ms) << " ms, "
      << format_number(rep.cloud.bandwidth_MBps) << " MB/s\n"
      << "edge:  " << format_number(rep.edge.latency_ms) << " ms, "
      << format_number(rep.edge.bandwidth_MBps) << " MB/s\n"
      << "bandwidth reduction: " << format_number(rep.bandwidth_reduction_percent) << " %\n";
}

// ---------------------------------------------------------------- cgh

// A ring crossed by a vertical bar, centred in the frame.
cgh::AmplitudeImage demo_target(std::size_t w, std::size_t h) {
  cgh::AmplitudeImage img(w, h);
  const double cx = w / 2.0, cy = h / 2.0;
  const double r = 0.3 * std::min(w, h);
  const double band = std::max(1.5, 0.04 * std::min(w, h));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const bool ring = std::abs(d - r) < band;
      const bool bar = std::abs(x + 0.5 - cx) < band && d < r;
      if (ring || bar) img.set(x, y, 1.0);
    }
  }
  return img;
}

cgh::AmplitudeImage corner_pattern(std::size_t w, std::size_t h, std::size_t zw, std::size_t zh,
                                   bool ring) {
  cgh::AmplitudeImage img(w, h);
  for (std::size_t y = 0; y < zh; ++y) {
    for (std::size_t x = 0; x < zw; ++x) {
      const double u = (x + 0.5) / zw - 0.5, v = (y + 0.5) / zh - 0.5;
      const bool on = ring ? std::abs(std::hypot(u, v) - 0.3) < 0.08
                           : std::abs(u - v) < 0.08 || std::abs(u + v) < 0.08;
      if (on) img.set(x, y, 1.0);
    }
  }
  return img;
}

void cgh_run(const Settings& s, const fs::path& dir, std::ostream& log) {
  const std::uint64_t seed = s.uint("seed");
  const std::size_t iterations = s.uint("iterations");
  const cgh::AmplitudeImage target =
      s.has("target") ? pgm::to_amplitude(pgm::read_file(s.text("target")))
                      : demo_target(s.uint("width"), s.uint("height"));

  cgh::GsResult gs = cgh::gerchberg_saxton(target, iterations, seed);
  gs.phase_map.wavelength_nm = s.real("wavelength_nm");
  gs.phase_map.pixel_pitch_um = s.real("pixel_pitch_um");
  pgm::export_phase((dir / "phase").string(), gs.phase_map, seed);
  pgm::write_file((dir / "target.pgm").string(), pgm::from_amplitude(target));
  pgm::write_file((dir / "reconstruction.pgm").string(),
                  pgm::from_amplitude(cgh::reconstruct(gs.phase_map)));

  csv::Table err({"iteration", "nmse"});
  for (std::size_t k = 0; k < gs.error_history.size(); ++k) {
    err.add_row({std::to_string(k), format_number(gs.error_history[k])});
  }
  err.add_row({std::to_string(gs.error_history.size()), format_number(gs.final_nmse)});
  err.save((dir / "gs_error.csv").string());

  std::vector<std::pair<std::string, std::string>> metrics = {
      {"width", std::to_string(target.width())},
      {"height", std::to_string(target.height())},
      {"iterations", std::to_string(iterations)},
      {"initial_nmse", format_number(gs.error_history.front())},
      {"final_nmse", format_number(gs.final_nmse)},
  };
  log << "gs: " << target.width() << "x" << target.height() << ", " << iterations
      << " iterations, nmse " << format_number(gs.error_history.front()) << " -> "
      << format_number(gs.final_nmse) << "\n";

  if (s.flag("multiplex")) {
    const std::size_t w = target.width(), h = target.height();
    const std::size_t zw = w / 4, zh = h / 4;
    if (zw < 8 || zh < 8) {
      throw Error("cgh.multiplex_too_small", "multiplexing needs a hologram of at least 32x32");
    }
    const std::vector<cgh::ZoneTarget> viewers = {
        {corner_pattern(w, h, zw, zh, true), {w / 16, h / 4, w / 16 + zw, h / 4 + zh, 1}},
        {corner_pattern(w, h, zw, zh, false),
         {w * 9 / 16, h / 4, w * 9 / 16 + zw, h / 4 + zh, 2}},
    };
    cgh::PhaseMap mux = cgh::multiplex_views(viewers, iterations, seed);
    mux.wavelength_nm = gs.phase_map.wavelength_nm;
    mux.pixel_pitch_um = gs.phase_map.pixel_pitch_um;
    pgm::export_phase((dir / "multiplex_phase").string(), mux, seed);
    const cgh::AmplitudeImage recon = cgh::reconstruct(mux);
    pgm::write_file((dir / "multiplex_reconstruction.pgm").string(), pgm::from_amplitude(recon));

    csv::Table zones({"owner", "x0", "y0", "x1", "y1", "energy_fraction"});
    for (const auto& v : viewers) {
      const auto& z = v.zone;
      zones.add_row({std::to_string(z.owner), std::to_string(z.x0), std::to_string(z.y0),
                     std::to_string(z.x1), std::to_string(z.y1),
                     format_number(cgh::zone_energy(recon, z) / recon.energy())});
    }
    zones.save((dir / "multiplex_zones.csv").string());

    const auto matrix = cgh::crosstalk_matrix(recon, viewers);
    csv::Table xt({"zone_owner", "source_owner", "crosstalk_db"});
    for (std::size_t i = 0; i < viewers.size(); ++i) {
      for (std::size_t j = 0; j < viewers.size(); ++j) {
        xt.add_row({std::to_string(viewers[i].zone.owner), std::to_string(viewers[j].zone.owner),
                    format_number(matrix[i][j])});
      }
    }
    xt.save((dir / "crosstalk.csv").string());
    log << "multiplex: crosstalk " << format_number(matrix[0][1]) << " / "
        << format_number(matrix[1][0]) << " dB\n";
  }

  if (s.flag("scaling")) {
    std::vector<std::size_t> sizes;
    for (auto n : s.uint_list("scaling_sizes")) sizes.push_back(n);
    const cgh::ScalingReport rep = cgh::benchmark_scaling(
        sizes, s.uint("scaling_iterations"), s.uint("scaling_repeats"), seed);
    csv::Table t({"n_pixels", "seconds", "iterations"});
    for (const auto& smp : rep.samples) {
      t.add_row({std::to_string(smp.n_pixels), format_number(smp.seconds),
                 std::to_string(smp.iterations)});
    }
    t.save((dir / "cgh_scaling.csv").string());
    csv::Table fit({"coefficient", "r_squared"});
    fit.add_row({format_number(rep.fit.coefficient), format_number(rep.fit.r_squared)});
    fit.save((dir / "cgh_fit.csv").string());
    log << "scaling: t = " << format_number(rep.fit.coefficient) << " * N log2 N, R^2 "
        << format_number(rep.fit.r_squared) << "\n";
  }
  save_metrics(dir / "cgh_summary.csv", metrics);
}

// ---------------------------------------------------------------- fedsim

fl::FLConfig fl_config(const Settings& s) {
  fl::FLConfig cfg;
  cfg.num_clients = s.uint("clients");
  cfg.rounds = s.uint("rounds");
  cfg.local_epochs = s.uint("local_epochs");
  cfg.batch_size = s.uint("batch_size");
  cfg.learning_rate = s.real("learning_rate");
  const std::string& part = s.text("partition");
  if (part == "iid") {
    cfg.partition = fl::Partition::Iid;
  } else if (part == "dirichlet") {
    cfg.partition = fl::Partition::Dirichlet;
  } else {
    throw Error("cli.invalid_value", "partition = '" + part + "' is not iid or dirichlet");
  }
  cfg.dirichlet_alpha = s.real("dirichlet_alpha");
  cfg.seed = s.uint("seed");
  cfg.samples_per_client = s.uint("samples_per_client");
  cfg.test_samples = s.uint("test_samples");
  cfg.input_dim = s.uint("input_dim");
  cfg.hidden_dim = s.uint("hidden_dim");
  cfg.separation = s.real("separation");
  cfg.noise_std = s.real("noise_std");
  cfg.convergence_tolerance_pp = s.real("tolerance_pp");
  cfg.validate();
  return cfg;
}

void fedsim(const Settings& s, const fs::path& dir, std::ostream& log) {
  const fl::FLConfig cfg = fl_config(s);
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  const fl::TrainingHistory fed = fl::run_fedavg(cfg, data);
  const fl::TrainingHistory cen = fl::run_centralized(cfg, data);

  csv::Table hist({"round", "federated_acc", "centralized_acc"});
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    hist.add_row({std::to_string(r + 1), format_number(fed.accuracy[r]),
                  format_number(cen.accuracy[(r + 1) * cfg.local_epochs - 1])});
  }
  hist.save((dir / "fl_history.csv").string());

  std::vector<std::pair<std::string, std::string>> metrics = {
      {"rounds", std::to_string(cfg.rounds)},
      {"initial_accuracy", format_number(fed.initial_accuracy)},
  };
  if (cfg.rounds > 0) {
    const double gap = std::abs(fed.accuracy.back() - cen.accuracy.back()) * 100.0;
    metrics.emplace_back("federated_final", format_number(fed.accuracy.back()));
    metrics.emplace_back("centralized_final", format_number(cen.accuracy.back()));
    metrics.emplace_back("gap_pp", format_number(gap));
    metrics.emplace_back("within_tolerance", yes_no(gap <= cfg.convergence_tolerance_pp));
    log << "fedavg " << format_number(fed.accuracy.back()) << " vs centralized "
        << format_number(cen.accuracy.back()) << " (gap " << format_number(gap) << " pp)\n";
  } else {
    log << "no rounds requested; untrained accuracy " << format_number(fed.initial_accuracy)
        << "\n";
  }
  metrics.emplace_back("final_params_sha256", params_digest(fed.final_params));
  save_metrics(dir / "fl_summary.csv", metrics);
}

// ---------------------------------------------------------------- compose

std::optional<scene::UserStateVector> state_for(const std::string& input, scene::UserId user) {
  using scene::EmotionClass;
  using scene::EmotionDistribution;
  if (input == "none") return std::nullopt;
  scene::UserStateVector st;
  st.user_id = user;
  st.timestamp_ms = 0;
  if (input == "smile") {
    std::array<double, scene::kEmotionCount> p;
    p.fill(0.1 / 6.0);
    p[static_cast<std::size_t>(EmotionClass::Happy)] = 0.9;
    st.emotion = EmotionDistribution(p);
    return st;
  }
  if (input == "voice") {
    std::array<double, scene::kEmotionCount> p;
    p.fill(0.3 / 6.0);
    p[static_cast<std::size_t>(EmotionClass::Neutral)] = 0.7;
    st.emotion = EmotionDistribution(p);
    st.audio = scene::AudioClip{16000, std::vector<std::int16_t>(1600, 0)};
    return st;
  }
  for (std::size_t c = 0; c < scene::kEmotionCount; ++c) {
    const auto cls = static_cast<EmotionClass>(c);
    if (input == scene::to_string(cls)) {
      st.emotion = EmotionDistribution::one_hot(cls);
      return st;
    }
  }
  throw Error("cli.invalid_value", "input '" + input +
                                       "' is not smile, voice, none or an emotion class");
}

void compose(const Settings& s, const fs::path& dir, std::ostream& log) {
  const std::size_t users = s.uint("users");
  const auto inputs = s.list("inputs");
  if (users < 1 || inputs.size() != users) {
    throw Error("cli.invalid_value", "inputs must list exactly one entry per user");
  }
  const scene::BaseScene base = scene::BaseScene::portrait(s.text("asset_id"));
  csv::Table base_t({"asset_id", "content_hash"});
  base_t.add_row({base.asset_id(), base.content_hash()});
  base_t.save((dir / "base.csv").string());

  fs::create_directories(dir / "views");
  csv::Table views({"user_id", "input", "command", "intensity", "view_digest", "matches_base"});
  for (std::size_t i = 0; i < users; ++i) {
    const auto user = static_cast<scene::UserId>(i + 1);
    const auto state = state_for(inputs[i], user);
    std::optional<scene::SceneLayer> layer;
    std::string command = "none";
    std::string intensity;
    if (state) {
      state->validate();
      const scene::ResponseCommand cmd = scene::respond(*state);
      command = std::string(scene::to_string(cmd.kind));
      intensity = format_number(cmd.intensity);
      layer = scene::apply_command(cmd);
    }
    const scene::ComposedView view = scene::compose_view(base, layer, user);
    const std::string digest = view.content_digest();
    views.add_row({std::to_string(user), inputs[i], command, intensity, digest,
                   yes_no(digest == base.content_hash())});
    std::ofstream((dir / "views" / ("user_" + std::to_string(user) + ".json")).string())
        << view.serialize() << "\n";
    log << "user " << user << " (" << inputs[i] << "): " << command
        << (digest == base.content_hash() ? ", base view" : ", personalized view") << "\n";
  }
  views.save((dir / "views.csv").string());
}

// ---------------------------------------------------------------- wire

void record_serve(const proto::ServeResult& served, const fl::FLConfig& cfg,
                  const fs::path& dir, std::ostream& log) {
  csv::Table rounds({"round", "participants", "duplicates_rejected", "late_discarded",
                     "disconnects", "timed_out", "aggregated"});
  bool full = true;
  for (const auto& r : served.rounds) {
    std::string ids;
    for (auto id : r.participants) ids += (ids.empty() ? "" : " ") + std::to_string(id);
    rounds.add_row({std::to_string(r.round), ids, std::to_string(r.duplicates_rejected.size()),
                    std::to_string(r.late_discarded.size()), std::to_string(r.disconnects),
                    yes_no(r.timed_out), yes_no(r.aggregated)});
    full = full && r.participants.size() == cfg.num_clients;
  }
  rounds.save((dir / "wire_rounds.csv").string());

  std::string matches = "n/a";
  if (full) {
    const fl::TrainingHistory ref = fl::run_fedavg(cfg);
    matches = yes_no(ref.final_params.values == served.final_global.values);
  }
  save_metrics(dir / "wire_summary.csv",
               {{"rounds", std::to_string(served.rounds.size())},
                {"clients", std::to_string(cfg.num_clients)},
                {"full_participation", yes_no(full)},
                {"final_params_sha256", params_digest(served.final_global)},
                {"matches_in_process", matches}});
  log << "served " << served.rounds.size() << " rounds; in-process match: " << matches << "\n";
}

proto::AggregatorConfig aggregator_config(const fl::FLConfig& cfg, const Settings& s) {
  return {cfg.num_clients, std::chrono::milliseconds(s.uint("timeout_ms")), cfg.rounds,
          fl::init_params(cfg.layout(), cfg.seed)};
}

void serve(const Settings& s, const fs::path& dir, std::ostream& log) {
  const fl::FLConfig cfg = fl_config(s);
  transport::TcpListener listener(static_cast<std::uint16_t>(s.uint("port")));
  log << "listening on 127.0.0.1:" << listener.port() << std::endl;
  const auto served = proto::aggregator_serve(listener, aggregator_config(cfg, s),
                                              std::chrono::milliseconds(s.uint("accept_timeout_ms")));
  record_serve(served, cfg, dir, log);
}

void write_session(const proto::SessionResult& r, const fs::path& path) {
  csv::Table t({"round", "global_accuracy", "local_accuracy"});
  for (const auto& sr : r.rounds) {
    t.add_row({std::to_string(sr.round), format_number(sr.global_accuracy),
               format_number(sr.local_accuracy)});
  }
  t.save(path.string());
}

void client(const Settings& s, const fs::path& dir, std::ostream& log) {
  const fl::FLConfig cfg = fl_config(s);
  const std::size_t id = s.uint("client_id");
  if (id >= cfg.num_clients) {
    throw Error("cli.invalid_value", "client_id must be below clients");
  }
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  auto stream = transport::tcp_connect(s.text("host"), static_cast<std::uint16_t>(s.uint("port")),
                                       std::chrono::milliseconds(s.uint("accept_timeout_ms")));
  const proto::SessionResult r = proto::client_session(*stream, data.clients[id], cfg);
  write_session(r, dir / "session.csv");
  save_metrics(dir / "client_summary.csv",
               {{"client_id", std::to_string(id)},
                {"rounds", std::to_string(r.rounds.size())},
                {"final_params_sha256", params_digest(r.final_global)}});
  log << "client " << id << " finished " << r.rounds.size() << " rounds\n";
}

void wire_loopback(const Settings& s, const fs::path& dir, std::ostream& log) {
  fl::FLConfig cfg = fl_config(s);
  cfg.num_clients = s.uint("wire_clients");
  cfg.rounds = s.uint("wire_rounds");
  cfg.validate();
  const fl::SyntheticData data = fl::gen_synthetic(cfg);
  transport::TcpListener listener(0);
  const std::uint16_t port = listener.port();
  std::vector<std::future<proto::SessionResult>> sessions;
  for (std::size_t k = 0; k < cfg.num_clients; ++k) {
    sessions.push_back(std::async(std::launch::async, [&, k] {
      auto stream = transport::tcp_connect("127.0.0.1", port, std::chrono::seconds(10));
      return proto::client_session(*stream, data.clients[k], cfg);
    }));
  }
  const auto served =
      proto::aggregator_serve(listener, aggregator_config(cfg, s), std::chrono::seconds(10));
  for (std::size_t k = 0; k < sessions.size(); ++k) {
    write_session(sessions[k].get(), dir / ("session_" + std::to_string(k) + ".csv"));
  }
  record_serve(served, cfg, dir, log);
}

using Runner = void (*)(const Settings&, const fs::path&, std::ostream&);

const std::map<std::string, std::pair<Runner, std::string>, std::less<>>& runners() {
  static const std::map<std::string, std::pair<Runner, std::string>, std::less<>> table = {
      {"netsim", {netsim, "Cloud vs edge latency/bandwidth and the event timeline"}},
      {"cgh", {cgh_run, "Phase hologram, multiplexing demo and timing sweep"}},
      {"fedsim", {fedsim, "Federated vs centralized training history"}},
      {"compose", {compose, "Shared base scene with per-user personalization"}},
      {"serve", {serve, "Run the federated aggregator over TCP"}},
      {"client", {client, "Run one edge-node training client over TCP"}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"netsim", "cgh",    "fedsim", "compose",
                                                 "serve",  "client", "all"};
  return names;
}

std::string_view command_help(std::string_view command) {
  if (command == "all") return "Every experiment plus a loopback wire run, one folder each";
  return runners().at(std::string(command)).second;
}

std::vector<KeySpec> keys_for(std::string_view command) {
  std::vector<KeySpec> out;
  for (const auto& name : names_for(command)) {
    for (const auto& k : registry()) {
      if (k.name == name) out.push_back(k);
    }
  }
  return out;
}

void finish_output(const fs::path& dir, std::string_view command, const Settings& settings) {
  std::ofstream((dir / "config.resolved").string())
      << "# holo " << command << "\n" << settings.resolved_text();

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.csv") {
      files.push_back(fs::relative(entry.path(), dir));
    }
  }
  std::sort(files.begin(), files.end());
  csv::Table manifest({"file", "bytes", "sha256"});
  for (const auto& f : files) {
    manifest.add_row({f.generic_string(), std::to_string(fs::file_size(dir / f)),
                      file_digest(dir / f)});
  }
  manifest.save((dir / "manifest.csv").string());
}

void run_command(std::string_view command, const Settings& settings, std::ostream& log) {
  const fs::path dir = out_dir(settings);
  if (command == "all") {
    for (const char* name : {"netsim", "cgh", "fedsim", "compose"}) {
      const fs::path sub = dir / name;
      fs::create_directories(sub);
      log << "[" << name << "]\n";
      runners().at(std::string(name)).first(settings, sub, log);
      finish_output(sub, name, settings);
    }
    const fs::path sub = dir / "wire";
    fs::create_directories(sub);
    log << "[wire]\n";
    wire_loopback(settings, sub, log);
    finish_output(sub, "wire", settings);
  } else {
    const auto it = runners().find(command);
    if (it == runners().end()) {
      throw Error("cli.unknown_command", "unknown subcommand " + std::string(command));
    }
    it->second.first(settings, dir, log);
  }
  finish_output(dir, command, settings);
}

}  // namespace holo::cli
