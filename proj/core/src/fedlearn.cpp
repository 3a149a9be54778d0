#include "holo/fedlearn.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "holo/error.hpp"
#include "holo/rng.hpp"

namespace holo::fl {

namespace {

constexpr std::uint64_t kInitStream = 0x1'0000'0001ULL;
constexpr std::uint64_t kDataStream = 0x1'0000'0002ULL;
constexpr std::uint64_t kTestStream = 0x1'0000'0003ULL;

struct Offsets {
  std::size_t w1, b1, w2, b2;
};

Offsets offsets(const Layout& l) {
  const std::size_t d = l.input_dim;
  const std::size_t h = l.hidden_dim;
  return {0, h * d, h * d + h, h * d + h + kClasses * h};
}

void check_batch(const Layout& layout, std::span<const double> params,
                 const ClientDataset& batch) {
  if (params.size() != layout.param_count()) {
    throw Error("fl.dimension_mismatch", "parameter vector length " +
                                             std::to_string(params.size()) +
                                             " does not match layout " +
                                             std::to_string(layout.param_count()));
  }
  if (batch.dim != layout.input_dim) {
    throw Error("fl.dimension_mismatch", "batch feature dimension " +
                                             std::to_string(batch.dim) +
                                             " does not match layout " +
                                             std::to_string(layout.input_dim));
  }
  if (batch.size() == 0) throw Error("fl.empty_batch", "batch has no rows");
  batch.validate();
}

// Hidden activations and softmax probabilities for one row.
void forward(const Layout& l, const Offsets& o, std::span<const double> p,
             std::span<const double> x, std::vector<double>& hidden,
             std::array<double, kClasses>& probs) {
  const std::size_t d = l.input_dim;
  const std::size_t h = l.hidden_dim;
  for (std::size_t j = 0; j < h; ++j) {
    double z = p[o.b1 + j];
    const double* w = &p[o.w1 + j * d];
    for (std::size_t i = 0; i < d; ++i) z += w[i] * x[i];
    hidden[j] = std::tanh(z);
  }
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < kClasses; ++c) {
    double z = p[o.b2 + c];
    const double* w = &p[o.w2 + c * h];
    for (std::size_t j = 0; j < h; ++j) z += w[j] * hidden[j];
    probs[c] = z;
    zmax = std::max(zmax, z);
  }
  double sum = 0.0;
  for (auto& v : probs) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (auto& v : probs) v /= sum;
}

// Mean-loss gradient over the selected rows; returns the mean loss.
double accumulate_gradient(const Layout& l, std::span<const double> p,
                           const ClientDataset& data,
                           std::span<const std::size_t> rows,
                           std::vector<double>& g) {
  g.assign(p.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  double total = 0.0;
  if (l.kind == ModelKind::MeanEstimator) {
    for (std::size_t r : rows) {
      const auto y = data.row(r);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double diff = p[i] - y[i];
        g[i] += diff;
        total += 0.5 * diff * diff;
      }
    }
    for (auto& v : g) v *= inv_n;
    return total * inv_n;
  }

  const Offsets o = offsets(l);
  const std::size_t d = l.input_dim;
  const std::size_t h = l.hidden_dim;
  std::vector<double> hidden(h);
  std::vector<double> dhidden(h);
  std::array<double, kClasses> probs{};
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    const int y = data.labels[r];
    forward(l, o, p, x, hidden, probs);
    total -= std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));
    probs[static_cast<std::size_t>(y)] -= 1.0;  // now dL/dz2
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t c = 0; c < kClasses; ++c) {
      const double dz = probs[c];
      g[o.b2 + c] += dz;
      double* gw = &g[o.w2 + c * h];
      const double* w = &p[o.w2 + c * h];
      for (std::size_t j = 0; j < h; ++j) {
        gw[j] += dz * hidden[j];
        dhidden[j] += w[j] * dz;
      }
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double dz = dhidden[j] * (1.0 - hidden[j] * hidden[j]);
      g[o.b1 + j] += dz;
      double* gw = &g[o.w1 + j * d];
      for (std::size_t i = 0; i < d; ++i) gw[i] += dz * x[i];
    }
  }
  for (auto& v : g) v *= inv_n;
  return total * inv_n;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

// Runs `epochs` epochs of SGD on `params` in place.
void train_epochs(ModelParams& params, const ClientDataset& data,
                  std::size_t epochs, std::size_t batch_size, double lr,
                  Pcg64& rng) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order = all_rows(n);
  std::vector<double> work = params.as_double();
  std::vector<double> g;
  for (std::size_t e = 0; e < epochs; ++e) {
    if (batch_size < n) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t len = std::min(batch_size, n - start);
      accumulate_gradient(params.layout, work,
                          data, std::span<const std::size_t>(order).subspan(start, len), g);
      for (std::size_t i = 0; i < work.size(); ++i) {
        const auto updated = static_cast<float>(work[i] - lr * g[i]);
        params.values[i] = updated;
        work[i] = static_cast<double>(updated);
      }
    }
  }
}

}  // namespace

std::size_t Layout::param_count() const noexcept {
  if (kind == ModelKind::MeanEstimator) return input_dim;
  return input_dim * hidden_dim + hidden_dim + hidden_dim * kClasses + kClasses;
}

ModelParams ModelParams::zeros(const Layout& layout) {
  return {layout, std::vector<float>(layout.param_count(), 0.0f), 0};
}

std::vector<double> ModelParams::as_double() const {
  return {values.begin(), values.end()};
}

void ModelParams::validate() const {
  if (values.size() != layout.param_count()) {
    throw Error("fl.invalid_params", "parameter count does not match layout");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw Error("fl.invalid_params", "non-finite parameter");
  }
}

void ClientDataset::validate() const {
  if (labels.empty()) throw Error("fl.empty_dataset", "dataset has no samples");
  if (features.size() != labels.size() * dim) {
    throw Error("fl.dimension_mismatch", "feature buffer does not match label count");
  }
  for (int y : labels) {
    if (y < 0 || y >= static_cast<int>(kClasses)) {
      throw Error("fl.invalid_label", "label outside [0, 7)");
    }
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw Error("fl.invalid_features", "non-finite feature");
  }
}

void FLConfig::validate() const {
  if (num_clients < 1) throw Error("fl.invalid_config", "num_clients must be >= 1");
  if (local_epochs < 1) throw Error("fl.invalid_config", "local_epochs must be >= 1");
  if (batch_size < 1) throw Error("fl.invalid_config", "batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error("fl.invalid_config", "learning_rate must be finite and >= 0");
  }
  if (partition == Partition::Dirichlet && !(dirichlet_alpha > 0.0)) {
    throw Error("fl.invalid_config", "dirichlet_alpha must be > 0");
  }
  if (samples_per_client < 1 || test_samples < 1) {
    throw Error("fl.invalid_config", "sample counts must be >= 1");
  }
  if (input_dim < kClasses) {
    throw Error("fl.invalid_config", "input_dim must be >= 7 to hold the class means");
  }
  if (hidden_dim < 1) throw Error("fl.invalid_config", "hidden_dim must be >= 1");
  if (!(noise_std >= 0.0)) throw Error("fl.invalid_config", "noise_std must be >= 0");
}

namespace {

void sample_features(ClientDataset& ds, const FLConfig& cfg, Pcg64& rng) {
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  ds.features.resize(ds.labels.size() * ds.dim);
  for (std::size_t r = 0; r < ds.labels.size(); ++r) {
    for (std::size_t i = 0; i < ds.dim; ++i) {
      const double mean =
          i == static_cast<std::size_t>(ds.labels[r]) ? cfg.separation : 0.0;
      ds.features[r * ds.dim + i] = mean + noise(rng);
    }
  }
}

}  // namespace

SyntheticData gen_synthetic(const FLConfig& cfg) {
  cfg.validate();
  SyntheticData out;
  const std::size_t n = cfg.samples_per_client;
  for (std::size_t k = 0; k < cfg.num_clients; ++k) {
    Pcg64 rng(derive_seed(cfg.seed, kDataStream, k));
    ClientDataset ds;
    ds.client_id = static_cast<std::uint32_t>(k);
    ds.dim = cfg.input_dim;
    ds.labels.resize(n);
    if (cfg.partition == Partition::Iid) {
      for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<int>(i % kClasses);
      std::shuffle(ds.labels.begin(), ds.labels.end(), rng);
    } else {
      std::gamma_distribution<double> gamma(cfg.dirichlet_alpha, 1.0);
      std::array<double, kClasses> props{};
      double sum = 0.0;
      for (auto& p : props) {
        p = gamma(rng);
        sum += p;
      }
      if (!(sum > 0.0)) props.fill(1.0);
      std::discrete_distribution<int> pick(props.begin(), props.end());
      for (auto& y : ds.labels) y = pick(rng);
    }
    sample_features(ds, cfg, rng);
    out.clients.push_back(std::move(ds));
  }
  Pcg64 rng(derive_seed(cfg.seed, kTestStream));
  out.test.client_id = static_cast<std::uint32_t>(cfg.num_clients);
  out.test.dim = cfg.input_dim;
  out.test.labels.resize(cfg.test_samples);
  for (std::size_t i = 0; i < cfg.test_samples; ++i) {
    out.test.labels[i] = static_cast<int>(i % kClasses);
  }
  sample_features(out.test, cfg, rng);
  return out;
}

ClientDataset pool(const std::vector<ClientDataset>& clients) {
  if (clients.empty()) throw Error("fl.empty_dataset", "nothing to pool");
  ClientDataset out;
  out.dim = clients.front().dim;
  for (const auto& c : clients) {
    if (c.dim != out.dim) throw Error("fl.dimension_mismatch", "clients disagree on dim");
    out.features.insert(out.features.end(), c.features.begin(), c.features.end());
    out.labels.insert(out.labels.end(), c.labels.begin(), c.labels.end());
  }
  return out;
}

ModelParams init_params(const Layout& layout, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(layout);
  if (layout.kind != ModelKind::Mlp) return p;
  Pcg64 rng(derive_seed(seed, kInitStream));
  const double bound = 1.0 / std::sqrt(static_cast<double>(layout.input_dim));
  const Offsets o = offsets(layout);
  for (std::size_t i = o.w1; i < o.b1; ++i) {
    p.values[i] = static_cast<float>(bound * (2.0 * uniform01(rng) - 1.0));
  }
  return p;
}

double loss(const Layout& layout, std::span<const double> params,
            const ClientDataset& batch) {
  check_batch(layout, params, batch);
  std::vector<double> g;
  const auto rows = all_rows(batch.size());
  return accumulate_gradient(layout, params, batch, rows, g);
}

std::vector<double> gradient(const Layout& layout, std::span<const double> params,
                             const ClientDataset& batch) {
  check_batch(layout, params, batch);
  std::vector<double> g;
  const auto rows = all_rows(batch.size());
  accumulate_gradient(layout, params, batch, rows, g);
  return g;
}

std::vector<double> grad(const ModelParams& params, const ClientDataset& batch) {
  const auto p = params.as_double();
  return gradient(params.layout, p, batch);
}

double accuracy(const ModelParams& params, const ClientDataset& data) {
  if (params.layout.kind != ModelKind::Mlp) {
    throw Error("fl.unsupported", "accuracy is defined for the classifier only");
  }
  const auto p = params.as_double();
  check_batch(params.layout, p, data);
  const Offsets o = offsets(params.layout);
  std::vector<double> hidden(params.layout.hidden_dim);
  std::array<double, kClasses> probs{};
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    forward(params.layout, o, p, data.row(r), hidden, probs);
    const auto best = std::distance(probs.begin(), std::max_element(probs.begin(), probs.end()));
    if (best == data.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ClientUpdate client_update(const ModelParams& global, const ClientDataset& data,
                           const FLConfig& cfg) {
  if (data.size() == 0) throw Error("fl.empty_dataset", "client has no samples");
  if (data.dim != global.layout.input_dim) {
    throw Error("fl.dimension_mismatch", "client data does not match model layout");
  }
  global.validate();
  data.validate();
  ClientUpdate up;
  up.client_id = data.client_id;
  up.round = global.version;
  up.n_samples = static_cast<std::uint32_t>(data.size());
  up.params = global;
  Pcg64 rng(derive_seed(cfg.seed, data.client_id, global.version));
  train_epochs(up.params, data, cfg.local_epochs, cfg.batch_size,
               cfg.learning_rate, rng);
  return up;
}

ModelParams aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw Error("fl.no_updates", "cannot aggregate an empty list");
  std::vector<const ClientUpdate*> sorted;
  for (const auto& u : updates) sorted.push_back(&u);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->client_id < b->client_id;
  });
  const Layout& layout = sorted.front()->params.layout;
  const std::uint32_t round = sorted.front()->round;
  double total = 0.0;
  for (const auto* u : sorted) {
    if (!(u->params.layout == layout) || u->params.values.size() != layout.param_count()) {
      throw Error("fl.layout_mismatch", "updates disagree on model layout");
    }
    if (u->round != round) throw Error("fl.round_mismatch", "updates from different rounds");
    if (u->n_samples < 1) throw Error("fl.invalid_update", "update reports zero samples");
    total += static_cast<double>(u->n_samples);
  }
  std::vector<double> acc(layout.param_count(), 0.0);
  for (const auto* u : sorted) {
    const double n = static_cast<double>(u->n_samples);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += n * static_cast<double>(u->params.values[i]);
    }
  }
  ModelParams out{layout, std::vector<float>(acc.size()), round + 1};
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.values[i] = static_cast<float>(acc[i] / total);
  }
  return out;
}

TrainingHistory run_fedavg(const FLConfig& cfg, const ParamsObserver& observer) {
  return run_fedavg(cfg, gen_synthetic(cfg), observer);
}

TrainingHistory run_fedavg(const FLConfig& cfg, const SyntheticData& data,
                           const ParamsObserver& observer) {
  cfg.validate();
  ModelParams global = init_params(cfg.layout(), cfg.seed);
  TrainingHistory h;
  h.initial_accuracy = accuracy(global, data.test);
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    std::vector<ClientUpdate> updates;
    updates.reserve(data.clients.size());
    for (const auto& client : data.clients) {
      updates.push_back(client_update(global, client, cfg));
    }
    global = aggregate(updates);
    h.accuracy.push_back(accuracy(global, data.test));
    if (observer) observer(t + 1, global);
  }
  h.final_params = std::move(global);
  return h;
}

TrainingHistory run_centralized(const FLConfig& cfg, const ParamsObserver& observer) {
  return run_centralized(cfg, gen_synthetic(cfg), observer);
}

TrainingHistory run_centralized(const FLConfig& cfg, const SyntheticData& data,
                                const ParamsObserver& observer) {
  cfg.validate();
  const ClientDataset pooled = pool(data.clients);
  ModelParams params = init_params(cfg.layout(), cfg.seed);
  TrainingHistory h;
  h.initial_accuracy = accuracy(params, data.test);
  std::size_t epoch = 0;
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    // Same generator a single FedAvg client would use in round t.
    Pcg64 rng(derive_seed(cfg.seed, 0, t));
    for (std::size_t e = 0; e < cfg.local_epochs; ++e) {
      train_epochs(params, pooled, 1, cfg.batch_size, cfg.learning_rate, rng);
      ++epoch;
      if (e + 1 == cfg.local_epochs) params.version = static_cast<std::uint32_t>(t + 1);
      h.accuracy.push_back(accuracy(params, data.test));
      if (observer) observer(epoch, params);
    }
  }
  h.final_params = std::move(params);
  return h;
}

std::uint64_t update_size(std::uint64_t param_count, std::uint64_t bytes_per_param) {
  return param_count * bytes_per_param;
}

}  // namespace holo::fl
