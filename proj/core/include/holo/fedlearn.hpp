#pragma once

// Federated Averaging over a one-hidden-layer perceptron (tanh hidden layer,
// softmax output over the seven emotion classes), a centralized baseline on
// the pooled data, and synthetic Gaussian-cluster datasets standing in for
// facial-expression features.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace holo::fl {

inline constexpr std::size_t kClasses = 7;

enum class ModelKind : std::uint8_t {
  Mlp,            // d -> h (tanh) -> 7 (softmax), cross-entropy loss
  MeanEstimator,  // w in R^d, loss 1/2 |w - y|^2 with y the feature row
};

struct Layout {
  ModelKind kind = ModelKind::Mlp;
  std::size_t input_dim = 16;
  std::size_t hidden_dim = 32;

  static Layout mlp(std::size_t d, std::size_t h) { return {ModelKind::Mlp, d, h}; }
  static Layout mean_estimator(std::size_t d) { return {ModelKind::MeanEstimator, d, 0}; }

  /// d*h + h + 7h + 7 for the perceptron, d for the mean estimator.
  std::size_t param_count() const noexcept;

  bool operator==(const Layout&) const = default;
};

/// Flat parameter vector. Values are stored as 32-bit floats, the same
/// precision they travel with on the wire; arithmetic happens in double.
/// Perceptron order: W1 (h x d, row-major), b1 (h), W2 (7 x h), b2 (7).
struct ModelParams {
  Layout layout;
  std::vector<float> values;
  std::uint32_t version = 0;

  static ModelParams zeros(const Layout& layout);
  std::vector<double> as_double() const;
  /// Throws fl.invalid_params on a length mismatch or non-finite value.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

struct ClientDataset {
  std::uint32_t client_id = 0;
  std::size_t dim = 0;
  std::vector<double> features;  // n x dim, row-major
  std::vector<int> labels;       // n entries in [0, 7)

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {features.data() + i * dim, dim};
  }
  void validate() const;
};

enum class Partition : std::uint8_t { Iid, Dirichlet };

struct FLConfig {
  std::size_t num_clients = 10;
  std::size_t rounds = 20;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  Partition partition = Partition::Iid;
  double dirichlet_alpha = 0.5;
  std::uint64_t seed = 42;
  std::size_t samples_per_client = 600;
  std::size_t test_samples = 1400;
  std::size_t input_dim = 16;
  std::size_t hidden_dim = 32;
  double separation = 3.0;
  double noise_std = 1.0;
  /// Allowed federated-vs-centralized final accuracy gap, in percentage points.
  double convergence_tolerance_pp = 2.0;

  Layout layout() const { return Layout::mlp(input_dim, hidden_dim); }
  void validate() const;
};

struct SyntheticData {
  std::vector<ClientDataset> clients;
  ClientDataset test;
};

struct ClientUpdate {
  std::uint32_t client_id = 0;
  ModelParams params;
  std::uint32_t n_samples = 0;
  std::uint32_t round = 0;
};

/// Seven class means s*e_k with isotropic Gaussian noise; IID clients get a
/// stratified label mix, Dirichlet clients draw labels from Dir(alpha)
/// proportions. The test set is balanced. Deterministic per seed.
SyntheticData gen_synthetic(const FLConfig& cfg);

/// Concatenation of the clients' samples in client order.
ClientDataset pool(const std::vector<ClientDataset>& clients);

/// Hidden weights uniform in +-1/sqrt(d); biases and output weights zero, so
/// an untrained model predicts class 0 everywhere.
ModelParams init_params(const Layout& layout, std::uint64_t seed);

/// Mean loss over the batch.
double loss(const Layout& layout, std::span<const double> params,
            const ClientDataset& batch);

/// Gradient of the mean loss. Throws fl.dimension_mismatch.
std::vector<double> gradient(const Layout& layout, std::span<const double> params,
                             const ClientDataset& batch);

std::vector<double> grad(const ModelParams& params, const ClientDataset& batch);

/// Fraction of rows whose argmax logit (lowest index on ties) is the label.
double accuracy(const ModelParams& params, const ClientDataset& data);

/// E epochs of mini-batch SGD from `global`. When batch_size >= n the data is
/// used in stored order; otherwise each epoch reshuffles with a generator
/// seeded from (cfg.seed, client_id, global.version).
ClientUpdate client_update(const ModelParams& global, const ClientDataset& data,
                           const FLConfig& cfg);

/// Sample-weighted mean, summed in client-id order; version = round + 1.
ModelParams aggregate(const std::vector<ClientUpdate>& updates);

using ParamsObserver = std::function<void(std::size_t step, const ModelParams&)>;

struct TrainingHistory {
  double initial_accuracy = 0.0;
  std::vector<double> accuracy;  // one entry per round (FedAvg) or epoch
  ModelParams final_params;
};

TrainingHistory run_fedavg(const FLConfig& cfg, const ParamsObserver& observer = {});
TrainingHistory run_fedavg(const FLConfig& cfg, const SyntheticData& data,
                           const ParamsObserver& observer = {});

/// rounds * local_epochs epochs of the same SGD over the pooled data.
TrainingHistory run_centralized(const FLConfig& cfg, const ParamsObserver& observer = {});
TrainingHistory run_centralized(const FLConfig& cfg, const SyntheticData& data,
                                const ParamsObserver& observer = {});

std::uint64_t update_size(std::uint64_t param_count, std::uint64_t bytes_per_param);

}  // namespace holo::fl
