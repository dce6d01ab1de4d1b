#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "normprobe/corpus.hpp"
#include "normprobe/embed.hpp"

namespace normprobe::probe {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { relu };

// One-hidden-layer MLP trained with mini-batch Adam. Defaults follow the
// common scikit-learn MLPClassifier configuration, minus the L2 penalty and
// the tolerance-based stop: every run trains for exactly max_epochs.
struct ProbeConfig {
  std::size_t hidden_size = 100;
  Activation activation = Activation::relu;
  std::size_t max_epochs = 200;
  double learning_rate = 0.001;
  std::size_t max_batch_size = 200;  // batch = min(max_batch_size, n_samples)
  bool early_stopping = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  std::size_t batch_size(std::size_t n_samples) const;
  // Throws ConfigError.
  void validate() const;
};

// Weights of both dense layers. Binary tasks use a single sigmoid output
// unit, multi-class tasks one softmax unit per class.
struct Parameters {
  Matrix w1;     // dim x hidden
  RowVector b1;  // hidden
  Matrix w2;     // hidden x outputs
  RowVector b2;  // outputs

  std::size_t count() const;
  // Flat views in the order w1, b1, w2, b2 (column-major within matrices).
  double& at(std::size_t flat_index);
  double at(std::size_t flat_index) const;
  bool all_finite() const;
};

std::size_t output_width(std::size_t n_classes);

// Glorot-uniform initialization, bound sqrt(6 / (fan_in + fan_out)) for
// weights and biases of each layer.
Parameters init_parameters(std::size_t dim, std::size_t hidden, std::size_t n_classes,
                           SeededRng& rng);

// Mean cross-entropy over the batch (logistic for 2 classes, softmax
// otherwise), multiplied by loss_scale. When grads is non-null it receives
// the gradient of the scaled loss.
double loss_and_gradients(const Parameters& params, const Matrix& x,
                          std::span<const LabelId> labels, std::size_t n_classes,
                          Parameters* grads, double loss_scale = 1.0);

class TrainedProbe {
 public:
  TrainedProbe(Parameters params, std::size_t n_classes, std::vector<double> loss_trace);

  const Parameters& parameters() const noexcept { return params_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(params_.w1.rows()); }
  const std::vector<double>& loss_trace() const noexcept { return loss_trace_; }

 private:
  Parameters params_;
  std::size_t n_classes_;
  std::vector<double> loss_trace_;
};

// Trains on rows of `features`. Throws DataError when fewer than two classes
// are present or shapes disagree, ComputeError when the loss diverges.
TrainedProbe train(const Matrix& features, std::span<const LabelId> labels, std::size_t n_classes,
                   const ProbeConfig& cfg);

// n_examples x n_classes; every row is a probability distribution.
Matrix predict_scores(const TrainedProbe& probe, const Matrix& features);
Matrix predict_scores(const Parameters& params, std::size_t n_classes, const Matrix& features);

// Maximum relative difference between analytic gradients and central
// differences (step 1e-5) over every parameter of a freshly initialized net
// (seeded from cfg.seed) evaluated on the given sample.
double gradient_check(const ProbeConfig& cfg, const Matrix& x, std::span<const LabelId> labels,
                      std::size_t n_classes);

// One row per vector.
Matrix to_matrix(const embed::SentenceEmbeddingSet& set);

}  // namespace normprobe::probe
