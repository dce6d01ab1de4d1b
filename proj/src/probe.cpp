#include "normprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "normprobe/error.hpp"

namespace normprobe::probe {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Scratch buffers reused across mini-batches.
struct Workspace {
  Matrix z1;
  Matrix h;
  Matrix z2;
  Matrix dz2;
  Matrix dh;
};

void check_labels(std::span<const LabelId> labels, std::size_t n_classes) {
  for (LabelId y : labels) {
    if (y >= n_classes) throw DataError("label " + std::to_string(y) + " out of range");
  }
}

// Forward pass into ws.z1 / ws.h / ws.z2.
void forward(const Parameters& p, const Matrix& x, Workspace& ws) {
  ws.z1.noalias() = x * p.w1;
  ws.z1.rowwise() += p.b1;
  ws.h = ws.z1.cwiseMax(0.0);
  ws.z2.noalias() = ws.h * p.w2;
  ws.z2.rowwise() += p.b2;
}

double log_sum_exp(const Eigen::Ref<const RowVector>& row) {
  const double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

// Loss of the forward pass in ws; fills ws.dz2 with dLoss/dz2 when requested.
double output_loss(const Workspace& ws_in, std::span<const LabelId> labels, std::size_t n_classes,
                   double scale, Workspace* ws_grad) {
  const auto& z2 = ws_in.z2;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  if (ws_grad) ws_grad->dz2.resize(z2.rows(), z2.cols());
  if (n_classes == 2) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = z2(i, 0);
      const double y = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
      // softplus(z) - y z, computed stably
      loss += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
      if (ws_grad) {
        const double prob = 1.0 / (1.0 + std::exp(-z));
        ws_grad->dz2(i, 0) = (prob - y) * inv_n * scale;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
      const double lse = log_sum_exp(z2.row(i));
      loss += lse - z2(i, y);
      if (ws_grad) {
        ws_grad->dz2.row(i) = (z2.row(i).array() - lse).exp().matrix() * (inv_n * scale);
        ws_grad->dz2(i, y) -= inv_n * scale;
      }
    }
  }
  return loss * inv_n * scale;
}

void backward(const Parameters& p, const Matrix& x, Workspace& ws, Parameters& g) {
  g.w2.noalias() = ws.h.transpose() * ws.dz2;
  g.b2 = ws.dz2.colwise().sum();
  ws.dh.noalias() = ws.dz2 * p.w2.transpose();
  ws.dh = (ws.z1.array() > 0.0).select(ws.dh, 0.0);
  g.w1.noalias() = x.transpose() * ws.dh;
  g.b1 = ws.dh.colwise().sum();
}

double loss_and_gradients_ws(const Parameters& params, const Matrix& x,
                             std::span<const LabelId> labels, std::size_t n_classes,
                             Parameters* grads, double loss_scale, Workspace& ws) {
  forward(params, x, ws);
  const double loss = output_loss(ws, labels, n_classes, loss_scale, grads ? &ws : nullptr);
  if (grads) backward(params, x, ws, *grads);
  return loss;
}

struct AdamState {
  Parameters m;
  Parameters v;
  std::size_t t = 0;
};

template <typename Derived>
void adam_step(Eigen::MatrixBase<Derived>& param, Eigen::MatrixBase<Derived>& m,
               Eigen::MatrixBase<Derived>& v, const Eigen::MatrixBase<Derived>& g,
               const ProbeConfig& cfg, double step) {
  m.derived().array() = cfg.beta1 * m.derived().array() + (1.0 - cfg.beta1) * g.derived().array();
  v.derived().array() =
      cfg.beta2 * v.derived().array() + (1.0 - cfg.beta2) * g.derived().array().square();
  param.derived().array() -= step * m.derived().array() / (v.derived().array().sqrt() + cfg.epsilon);
}

Parameters zeros_like(const Parameters& p) {
  return {Matrix::Zero(p.w1.rows(), p.w1.cols()), RowVector::Zero(p.b1.size()),
          Matrix::Zero(p.w2.rows(), p.w2.cols()), RowVector::Zero(p.b2.size())};
}

}  // namespace

std::size_t ProbeConfig::batch_size(std::size_t n_samples) const {
  return std::min(max_batch_size, n_samples);
}

void ProbeConfig::validate() const {
  if (hidden_size == 0) throw ConfigError("probe.hidden_size must be positive");
  if (max_epochs == 0) throw ConfigError("probe.max_epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("probe.learning_rate must be positive");
  if (max_batch_size == 0) throw ConfigError("probe.batch_size must be positive");
  if (early_stopping) throw ConfigError("probe.early_stopping is not supported");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("probe Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("probe.epsilon must be positive");
}

std::size_t Parameters::count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

double& Parameters::at(std::size_t k) {
  auto i = static_cast<Eigen::Index>(k);
  if (i < w1.size()) return w1.data()[i];
  i -= w1.size();
  if (i < b1.size()) return b1.data()[i];
  i -= b1.size();
  if (i < w2.size()) return w2.data()[i];
  i -= w2.size();
  if (i < b2.size()) return b2.data()[i];
  throw std::out_of_range("parameter index out of range");
}

double Parameters::at(std::size_t k) const { return const_cast<Parameters&>(*this).at(k); }

bool Parameters::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

std::size_t output_width(std::size_t n_classes) { return n_classes == 2 ? 1 : n_classes; }

Parameters init_parameters(std::size_t dim, std::size_t hidden, std::size_t n_classes,
                           SeededRng& rng) {
  const auto out = output_width(n_classes);
  auto fill = [&rng](auto& m, double bound) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-bound, bound);
  };
  Parameters p{Matrix(dim, hidden), RowVector(hidden), Matrix(hidden, out), RowVector(out)};
  const double bound1 = std::sqrt(6.0 / static_cast<double>(dim + hidden));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + out));
  fill(p.w1, bound1);
  fill(p.b1, bound1);
  fill(p.w2, bound2);
  fill(p.b2, bound2);
  return p;
}

double loss_and_gradients(const Parameters& params, const Matrix& x,
                          std::span<const LabelId> labels, std::size_t n_classes,
                          Parameters* grads, double loss_scale) {
  if (x.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DataError("features and labels disagree in length");
  }
  if (x.cols() != params.w1.rows()) throw DataError("feature dimension mismatch");
  check_labels(labels, n_classes);
  Workspace ws;
  if (grads) *grads = zeros_like(params);
  return loss_and_gradients_ws(params, x, labels, n_classes, grads, loss_scale, ws);
}

TrainedProbe::TrainedProbe(Parameters params, std::size_t n_classes, std::vector<double> loss_trace)
    : params_(std::move(params)), n_classes_(n_classes), loss_trace_(std::move(loss_trace)) {}

TrainedProbe train(const Matrix& features, std::span<const LabelId> labels, std::size_t n_classes,
                   const ProbeConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n != labels.size()) throw DataError("features and labels disagree in length");
  if (n == 0) throw DataError("cannot train on an empty set");
  if (n_classes < 2) throw DataError("need at least 2 classes");
  check_labels(labels, n_classes);
  {
    std::vector<bool> present(n_classes, false);
    for (LabelId y : labels) present[y] = true;
    if (std::count(present.begin(), present.end(), true) < 2) {
      throw DataError("training labels contain a single class");
    }
  }

  const auto dim = static_cast<std::size_t>(features.cols());
  SeededRng rng(cfg.seed);
  Parameters params = init_parameters(dim, cfg.hidden_size, n_classes, rng);
  AdamState adam{zeros_like(params), zeros_like(params), 0};
  Parameters grads = zeros_like(params);
  Workspace ws;

  const RowMajorMatrix rows = features;
  const std::size_t batch = cfg.batch_size(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix xb;
  std::vector<LabelId> yb;
  std::vector<double> trace;
  trace.reserve(cfg.max_epochs);

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t bsz = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(bsz), static_cast<Eigen::Index>(dim));
      yb.resize(bsz);
      for (std::size_t j = 0; j < bsz; ++j) {
        xb.row(static_cast<Eigen::Index>(j)) = rows.row(static_cast<Eigen::Index>(order[start + j]));
        yb[j] = labels[order[start + j]];
      }
      const double loss = loss_and_gradients_ws(params, xb, yb, n_classes, &grads, 1.0, ws);
      epoch_loss += loss * static_cast<double>(bsz);

      ++adam.t;
      const double t = static_cast<double>(adam.t);
      const double step = cfg.learning_rate * std::sqrt(1.0 - std::pow(cfg.beta2, t)) /
                          (1.0 - std::pow(cfg.beta1, t));
      adam_step(params.w1, adam.m.w1, adam.v.w1, grads.w1, cfg, step);
      adam_step(params.b1, adam.m.b1, adam.v.b1, grads.b1, cfg, step);
      adam_step(params.w2, adam.m.w2, adam.v.w2, grads.w2, cfg, step);
      adam_step(params.b2, adam.m.b2, adam.v.b2, grads.b2, cfg, step);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw ComputeError("probe training diverged at epoch " + std::to_string(epoch));
    }
    trace.push_back(epoch_loss);
  }
  if (!params.all_finite()) throw ComputeError("probe parameters became non-finite");
  return TrainedProbe(std::move(params), n_classes, std::move(trace));
}

Matrix predict_scores(const Parameters& params, std::size_t n_classes, const Matrix& features) {
  if (features.cols() != params.w1.rows()) {
    throw DataError("feature dimension " + std::to_string(features.cols()) + " does not match probe dimension " +
                    std::to_string(params.w1.rows()));
  }
  Workspace ws;
  forward(params, features, ws);
  Matrix scores(features.rows(), static_cast<Eigen::Index>(n_classes));
  if (n_classes == 2) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const double p1 = 1.0 / (1.0 + std::exp(-ws.z2(i, 0)));
      scores(i, 0) = 1.0 - p1;
      scores(i, 1) = p1;
    }
  } else {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const double lse = log_sum_exp(ws.z2.row(i));
      scores.row(i) = (ws.z2.row(i).array() - lse).exp().matrix();
    }
  }
  return scores;
}

Matrix predict_scores(const TrainedProbe& probe, const Matrix& features) {
  return predict_scores(probe.parameters(), probe.n_classes(), features);
}

double gradient_check(const ProbeConfig& cfg, const Matrix& x, std::span<const LabelId> labels,
                      std::size_t n_classes) {
  constexpr double kStep = 1e-5;
  // Below this magnitude differences are compared absolutely; central
  // differences carry ~1e-10 round-off on O(1) losses.
  constexpr double kFloor = 1e-6;
  SeededRng rng(cfg.seed);
  Parameters params = init_parameters(static_cast<std::size_t>(x.cols()), cfg.hidden_size, n_classes, rng);
  Parameters analytic;
  loss_and_gradients(params, x, labels, n_classes, &analytic);

  double worst = 0.0;
  for (std::size_t k = 0; k < params.count(); ++k) {
    const double saved = params.at(k);
    params.at(k) = saved + kStep;
    const double plus = loss_and_gradients(params, x, labels, n_classes, nullptr);
    params.at(k) = saved - kStep;
    const double minus = loss_and_gradients(params, x, labels, n_classes, nullptr);
    params.at(k) = saved;
    const double numeric = (plus - minus) / (2.0 * kStep);
    const double a = analytic.at(k);
    const double denom = std::max({std::abs(a), std::abs(numeric), kFloor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

Matrix to_matrix(const embed::SentenceEmbeddingSet& set) {
  Matrix m(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(set.dim));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& v = set.vectors[i];
    if (v.dim() != set.dim) throw DataError("vector " + std::to_string(i) + " has wrong dimension");
    for (std::size_t j = 0; j < set.dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
  }
  return m;
}

}  // namespace normprobe::probe
