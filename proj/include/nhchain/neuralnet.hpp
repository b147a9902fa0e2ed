#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nhchain/dataset.hpp"
#include "nhchain/rng.hpp"

namespace nhchain {

enum class Task : std::uint32_t { EntropyReg = 0, ChiReg = 1, ChiClass = 2 };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::EntropyReg: return "entropy";
    case Task::ChiReg: return "chi_reg";
    case Task::ChiClass: return "chi_class";
  }
  throw std::invalid_argument("task_name: unknown task");
}

// Output classes are ordered (1, 2, 4).
inline constexpr std::array<int, 3> kChiClasses = {1, 2, 4};

inline int class_index(int chi_class) {
  for (int i = 0; i < 3; ++i)
    if (kChiClasses[i] == chi_class) return i;
  throw std::invalid_argument("class_index: chi_class must be 1, 2 or 4");
}

struct ArchSpec {
  int input_dim = 64;
  std::vector<int> hidden;
  int output_dim = 1;
  bool softmax_output = false;

  static ArchSpec entropy(int input_dim) {
    return {input_dim, {1024, 1024}, 1, false};
  }
  static ArchSpec chi_regression(int input_dim) {
    return {input_dim, {128, 1024, 2048, 1024, 128}, 1, false};
  }
  static ArchSpec chi_classification(int input_dim) {
    return {input_dim, {128, 1024, 3072, 1024, 128}, 3, true};
  }
  static ArchSpec preset(Task task, int input_dim) {
    switch (task) {
      case Task::EntropyReg: return entropy(input_dim);
      case Task::ChiReg: return chi_regression(input_dim);
      case Task::ChiClass: return chi_classification(input_dim);
    }
    throw std::invalid_argument("preset: unknown task");
  }

  void validate() const {
    if (input_dim < 1) throw std::invalid_argument("arch: input_dim < 1");
    if (output_dim < 1) throw std::invalid_argument("arch: output_dim < 1");
    for (int w : hidden)
      if (w < 1) throw std::invalid_argument("arch: hidden width < 1");
    if (softmax_output && output_dim < 2)
      throw std::invalid_argument("arch: softmax needs >= 2 outputs");
  }
};

enum class LossKind { MeanAbsoluteError, CategoricalCrossEntropy };

struct TrainConfig {
  double learning_rate = 1e-6;
  LossKind loss = LossKind::MeanAbsoluteError;
  int batch_size = 64;
  int max_epochs = 200;
  double val_fraction = 0.1;
  double target_val_loss = 0.005;
  std::uint64_t seed = 1;
  bool normalize_features = true;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
};

// Per-column z-score fitted on the training split. Population standard
// deviation; near-constant columns keep a unit divisor so structural zeros
// (f and k diagonals) pass through unchanged.
struct FeatureScaler {
  Eigen::VectorXd mean, stdev;

  void fit(const Eigen::MatrixXd& x) {
    if (x.rows() < 1) throw std::invalid_argument("scaler: empty matrix");
    mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
    stdev = (centered.array().square().colwise().mean()).sqrt();
    for (Eigen::Index i = 0; i < stdev.size(); ++i)
      if (stdev[i] < 1e-12) stdev[i] = 1.0;
  }
  static FeatureScaler identity(int dim) {
    FeatureScaler s;
    s.mean = Eigen::VectorXd::Zero(dim);
    s.stdev = Eigen::VectorXd::Ones(dim);
    return s;
  }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size())
      throw std::invalid_argument("scaler: feature width mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           stdev.transpose().array();
  }
};

struct Layer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
};

// One Adam update on a flat parameter array; t is the 1-based step count.
inline void adam_step(Eigen::Map<Eigen::ArrayXd> w,
                      Eigen::Map<Eigen::ArrayXd> m,
                      Eigen::Map<Eigen::ArrayXd> v,
                      Eigen::Map<const Eigen::ArrayXd> g, long t,
                      const TrainConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
  const double mc = 1.0 - std::pow(cfg.beta1, double(t));
  const double vc = 1.0 - std::pow(cfg.beta2, double(t));
  w -= cfg.learning_rate * (m / mc) / ((v / vc).sqrt() + cfg.epsilon);
}

namespace detail {
inline Eigen::Map<Eigen::ArrayXd> as_array(Eigen::MatrixXd& m) {
  return {m.data(), m.size()};
}
inline Eigen::Map<Eigen::ArrayXd> as_array(Eigen::VectorXd& m) {
  return {m.data(), m.size()};
}
inline Eigen::Map<const Eigen::ArrayXd> as_const_array(
    const Eigen::MatrixXd& m) {
  return {m.data(), m.size()};
}
inline Eigen::Map<const Eigen::ArrayXd> as_const_array(
    const Eigen::VectorXd& m) {
  return {m.data(), m.size()};
}
}  // namespace detail

class Network {
 public:
  Network() = default;

  // Fan-in-scaled uniform initialization: W_ij ~ U(-r, r) with
  // r = sqrt(3 / fan_in), giving Var = 1/fan_in; biases start at zero.
  // Elements are drawn row-major from the counter-based generator, so the
  // result depends only on (arch, seed).
  static Network init(const ArchSpec& arch, std::uint64_t seed) {
    arch.validate();
    Network net;
    net.arch_ = arch;
    std::vector<int> widths;
    widths.push_back(arch.input_dim);
    widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
    widths.push_back(arch.output_dim);
    std::uint64_t counter = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      Layer layer;
      const int in = widths[l], out = widths[l + 1];
      const double r = std::sqrt(3.0 / in);
      layer.w.resize(out, in);
      for (int row = 0; row < out; ++row)
        for (int col = 0; col < in; ++col)
          layer.w(row, col) = uniform_at(seed, counter++, -r, r);
      layer.b = Eigen::VectorXd::Zero(out);
      net.layers_.push_back(std::move(layer));
    }
    return net;
  }

  static Network from_layers(const ArchSpec& arch, std::vector<Layer> layers) {
    arch.validate();
    Network net;
    net.arch_ = arch;
    net.layers_ = std::move(layers);
    net.check_shapes();
    return net;
  }

  const ArchSpec& arch() const { return arch_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  // x has samples in rows; the result does too. Softmax rows sum to 1.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != arch_.input_dim)
      throw std::invalid_argument("forward: input width mismatch");
    Eigen::MatrixXd a = x.transpose();  // features x batch
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      a = (layers_[l].w * a).colwise() + layers_[l].b;
      if (l + 1 < layers_.size()) a = a.cwiseMax(0.0);
    }
    if (arch_.softmax_output) softmax_columns(a);
    return a.transpose();
  }

  struct LossGrad {
    double loss = 0.0;
    std::vector<Layer> grads;
  };

  // Exact backpropagation. labels: one row per sample (one-hot rows for
  // cross-entropy). The MAE subgradient at zero residual is 0.
  LossGrad loss_and_gradients(const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& labels,
                              LossKind kind) const {
    if (x.cols() != arch_.input_dim)
      throw std::invalid_argument("loss: input width mismatch");
    if (labels.rows() != x.rows() || labels.cols() != arch_.output_dim)
      throw std::invalid_argument("loss: label shape mismatch");
    if ((kind == LossKind::CategoricalCrossEntropy) != arch_.softmax_output)
      throw std::invalid_argument("loss: loss kind incompatible with output");

    const Eigen::Index n = x.rows();
    const std::size_t depth = layers_.size();
    std::vector<Eigen::MatrixXd> acts(depth + 1);  // post-activation
    acts[0] = x.transpose();
    for (std::size_t l = 0; l < depth; ++l) {
      acts[l + 1] = (layers_[l].w * acts[l]).colwise() + layers_[l].b;
      if (l + 1 < depth) acts[l + 1] = acts[l + 1].cwiseMax(0.0);
    }

    LossGrad out;
    Eigen::MatrixXd delta;  // dLoss/dZ of the output layer
    const Eigen::MatrixXd target = labels.transpose();
    if (kind == LossKind::CategoricalCrossEntropy) {
      Eigen::MatrixXd probs = acts[depth];
      softmax_columns(probs);
      double loss = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < target.rows(); ++i)
          if (target(i, j) != 0.0)
            loss -= target(i, j) * std::log(std::max(probs(i, j), 1e-300));
      out.loss = loss / double(n);
      delta = (probs - target) / double(n);
    } else {
      const Eigen::MatrixXd resid = acts[depth] - target;
      const double denom = double(n) * double(arch_.output_dim);
      out.loss = resid.array().abs().sum() / denom;
      delta = resid.array().sign().matrix() / denom;
    }
    if (!std::isfinite(out.loss))
      throw std::runtime_error("loss is not finite; training aborted");

    out.grads.resize(depth);
    for (std::size_t l = depth; l-- > 0;) {
      out.grads[l].w.noalias() = delta * acts[l].transpose();
      out.grads[l].b = delta.rowwise().sum();
      if (l > 0) {
        delta = layers_[l].w.transpose() * delta;
        delta.array() *= (acts[l].array() > 0.0).cast<double>();
      }
    }
    return out;
  }

 private:
  static void softmax_columns(Eigen::MatrixXd& z) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      Eigen::VectorXd col = z.col(j);
      const double m = col.maxCoeff();
      Eigen::ArrayXd e = (col.array() - m).exp();
      z.col(j) = e / e.sum();
    }
  }

  void check_shapes() const {
    std::vector<int> widths;
    widths.push_back(arch_.input_dim);
    widths.insert(widths.end(), arch_.hidden.begin(), arch_.hidden.end());
    widths.push_back(arch_.output_dim);
    if (layers_.size() + 1 != widths.size())
      throw std::invalid_argument("network: layer count mismatch");
    for (std::size_t l = 0; l < layers_.size(); ++l)
      if (layers_[l].w.rows() != widths[l + 1] ||
          layers_[l].w.cols() != widths[l] ||
          layers_[l].b.size() != widths[l + 1])
        throw std::invalid_argument("network: layer shape mismatch");
  }

  ArchSpec arch_;
  std::vector<Layer> layers_;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint32_t epochs_run = 0;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
};

struct Model {
  Task task = Task::EntropyReg;
  FeatureScaler scaler;
  Network net;
  TrainingMeta meta;
};

struct EpochPoint {
  int epoch;
  double train_loss;
  double val_loss;
};

struct TrainOutcome {
  Model model;
  std::vector<EpochPoint> curve;
};

namespace detail {
// Adam moment accumulators mirroring the layer shapes.
struct AdamState {
  std::vector<Layer> m, v;
  long t = 0;
  explicit AdamState(const std::vector<Layer>& layers) {
    for (const Layer& l : layers) {
      m.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()),
                   Eigen::VectorXd::Zero(l.b.size())});
      v.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()),
                   Eigen::VectorXd::Zero(l.b.size())});
    }
  }
  void step(std::vector<Layer>& layers, const std::vector<Layer>& grads,
            const TrainConfig& cfg) {
    ++t;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      adam_step(as_array(layers[l].w), as_array(m[l].w), as_array(v[l].w),
                as_const_array(grads[l].w), t, cfg);
      adam_step(as_array(layers[l].b), as_array(m[l].b), as_array(v[l].b),
                as_const_array(grads[l].b), t, cfg);
    }
  }
};

inline std::vector<int> shuffled_indices(int n, SplitMix64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[static_cast<int>(rng.next_below(i + 1))]);
  return idx;
}

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x,
                                   const std::vector<int>& idx, int first,
                                   int count) {
  Eigen::MatrixXd out(count, x.cols());
  for (int i = 0; i < count; ++i) out.row(i) = x.row(idx[first + i]);
  return out;
}
}  // namespace detail

// Mini-batch Adam with a deterministic seeded shuffle. Stops once the
// validation loss reaches config.target_val_loss or max_epochs runs out.
inline TrainOutcome train(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          Task task, const ArchSpec& arch,
                          const TrainConfig& config) {
  arch.validate();
  if (x.rows() < 1) throw std::invalid_argument("train: empty dataset");
  if (y.rows() != x.rows() || y.cols() != arch.output_dim)
    throw std::invalid_argument("train: label shape mismatch");
  if ((config.loss == LossKind::CategoricalCrossEntropy) !=
      arch.softmax_output)
    throw std::invalid_argument("train: loss kind incompatible with arch");

  const int n = static_cast<int>(x.rows());
  SplitMix64 rng(config.seed);
  std::vector<int> order = detail::shuffled_indices(n, rng);
  int n_val = static_cast<int>(std::lround(n * config.val_fraction));
  n_val = std::clamp(n_val, 0, n - 1);
  const int n_train = n - n_val;

  Eigen::MatrixXd x_train = detail::gather_rows(x, order, 0, n_train);
  Eigen::MatrixXd y_train = detail::gather_rows(y, order, 0, n_train);
  Eigen::MatrixXd x_val = detail::gather_rows(x, order, n_train, n_val);
  Eigen::MatrixXd y_val = detail::gather_rows(y, order, n_train, n_val);

  TrainOutcome out;
  out.model.task = task;
  out.model.scaler = config.normalize_features
                         ? FeatureScaler{}
                         : FeatureScaler::identity(arch.input_dim);
  if (config.normalize_features) out.model.scaler.fit(x_train);
  x_train = out.model.scaler.apply(x_train);
  if (n_val > 0) x_val = out.model.scaler.apply(x_val);

  out.model.net = Network::init(arch, config.seed);
  detail::AdamState adam(out.model.net.layers());
  const int batch = std::max(1, std::min(config.batch_size, n_train));

  double train_loss = 0.0, val_loss = 0.0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<int> idx = detail::shuffled_indices(n_train, rng);
    double loss_sum = 0.0;
    int seen = 0;
    for (int first = 0; first < n_train; first += batch) {
      const int count = std::min(batch, n_train - first);
      Eigen::MatrixXd xb = detail::gather_rows(x_train, idx, first, count);
      Eigen::MatrixXd yb = detail::gather_rows(y_train, idx, first, count);
      Network::LossGrad lg =
          out.model.net.loss_and_gradients(xb, yb, config.loss);
      adam.step(out.model.net.layers(), lg.grads, config);
      loss_sum += lg.loss * count;
      seen += count;
    }
    train_loss = loss_sum / seen;
    val_loss = n_val > 0 ? out.model.net
                               .loss_and_gradients(x_val, y_val, config.loss)
                               .loss
                         : train_loss;
    out.curve.push_back({epoch, train_loss, val_loss});
    out.model.meta.epochs_run = epoch;
    if (val_loss <= config.target_val_loss) break;
  }
  out.model.meta.seed = config.seed;
  out.model.meta.final_train_loss = train_loss;
  out.model.meta.final_val_loss = val_loss;
  return out;
}

// Applies the stored scaler and the forward pass; rows are samples.
inline Eigen::MatrixXd predict_raw(const Model& model,
                                   const Eigen::MatrixXd& features) {
  return model.net.forward(model.scaler.apply(features));
}

struct Prediction {
  double value = 0.0;              // regression output or max probability
  int chi_class = 0;               // classification only
  Eigen::VectorXd probabilities;   // classification only
};

inline Prediction predict_one(const Model& model,
                              const Eigen::RowVectorXd& features) {
  Eigen::MatrixXd out = predict_raw(model, features);
  Prediction pred;
  if (model.net.arch().softmax_output) {
    Eigen::Index best;
    out.row(0).maxCoeff(&best);
    pred.chi_class = kChiClasses[static_cast<int>(best)];
    pred.probabilities = out.row(0).transpose();
    pred.value = out(0, best);
  } else {
    pred.value = out(0, 0);
  }
  return pred;
}

// Extracts (features, labels) from the valid records of a dataset.
// two_point_only keeps the first 32 columns (d and f blocks).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> design_matrix(
    const std::vector<SampleRecord>& records, Task task, bool two_point_only) {
  std::vector<const SampleRecord*> kept;
  for (const SampleRecord& r : records)
    if (r.valid) kept.push_back(&r);
  const int n = static_cast<int>(kept.size());
  if (n == 0) throw std::invalid_argument("design_matrix: no valid records");
  const int width = two_point_only ? 32 : 64;
  Eigen::MatrixXd x(n, width);
  Eigen::MatrixXd y(n, task == Task::ChiClass ? 3 : 1);
  if (task == Task::ChiClass) y.setZero();
  for (int i = 0; i < n; ++i) {
    const SampleRecord& r = *kept[i];
    for (int j = 0; j < width; ++j) x(i, j) = r.features[j];
    switch (task) {
      case Task::EntropyReg: y(i, 0) = r.c_corr; break;
      case Task::ChiReg: y(i, 0) = r.chi; break;
      case Task::ChiClass: y(i, class_index(r.chi_class)) = 1.0; break;
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace nhchain
