// Release gate: twelve checks covering the physics oracles, the learning
// stack and the pipeline determinism. Each check prints one PASS/FAIL line
// and the gate keeps going after failures; the exit code is 0 only if all
// twelve pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nhchain/boundaries.hpp"
#include "nhchain/cli.hpp"
#include "nhchain/correlators.hpp"
#include "nhchain/dataset.hpp"
#include "nhchain/hamiltonian.hpp"
#include "nhchain/modelfile.hpp"
#include "nhchain/neuralnet.hpp"
#include "nhchain/rng.hpp"
#include "nhchain/spectra.hpp"
#include "oracle.hpp"

using namespace nhchain;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

ModelParams random_params(std::uint64_t seed, int length, double delta_nh) {
  ModelParams p;
  p.length = length;
  p.t = uniform_at(seed, 0, 0.5, 2.0);
  p.delta_pair = uniform_at(seed, 1, -2.0, 2.0);
  p.u = uniform_at(seed, 2, -4.0, 4.0);
  p.delta_nh = delta_nh;
  p.eta = uniform_at(seed, 4, -0.9, 0.9);
  return p;
}

EigenSystem solve(const ModelParams& p, const DiagOptions& opts) {
  return diagonalize(build_hamiltonian(p, Parity::Even),
                     build_hamiltonian(p, Parity::Odd), opts);
}

bool by_re_im(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Shared corpus for checks 8, 10 and 11: the in-distribution training box.
struct SharedData {
  std::vector<SampleRecord> records;
  GenerateStats stats;
  double generate_seconds = 0.0;
  std::optional<Model> classifier_all;

  static constexpr int kTrainCount = 3200;

  const std::vector<SampleRecord>& dataset() {
    if (records.empty()) {
      SweepSpec spec;
      spec.sampling = Sampling::RandomUniform;
      spec.count = 4000;
      spec.length = 8;
      spec.delta_over_t = 0.0;
      spec.seed = 1;
      Clock::time_point t0 = Clock::now();
      records = generate(spec, &stats);
      generate_seconds = seconds_since(t0);
    }
    return records;
  }

  std::vector<SampleRecord> train_slice() {
    const std::vector<SampleRecord>& all = dataset();
    return {all.begin(), all.begin() + kTrainCount};
  }
  std::vector<SampleRecord> test_slice() {
    const std::vector<SampleRecord>& all = dataset();
    return {all.begin() + kTrainCount, all.end()};
  }

  TrainConfig classifier_config() const {
    TrainConfig cfg;
    cfg.loss = LossKind::CategoricalCrossEntropy;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 64;
    cfg.max_epochs = 80;
    cfg.target_val_loss = 0.05;
    cfg.seed = 1;
    return cfg;
  }

  const Model& classifier() {
    if (!classifier_all) {
      auto [x, y] = design_matrix(train_slice(), Task::ChiClass, false);
      ArchSpec arch = ArchSpec::chi_classification(int(x.cols()));
      classifier_all = train(x, y, Task::ChiClass, arch,
                             classifier_config()).model;
    }
    return *classifier_all;
  }
};

SharedData shared;

double classifier_accuracy(const Model& model,
                           const std::vector<SampleRecord>& records) {
  const int width = model.net.arch().input_dim;
  int total = 0, agree = 0;
  for (const SampleRecord& r : records) {
    if (!r.valid) continue;
    Eigen::RowVectorXd features(width);
    for (int j = 0; j < width; ++j) features[j] = r.features[j];
    if (predict_one(model, features).chi_class == r.chi_class) ++agree;
    ++total;
  }
  return total > 0 ? double(agree) / total : 0.0;
}

// 1. Two-site chains in closed form.
Outcome criterion1() {
  Clock::time_point t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    ModelParams p = random_params(100 + draw, 2, uniform_at(100 + draw, 3, -1.0, 1.0));
    DiagOptions opts;
    opts.want_vectors = false;
    EigenSystem sys = solve(p, opts);

    const double strong = 1.0 + p.eta;  // the single bond is an odd bond
    const Complex u1 = Complex(p.u, -p.delta_nh) * strong;
    const double t1 = p.t * strong;
    const double d1 = p.delta_pair * strong;
    std::vector<Complex> expect = {u1 + d1, u1 - d1, -u1 + t1, -u1 - t1};
    std::sort(expect.begin(), expect.end(), by_re_im);

    std::vector<Complex> got = sys.energies;
    std::sort(got.begin(), got.end(), by_re_im);
    if (got.size() != 4) return {false, "expected a 4-state spectrum"};
    for (int i = 0; i < 4; ++i)
      worst = std::max(worst, std::abs(got[i] - expect[i]));
  }
  double dt = seconds_since(t0);
  return {worst <= 1e-12 && dt < 1.0,
          fmt("max |error| %.2e over 100 draws, %.2f s", worst, dt)};
}

// 2. Vanishing dissipation gives a Hermitian problem with a real spectrum.
Outcome criterion2() {
  Clock::time_point t0 = Clock::now();
  double worst_imag_ratio = 0.0, worst_herm = 0.0;
  for (std::uint64_t draw = 0; draw < 50; ++draw) {
    int length = 2 + int(random_at(200 + draw, 7) % 9);  // 2..10
    ModelParams p = random_params(200 + draw, length, 0.0);

    Eigen::MatrixXcd h = build_hamiltonian_full(p).dense();
    worst_herm =
        std::max(worst_herm, (h - h.adjoint()).cwiseAbs().maxCoeff());

    DiagOptions opts;
    opts.want_vectors = false;
    EigenSystem sys = solve(p, opts);
    double max_abs = 0.0, max_imag = 0.0;
    for (const Complex& e : sys.energies) {
      max_abs = std::max(max_abs, std::abs(e));
      max_imag = std::max(max_imag, std::abs(e.imag()));
    }
    worst_imag_ratio = std::max(worst_imag_ratio, max_imag / max_abs);
  }
  double dt = seconds_since(t0);
  return {worst_imag_ratio <= 1e-9 && worst_herm <= 1e-12 && dt < 30.0,
          fmt("max |Im|/max|e| %.2e, max |H - H^dag| %.2e, %.1f s",
              worst_imag_ratio, worst_herm, dt)};
}

// 3. Dissipative spectra are closed under complex conjugation.
Outcome criterion3() {
  Clock::time_point t0 = Clock::now();
  double worst_conj = 0.0, worst_neg = 0.0;
  for (std::uint64_t draw = 0; draw < 50; ++draw) {
    ModelParams p;
    p.length = 8;
    p.u = uniform_at(300 + draw, 2, -4.0, 4.0);
    p.eta = uniform_at(300 + draw, 4, -0.9, 0.9);
    p.delta_nh = 0.5 * p.t;
    DiagOptions opts;
    opts.want_vectors = false;
    EigenSystem sys = solve(p, opts);
    for (const Complex& e : sys.energies) {
      double best_conj = 1e100, best_neg = 1e100;
      for (const Complex& f : sys.energies) {
        best_conj = std::min(best_conj, std::abs(std::conj(e) - f));
        best_neg = std::min(best_neg, std::abs(-e - f));
      }
      worst_conj = std::max(worst_conj, best_conj);
      worst_neg = std::max(worst_neg, best_neg);
    }
  }
  double dt = seconds_since(t0);
  return {worst_conj <= 1e-8 && dt < 30.0,
          fmt("max conjugate-partner distance %.2e (sign-inversion partner "
              "distance %.2e), %.1f s",
              worst_conj, worst_neg, dt)};
}

// 4. Fine-tuned pairing point: exact twofold ground degeneracy.
Outcome criterion4() {
  Clock::time_point t0 = Clock::now();
  double worst_gap = 0.0;
  bool chi_ok = true;
  for (int length : {4, 6, 8, 10}) {
    ModelParams p;  // t = delta_pair = 1, u = delta_nh = eta = 0
    p.length = length;
    DiagOptions opts;
    opts.want_vectors = false;
    EigenSystem sys = solve(p, opts);
    worst_gap =
        std::max(worst_gap, std::abs(sys.energies[1] - sys.energies[0]));
    int chi_int = chi_nearest_int(chi_of(sys, 200.0), opts.n_keep);
    if (chi_int != 2) chi_ok = false;
  }
  double dt = seconds_since(t0);
  return {worst_gap <= 1e-10 && chi_ok && dt < 60.0,
          fmt("max doublet splitting %.2e, all [chi]=2: %s, %.1f s",
              worst_gap, chi_ok ? "yes" : "no", dt)};
}

// 5. The two analytic boundary families and their reference values.
Outcome criterion5() {
  Clock::time_point t0 = Clock::now();
  double worst = 0.0;
  for (double eta = -0.9; eta <= 0.9 + 1e-12; eta += 0.05) {
    std::vector<double> gap = real_gap_boundary(eta, 0.0);
    std::vector<double> zero = imag_zero_boundary(eta);
    if (gap.size() != zero.size()) return {false, "family sizes differ"};
    for (std::size_t i = 0; i < gap.size(); ++i)
      worst = std::max(worst, std::abs(gap[i] - zero[i]));
  }

  auto matches = [](std::vector<double> got, std::vector<double> want) {
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i)
      if (std::abs(got[i] - want[i]) > 1e-12) return false;
    return true;
  };
  double root = std::sqrt(0.75);
  bool ref_ok = matches(real_gap_boundary(0.0, 0.5), {-root, root}) &&
                matches(imag_zero_boundary(0.5),
                        {-3.0, -1.0 / 3.0, 1.0 / 3.0, 3.0});
  double dt = seconds_since(t0);
  return {worst <= 1e-12 && ref_ok && dt < 1.0,
          fmt("max family mismatch at delta=0: %.2e, reference points: %s",
              worst, ref_ok ? "ok" : "WRONG")};
}

// 6. A single finite-size class crossover near the thermodynamic U = t.
Outcome criterion6() {
  Clock::time_point t0 = Clock::now();
  std::vector<double> us;
  std::vector<int> classes;
  for (int i = 0; i <= 40; ++i) {
    double u = 0.05 * i;
    ModelParams p;
    p.length = 10;
    p.u = u;
    DiagOptions opts;
    opts.want_vectors = false;
    EigenSystem sys = solve(p, opts);
    us.push_back(u);
    classes.push_back(
        chi_class_of(chi_nearest_int(chi_of(sys, 200.0), opts.n_keep)));
  }
  int changes = 0;
  double crossing = -1.0;
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (classes[i] != classes[i - 1]) {
      ++changes;
      crossing = 0.5 * (us[i] + us[i - 1]);
    }
  double dt = seconds_since(t0);
  return {changes == 1 && std::abs(crossing - 1.0) <= 0.5 && dt < 300.0,
          fmt("%d class change(s), crossing at U/t = %.3f, %.1f s", changes,
              crossing, dt)};
}

// 7. Windowed features and correlation matrix against a dense reference.
Outcome criterion7() {
  Clock::time_point t0 = Clock::now();
  double worst = 0.0;
  const int lengths[3] = {4, 5, 6};
  for (std::uint64_t draw = 0; draw < 25; ++draw) {
    const int length = lengths[draw % 3];
    ModelParams p = random_params(700 + draw, length, 0.0);
    if (draw % 2 == 0) p.delta_nh = 0.5 * p.t;

    SectorBasis even = build_sector(p.length, Parity::Even);
    SectorBasis odd = build_sector(p.length, Parity::Odd);
    EigenSystem sys = diagonalize(build_hamiltonian(p, even),
                                  build_hamiltonian(p, odd), DiagOptions{});
    GroundManifold manifold = ground_manifold(sys, even, odd, 200.0);

    FeatureVector fv = feature_vector(manifold, p.length);
    oracle::Features ref =
        oracle::features(manifold.states, middle_window(p.length), p.length);
    worst = std::max({worst, (fv.d - ref.d).cwiseAbs().maxCoeff(),
                      (fv.f - ref.f).cwiseAbs().maxCoeff(),
                      (fv.k - ref.k).cwiseAbs().maxCoeff(),
                      (fv.p - ref.p).cwiseAbs().maxCoeff()});

    Eigen::MatrixXd c = correlation_matrix(manifold, p.length);
    Eigen::MatrixXd c_ref =
        oracle::correlation_matrix(manifold.states, p.length);
    worst = std::max(worst, (c - c_ref).cwiseAbs().maxCoeff());
  }
  double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 60.0,
          fmt("max |pipeline - reference| %.2e over 25 points, %.1f s", worst,
              dt)};
}

// 8. Correlation-entropy bounds over the full training corpus.
Outcome criterion8() {
  const std::vector<SampleRecord>& records = shared.dataset();
  const GenerateStats& stats = shared.stats;
  int bound_violations = 0;
  int valid = 0;
  const double hi = 1.0 / std::exp(1.0) + 1e-12;
  for (const SampleRecord& r : records) {
    if (!r.valid) continue;
    ++valid;
    if (!(r.c_corr >= 0.0 && r.c_corr <= hi)) ++bound_violations;
  }
  double clamp_fraction =
      stats.total > 0 ? double(stats.clamp_warnings) / stats.total : 0.0;
  return {bound_violations == 0 && clamp_fraction < 1e-3,
          fmt("%d bound violations over %d samples, clamp excursions %.3f%%",
              bound_violations, valid, 100.0 * clamp_fraction)};
}

// 9. Backpropagation against central finite differences.
Outcome criterion9() {
  Clock::time_point t0 = Clock::now();
  struct Case {
    ArchSpec arch;
    LossKind loss;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  cases.push_back({{3, {4, 5}, 2, false}, LossKind::MeanAbsoluteError, 21});
  cases.push_back(
      {{3, {4, 5}, 3, true}, LossKind::CategoricalCrossEntropy, 22});
  cases.push_back({{6, {8}, 1, false}, LossKind::MeanAbsoluteError, 23});
  cases.push_back({{8, {}, 3, true}, LossKind::CategoricalCrossEntropy, 24});

  double worst = 0.0;
  for (const Case& c : cases) {
    Network net = Network::init(c.arch, c.seed);
    const int n = 5;
    Eigen::MatrixXd x(n, c.arch.input_dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c.arch.input_dim; ++j)
        x(i, j) = uniform_at(c.seed, 1000 + i * c.arch.input_dim + j, -1.0, 1.0);
    Eigen::MatrixXd y(n, c.arch.output_dim);
    if (c.loss == LossKind::CategoricalCrossEntropy) {
      y.setZero();
      for (int i = 0; i < n; ++i) y(i, i % c.arch.output_dim) = 1.0;
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < c.arch.output_dim; ++j)
          y(i, j) = uniform_at(c.seed, 5000 + i * c.arch.output_dim + j, -1.0,
                               1.0);
    }
    Network::LossGrad lg = net.loss_and_gradients(x, y, c.loss);
    auto probe = [&](double* param, double analytic) {
      const double h = 1e-6;
      const double saved = *param;
      *param = saved + h;
      double up = net.loss_and_gradients(x, y, c.loss).loss;
      *param = saved - h;
      double down = net.loss_and_gradients(x, y, c.loss).loss;
      *param = saved;
      double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max({std::abs(analytic),
                                            std::abs(numeric), 1e-6}));
    };
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      Layer& layer = net.layers()[l];
      for (Eigen::Index i = 0; i < layer.w.size(); ++i)
        probe(layer.w.data() + i, lg.grads[l].w.data()[i]);
      for (Eigen::Index i = 0; i < layer.b.size(); ++i)
        probe(layer.b.data() + i, lg.grads[l].b[i]);
    }
  }
  double dt = seconds_since(t0);
  return {worst < 1e-4 && dt < 10.0,
          fmt("worst relative gradient error %.2e, %.1f s", worst, dt)};
}

// 10. In-distribution fit on the Hermitian box.
Outcome criterion10() {
  Clock::time_point t0 = Clock::now();
  shared.dataset();
  const Model& classifier = shared.classifier();
  double accuracy = classifier_accuracy(classifier, shared.test_slice());

  auto [x, y] = design_matrix(shared.train_slice(), Task::EntropyReg, false);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.max_epochs = 300;
  cfg.target_val_loss = 0.005;
  cfg.seed = 1;
  Model entropy_model =
      train(x, y, Task::EntropyReg, ArchSpec::entropy(int(x.cols())), cfg)
          .model;

  double mae = 0.0;
  int n_test = 0;
  for (const SampleRecord& r : shared.test_slice()) {
    if (!r.valid) continue;
    Eigen::RowVectorXd features(64);
    for (int j = 0; j < 64; ++j) features[j] = r.features[j];
    mae += std::abs(predict_one(entropy_model, features).value - r.c_corr);
    ++n_test;
  }
  mae /= std::max(1, n_test);

  double dt = seconds_since(t0) + shared.generate_seconds;
  return {accuracy >= 0.95 && mae <= 0.01 && dt < 1800.0,
          fmt("class accuracy %.3f (need >= 0.95), entropy MAE %.4f "
              "(need <= 0.01), %d held-out points, %.0f s",
              accuracy, mae, n_test, dt)};
}

// 11. Transfer to the dissipative plane: four-point features matter.
//
// Both classifiers read raw (unscaled) correlators. Eight two-point entries
// (the even-site-distance d and f elements) vanish identically on the
// Hermitian training line and only activate under dissipation, so z-scoring
// by their degenerate training spread would blow the shifted inputs up by
// ~10^3 standard deviations; the correlators themselves are dimensionless
// O(1) quantities and need no scaling. Both models train to validation
// convergence under the same schedule for a fair ablation.
//
// Measured caveat: the margin is trajectory-sensitive. The all-features arm
// lands at ~0.996 robustly, but the converged two-point arm has ended
// anywhere between 0.92 and 1.00 across builds with different
// floating-point contraction (long minibatch runs amplify last-ulp
// differences into different minima). Within one build the outcome is
// deterministic; the check records the measured ordering rather than
// forcing it by handicapping one arm.
Outcome criterion11() {
  Clock::time_point t0 = Clock::now();

  TrainConfig cfg;
  cfg.loss = LossKind::CategoricalCrossEntropy;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.max_epochs = 300;
  cfg.target_val_loss = 5e-4;
  cfg.seed = 1;
  cfg.normalize_features = false;

  auto fit = [&](bool two_point_only) {
    auto [x, y] = design_matrix(shared.train_slice(), Task::ChiClass,
                                two_point_only);
    return train(x, y, Task::ChiClass,
                 ArchSpec::chi_classification(int(x.cols())), cfg)
        .model;
  };
  Model all_features = fit(false);
  Model two_point = fit(true);

  SweepSpec grid;
  grid.sampling = Sampling::RegularGrid;
  grid.grid_eta = 41;
  grid.grid_u = 41;
  grid.length = 8;
  grid.delta_over_t = 0.5;
  grid.seed = 2;
  std::vector<SampleRecord> target = generate(grid, nullptr);

  double acc_all = classifier_accuracy(all_features, target);
  double acc_two = classifier_accuracy(two_point, target);
  double dt = seconds_since(t0);
  return {acc_all - acc_two >= 0.05 && acc_all > 0.75 && dt < 3600.0,
          fmt("accuracy all-features %.3f vs two-point %.3f on %d grid "
              "points (need gap >= 0.05 and all > 0.75), %.0f s",
              acc_all, acc_two, int(target.size()), dt)};
}

// 12. Byte-identical artifacts across repeated pipeline runs.
Outcome criterion12() {
  Clock::time_point t0 = Clock::now();
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "nhchain_acceptance";
  fs::remove_all(base);

  auto run = [&](const fs::path& dir) {
    fs::create_directories(dir);
    SweepSpec spec;
    spec.sampling = Sampling::RegularGrid;
    spec.grid_eta = 5;
    spec.grid_u = 5;
    spec.length = 6;
    spec.seed = 3;
    std::string dataset = (dir / "dataset.csv").string();
    cmd_generate(spec, dataset);

    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.max_epochs = 5;
    cfg.target_val_loss = 0.0;
    std::string model = (dir / "entropy.model").string();
    cmd_train(dataset, Task::EntropyReg, false, cfg, model,
              (dir / "entropy.curve.csv").string());

    std::string grid = (dir / "grid.csv").string();
    cmd_predict(model, dataset, grid);

    HeatmapOptions opts;
    opts.scale = 4;
    opts.overlay_delta_over_t = 0.5;
    std::string image = (dir / "map.ppm").string();
    cmd_heatmap(grid, opts, image);
  };
  run(base / "a");
  run(base / "b");

  auto same = [&](const char* name) {
    return read_file((base / "a" / name).string()) ==
           read_file((base / "b" / name).string());
  };
  bool dataset_ok = same("dataset.csv");
  bool model_ok = same("entropy.model");
  bool curve_ok = same("entropy.curve.csv");
  bool image_ok = same("map.ppm");
  fs::remove_all(base);
  double dt = seconds_since(t0);
  return {dataset_ok && model_ok && curve_ok && image_ok && dt < 900.0,
          fmt("dataset %s, model %s, curve %s, heatmap %s, %.1f s",
              dataset_ok ? "identical" : "DIFFERS",
              model_ok ? "identical" : "DIFFERS",
              curve_ok ? "identical" : "DIFFERS",
              image_ok ? "identical" : "DIFFERS", dt)};
}

}  // namespace

int main() {
  struct Check {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Check checks[] = {
      {1, "two-site closed-form spectrum", criterion1},
      {2, "Hermitian limit is real and self-adjoint", criterion2},
      {3, "dissipative spectrum conjugation closure", criterion3},
      {4, "fine-tuned pairing point degeneracy", criterion4},
      {5, "analytic boundary reference values", criterion5},
      {6, "single finite-size class crossover", criterion6},
      {7, "correlators match the dense reference", criterion7},
      {8, "correlation-entropy bounds", criterion8},
      {9, "backpropagation gradient check", criterion9},
      {10, "in-distribution classification and regression", criterion10},
      {11, "transfer ordering of feature sets", criterion11},
      {12, "byte-identical pipeline reruns", criterion12},
  };

  int failures = 0;
  for (const Check& check : checks) {
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %2d: %s (%s)\n",
                outcome.pass ? "PASS" : "FAIL", check.id, check.name,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d of 12 criteria passed\n",
              12 - failures);
  return failures == 0 ? 0 : 1;
}
