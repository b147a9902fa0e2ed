#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhchain/boundaries.hpp"
#include "nhchain/dataset.hpp"
#include "nhchain/grid.hpp"
#include "nhchain/manifest.hpp"
#include "nhchain/modelfile.hpp"
#include "nhchain/neuralnet.hpp"
#include "nhchain/pixmap.hpp"

namespace nhchain {

using KeyValues = std::map<std::string, std::string>;

// Plain key=value configuration, one pair per line, '#' starts a comment.
inline KeyValues parse_config_text(const std::string& text,
                                   const std::string& context) {
  KeyValues kv;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(context + ":" + std::to_string(line_no) +
                               ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(context + ":" + std::to_string(line_no) +
                               ": empty key");
    kv[key] = value;
  }
  return kv;
}

inline KeyValues parse_config_file(const std::string& path) {
  return parse_config_text(read_file(path), path);
}

namespace detail {

struct KeyReader {
  KeyValues kv;
  std::string context;

  std::optional<std::string> take(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  }
  void take_double(const std::string& key, double& out) {
    if (auto v = take(key)) out = parse_double(*v, context + ": " + key);
  }
  void take_int(const std::string& key, int& out) {
    if (auto v = take(key))
      out = static_cast<int>(parse_long(*v, context + ": " + key));
  }
  void take_u64(const std::string& key, std::uint64_t& out) {
    if (auto v = take(key))
      out = static_cast<std::uint64_t>(
          parse_long(*v, context + ": " + key));
  }
  void take_bool(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      if (*v == "1" || *v == "true") out = true;
      else if (*v == "0" || *v == "false") out = false;
      else
        throw std::runtime_error(context + ": " + key +
                                 " must be 0/1/true/false");
    }
  }
  void finish() const {
    if (!kv.empty())
      throw std::runtime_error(context + ": unknown key '" +
                               kv.begin()->first + "'");
  }
};

}  // namespace detail

inline SweepSpec sweep_from_keys(const KeyValues& kv,
                                 const std::string& context) {
  detail::KeyReader r{kv, context};
  SweepSpec spec;
  r.take_double("u_min", spec.u_min);
  r.take_double("u_max", spec.u_max);
  r.take_double("eta_min", spec.eta_min);
  r.take_double("eta_max", spec.eta_max);
  r.take_double("delta_over_t", spec.delta_over_t);
  r.take_double("delta_pair_over_t", spec.delta_pair_over_t);
  if (auto v = r.take("sampling")) {
    if (*v == "random") spec.sampling = Sampling::RandomUniform;
    else if (*v == "grid") spec.sampling = Sampling::RegularGrid;
    else throw std::runtime_error(context + ": sampling must be random|grid");
  }
  r.take_int("count", spec.count);
  r.take_int("grid_eta", spec.grid_eta);
  r.take_int("grid_u", spec.grid_u);
  r.take_u64("seed", spec.seed);
  r.take_int("length", spec.length);
  r.take_int("n_keep", spec.n_keep);
  r.take_double("lambda_inv", spec.lambda_inv);
  r.take_int("workers", spec.workers);
  r.finish();
  spec.validate();
  return spec;
}

inline TrainConfig train_config_from_keys(const KeyValues& kv,
                                          const std::string& context) {
  detail::KeyReader r{kv, context};
  TrainConfig cfg;
  r.take_double("learning_rate", cfg.learning_rate);
  r.take_int("batch_size", cfg.batch_size);
  r.take_int("max_epochs", cfg.max_epochs);
  r.take_double("val_fraction", cfg.val_fraction);
  r.take_double("target_val_loss", cfg.target_val_loss);
  r.take_u64("seed", cfg.seed);
  r.take_bool("normalize_features", cfg.normalize_features);
  r.finish();
  if (cfg.batch_size < 1)
    throw std::runtime_error(context + ": batch_size must be >= 1");
  if (cfg.max_epochs < 1)
    throw std::runtime_error(context + ": max_epochs must be >= 1");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
    throw std::runtime_error(context + ": val_fraction must be in [0, 1)");
  return cfg;
}

inline Task task_from_name(const std::string& name) {
  if (name == "entropy") return Task::EntropyReg;
  if (name == "chi_reg") return Task::ChiReg;
  if (name == "chi_class") return Task::ChiClass;
  throw std::runtime_error("unknown task '" + name +
                           "' (expected entropy|chi_reg|chi_class)");
}

inline std::string sweep_config_text(const SweepSpec& spec) {
  KeyValues kv;
  kv["u_min"] = format_double(spec.u_min);
  kv["u_max"] = format_double(spec.u_max);
  kv["eta_min"] = format_double(spec.eta_min);
  kv["eta_max"] = format_double(spec.eta_max);
  kv["delta_over_t"] = format_double(spec.delta_over_t);
  kv["delta_pair_over_t"] = format_double(spec.delta_pair_over_t);
  kv["sampling"] =
      spec.sampling == Sampling::RandomUniform ? "random" : "grid";
  kv["count"] = std::to_string(spec.count);
  kv["grid_eta"] = std::to_string(spec.grid_eta);
  kv["grid_u"] = std::to_string(spec.grid_u);
  kv["seed"] = std::to_string(spec.seed);
  kv["length"] = std::to_string(spec.length);
  kv["n_keep"] = std::to_string(spec.n_keep);
  kv["lambda_inv"] = format_double(spec.lambda_inv);
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return text;  // workers excluded: it never affects output bytes
}

// generate: sweep the parameter plane and persist the labeled dataset.
inline GenerateStats cmd_generate(const SweepSpec& spec,
                                  const std::string& out_csv) {
  GenerateStats stats;
  std::vector<SampleRecord> records = generate(spec, &stats);
  write_csv(records, out_csv);
  Manifest m = make_manifest(sweep_config_text(spec), spec.seed);
  m.set("command", std::string("generate"));
  m.set("points", stats.total);
  m.set("invalid", stats.invalid);
  m.set("near_defective", stats.near_defective);
  m.set("not_converged", stats.not_converged);
  m.set("clamp_warnings", stats.clamp_warnings);
  m.set("length", spec.length);
  m.write(manifest_path_for(out_csv));
  return stats;
}

// train: fit one of the three architectures on a labeled dataset.
inline TrainOutcome cmd_train(const std::string& dataset_path, Task task,
                              bool two_point_only, TrainConfig config,
                              const std::string& model_path,
                              const std::string& curve_path) {
  std::vector<SampleRecord> records = read_csv(dataset_path);
  config.loss = task == Task::ChiClass ? LossKind::CategoricalCrossEntropy
                                       : LossKind::MeanAbsoluteError;
  auto [x, y] = design_matrix(records, task, two_point_only);
  ArchSpec arch = ArchSpec::preset(task, static_cast<int>(x.cols()));
  TrainOutcome outcome = train(x, y, task, arch, config);
  save_model(outcome.model, model_path);

  std::ofstream curve = open_output(curve_path);
  curve << "epoch,train_loss,val_loss\n";
  for (const EpochPoint& p : outcome.curve)
    curve << p.epoch << ',' << format_double(p.train_loss) << ','
          << format_double(p.val_loss) << '\n';
  if (!curve) throw std::runtime_error("write failed: " + curve_path);

  std::string config_text =
      "dataset=" + dataset_path + "\ntask=" + task_name(task) +
      "\nfeatures=" + (two_point_only ? "two_point" : "all") +
      "\nlearning_rate=" + format_double(config.learning_rate) +
      "\nbatch_size=" + std::to_string(config.batch_size) +
      "\nmax_epochs=" + std::to_string(config.max_epochs) +
      "\nval_fraction=" + format_double(config.val_fraction) +
      "\ntarget_val_loss=" + format_double(config.target_val_loss) +
      "\nseed=" + std::to_string(config.seed) + "\nnormalize_features=" +
      (config.normalize_features ? "1" : "0") + "\n";
  Manifest m = make_manifest(config_text, config.seed);
  m.set("command", std::string("train"));
  m.set("task", std::string(task_name(task)));
  m.set("features", std::string(two_point_only ? "two_point" : "all"));
  m.set("epochs_run", int(outcome.model.meta.epochs_run));
  m.set("final_train_loss", outcome.model.meta.final_train_loss);
  m.set("final_val_loss", outcome.model.meta.final_val_loss);
  m.write(manifest_path_for(model_path));
  return outcome;
}

namespace detail {
inline double truth_for(const SampleRecord& r, Task task) {
  switch (task) {
    case Task::EntropyReg: return r.c_corr;
    case Task::ChiReg: return r.chi;
    case Task::ChiClass: return double(r.chi_class);
  }
  throw std::invalid_argument("truth_for: unknown task");
}
}  // namespace detail

struct PredictSummary {
  int total = 0;
  int valid = 0;
  double accuracy = std::nan("");  // classification only, over valid cells
  double mae = std::nan("");       // regression only, over valid cells
};

// predict: run a trained model over every point of a labeled dataset and
// emit a grid of true/predicted/difference values.
inline PredictSummary cmd_predict(const std::string& model_path,
                                  const std::string& dataset_path,
                                  const std::string& out_grid_csv) {
  Model model = load_model(model_path);
  std::vector<SampleRecord> records = read_csv(dataset_path);
  const int width = model.net.arch().input_dim;
  if (width != 32 && width != kFeatureCount)
    throw std::runtime_error("model input width " + std::to_string(width) +
                             " does not match dataset features");

  PhaseGrid grid;
  PredictSummary summary;
  summary.total = static_cast<int>(records.size());
  const bool classify = model.task == Task::ChiClass;
  int agree = 0;
  double abs_err = 0.0;
  for (const SampleRecord& r : records) {
    GridCell cell;
    cell.eta = r.eta;
    cell.u_over_t = r.u_over_t;
    cell.valid = r.valid;
    if (r.valid) {
      Eigen::RowVectorXd features(width);
      for (int j = 0; j < width; ++j) features[j] = r.features[j];
      Prediction p = predict_one(model, features);
      cell.truth = detail::truth_for(r, model.task);
      if (classify) {
        cell.pred = double(p.chi_class);
        cell.diff = cell.pred == cell.truth ? 0.0 : 1.0;
        agree += cell.diff == 0.0 ? 1 : 0;
      } else {
        cell.pred = p.value;
        cell.diff = cell.pred - cell.truth;
        abs_err += std::abs(cell.diff);
      }
      ++summary.valid;
    }
    grid.cells.push_back(cell);
  }
  write_grid_csv(grid, out_grid_csv);

  if (summary.valid > 0) {
    if (classify) summary.accuracy = double(agree) / summary.valid;
    else summary.mae = abs_err / summary.valid;
  }
  std::string config_text =
      "model=" + model_path + "\ndataset=" + dataset_path + "\n";
  Manifest m = make_manifest(config_text, model.meta.seed);
  m.set("command", std::string("predict"));
  m.set("task", std::string(task_name(model.task)));
  m.set("cells", summary.total);
  m.set("valid_cells", summary.valid);
  if (classify) m.set("accuracy", summary.accuracy);
  else m.set("mae", summary.mae);
  m.write(manifest_path_for(out_grid_csv));
  return summary;
}

enum class DiffMode { Signed, Disagree };

// diff: cellwise comparison of two congruent grids. Column selects which
// value is compared ("true" or "pred"); classification grids use the
// disagreement indicator.
inline void cmd_diff(const std::string& grid_a_path,
                     const std::string& grid_b_path,
                     const std::string& column, DiffMode mode,
                     const std::string& out_path) {
  if (column != "true" && column != "pred")
    throw std::runtime_error("diff: column must be true|pred");
  PhaseGrid a = read_grid_csv(grid_a_path);
  PhaseGrid b = read_grid_csv(grid_b_path);
  if (a.cells.size() != b.cells.size())
    throw std::runtime_error("diff: grids have different sizes");
  PhaseGrid out;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const GridCell& ca = a.cells[i];
    const GridCell& cb = b.cells[i];
    if (std::abs(ca.eta - cb.eta) > 1e-12 ||
        std::abs(ca.u_over_t - cb.u_over_t) > 1e-12)
      throw std::runtime_error("diff: axis mismatch at row " +
                               std::to_string(i + 1));
    GridCell cell;
    cell.eta = ca.eta;
    cell.u_over_t = ca.u_over_t;
    cell.valid = ca.valid && cb.valid;
    const double va = column == "true" ? ca.truth : ca.pred;
    const double vb = column == "true" ? cb.truth : cb.pred;
    cell.truth = va;
    cell.pred = vb;
    if (cell.valid)
      cell.diff = mode == DiffMode::Signed ? vb - va : (va == vb ? 0.0 : 1.0);
    else
      cell.valid = false;
    out.cells.push_back(cell);
  }
  write_grid_csv(out, out_path);
  Manifest m = make_manifest("a=" + grid_a_path + "\nb=" + grid_b_path +
                                 "\ncolumn=" + column + "\n",
                             0);
  m.set("command", std::string("diff"));
  m.set("cells", int(out.cells.size()));
  m.write(manifest_path_for(out_path));
}

// boundaries: tabulate the analytic boundary polylines.
inline void cmd_boundaries(double eta_min, double eta_max, double delta_over_t,
                           int resolution, const std::string& out_path) {
  std::vector<BoundaryPolyline> lines =
      boundary_polylines(eta_min, eta_max, delta_over_t, resolution);
  write_boundaries_csv(lines, out_path);
  Manifest m = make_manifest("eta_min=" + format_double(eta_min) +
                                 "\neta_max=" + format_double(eta_max) +
                                 "\ndelta_over_t=" + format_double(delta_over_t) +
                                 "\nresolution=" + std::to_string(resolution) +
                                 "\n",
                             0);
  m.set("command", std::string("boundaries"));
  m.set("branches", int(lines.size()));
  m.write(manifest_path_for(out_path));
}

struct HeatmapOptions {
  std::string column = "pred";  // true | pred | diff
  std::optional<double> lo, hi;  // default: data range over finite cells
  int scale = 8;                 // pixels per cell
  std::optional<double> overlay_delta_over_t;  // draw boundaries when set
};

// heatmap: rasterize one column of a rectangular grid into a P6 image,
// optionally overlaying the analytic boundaries.
inline void cmd_heatmap(const std::string& grid_path,
                        const HeatmapOptions& opts,
                        const std::string& out_path) {
  if (opts.column != "true" && opts.column != "pred" && opts.column != "diff")
    throw std::runtime_error("heatmap: unknown column '" + opts.column + "'");
  if (opts.scale < 1) throw std::runtime_error("heatmap: scale must be >= 1");
  PhaseGrid grid = read_grid_csv(grid_path);
  GridAxes axes = grid_axes(grid);
  const int n_rows = static_cast<int>(axes.eta.size());
  const int n_cols = static_cast<int>(axes.u_over_t.size());

  auto value_of = [&](const GridCell& c) {
    if (!c.valid) return std::nan("");
    if (opts.column == "true") return c.truth;
    if (opts.column == "pred") return c.pred;
    return c.diff;
  };

  double lo = 0.0, hi = 0.0;
  bool seen = false;
  for (const GridCell& c : grid.cells) {
    double v = value_of(c);
    if (!std::isfinite(v)) continue;
    lo = seen ? std::min(lo, v) : v;
    hi = seen ? std::max(hi, v) : v;
    seen = true;
  }
  if (opts.lo) lo = *opts.lo;
  if (opts.hi) hi = *opts.hi;

  Image img(n_cols * opts.scale, n_rows * opts.scale);
  for (int r = 0; r < n_rows; ++r)
    for (int c = 0; c < n_cols; ++c) {
      double v = value_of(grid.cells[std::size_t(r) * n_cols + c]);
      img.fill_rect(c * opts.scale, r * opts.scale, opts.scale, opts.scale,
                    colormap(v, lo, hi));
    }

  if (opts.overlay_delta_over_t) {
    const double eta0 = axes.eta.front(), eta1 = axes.eta.back();
    const double u0 = axes.u_over_t.front(), u1 = axes.u_over_t.back();
    auto to_y = [&](double eta) {
      double f = eta1 != eta0 ? (eta - eta0) / (eta1 - eta0) : 0.5;
      return int(std::lround(f * (n_rows - 1) * opts.scale)) + opts.scale / 2;
    };
    auto to_x = [&](double u) {
      double f = u1 != u0 ? (u - u0) / (u1 - u0) : 0.5;
      return int(std::lround(f * (n_cols - 1) * opts.scale)) + opts.scale / 2;
    };
    double lo_eta = std::min(eta0, eta1), hi_eta = std::max(eta0, eta1);
    lo_eta = std::max(lo_eta, -0.95);
    hi_eta = std::min(hi_eta, 0.95);
    std::vector<BoundaryPolyline> lines = boundary_polylines(
        lo_eta, hi_eta, *opts.overlay_delta_over_t,
        std::max(2, n_rows * opts.scale));
    for (const BoundaryPolyline& line : lines) {
      const bool imag_family = line.branch_id.rfind("imag_zero", 0) == 0;
      const Rgb color = imag_family ? kImagZeroColor : kRealGapColor;
      const std::vector<int>& dash =
          imag_family ? dash_pattern_dash_dot() : dash_pattern_dashed();
      for (std::size_t i = 1; i < line.vertices.size(); ++i) {
        const auto& p = line.vertices[i - 1];
        const auto& q = line.vertices[i];
        img.draw_line(to_x(p[1]), to_y(p[0]), to_x(q[1]), to_y(q[0]), color,
                      dash);
      }
    }
  }

  img.write_p6(out_path);
  std::string config_text = "grid=" + grid_path + "\ncolumn=" + opts.column +
                            "\nlo=" + format_double(lo) + "\nhi=" +
                            format_double(hi) + "\nscale=" +
                            std::to_string(opts.scale) + "\n";
  Manifest m = make_manifest(config_text, 0);
  m.set("command", std::string("heatmap"));
  m.set("width", n_cols * opts.scale);
  m.set("height", n_rows * opts.scale);
  m.set("lo", lo);
  m.set("hi", hi);
  m.write(manifest_path_for(out_path));
}

}  // namespace nhchain
