// Command-line pipeline: generate | train | predict | diff | boundaries |
// heatmap. Configuration comes from an optional key=value file, overridden
// by repeatable --set key=value flags; files are the interface between
// stages.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nhchain/cli.hpp"
#include "nhchain/version.hpp"

namespace {

nhchain::KeyValues merge_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  nhchain::KeyValues kv;
  if (!config_path.empty()) kv = nhchain::parse_config_file(config_path);
  for (std::string item : overrides) {
    // Accept both repeated tokens (--set a=1 b=2) and one quoted list
    // (--set "a=1 b=2"): entries never contain spaces, so whitespace
    // always separates them.
    for (char& c : item)
      if (c == ' ' || c == '\t') c = '\n';
    nhchain::KeyValues one = nhchain::parse_config_text(item, "--set");
    for (auto& [k, v] : one) kv[k] = v;
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-Hermitian chain pipeline"};
  app.set_version_flag("--version", nhchain::kVersion);
  app.require_subcommand(1);

  std::string config_path, output, dataset, model_path, curve_path;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("generate", "sweep parameters into a dataset CSV");
  gen->add_option("--config", config_path, "key=value config file");
  gen->add_option("--set", overrides, "override config entries (key=value)")
      ->take_all();
  gen->add_option("--output", output, "dataset CSV path")->required();

  std::string task_name = "chi_class", features = "all";
  auto* tr = app.add_subcommand("train", "fit a network on a dataset");
  tr->add_option("--dataset", dataset, "dataset CSV")->required();
  tr->add_option("--task", task_name, "entropy|chi_reg|chi_class");
  tr->add_option("--features", features, "two_point|all");
  tr->add_option("--config", config_path, "key=value config file");
  tr->add_option("--set", overrides, "override config entries")->take_all();
  tr->add_option("--model-out", model_path, "model file path")->required();
  tr->add_option("--curve-out", curve_path, "training curve CSV path");

  auto* pr = app.add_subcommand("predict", "evaluate a model over a dataset");
  pr->add_option("--model", model_path, "model file")->required();
  pr->add_option("--dataset", dataset, "dataset CSV with features")->required();
  pr->add_option("--output", output, "prediction grid CSV")->required();

  std::string grid_a, grid_b, column = "pred", mode_name = "signed";
  auto* df = app.add_subcommand("diff", "cellwise difference of two grids");
  df->add_option("--a", grid_a, "first grid CSV")->required();
  df->add_option("--b", grid_b, "second grid CSV")->required();
  df->add_option("--column", column, "true|pred");
  df->add_option("--mode", mode_name, "signed|disagree");
  df->add_option("--output", output, "difference grid CSV")->required();

  double eta_min = -0.95, eta_max = 0.95, delta_over_t = 0.0;
  int resolution = 256;
  auto* bd = app.add_subcommand("boundaries", "tabulate analytic boundaries");
  bd->add_option("--eta-min", eta_min, "lower eta");
  bd->add_option("--eta-max", eta_max, "upper eta");
  bd->add_option("--delta-over-t", delta_over_t, "non-Hermiticity delta/t");
  bd->add_option("--resolution", resolution, "vertices per branch");
  bd->add_option("--output", output, "boundary CSV")->required();

  nhchain::HeatmapOptions hm_opts;
  double hm_lo = 0.0, hm_hi = 0.0, overlay_delta = 0.0;
  auto* hm = app.add_subcommand("heatmap", "render a grid column as a P6 image");
  hm->add_option("--grid", grid_a, "grid CSV")->required();
  hm->add_option("--column", hm_opts.column, "true|pred|diff");
  auto* lo_opt = hm->add_option("--min", hm_lo, "color scale minimum");
  auto* hi_opt = hm->add_option("--max", hm_hi, "color scale maximum");
  hm->add_option("--scale", hm_opts.scale, "pixels per cell");
  auto* ov_opt = hm->add_option("--overlay-delta", overlay_delta,
                                "overlay boundaries for this delta/t");
  hm->add_option("--output", output, "P6 image path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      nhchain::SweepSpec spec = nhchain::sweep_from_keys(
          merge_config(config_path, overrides), "generate config");
      nhchain::GenerateStats stats = nhchain::cmd_generate(spec, output);
      std::printf("wrote %s: %d points, %d invalid\n", output.c_str(),
                  stats.total, stats.invalid);
    } else if (tr->parsed()) {
      nhchain::Task task = nhchain::task_from_name(task_name);
      if (features != "two_point" && features != "all")
        throw std::runtime_error("--features must be two_point|all");
      nhchain::TrainConfig cfg = nhchain::train_config_from_keys(
          merge_config(config_path, overrides), "train config");
      if (curve_path.empty()) curve_path = model_path + ".curve.csv";
      nhchain::TrainOutcome outcome =
          nhchain::cmd_train(dataset, task, features == "two_point", cfg,
                             model_path, curve_path);
      std::printf("wrote %s: %u epochs, val loss %.6g\n", model_path.c_str(),
                  outcome.model.meta.epochs_run,
                  outcome.model.meta.final_val_loss);
    } else if (pr->parsed()) {
      nhchain::PredictSummary s =
          nhchain::cmd_predict(model_path, dataset, output);
      if (s.accuracy == s.accuracy)
        std::printf("wrote %s: %d cells, accuracy %.4f\n", output.c_str(),
                    s.total, s.accuracy);
      else
        std::printf("wrote %s: %d cells, mae %.6g\n", output.c_str(), s.total,
                    s.mae);
    } else if (df->parsed()) {
      nhchain::DiffMode mode;
      if (mode_name == "signed") mode = nhchain::DiffMode::Signed;
      else if (mode_name == "disagree") mode = nhchain::DiffMode::Disagree;
      else throw std::runtime_error("--mode must be signed|disagree");
      nhchain::cmd_diff(grid_a, grid_b, column, mode, output);
      std::printf("wrote %s\n", output.c_str());
    } else if (bd->parsed()) {
      nhchain::cmd_boundaries(eta_min, eta_max, delta_over_t, resolution,
                              output);
      std::printf("wrote %s\n", output.c_str());
    } else if (hm->parsed()) {
      if (*lo_opt) hm_opts.lo = hm_lo;
      if (*hi_opt) hm_opts.hi = hm_hi;
      if (*ov_opt) hm_opts.overlay_delta_over_t = overlay_delta;
      nhchain::cmd_heatmap(grid_a, hm_opts, output);
      std::printf("wrote %s\n", output.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
