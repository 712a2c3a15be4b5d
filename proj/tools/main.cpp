#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctmclearn/errors.hpp"
#include "ctmclearn/harness.hpp"
#include "ctmclearn/rng.hpp"

namespace {

using namespace ctmclearn;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path resolve_out_dir(const std::string& flag,
                                      const std::string& name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CTMCLEARN_OUT_DIR"))
    return std::filesystem::path(env) / name;
  return std::filesystem::path("runs") / name;
}

Vector parse_theta_csv(const std::string& text, Index expected) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--theta: '" + item + "' is not a number");
    }
  }
  if (static_cast<Index>(values.size()) != expected)
    throw ConfigError("--theta needs " + std::to_string(expected) +
                      " comma-separated values");
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learn hidden CTMC rates from aggregate steady-state counts"};
  app.require_subcommand(1);

  std::string config_path, out_flag, theta_csv;
  std::uint64_t seed = 0;
  bool quiet = false;
  std::vector<CLI::Option*> seed_opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", out_flag,
                    "output directory (default: $CTMCLEARN_OUT_DIR/<name> or "
                    "runs/<name>)");
    seed_opts.push_back(
        sub->add_option("-s,--seed", seed, "override every base seed"));
    sub->add_flag("-q,--quiet", quiet, "suppress progress output");
    return sub;
  };

  auto* cmd_simulate =
      add_common(app.add_subcommand("simulate", "generate a training dataset"));
  auto* cmd_fit =
      add_common(app.add_subcommand("fit", "simulate and fit one replicate"));
  auto* cmd_evaluate = add_common(app.add_subcommand(
      "evaluate", "score given parameters on the test protocol"));
  cmd_evaluate->add_option("--theta", theta_csv,
                           "comma-separated parameter values to score")
      ->required();
  auto* cmd_run = add_common(
      app.add_subcommand("run", "full pipeline with replicates and reports"));
  auto* cmd_sweep = add_common(
      app.add_subcommand("sweep", "run once per value of the sweep parameter"));

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string config_text = read_text(config_path);
    ExperimentConfig cfg = parse_config(config_text);
    if (cfg.name == "experiment")
      cfg.name = std::filesystem::path(config_path).stem().string();
    const bool seed_given =
        std::any_of(seed_opts.begin(), seed_opts.end(),
                    [](const CLI::Option* o) { return o->count() > 0; });
    if (seed_given) {
      cfg.simulate.seed = Rng::derive_seed(seed, 0);
      cfg.optimizer.seed = Rng::derive_seed(seed, 1);
      cfg.evaluate.seed = Rng::derive_seed(seed, 2);
    }
    const std::filesystem::path out_dir = resolve_out_dir(out_flag, cfg.name);
    std::filesystem::create_directories(out_dir);
    const ObservedStateSet observed(cfg.observed_states, cfg.model.state_count());

    if (app.got_subcommand(cmd_simulate) || app.got_subcommand(cmd_fit)) {
      DatasetSpec spec;
      spec.windows = cfg.simulate.windows;
      spec.duration = cfg.simulate.duration;
      spec.load_min = cfg.simulate.load_min;
      spec.load_max = cfg.simulate.load_max;
      spec.seed = Rng::derive_seed(cfg.simulate.seed, 0);
      spec.slack = cfg.optimizer.slack;
      const auto windows =
          generate_dataset(cfg.model, cfg.simulate.theta_star, observed, spec);
      write_dataset(out_dir / "dataset_r0.txt", windows, cfg);
      if (!quiet)
        std::printf("[%s] wrote %zu windows -> %s\n", cfg.name.c_str(),
                    windows.size(), (out_dir / "dataset_r0.txt").c_str());
      if (app.got_subcommand(cmd_fit)) {
        OptimizerConfig opt = cfg.optimizer;
        opt.seed = Rng::derive_seed(cfg.optimizer.seed, 0);
        const FitResult fitted = fit(windows, cfg.model, observed, opt, nullptr);
        write_trajectory_csv(out_dir / "trajectory_r0.csv", fitted.trajectory);
        nlohmann::json out;
        out["theta_hat"] = std::vector<double>(
            fitted.theta_hat.data(),
            fitted.theta_hat.data() + fitted.theta_hat.size());
        out["final_train_nll"] = fitted.trajectory.back().train_nll;
        out["spectral_gap_min"] = fitted.spectral_gap_min;
        out["spectral_gap_max"] = fitted.spectral_gap_max;
        out["warnings"] = fitted.warnings;
        std::ofstream file(out_dir / "fit.json");
        if (!file) throw Error("cannot write fit.json");
        file << out.dump(2) << "\n";
        if (!quiet) {
          std::string theta_txt;
          for (Index k = 0; k < fitted.theta_hat.size(); ++k)
            theta_txt += (k ? "," : "") + fmt6(fitted.theta_hat(k));
          std::printf("[%s] theta_hat=(%s) train_nll=%s\n", cfg.name.c_str(),
                      theta_txt.c_str(),
                      fmt6(fitted.trajectory.back().train_nll).c_str());
        }
      }
    } else if (app.got_subcommand(cmd_evaluate)) {
      const Vector theta = parse_theta_csv(theta_csv, cfg.model.param_count());
      const auto truth = ground_truth_rows(cfg);
      std::vector<int> fail = cfg.evaluate.failure_states.empty()
                                  ? cfg.model.default_failure_states()
                                  : cfg.evaluate.failure_states;
      const EvalReport report = evaluate(cfg.model, theta, truth, fail, nullptr,
                                         cfg.optimizer.slack);
      nlohmann::json out;
      out["mape"] = report.mape;
      out["mse"] = report.mse;
      out["mape_excluded"] = report.mape_excluded;
      out["notes"] = report.notes;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : report.per_window)
        rows.push_back({row.load, row.predicted, row.truth});
      out["per_window"] = rows;
      std::ofstream file(out_dir / "eval.json");
      if (!file) throw Error("cannot write eval.json");
      file << out.dump(2) << "\n";
      std::printf("mape=%s mse=%s\n", fmt6(report.mape).c_str(),
                  fmt6(report.mse).c_str());
    } else if (app.got_subcommand(cmd_run)) {
      run_experiment(cfg, out_dir, config_text, quiet);
    } else if (app.got_subcommand(cmd_sweep)) {
      run_sweep(cfg, out_dir, config_text, quiet);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
