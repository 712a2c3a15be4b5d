#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctmclearn/likelihood.hpp"
#include "ctmclearn/models.hpp"
#include "ctmclearn/optimizer.hpp"
#include "ctmclearn/simulator.hpp"

namespace ctmclearn {

inline constexpr const char* kVersion = "0.1.0";

// Steady-state mass on the failure states of Q(load, theta).
double predict_failure_prob(const ParametricModel& model, const Vector& theta,
                            double load, const std::vector<int>& failure_states,
                            const Relaxation* relax = nullptr,
                            double slack = kDefaultSlack);

struct EvalRow {
  double load = 0.0;
  double predicted = 0.0;
  double truth = 0.0;
};

struct EvalReport {
  double mape = 0.0;  // mean |predicted - truth| / truth (a ratio, not a %)
  double mse = 0.0;
  std::vector<EvalRow> per_window;
  long mape_excluded = 0;  // zero-truth rows, dropped from mape only
  std::vector<std::string> notes;
};

// Compares predictions at theta_hat against (load, true failure probability)
// rows. Zero-truth rows are excluded from MAPE with a note and kept in MSE.
EvalReport evaluate(const ParametricModel& model, const Vector& theta_hat,
                    const std::vector<std::pair<double, double>>& truth,
                    const std::vector<int>& failure_states,
                    const Relaxation* relax = nullptr,
                    double slack = kDefaultSlack);

struct SimulateSection {
  int windows = 50;
  double duration = 1.0;
  double load_min = 1.0;
  double load_max = 2.0;
  std::uint64_t seed = 0;
  Vector theta_star;
};

struct EvaluateSection {
  int windows = 50;
  double load_min = 1.0;
  double load_max = 2.0;
  std::uint64_t seed = 0;
  std::vector<int> failure_states;  // empty -> model default
  int replicates = 1;
};

struct SweepSection {
  std::string parameter;  // one of: p, eta0, epochs, levels, decay, alpha
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ParametricModel model;
  SimulateSection simulate;
  std::vector<int> observed_states;
  OptimizerConfig optimizer;
  EvaluateSection evaluate;
  std::optional<SweepSection> sweep;
};

// Strict parser: unknown keys anywhere raise ConfigError with the field path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Newline-delimited window records preceded by one '#' header naming the
// model, ground truth, observed set and seed. Loads are written losslessly.
void write_dataset(const std::filesystem::path& path,
                   const std::vector<ObservationWindow>& windows,
                   const ExperimentConfig& cfg);
std::vector<ObservationWindow> read_dataset(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<EpochRecord>& trajectory);

// FNV-1a over the raw config text, hex-encoded; pins the manifest to it.
std::string config_hash(const std::string& text);

struct ReplicateResult {
  Vector theta_hat;
  EvalReport report;
  std::vector<std::string> warnings;
  double final_train_nll = 0.0;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<ReplicateResult> replicates;
  double mean_mape = 0.0;
  double mean_mse = 0.0;
  std::optional<double> mape_ci95;  // absent with a single replicate
  std::optional<double> mse_ci95;
  Vector theta_hat_mean;
};

// generate -> fit -> evaluate, replicated under derived seeds. Writes
// dataset_r<i>.txt, trajectory_r<i>.csv, report.json and manifest.json into
// out_dir. track_test_metrics controls the per-epoch test columns.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         const std::string& config_text, bool quiet = false,
                         bool track_test_metrics = true);

// One run_experiment per sweep value in out_dir/<parameter>=<value>, plus a
// sweep_summary.json.
std::vector<RunResult> run_sweep(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 const std::string& config_text,
                                 bool quiet = false);

// Shared test protocol: loads drawn once from the evaluate section, truths
// solved exactly at theta_star.
std::vector<std::pair<double, double>> ground_truth_rows(
    const ExperimentConfig& cfg);

// Train-NLL model selection over the pinned eta0 grid {1e-3, 1e-2, 1e-1}.
double select_eta0(const std::vector<ObservationWindow>& windows,
                   const ParametricModel& model, const ObservedStateSet& observed,
                   OptimizerConfig cfg, int probe_epochs);

}  // namespace ctmclearn
