#include "ctmclearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ctmclearn/ctmc.hpp"
#include "ctmclearn/errors.hpp"
#include "ctmclearn/rng.hpp"

namespace ctmclearn {

using nlohmann::json;

double predict_failure_prob(const ParametricModel& model, const Vector& theta,
                            double load, const std::vector<int>& failure_states,
                            const Relaxation* relax, double slack) {
  if (failure_states.empty())
    throw InvariantViolation("failure-state set must be non-empty");
  RateMatrix q = build_rate_matrix(model, load, theta);
  if (relax) q = apply_relaxation(q, model, *relax);
  const SteadyState steady = steady_state(uniformize(q, slack));
  double mass = 0.0;
  for (int s : failure_states) {
    if (s < 0 || s >= model.state_count())
      throw IndexOutOfRange("failure state " + std::to_string(s) +
                            " outside the state space");
    mass += steady.pi(s);
  }
  return mass;
}

EvalReport evaluate(const ParametricModel& model, const Vector& theta_hat,
                    const std::vector<std::pair<double, double>>& truth,
                    const std::vector<int>& failure_states,
                    const Relaxation* relax, double slack) {
  if (truth.empty()) throw InvariantViolation("evaluate needs at least one row");
  EvalReport report;
  double abs_rel = 0.0, sq = 0.0;
  long mape_rows = 0;
  for (const auto& [load, true_prob] : truth) {
    const double pred =
        predict_failure_prob(model, theta_hat, load, failure_states, relax, slack);
    report.per_window.push_back({load, pred, true_prob});
    sq += (pred - true_prob) * (pred - true_prob);
    if (true_prob > 0.0) {
      abs_rel += std::abs(pred - true_prob) / true_prob;
      ++mape_rows;
    } else {
      ++report.mape_excluded;
    }
  }
  if (mape_rows == 0)
    throw ZeroTruth("every ground-truth probability is zero; MAPE undefined");
  if (report.mape_excluded > 0)
    report.notes.push_back(std::to_string(report.mape_excluded) +
                           " zero-truth row(s) excluded from MAPE");
  report.mape = abs_rel / static_cast<double>(mape_rows);
  report.mse = sq / static_cast<double>(truth.size());
  return report;
}

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown key " + path + "." + it.key());
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key " + path + "." + key);
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + " must be an integer");
  return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0))
    throw ConfigError(path + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + " must be a string");
  return v.get<std::string>();
}

std::vector<int> as_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + " must be an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_int(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vector as_real_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + " must be an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Index>(i)) =
        as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

ParametricModel parse_model(const json& sec) {
  check_keys(sec, "model", {"kind", "capacity", "servers", "bands"});
  const std::string kind = as_string(require(sec, "kind", "model"), "model.kind");
  const int capacity = as_int(require(sec, "capacity", "model"), "model.capacity");
  try {
    if (kind == "mm1k") return ParametricModel::mm1k(capacity);
    if (kind == "mmmk")
      return ParametricModel::mmmk(
          capacity, as_int(require(sec, "servers", "model"), "model.servers"));
    if (kind == "mmmultiplek")
      return ParametricModel::mm_multiple_k(
          capacity, as_int(require(sec, "bands", "model"), "model.bands"));
    if (kind == "uppertriangular") return ParametricModel::upper_triangular(capacity);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("model.kind must be one of mm1k, mmmk, mmmultiplek, "
                    "uppertriangular");
}

const char* kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::MM1K: return "mm1k";
    case ModelKind::MMmK: return "mmmk";
    case ModelKind::MMMultipleK: return "mmmultiplek";
    case ModelKind::UpperTriangular: return "uppertriangular";
  }
  return "unknown";
}

std::vector<int> effective_failure_states(const ExperimentConfig& cfg) {
  return cfg.evaluate.failure_states.empty()
             ? cfg.model.default_failure_states()
             : cfg.evaluate.failure_states;
}

void wrap_stage(const char* stage, const std::function<void()>& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw EngineFailure(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  check_keys(root, "config", {"name", "model", "simulate", "observe",
                              "optimizer", "evaluate", "sweep"});

  ExperimentConfig cfg;
  if (auto it = root.find("name"); it != root.end())
    cfg.name = as_string(*it, "name");
  cfg.model = parse_model(require(root, "model", "config"));

  {
    const json& sec = require(root, "simulate", "config");
    check_keys(sec, "simulate", {"windows", "duration", "load_min", "load_max",
                                 "seed", "theta_star"});
    auto& s = cfg.simulate;
    if (auto it = sec.find("windows"); it != sec.end())
      s.windows = as_int(*it, "simulate.windows");
    if (auto it = sec.find("duration"); it != sec.end())
      s.duration = as_number(*it, "simulate.duration");
    s.load_min = as_number(require(sec, "load_min", "simulate"), "simulate.load_min");
    s.load_max = as_number(require(sec, "load_max", "simulate"), "simulate.load_max");
    if (auto it = sec.find("seed"); it != sec.end())
      s.seed = as_seed(*it, "simulate.seed");
    s.theta_star =
        as_real_list(require(sec, "theta_star", "simulate"), "simulate.theta_star");
    if (s.theta_star.size() != cfg.model.param_count())
      throw ConfigError("simulate.theta_star must have " +
                        std::to_string(cfg.model.param_count()) + " entries");
    if (s.windows <= 0) throw ConfigError("simulate.windows must be positive");
    if (!(s.duration > 0.0)) throw ConfigError("simulate.duration must be positive");
    if (!(s.load_min > 0.0) || s.load_max < s.load_min)
      throw ConfigError("simulate load range must satisfy 0 < min <= max");
  }

  {
    const json& sec = require(root, "observe", "config");
    check_keys(sec, "observe", {"states"});
    cfg.observed_states =
        as_int_list(require(sec, "states", "observe"), "observe.states");
    try {
      ObservedStateSet check(cfg.observed_states, cfg.model.state_count());
    } catch (const Error& e) {
      throw ConfigError(std::string("observe.states: ") + e.what());
    }
  }

  {
    const json& sec = require(root, "optimizer", "config");
    check_keys(sec, "optimizer",
               {"engine", "epochs", "eta0", "schedule", "decay", "p", "levels",
                "eps_floor", "alpha", "seed", "slack", "theta0"});
    auto& o = cfg.optimizer;
    if (auto it = sec.find("engine"); it != sec.end()) {
      const std::string engine = as_string(*it, "optimizer.engine");
      if (engine == "infsgd")
        o.engine = Engine::InfSgd;
      else if (engine == "dcbptt")
        o.engine = Engine::DcBptt;
      else
        throw ConfigError("optimizer.engine must be infsgd or dcbptt");
    }
    if (auto it = sec.find("epochs"); it != sec.end())
      o.epochs = as_int(*it, "optimizer.epochs");
    if (auto it = sec.find("eta0"); it != sec.end())
      o.eta0 = as_number(*it, "optimizer.eta0");
    if (auto it = sec.find("schedule"); it != sec.end()) {
      const std::string schedule = as_string(*it, "optimizer.schedule");
      if (schedule == "constant")
        o.schedule = Schedule::Constant;
      else if (schedule == "inverse_t")
        o.schedule = Schedule::InverseT;
      else
        throw ConfigError("optimizer.schedule must be constant or inverse_t");
    }
    if (auto it = sec.find("decay"); it != sec.end())
      o.decay = as_number(*it, "optimizer.decay");
    if (auto it = sec.find("p"); it != sec.end())
      o.p = as_number(*it, "optimizer.p");
    if (auto it = sec.find("levels"); it != sec.end())
      o.levels = as_int(*it, "optimizer.levels");
    if (auto it = sec.find("eps_floor"); it != sec.end())
      o.eps_floor = as_number(*it, "optimizer.eps_floor");
    if (auto it = sec.find("alpha"); it != sec.end() && !it->is_null())
      o.alpha = as_number(*it, "optimizer.alpha");
    if (auto it = sec.find("seed"); it != sec.end())
      o.seed = as_seed(*it, "optimizer.seed");
    if (auto it = sec.find("slack"); it != sec.end())
      o.slack = as_number(*it, "optimizer.slack");
    if (auto it = sec.find("theta0"); it != sec.end() && !it->is_null()) {
      o.theta0 = as_real_list(*it, "optimizer.theta0");
      if (o.theta0->size() != cfg.model.param_count())
        throw ConfigError("optimizer.theta0 must have " +
                          std::to_string(cfg.model.param_count()) +
                          " entries");
    }
    if (o.epochs < 0) throw ConfigError("optimizer.epochs must be nonnegative");
    if (!(o.eta0 > 0.0)) throw ConfigError("optimizer.eta0 must be positive");
  }

  {
    const json& sec = require(root, "evaluate", "config");
    check_keys(sec, "evaluate", {"windows", "load_min", "load_max", "seed",
                                 "failure_states", "replicates"});
    auto& e = cfg.evaluate;
    if (auto it = sec.find("windows"); it != sec.end())
      e.windows = as_int(*it, "evaluate.windows");
    e.load_min = as_number(require(sec, "load_min", "evaluate"), "evaluate.load_min");
    e.load_max = as_number(require(sec, "load_max", "evaluate"), "evaluate.load_max");
    if (auto it = sec.find("seed"); it != sec.end())
      e.seed = as_seed(*it, "evaluate.seed");
    if (auto it = sec.find("failure_states"); it != sec.end())
      e.failure_states = as_int_list(*it, "evaluate.failure_states");
    if (auto it = sec.find("replicates"); it != sec.end())
      e.replicates = as_int(*it, "evaluate.replicates");
    for (int s : e.failure_states)
      if (s < 0 || s >= cfg.model.state_count())
        throw ConfigError("evaluate.failure_states entry outside the state space");
    if (e.windows <= 0) throw ConfigError("evaluate.windows must be positive");
    if (!(e.load_min > 0.0) || e.load_max < e.load_min)
      throw ConfigError("evaluate load range must satisfy 0 < min <= max");
    if (e.replicates < 1) throw ConfigError("evaluate.replicates must be >= 1");
  }

  if (auto it = root.find("sweep"); it != root.end() && !it->is_null()) {
    const json& sec = *it;
    check_keys(sec, "sweep", {"parameter", "values"});
    SweepSection sweep;
    sweep.parameter =
        as_string(require(sec, "parameter", "sweep"), "sweep.parameter");
    static const char* allowed[] = {"p", "eta0", "epochs", "levels", "decay",
                                    "alpha"};
    if (std::find_if(std::begin(allowed), std::end(allowed),
                     [&](const char* a) { return sweep.parameter == a; }) ==
        std::end(allowed))
      throw ConfigError("sweep.parameter must be one of p, eta0, epochs, "
                        "levels, decay, alpha");
    const Vector vals =
        as_real_list(require(sec, "values", "sweep"), "sweep.values");
    if (vals.size() == 0) throw ConfigError("sweep.values must be non-empty");
    sweep.values.assign(vals.data(), vals.data() + vals.size());
    cfg.sweep = std::move(sweep);
  }

  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig cfg = parse_config(buffer.str());
  if (cfg.name == "experiment") cfg.name = path.stem().string();
  return cfg;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<ObservationWindow>& windows,
                   const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file " + path.string());
  out << "# model=" << kind_name(cfg.model.kind)
      << " capacity=" << cfg.model.capacity << " servers=" << cfg.model.servers
      << " bands=" << cfg.model.bands << " theta_star=";
  for (Index k = 0; k < cfg.simulate.theta_star.size(); ++k)
    out << (k ? "," : "") << fmt_full(cfg.simulate.theta_star(k));
  out << " observed=";
  for (std::size_t i = 0; i < cfg.observed_states.size(); ++i)
    out << (i ? "," : "") << cfg.observed_states[i];
  out << " seed=" << cfg.simulate.seed << "\n";
  for (std::size_t w = 0; w < windows.size(); ++w) {
    out << w << ' ' << fmt_full(windows[w].load);
    for (const auto& [state, count] : windows[w].counts)
      out << ' ' << state << ':' << count;
    out << "\n";
  }
  if (!out) throw Error("failed writing dataset file " + path.string());
}

std::vector<ObservationWindow> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw ConfigError("dataset file must start with a '#' header line");
  std::vector<ObservationWindow> windows;
  std::size_t expected_id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t id = 0;
    ObservationWindow win;
    if (!(row >> id >> win.load))
      throw ConfigError("dataset record " + std::to_string(expected_id) +
                        ": expected '<id> <load>'");
    if (id != expected_id)
      throw ConfigError("dataset records must be numbered consecutively from 0");
    std::string pair;
    while (row >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == pair.size())
        throw ConfigError("dataset record " + std::to_string(id) +
                          ": malformed state:count pair '" + pair + "'");
      try {
        const int state = std::stoi(pair.substr(0, colon));
        const long count = std::stol(pair.substr(colon + 1));
        win.counts.emplace_back(state, count);
      } catch (const std::exception&) {
        throw ConfigError("dataset record " + std::to_string(id) +
                          ": malformed state:count pair '" + pair + "'");
      }
    }
    windows.push_back(std::move(win));
    ++expected_id;
  }
  if (windows.empty()) throw ConfigError("dataset file has no records");
  return windows;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<EpochRecord>& trajectory) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trajectory file " + path.string());
  out << "epoch,train_nll,test_mape,test_mse\n";
  for (const auto& row : trajectory) {
    out << row.epoch << ',' << fmt_full(row.train_nll) << ',';
    if (row.test_mape) out << fmt_full(*row.test_mape);
    out << ',';
    if (row.test_mse) out << fmt_full(*row.test_mse);
    out << "\n";
  }
  if (!out) throw Error("failed writing trajectory file " + path.string());
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::pair<double, double>> ground_truth_rows(
    const ExperimentConfig& cfg) {
  Rng rng(cfg.evaluate.seed);
  const std::vector<int> fail = effective_failure_states(cfg);
  std::vector<std::pair<double, double>> rows;
  rows.reserve(static_cast<std::size_t>(cfg.evaluate.windows));
  for (int i = 0; i < cfg.evaluate.windows; ++i) {
    const double load = rng.uniform(cfg.evaluate.load_min, cfg.evaluate.load_max);
    rows.emplace_back(load, predict_failure_prob(cfg.model, cfg.simulate.theta_star,
                                                 load, fail, nullptr,
                                                 cfg.optimizer.slack));
  }
  return rows;
}

RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         const std::string& config_text, bool quiet,
                         bool track_test_metrics) {
  std::filesystem::create_directories(out_dir);
  const ObservedStateSet observed(cfg.observed_states, cfg.model.state_count());
  const std::vector<int> fail = effective_failure_states(cfg);
  std::vector<std::pair<double, double>> truth;
  wrap_stage("evaluate (ground truth)", [&] { truth = ground_truth_rows(cfg); });

  RunResult result;
  result.dir = out_dir;
  json report;
  report["name"] = cfg.name;
  report["model"] = kind_name(cfg.model.kind);
  report["replicates"] = json::array();

  std::vector<std::string> artifacts;
  for (int r = 0; r < cfg.evaluate.replicates; ++r) {
    const std::string tag = "_r" + std::to_string(r);
    DatasetSpec spec;
    spec.windows = cfg.simulate.windows;
    spec.duration = cfg.simulate.duration;
    spec.load_min = cfg.simulate.load_min;
    spec.load_max = cfg.simulate.load_max;
    spec.seed = Rng::derive_seed(cfg.simulate.seed, static_cast<std::uint64_t>(r));
    spec.slack = cfg.optimizer.slack;

    std::vector<ObservationWindow> windows;
    wrap_stage("simulate", [&] {
      windows = generate_dataset(cfg.model, cfg.simulate.theta_star, observed, spec);
    });
    const std::string dataset_name = "dataset" + tag + ".txt";
    write_dataset(out_dir / dataset_name, windows, cfg);
    artifacts.push_back(dataset_name);

    OptimizerConfig opt = cfg.optimizer;
    opt.seed = Rng::derive_seed(cfg.optimizer.seed, static_cast<std::uint64_t>(r));
    EvalHook hook;
    if (track_test_metrics)
      hook = [&](const Vector& th, const Relaxation* rx) {
        const EvalReport er =
            evaluate(cfg.model, th, truth, fail, rx, cfg.optimizer.slack);
        return std::make_pair(er.mape, er.mse);
      };

    FitResult fitted;
    wrap_stage("fit", [&] { fitted = fit(windows, cfg.model, observed, opt, hook); });
    const std::string traj_name = "trajectory" + tag + ".csv";
    write_trajectory_csv(out_dir / traj_name, fitted.trajectory);
    artifacts.push_back(traj_name);

    ReplicateResult rep;
    rep.theta_hat = fitted.theta_hat;
    rep.warnings = fitted.warnings;
    rep.final_train_nll = fitted.trajectory.back().train_nll;
    const Relaxation* rx = fitted.relaxation ? &*fitted.relaxation : nullptr;
    wrap_stage("evaluate", [&] {
      rep.report = evaluate(cfg.model, rep.theta_hat, truth, fail, rx,
                            cfg.optimizer.slack);
    });

    json jrep;
    jrep["theta_hat"] = std::vector<double>(
        rep.theta_hat.data(), rep.theta_hat.data() + rep.theta_hat.size());
    jrep["mape"] = rep.report.mape;
    jrep["mse"] = rep.report.mse;
    jrep["final_train_nll"] = rep.final_train_nll;
    jrep["warnings"] = rep.warnings;
    jrep["notes"] = rep.report.notes;
    jrep["mape_excluded"] = rep.report.mape_excluded;
    json rows = json::array();
    for (const auto& row : rep.report.per_window)
      rows.push_back({row.load, row.predicted, row.truth});
    jrep["per_window"] = rows;
    report["replicates"].push_back(std::move(jrep));

    if (!quiet) {
      std::string theta_txt;
      for (Index k = 0; k < rep.theta_hat.size(); ++k)
        theta_txt += (k ? "," : "") + fmt6(rep.theta_hat(k));
      std::printf("[%s] replicate %d: theta_hat=(%s) mape=%s mse=%s\n",
                  cfg.name.c_str(), r, theta_txt.c_str(),
                  fmt6(rep.report.mape).c_str(), fmt6(rep.report.mse).c_str());
    }
    result.replicates.push_back(std::move(rep));
  }

  const auto n_rep = static_cast<double>(result.replicates.size());
  result.theta_hat_mean = Vector::Zero(cfg.model.param_count());
  for (const auto& rep : result.replicates) {
    result.mean_mape += rep.report.mape / n_rep;
    result.mean_mse += rep.report.mse / n_rep;
    result.theta_hat_mean += rep.theta_hat / n_rep;
  }
  if (result.replicates.size() > 1) {
    double var_mape = 0.0, var_mse = 0.0;
    for (const auto& rep : result.replicates) {
      var_mape += std::pow(rep.report.mape - result.mean_mape, 2) / (n_rep - 1);
      var_mse += std::pow(rep.report.mse - result.mean_mse, 2) / (n_rep - 1);
    }
    result.mape_ci95 = 1.96 * std::sqrt(var_mape / n_rep);
    result.mse_ci95 = 1.96 * std::sqrt(var_mse / n_rep);
  }

  report["mean_mape"] = result.mean_mape;
  report["mean_mse"] = result.mean_mse;
  if (result.mape_ci95) report["mape_ci95"] = *result.mape_ci95;
  if (result.mse_ci95) report["mse_ci95"] = *result.mse_ci95;
  report["theta_hat_mean"] = std::vector<double>(
      result.theta_hat_mean.data(),
      result.theta_hat_mean.data() + result.theta_hat_mean.size());
  {
    std::ofstream out(out_dir / "report.json");
    if (!out) throw Error("cannot write report.json");
    out << report.dump(2) << "\n";
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["name"] = cfg.name;
  manifest["config_hash"] = config_hash(config_text);
  manifest["seeds"] = {{"simulate", cfg.simulate.seed},
                       {"optimizer", cfg.optimizer.seed},
                       {"evaluate", cfg.evaluate.seed}};
  manifest["replicates"] = cfg.evaluate.replicates;
  artifacts.push_back("report.json");
  manifest["artifacts"] = artifacts;
  {
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw Error("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
  }

  if (!quiet)
    std::printf("[%s] mean mape=%s mean mse=%s (%d replicate(s)) -> %s\n",
                cfg.name.c_str(), fmt6(result.mean_mape).c_str(),
                fmt6(result.mean_mse).c_str(), cfg.evaluate.replicates,
                out_dir.string().c_str());
  return result;
}

std::vector<RunResult> run_sweep(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 const std::string& config_text, bool quiet) {
  if (!cfg.sweep) throw ConfigError("config has no sweep section");
  std::filesystem::create_directories(out_dir);
  std::vector<RunResult> results;
  json summary = json::array();
  for (double value : cfg.sweep->values) {
    ExperimentConfig point = cfg;
    auto& o = point.optimizer;
    const std::string& parameter = cfg.sweep->parameter;
    if (parameter == "p")
      o.p = value;
    else if (parameter == "eta0")
      o.eta0 = value;
    else if (parameter == "epochs")
      o.epochs = static_cast<int>(value);
    else if (parameter == "levels")
      o.levels = static_cast<int>(value);
    else if (parameter == "decay")
      o.decay = value;
    else if (parameter == "alpha")
      o.alpha = value;
    const std::string leaf = parameter + "=" + fmt6(value);
    point.name = cfg.name + "/" + leaf;
    results.push_back(run_experiment(point, out_dir / leaf, config_text, quiet));
    summary.push_back({{"value", value},
                       {"dir", leaf},
                       {"mean_mape", results.back().mean_mape},
                       {"mean_mse", results.back().mean_mse}});
  }
  std::ofstream out(out_dir / "sweep_summary.json");
  if (!out) throw Error("cannot write sweep_summary.json");
  out << summary.dump(2) << "\n";
  return results;
}

double select_eta0(const std::vector<ObservationWindow>& windows,
                   const ParametricModel& model, const ObservedStateSet& observed,
                   OptimizerConfig cfg, int probe_epochs) {
  double best = 1e-3;
  double best_nll = std::numeric_limits<double>::infinity();
  cfg.epochs = probe_epochs;
  for (double eta0 : {1e-3, 1e-2, 1e-1}) {
    cfg.eta0 = eta0;
    const FitResult probe = fit(windows, model, observed, cfg, nullptr);
    const double nll = probe.trajectory.back().train_nll;
    if (nll < best_nll) {
      best_nll = nll;
      best = eta0;
    }
  }
  return best;
}

}  // namespace ctmclearn
