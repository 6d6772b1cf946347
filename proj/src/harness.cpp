#include "iwsd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "iwsd/checks.hpp"

namespace iwsd {

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

double auto_r0(LossKind kind) {
  return kind == LossKind::kSpo ? 5.0 : 20.0;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  try {
    config.scenario_config = j.at("scenario");
    if (j.contains("methods") && j.at("methods").is_string() &&
        j.at("methods") == "all") {
      config.methods = MethodSpec::all();
    } else if (j.contains("methods")) {
      for (const auto& name : j.at("methods")) {
        config.methods.push_back(MethodSpec::parse(name.get<std::string>()));
      }
    } else {
      config.methods = MethodSpec::all();
    }
    config.trials = j.value("trials", 1);
    config.horizon = j.contains("T") ? j.at("T").get<int>() : j.value("horizon", 1);
    config.delta = j.value("delta", 0.1);
    if (j.contains("r0") && !j.at("r0").is_string()) {
      if (j.at("r0").is_number()) {
        for (const MethodSpec& m : config.methods) {
          config.r0[m.name()] = j.at("r0").get<double>();
        }
      } else {
        for (const auto& [name, value] : j.at("r0").items()) {
          config.r0[name] = value.get<double>();
        }
      }
    }
    config.base_seed = j.value("seed", 1);
    config.parallelism = j.value("parallelism", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (config.methods.empty()) throw ConfigError("no methods selected");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  for (const auto& [name, value] : config.r0) {
    if (!(value > 0.0)) throw ConfigError("r0 for " + name + " must be > 0");
  }
  return config;
}

double ExperimentConfig::r0_for(const MethodSpec& method) const {
  const auto it = r0.find(method.name());
  if (it != r0.end()) return it->second;
  return auto_r0(method.elimination_loss);
}

namespace {

struct MemberMetrics {
  std::vector<double> excess;  // exact excess risk vs the class optimum
  std::vector<double> l2;      // population squared loss
  std::vector<double> pct;     // percentage SPO risk vs the class optimum
  std::vector<int> optimal;    // H*
};

double population_l2(const Hypothesis& h, const Scenario& scenario) {
  double total = 0.0;
  for (int i = 0; i < scenario.pool.size(); ++i) {
    const Vec& pred = h.at(i);
    total += scenario.pool.mu[static_cast<std::size_t>(i)] *
             (squared_norm(pred) -
              2.0 * dot(pred, scenario.conditional_means[static_cast<std::size_t>(i)]) +
              scenario.conditional_sq_norms[static_cast<std::size_t>(i)]);
  }
  return total;
}

MemberMetrics member_metrics(const Scenario& scenario) {
  const HypothesisClass& cls = scenario.hypotheses;
  MemberMetrics metrics;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (scenario.has_conditional_means()) {
    metrics.optimal = optimal_members(cls, scenario);
    const Hypothesis& star = cls.member(metrics.optimal.front());
    for (int i = 0; i < cls.size(); ++i) {
      metrics.excess.push_back(exact_excess_risk(cls.member(i), star, scenario));
      metrics.l2.push_back(population_l2(cls.member(i), scenario));
    }
  } else {
    metrics.excess.assign(static_cast<std::size_t>(cls.size()), nan);
    metrics.l2.assign(static_cast<std::size_t>(cls.size()), nan);
  }
  if (scenario.has_support()) {
    std::vector<double> risks;
    for (int i = 0; i < cls.size(); ++i) {
      risks.push_back(risk_estimate(cls.member(i), scenario, 1, 0).value);
    }
    const double best = *std::min_element(risks.begin(), risks.end());
    for (int i = 0; i < cls.size(); ++i) {
      metrics.pct.push_back(best > 0.0 ? (risks[static_cast<std::size_t>(i)] - best) / best
                                       : nan);
    }
  } else {
    metrics.pct.assign(static_cast<std::size_t>(cls.size()), nan);
  }
  return metrics;
}

TrialMethodResult run_one(const ExperimentConfig& config,
                          const Scenario& scenario, const MemberMetrics& metrics,
                          int trial, int method_index) {
  const MethodSpec method = config.methods[static_cast<std::size_t>(method_index)];
  const std::uint64_t trial_seed =
      derive_seed(config.base_seed, static_cast<std::uint64_t>(trial));
  EngineConfig engine_config;
  engine_config.method = method;
  engine_config.horizon = config.horizon;
  engine_config.r0 = config.r0_for(method);
  engine_config.delta = config.delta;
  engine_config.seed =
      derive_seed(trial_seed, 1000 + static_cast<std::uint64_t>(method_index));
  engine_config.label_seed = derive_seed(trial_seed, 0x7ab31ull);

  Engine engine(engine_config, scenario);
  TrialMethodResult result;
  result.trial = trial;
  result.method = method.name();
  result.rows = engine.run();
  result.stopped = !result.rows.empty() && result.rows.back().stopped;

  // Metrics per iteration; after an early stop the returned hypothesis and
  // its risk persist to the horizon.
  result.excess.reserve(static_cast<std::size_t>(config.horizon));
  int best = result.rows.empty() ? 0 : result.rows.front().best;
  std::size_t row_idx = 0;
  for (int t = 1; t <= config.horizon; ++t) {
    if (row_idx < result.rows.size() && result.rows[row_idx].t == t) {
      best = result.rows[row_idx].best;
      ++row_idx;
    }
    result.excess.push_back(metrics.excess[static_cast<std::size_t>(best)]);
    result.l2.push_back(metrics.l2[static_cast<std::size_t>(best)]);
    result.pct.push_back(metrics.pct[static_cast<std::size_t>(best)]);
  }

  if (!metrics.optimal.empty()) {
    result.elim_success = true;
    for (int h : engine.state().active) {
      if (std::find(metrics.optimal.begin(), metrics.optimal.end(), h) ==
          metrics.optimal.end()) {
        result.elim_success = false;
        break;
      }
    }
  }
  return result;
}

double sample_mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double half_width_95(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Scenario& scenario) {
  const MemberMetrics metrics = member_metrics(scenario);
  const int n_methods = static_cast<int>(config.methods.size());
  ExperimentResult out;
  out.trials.resize(static_cast<std::size_t>(config.trials * n_methods));

  std::atomic<int> next_trial{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const int trial = next_trial.fetch_add(1);
      if (trial >= config.trials) return;
      try {
        for (int mi = 0; mi < n_methods; ++mi) {
          out.trials[static_cast<std::size_t>(trial * n_methods + mi)] =
              run_one(config, scenario, metrics, trial, mi);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min(config.parallelism, config.trials));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (std::thread& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Deterministic fold in (method, t, trial) order.
  for (int mi = 0; mi < n_methods; ++mi) {
    const std::string name = config.methods[static_cast<std::size_t>(mi)].name();
    for (int t = 1; t <= config.horizon; ++t) {
      std::vector<double> excess, l2, pct;
      for (int trial = 0; trial < config.trials; ++trial) {
        const TrialMethodResult& r =
            out.trials[static_cast<std::size_t>(trial * n_methods + mi)];
        excess.push_back(r.excess[static_cast<std::size_t>(t - 1)]);
        l2.push_back(r.l2[static_cast<std::size_t>(t - 1)]);
        pct.push_back(r.pct[static_cast<std::size_t>(t - 1)]);
      }
      const double mean_excess = sample_mean(excess);
      out.aggregate.push_back(AggregateRow{name, t, mean_excess,
                                           half_width_95(excess, mean_excess),
                                           sample_mean(l2), sample_mean(pct)});
    }
    MethodSummary summary;
    summary.method = name;
    summary.final_pct = out.aggregate.back().pct;
    int successes = 0;
    int stops = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      const TrialMethodResult& r =
          out.trials[static_cast<std::size_t>(trial * n_methods + mi)];
      successes += r.elim_success ? 1 : 0;
      stops += r.stopped ? 1 : 0;
    }
    summary.elim_success_freq =
        static_cast<double>(successes) / static_cast<double>(config.trials);
    summary.stopped_freq =
        static_cast<double>(stops) / static_cast<double>(config.trials);
    out.summary.push_back(summary);
  }
  return out;
}

namespace {

std::string field_or_empty(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

}  // namespace

CsvTable trajectory_table(const ExperimentResult& result,
                          const Scenario& scenario) {
  CsvTable table;
  table.header = {"trial",  "method",  "t",
                  "design_id", "n_active", "r_t",
                  "best_id",   "excess_risk_exact", "stopped_flag"};
  for (const TrialMethodResult& r : result.trials) {
    for (const IterationRow& row : r.rows) {
      std::vector<std::string> fields;
      fields.push_back(std::to_string(r.trial));
      fields.push_back(r.method);
      fields.push_back(std::to_string(row.t));
      fields.push_back(row.design >= 0
                           ? scenario.pool.design_ids[static_cast<std::size_t>(row.design)]
                           : std::string());
      fields.push_back(std::to_string(row.n_active));
      fields.push_back(format_double(row.slackness));
      fields.push_back(
          scenario.hypotheses.member(row.best).id);
      fields.push_back(field_or_empty(
          r.excess[static_cast<std::size_t>(row.t - 1)]));
      fields.push_back(row.stopped ? "1" : "0");
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable aggregate_table(const ExperimentResult& result) {
  CsvTable table;
  table.header = {"method", "t",            "mean_excess_risk",
                  "ci95",   "mean_l2_loss", "pct_spo_risk"};
  for (const AggregateRow& row : result.aggregate) {
    table.rows.push_back({row.method, std::to_string(row.t),
                          field_or_empty(row.mean_excess),
                          field_or_empty(row.ci95), field_or_empty(row.mean_l2),
                          field_or_empty(row.pct)});
  }
  return table;
}

CsvTable summary_table(const ExperimentResult& result) {
  CsvTable table;
  table.header = {"method", "final_pct_spo_risk", "elim_success_freq",
                  "stopped_freq"};
  for (const MethodSummary& s : result.summary) {
    table.rows.push_back({s.method, field_or_empty(s.final_pct),
                          format_double(s.elim_success_freq),
                          format_double(s.stopped_freq)});
  }
  return table;
}

CompareResult run_compare(const CompareSpec& spec) {
  if (spec.methods.size() < 2) {
    throw ConfigError("compare needs at least two methods");
  }
  CompareResult out;
  out.table.header = {"cost_ratio",   "method",        "mean_excess_risk",
                      "ci95",         "mean_l2_loss",  "pct_spo_risk",
                      "elim_success_freq"};
  out.ratios.header = {"cost_ratio", "method_a", "method_b", "loss_ratio"};

  std::vector<double> sweep = spec.cost_ratios;
  const bool single = sweep.empty();
  if (single) sweep.push_back(std::numeric_limits<double>::quiet_NaN());

  for (double ratio : sweep) {
    nlohmann::json scenario_config = spec.scenario_config;
    std::string param;
    if (!single) {
      if (scenario_config.value("kind", "") != "cost_sensitive") {
        throw ConfigError("cost-ratio sweep requires a cost_sensitive scenario");
      }
      scenario_config.erase("cost_matrix");
      scenario_config["cost_ratio"] = ratio;
      param = format_double(ratio);
    }
    Scenario scenario = [&]() {
      try {
        return scenario_from_json(scenario_config);
      } catch (const std::exception& e) {
        throw ScenarioError(e.what());
      }
    }();

    ExperimentConfig config;
    config.scenario_config = scenario_config;
    config.methods = spec.methods;
    config.trials = spec.trials;
    config.horizon = spec.horizon;
    config.delta = spec.delta;
    config.r0 = spec.r0;
    config.base_seed = spec.base_seed;
    config.parallelism = spec.parallelism;
    const ExperimentResult result = run_experiment(config, scenario);

    std::vector<double> final_excess;
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const AggregateRow& last =
          result.aggregate[mi * static_cast<std::size_t>(spec.horizon) +
                           static_cast<std::size_t>(spec.horizon - 1)];
      final_excess.push_back(last.mean_excess);
      out.table.rows.push_back(
          {param, last.method, field_or_empty(last.mean_excess),
           field_or_empty(last.ci95), field_or_empty(last.mean_l2),
           field_or_empty(last.pct),
           format_double(result.summary[mi].elim_success_freq)});
    }
    for (std::size_t a = 0; a < spec.methods.size(); ++a) {
      for (std::size_t b = 0; b < spec.methods.size(); ++b) {
        if (a == b) continue;
        std::string value;
        if (final_excess[b] > 0.0) {
          value = format_double(final_excess[a] / final_excess[b]);
        } else if (final_excess[a] == 0.0 && final_excess[b] == 0.0) {
          value = format_double(1.0);
        }
        out.ratios.rows.push_back({param, spec.methods[a].name(),
                                   spec.methods[b].name(), value});
      }
    }
  }
  return out;
}

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

int report_error(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << "\n";
  return code;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const IoError& e) {
    return report_error(e, kExitIo);
  } catch (const ScenarioError& e) {
    return report_error(e, kExitScenario);
  } catch (const ConfigError& e) {
    return report_error(e, kExitConfig);
  } catch (const std::exception& e) {
    return report_error(e, kExitConfig);
  }
}

Scenario load_scenario(const nlohmann::json& config) {
  try {
    return scenario_from_json(config);
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
}

}  // namespace

int cli_run(const std::string& config_path, const std::string& out_dir) {
  return guarded([&]() {
    const nlohmann::json j = load_json_file(config_path);
    const ExperimentConfig config = ExperimentConfig::from_json(j);
    const Scenario scenario = load_scenario(config.scenario_config);
    const ExperimentResult result = run_experiment(config, scenario);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    write_csv(out_dir + "/trajectory.csv", trajectory_table(result, scenario));
    write_csv(out_dir + "/aggregate.csv", aggregate_table(result));
    write_csv(out_dir + "/summary.csv", summary_table(result));
  });
}

int cli_compare(const std::string& scenario_path, const std::string& methods,
                int trials, int horizon, const std::string& ratios,
                const std::string& out_dir, std::uint64_t seed, double delta,
                int parallelism) {
  return guarded([&]() {
    CompareSpec spec;
    spec.scenario_config = load_json_file(scenario_path);
    if (methods == "all" || methods.empty()) {
      spec.methods = MethodSpec::all();
    } else {
      std::stringstream ss(methods);
      std::string name;
      while (std::getline(ss, name, ',')) {
        spec.methods.push_back(MethodSpec::parse(name));
      }
    }
    spec.trials = trials;
    spec.horizon = horizon;
    spec.base_seed = seed;
    spec.delta = delta;
    spec.parallelism = parallelism;
    if (!ratios.empty()) {
      std::stringstream ss(ratios);
      std::string token;
      while (std::getline(ss, token, ',')) {
        spec.cost_ratios.push_back(std::stod(token));
      }
    }
    const CompareResult result = run_compare(spec);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    write_csv(out_dir + "/compare.csv", result.table);
    write_csv(out_dir + "/compare_ratios.csv", result.ratios);
  });
}

int cli_gap(const std::string& scenario_path) {
  return guarded([&]() {
    const Scenario scenario = load_scenario(load_json_file(scenario_path));
    if (!scenario.has_conditional_means()) {
      throw ScenarioError("gap report needs exact conditional means");
    }
    const HypothesisClass& cls = scenario.hypotheses;
    const double eta = eta_margin(cls, scenario.pool, scenario.poly);
    const double gamma = gamma_constant(cls, scenario.pool);
    const double diam = diameter(scenario.poly);
    std::cout << "designs: " << scenario.pool.size()
              << "  hypotheses: " << cls.size()
              << "  vertices: " << scenario.poly.num_vertices()
              << "  dim: " << scenario.poly.dimension() << "\n";
    std::cout << "eta: " << format_double(eta) << "\n";
    std::cout << "gamma: " << format_double(gamma) << "\n";
    if (eta > 0.0) {
      std::cout << "L: "
                << format_double(lipschitz_constant(diam, scenario.rho_c, eta))
                << "\n";
    } else {
      std::cout << "L: unavailable (eta = 0; margin condition violated)\n";
    }
    const ConditionReport report = verify_conditions(scenario);
    std::cout << "delta_pert: " << format_double(report.delta_pert) << "\n";
    const double gap = measured_gap(cls, scenario);
    if (std::isinf(gap)) {
      std::cout << "measured_gap: no suboptimal member\n";
    } else {
      std::cout << "measured_gap: " << format_double(gap) << "\n";
    }
    std::cout << "condition1 (mean decisions realized): "
              << (report.condition1 ? "pass" : "FAIL") << "\n";
    std::cout << "condition2 (separating design): "
              << (report.condition2 ? "pass" : "FAIL");
    if (report.condition2) {
      std::cout << "  witness: "
                << scenario.pool.design_ids[static_cast<std::size_t>(report.witness_design)]
                << "  mu_lb: " << format_double(report.mu_lb);
    }
    std::cout << "\n";
    std::cout << "condition3 (norm/vertex-gap bounds): "
              << (report.condition3 ? "pass" : "FAIL")
              << "  c_lb: " << format_double(report.c_lb)
              << "  gamma_lb: " << format_double(report.gamma_lb) << "\n";
    if (report.all_pass() && eta > 0.0) {
      const double bound =
          gap_lower_bound(report.mu_lb, eta, report.c_lb, report.gamma_lb);
      std::cout << "gap_lower_bound: " << format_double(bound) << "\n";
      std::cout << "measured_gap >= gap_lower_bound: "
                << (gap >= bound ? "pass" : "FAIL") << "\n";
    } else {
      std::cout << "gap_lower_bound: unavailable (conditions not verified)\n";
    }
  });
}

int cli_check(std::uint64_t seed) {
  const std::vector<PropertyResult> results = run_all_checks(seed);
  int failures = 0;
  for (const PropertyResult& r : results) {
    const bool ok = r.failures == 0;
    failures += ok ? 0 : 1;
    std::cout << (ok ? "PASS " : "FAIL ") << r.name << " (" << r.trials
              << " trials";
    if (!ok) std::cout << ", " << r.failures << " failures: " << r.detail;
    std::cout << ")\n";
  }
  std::cout << (failures == 0 ? "all properties hold" : "property failures")
            << ": " << results.size() - static_cast<std::size_t>(failures)
            << "/" << results.size() << " passed\n";
  return failures == 0 ? kExitOk : 1;
}

}  // namespace iwsd
