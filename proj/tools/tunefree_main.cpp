#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tunefree/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tunefree;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssert = 3;

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

int cmd_run(const std::string& config, const std::string& out_dir,
            bool check_budgets) {
  const ExecuteResult res = execute_config(config, out_dir);
  std::cout << "wrote " << res.runs_csv_path << " (" << res.records.size()
            << " rows) and " << res.report_json_path << "\n";
  if (!check_budgets) return kExitOk;

  std::ifstream in(res.report_json_path);
  json report = json::parse(in);
  bool ok = true;
  for (auto& [algo, entry] : report["ratios"].items()) {
    if (!entry.contains("budget") || entry["budget"].is_null()) continue;
    const double err = entry.value("err", std::nan(""));
    const double budget = entry["budget"].get<double>();
    const bool pass = std::isfinite(err) && err <= budget;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << algo << ": median err " << err
              << " vs budget " << budget << "\n";
    ok = ok && pass;
  }
  return ok ? kExitOk : kExitAssert;
}

int cmd_sweep(const std::string& config, const std::string& out_dir) {
  const ExecuteResult res = execute_config(config, out_dir);
  std::ifstream in(res.report_json_path);
  json report = json::parse(in);
  if (report["slopes"].empty()) {
    std::cerr << "sweep: no slopes fitted (need a T_grid with >= 3 horizons "
                 "and positive errors)\n";
    return kExitConfig;
  }
  for (auto& [algo, fit] : report["slopes"].items())
    std::cout << algo << ": slope " << fit["slope"].get<double>() << " +- "
              << fit["ci95"].get<double>() << "\n";
  return kExitOk;
}

int cmd_tune_baseline(const std::string& config, const std::string& out_dir) {
  const BaselineOutcome out = tune_baseline_from_config(config, out_dir);
  std::cout << "tuned sgd baseline: eta_star=" << out.eta_star
            << " err_star=" << out.err_star << " (T=" << out.T
            << ", trials=" << out.trials << ")\n";
  std::cout << "wrote " << out.baseline_json_path << "\n";
  return kExitOk;
}

int cmd_lowerbound(const std::string& kind_str, int T, long long trials,
                   long long seed, const std::string& out_dir,
                   bool assert_checks) {
  LbKind kind;
  if (kind_str == "smooth")
    kind = LbKind::smooth;
  else if (kind_str == "nonsmooth")
    kind = LbKind::nonsmooth;
  else if (kind_str == "nonconvex")
    kind = LbKind::nonconvex;
  else
    throw ConfigError("lowerbound: unknown kind '" + kind_str + "'");

  LowerBoundFamily fam;
  if (kind == LbKind::nonsmooth) {
    fam = make_lb_family(kind, 0.0, T, 1.0 - 1.0 / T, 1.0, 1.0);
  } else {
    const double v = static_cast<double>(T) * T;
    fam = make_lb_family(kind, 1.0, T, v + 1.0, v);
  }

  RngStream rng(static_cast<std::uint64_t>(seed));
  ConfusionConfig cfg;
  const ConfusionResult conf = run_confusion_experiment(fam, cfg, trials, rng);

  const auto iota = [](long long t) {
    const double l = std::log(static_cast<double>(t) + 1.0);
    return l * l;
  };
  const ConflictResult here = lb_conflict_check(kind, T, iota(T), 1.0);
  const long long threshold = lb_conflict_threshold(kind, iota, 1.0);

  std::cout << "confusion: T=" << conf.T << " trials=" << conf.trials
            << " empirical_p=" << conf.empirical_p
            << " closed_form_p=" << conf.closed_form_p
            << " coupled_identical=" << (conf.coupled_trajectories_identical ? "yes" : "no")
            << "\n";
  std::cout << "conflict at T=" << T << ": " << (here.conflict ? "yes" : "no")
            << " (lower=" << here.lower << ", upper=" << here.upper << ")\n";
  std::cout << "conflict threshold (iota=ln^2(T+1), c=1): T=" << threshold << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json report;
    report["schema_version"] = 1;
    report["slopes"] = json::object();
    report["ratios"] = json::object();
    report["confusion"] = {{"T", conf.T},
                           {"trials", conf.trials},
                           {"empirical_p", conf.empirical_p},
                           {"closed_form_p", conf.closed_form_p},
                           {"coupled_trajectories_identical",
                            conf.coupled_trajectories_identical}};
    report["conflict"] = {{"T_threshold", threshold}};
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report.dump(2) << "\n";
  }

  if (assert_checks) {
    const double se = std::sqrt(conf.closed_form_p * (1.0 - conf.closed_form_p) /
                                static_cast<double>(trials));
    const double tol = std::max(0.01, 3.0 * se);
    const bool p_ok = std::abs(conf.empirical_p - conf.closed_form_p) <= tol;
    if (!p_ok || !conf.coupled_trajectories_identical) {
      std::cerr << "lowerbound: assertion failed (|p - closed_form| "
                << std::abs(conf.empirical_p - conf.closed_form_p) << " vs tol "
                << tol << ", coupled_identical="
                << conf.coupled_trajectories_identical << ")\n";
      return kExitAssert;
    }
  }
  return kExitOk;
}

int cmd_report(const std::string& in_csv, const std::string& out_dir) {
  std::ifstream in(in_csv);
  if (!in) throw ConfigError("report: cannot open " + in_csv);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("report: empty csv");
  if (line != kRunsCsvHeader)
    throw ConfigError("report: unexpected csv header");

  // (algo, T, seed) -> best candidate error
  std::map<std::string, std::map<long long, std::map<long long, double>>> best;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_row(line);
    if (f.size() != 11) throw ConfigError("report: malformed row: " + line);
    const std::string& algo = f[1];
    const long long T = std::stoll(f[4]);
    const long long seed = std::stoll(f[5]);
    const double f_gap = std::strtod(f[7].c_str(), nullptr);
    const double grad_sq = std::strtod(f[8].c_str(), nullptr);
    const double err = std::isfinite(f_gap) ? f_gap : grad_sq;
    auto& slot = best[algo][T];
    auto it = slot.find(seed);
    if (it == slot.end() || err < it->second) slot[seed] = err;
  }

  json report;
  report["schema_version"] = 1;
  report["slopes"] = json::object();
  report["ratios"] = json::object();
  report["confusion"] = nullptr;
  report["conflict"] = nullptr;

  for (const auto& [algo, byT] : best) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [T, by_seed] : byT) {
      std::vector<double> errs;
      for (const auto& [_, e] : by_seed) errs.push_back(e);
      std::sort(errs.begin(), errs.end());
      const double med = errs.size() % 2 == 1
                             ? errs[errs.size() / 2]
                             : 0.5 * (errs[errs.size() / 2 - 1] + errs[errs.size() / 2]);
      pts.emplace_back(static_cast<double>(T), med);
    }
    bool ok = pts.size() >= 3;
    for (const auto& [_, e] : pts)
      if (!(e > 0.0) || !std::isfinite(e)) ok = false;
    if (ok) {
      const SlopeFit fit = fit_loglog_slope(pts);
      report["slopes"][algo] = {{"slope", fit.slope}, {"ci95", fit.ci95}};
      std::cout << algo << ": slope " << fit.slope << " +- " << fit.ci95 << "\n";
    }
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tunefree: adaptive stochastic optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", in_csv;
  bool assert_checks = false;
  std::string lb_kind = "smooth";
  int lb_T = 50;
  long long lb_trials = 100000, lb_seed = 0;

  CLI::App* run = app.add_subcommand("run", "run the experiment matrix of a config");
  run->add_option("--config", config, "INI config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--assert", assert_checks, "fail (exit 3) if a budget check fails");

  CLI::App* sweep = app.add_subcommand("sweep", "run the matrix and fit rate slopes");
  sweep->add_option("--config", config, "INI config file")->required();
  sweep->add_option("--out", out_dir, "output directory");

  CLI::App* tune = app.add_subcommand("tune-baseline", "grid-tune the SGD comparator");
  tune->add_option("--config", config, "INI config file")->required();
  tune->add_option("--out", out_dir, "output directory");

  CLI::App* lb = app.add_subcommand("lowerbound", "confusion + conflict experiments");
  lb->add_option("--kind", lb_kind, "smooth|nonsmooth|nonconvex");
  lb->add_option("--T", lb_T, "horizon")->required();
  lb->add_option("--trials", lb_trials, "number of coupled trials");
  lb->add_option("--seed", lb_seed, "rng seed");
  lb->add_option("--out", out_dir, "output directory (writes report.json)");
  lb->add_flag("--assert", assert_checks,
               "fail (exit 3) if the closed-form agreement fails");

  CLI::App* rep = app.add_subcommand("report", "recompute slopes from a runs.csv");
  rep->add_option("--in", in_csv, "runs.csv path")->required();
  rep->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, out_dir, assert_checks);
    if (sweep->parsed()) return cmd_sweep(config, out_dir);
    if (tune->parsed()) return cmd_tune_baseline(config, out_dir);
    if (lb->parsed())
      return cmd_lowerbound(lb_kind, lb_T, lb_trials, lb_seed, out_dir,
                            assert_checks);
    if (rep->parsed()) return cmd_report(in_csv, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IniError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
