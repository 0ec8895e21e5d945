#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glearn/oracle.hpp"
#include "glearn/runner.hpp"

namespace {

std::vector<double> parse_ks(const std::string& list) {
  std::vector<double> ks;
  std::string cur;
  auto push = [&] {
    if (cur.empty()) return;
    std::size_t used = 0;
    const double k = std::stod(cur, &used);
    if (used != cur.size())
      throw glearn::ConfigError("bad sweep candidate: " + cur);
    ks.push_back(k);
    cur.clear();
  };
  for (char c : list) {
    if (c == ',') {
      push();
    } else {
      cur += c;
    }
  }
  push();
  return ks;
}

int cmd_validate(const std::string& config_path) {
  const glearn::ExperimentConfig cfg =
      glearn::parse_config_file(config_path);
  glearn::validate_config(cfg);
  const glearn::BuiltDomain dom =
      glearn::build_domain(cfg.domain, cfg.base_seed, 0);
  std::printf("config ok: %zu algorithms, %d states, %d actions, %d runs x "
              "%llu iterations\n",
              cfg.algorithms.size(), dom.mdp.n_states, dom.mdp.n_actions,
              cfg.runs,
              static_cast<unsigned long long>(cfg.iterations));
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            int workers_flag, long long seed_flag) {
  glearn::ExperimentConfig cfg = glearn::parse_config_file(config_path);
  cfg.workers = glearn::workers_from_env_or(cfg.workers);
  if (workers_flag > 0) cfg.workers = workers_flag;
  if (seed_flag >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_flag);
  if (!out_override.empty()) cfg.out_dir = out_override;

  const glearn::ExperimentResult res = glearn::run_experiment(cfg);
  glearn::emit_csv(res, cfg, cfg.out_dir);

  for (const glearn::MetricSeries& s : res.aggregates) {
    if (s.points.empty()) {
      std::printf("%-16s (no evaluation points)\n", s.algorithm.c_str());
      continue;
    }
    const glearn::MetricPoint& last = s.points.back();
    std::printf("%-16s bias % .5f  mae %.5f  suboptimality %.5f\n",
                s.algorithm.c_str(), last.bias, last.mean_abs_error,
                last.policy_suboptimality);
  }
  std::printf("wrote %s/aggregate.csv\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& ks_list) {
  const glearn::ExperimentConfig cfg =
      glearn::parse_config_file(config_path);
  const std::vector<double> ks = parse_ks(ks_list);
  const glearn::SweepResult res = glearn::k_sweep(cfg, ks);
  for (const glearn::SweepPoint& p : res.points)
    std::printf("k %-12g cost %.6f\n", p.k, p.score);
  std::printf("chosen k: %g\n", res.chosen_k);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular soft-update learning lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string ks_list;
  int workers_flag = 0;
  long long seed_flag = -1;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_override, "output directory override");
  run->add_option("--workers", workers_flag, "worker thread count");
  run->add_option("--seed", seed_flag, "base seed override");

  CLI::App* sweep =
      app.add_subcommand("sweep", "pick the linear schedule slope");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--ks", ks_list, "comma-separated candidates")->required();

  CLI::App* validate =
      app.add_subcommand("validate", "check a config and its domain");
  validate->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run))
      return cmd_run(config_path, out_override, workers_flag, seed_flag);
    if (app.got_subcommand(sweep)) return cmd_sweep(config_path, ks_list);
    return cmd_validate(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
