#include "glearn/runner.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "glearn/oracle.hpp"

namespace glearn {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail_at(int line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw ConfigError(os.str());
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    fail_at(line, "expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("");
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    fail_at(line, "expected a nonnegative integer, got '" + v + "'");
  }
}

int parse_int(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    fail_at(line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail_at(line, "expected true or false, got '" + v + "'");
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      return false;
  }
  return true;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Keys seen in the algorithm section being assembled, so schedule pieces can
// be checked against each other once the section ends.
struct PendingAlgorithm {
  std::string label;
  int line = 0;
  std::map<std::string, std::pair<std::string, int>> keys;
};

Algo parse_algo(const std::string& v, int line) {
  if (v == "q") return Algo::Q;
  if (v == "qrho") return Algo::QRho;
  if (v == "g") return Algo::G;
  if (v == "psi") return Algo::Psi;
  if (v == "double_q") return Algo::DoubleQ;
  if (v == "consistent") return Algo::Consistent;
  if (v == "expected_sarsa") return Algo::ExpectedSarsa;
  fail_at(line,
          "unknown algorithm '" + v +
              "' (q, qrho, g, psi, double_q, consistent, expected_sarsa)");
}

AlgorithmConfig finish_algorithm(const PendingAlgorithm& p) {
  AlgorithmConfig out;
  out.label = p.label;

  auto it = p.keys.find("algo");
  if (it == p.keys.end())
    fail_at(p.line, "[algorithm." + p.label + "] is missing key 'algo'");
  out.options.algo = parse_algo(it->second.first, it->second.second);

  std::string schedule = "constant";
  int schedule_line = p.line;
  if (auto s = p.keys.find("schedule"); s != p.keys.end()) {
    schedule = s->second.first;
    schedule_line = s->second.second;
    if (schedule != "constant" && schedule != "linear" &&
        schedule != "inverse_error")
      fail_at(schedule_line, "unknown schedule '" + schedule +
                                 "' (constant, linear, inverse_error)");
    if (out.options.algo != Algo::G)
      fail_at(schedule_line, "schedule only applies to the g algorithm");
  }

  auto forbid = [&](const char* key, const std::string& why) {
    if (auto k = p.keys.find(key); k != p.keys.end())
      fail_at(k->second.second, std::string(key) + " " + why);
  };

  for (const auto& [key, vl] : p.keys) {
    const std::string& value = vl.first;
    const int line = vl.second;
    if (key == "algo" || key == "schedule") continue;
    if (key == "omega") {
      out.options.omega = parse_double(value, line);
    } else if (key == "error_smoothing") {
      out.options.error_smoothing = parse_double(value, line);
    } else if (key == "beta") {
      if (schedule != "constant")
        fail_at(line, "beta belongs to the constant schedule");
      out.options.beta = BetaSchedule::constant(parse_double(value, line));
    } else if (key == "k") {
      if (schedule != "linear")
        fail_at(line, "k belongs to the linear schedule");
      out.options.beta = BetaSchedule::linear(parse_double(value, line));
    } else if (key == "scale") {
      if (schedule != "inverse_error")
        fail_at(line, "scale belongs to the inverse_error schedule");
      out.options.beta =
          BetaSchedule::inverse_bellman_error(parse_double(value, line));
    } else if (key == "epsilon") {
      if (out.options.algo != Algo::ExpectedSarsa)
        fail_at(line, "epsilon only applies to expected_sarsa");
      out.options.sarsa_epsilon = parse_double(value, line);
    } else if (key == "psi_value") {
      if (out.options.algo != Algo::Psi)
        fail_at(line, "psi_value only applies to psi");
      if (value == "min")
        out.options.psi_value_softmin = false;
      else if (value == "softmin")
        out.options.psi_value_softmin = true;
      else
        fail_at(line, "psi_value must be min or softmin");
    } else if (key == "double_q_value") {
      if (out.options.algo != Algo::DoubleQ)
        fail_at(line, "double_q_value only applies to double_q");
      if (value == "single")
        out.options.double_q_value_mean = false;
      else if (value == "mean")
        out.options.double_q_value_mean = true;
      else
        fail_at(line, "double_q_value must be single or mean");
    } else {
      fail_at(line, "unknown key '" + key + "' in [algorithm." + p.label + "]");
    }
  }

  if (schedule == "linear" && p.keys.find("k") == p.keys.end())
    fail_at(schedule_line, "linear schedule needs k");
  if (schedule == "inverse_error" && p.keys.find("scale") == p.keys.end())
    fail_at(schedule_line, "inverse_error schedule needs scale");
  if (out.options.algo != Algo::G) {
    forbid("beta", "only applies to the g algorithm");
    forbid("k", "only applies to the g algorithm");
    forbid("scale", "only applies to the g algorithm");
  }
  return out;
}

double masked_mean(const ValueTable& v,
                   std::span<const std::uint8_t> include) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (!include.empty() && include[s] == 0) continue;
    acc += v[s];
    ++count;
  }
  return acc / static_cast<double>(count);
}

RunResult execute_run(const ExperimentConfig& cfg,
                      const AlgorithmConfig& algo, int run_idx,
                      const BuiltDomain& dom, const ValueTable& v_star,
                      const std::vector<std::uint8_t>& include) {
  const TabularMdp& m = dom.mdp;
  RngStream rng(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(run_idx),
                            algo.label));
  Learner learner(m.n_states, m.n_actions, m.gamma,
                  StochasticPolicy::uniform(m.n_states, m.n_actions),
                  algo.options);
  ExplorationStream stream(cfg.exploration, m,
                           dom.start_state >= 0 ? dom.start_state : 0);

  RunResult rr;
  rr.series.algorithm = algo.label;
  rr.histogram = TransitionHistogram(m.n_states);

  const TabularMdp* mp = &m;
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    const TransitionSample x = stream.next(learner.table(0), rng);
    learner.update(x, rng);
    rr.cumulative_cost += x.cost;
    rr.histogram.add(x);

    if (t % cfg.eval_interval == 0) {
      const ValueTable v = learner.greedy_value();
      const StochasticPolicy pi = learner.greedy_policy();
      MetricPoint p;
      p.iteration = t;
      p.bias = empirical_bias({&v, 1}, {&v_star, 1}, include);
      p.mean_abs_error = mean_abs_error({&v, 1}, {&v_star, 1}, include);
      p.policy_suboptimality =
          policy_suboptimality({&mp, 1}, {&pi, 1}, {&v_star, 1}, include);
      p.bellman_error_avg = learner.bellman_error_avg();
      rr.series.points.push_back(p);
    }
  }

  rr.final_policy_cost =
      masked_mean(policy_evaluation(m, learner.greedy_policy()).v, include);
  return rr;
}

}  // namespace

int workers_from_env_or(int fallback) {
  const char* env = std::getenv("GLEARN_WORKERS");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0 || v > 4096)
    throw ConfigError("GLEARN_WORKERS must be a positive integer");
  return static_cast<int>(v);
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  std::set<std::string> labels;
  std::set<std::string> seen;  // "<section>\n<key>" pairs already set
  PendingAlgorithm pending;
  bool have_pending = false;

  auto flush_pending = [&] {
    if (!have_pending) return;
    cfg.algorithms.push_back(finish_algorithm(pending));
    have_pending = false;
  };

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      flush_pending();
      if (name == "domain" || name == "run") {
        section = name;
      } else if (name.rfind("algorithm.", 0) == 0) {
        const std::string label = name.substr(10);
        if (!valid_label(label))
          fail_at(line_no, "algorithm label must match [A-Za-z0-9_-]+");
        if (!labels.insert(label).second)
          fail_at(line_no, "duplicate algorithm label '" + label + "'");
        pending = PendingAlgorithm{label, line_no, {}};
        have_pending = true;
        section = "algorithm";
      } else {
        fail_at(line_no, "unknown section [" + name + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail_at(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_at(line_no, "empty key");
    if (section.empty())
      fail_at(line_no, "key '" + key + "' appears before any section");

    if (section == "algorithm") {
      if (!pending.keys.emplace(key, std::make_pair(value, line_no)).second)
        fail_at(line_no, "duplicate key '" + key + "'");
      continue;
    }

    if (!seen.insert(section + "\n" + key).second)
      fail_at(line_no, "duplicate key '" + key + "'");

    if (section == "domain") {
      if (key == "type") {
        if (value == "gridworld")
          cfg.domain.kind = DomainConfig::Kind::Gridworld;
        else if (value == "cliff")
          cfg.domain.kind = DomainConfig::Kind::Cliff;
        else
          fail_at(line_no, "unknown domain type '" + value + "'");
      } else if (key == "map") {
        fs::path p(value);
        if (!origin.empty() && p.is_relative())
          p = fs::path(origin).parent_path() / p;
        cfg.domain.map_path = p.lexically_normal().string();
      } else if (key == "cost") {
        if (value == "fixed")
          cfg.domain.cost.kind = CostVariant::FixedUnit;
        else if (value == "gaussian")
          cfg.domain.cost.kind = CostVariant::GaussianUnit;
        else if (value == "generated")
          cfg.domain.cost.kind = CostVariant::GeneratedMeans;
        else
          fail_at(line_no, "unknown cost variant '" + value +
                               "' (fixed, gaussian, generated)");
      } else if (key == "cost_std") {
        cfg.domain.cost.std = parse_double(value, line_no);
      } else if (key == "mean_low") {
        cfg.domain.cost.mean_low = parse_double(value, line_no);
      } else if (key == "mean_high") {
        cfg.domain.cost.mean_high = parse_double(value, line_no);
      } else if (key == "gamma") {
        cfg.domain.gamma = parse_double(value, line_no);
      } else {
        fail_at(line_no, "unknown key '" + key + "' in [domain]");
      }
    } else {  // [run]
      if (key == "iterations") {
        cfg.iterations = parse_u64(value, line_no);
      } else if (key == "runs") {
        cfg.runs = parse_int(value, line_no);
      } else if (key == "base_seed") {
        cfg.base_seed = parse_u64(value, line_no);
      } else if (key == "eval_interval") {
        cfg.eval_interval = parse_u64(value, line_no);
      } else if (key == "exploration") {
        if (value == "uniform")
          cfg.exploration.kind = ExplorationRegime::Kind::UniformIid;
        else if (value == "epsilon_greedy")
          cfg.exploration.kind = ExplorationRegime::Kind::EpsilonGreedy;
        else
          fail_at(line_no, "unknown exploration '" + value +
                               "' (uniform, epsilon_greedy)");
      } else if (key == "epsilon") {
        cfg.exploration.epsilon = parse_double(value, line_no);
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else if (key == "workers") {
        cfg.workers = parse_int(value, line_no);
      } else if (key == "per_run_csv") {
        cfg.per_run_csv = parse_bool(value, line_no);
      } else if (key == "sweep_iterations") {
        cfg.sweep_iterations = parse_u64(value, line_no);
      } else if (key == "sweep_runs") {
        cfg.sweep_runs = parse_int(value, line_no);
      } else if (key == "sweep_metric") {
        if (value == "exact")
          cfg.sweep_realized_cost = false;
        else if (value == "realized")
          cfg.sweep_realized_cost = true;
        else
          fail_at(line_no, "sweep_metric must be exact or realized");
      } else {
        fail_at(line_no, "unknown key '" + key + "' in [run]");
      }
    }
  }
  flush_pending();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

BuiltDomain build_domain(const DomainConfig& domain, std::uint64_t base_seed,
                         std::uint64_t run) {
  const GridMap map = load_map(domain.map_path);
  if (domain.kind == DomainConfig::Kind::Gridworld) {
    RngStream gen(derive_seed(base_seed, run, "domain"));
    return build_gridworld(map, domain.cost, gen, domain.gamma);
  }
  return build_cliff(map, domain.gamma);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.algorithms.empty())
    throw ConfigError("config defines no algorithms");
  if (cfg.iterations == 0) throw ConfigError("iterations must be positive");
  if (cfg.runs <= 0) throw ConfigError("runs must be positive");
  if (cfg.eval_interval == 0)
    throw ConfigError("eval_interval must be positive");
  if (cfg.workers < 0) throw ConfigError("workers must be nonnegative");
  if (cfg.sweep_runs <= 0) throw ConfigError("sweep_runs must be positive");
  if (!(cfg.exploration.epsilon >= 0.0 && cfg.exploration.epsilon <= 1.0))
    throw ConfigError("exploration epsilon must lie in [0, 1]");
  if (!(cfg.domain.gamma >= 0.0 && cfg.domain.gamma < 1.0))
    throw ConfigError("gamma must lie in [0, 1)");
  if (cfg.domain.map_path.empty()) throw ConfigError("domain map is not set");
  if (!(cfg.domain.cost.std >= 0.0))
    throw ConfigError("cost_std must be nonnegative");
  if (cfg.domain.cost.kind == CostVariant::GeneratedMeans &&
      !(cfg.domain.cost.mean_low <= cfg.domain.cost.mean_high))
    throw ConfigError("mean_low must not exceed mean_high");
  if (cfg.domain.kind == DomainConfig::Kind::Cliff &&
      (cfg.domain.cost.kind != CostVariant::FixedUnit ||
       cfg.domain.cost.std != 0.0))
    throw ConfigError("cliff costs are fixed by the domain");

  for (const AlgorithmConfig& a : cfg.algorithms) {
    if (!valid_label(a.label))
      throw ConfigError("algorithm label must match [A-Za-z0-9_-]+");
    if (!(a.options.omega > 0.5 && a.options.omega <= 1.0))
      throw ConfigError("omega must lie in (0.5, 1] for algorithm '" +
                        a.label + "'");
    if (!(a.options.error_smoothing >= 0.0 &&
          a.options.error_smoothing < 1.0))
      throw ConfigError("error_smoothing must lie in [0, 1) for '" + a.label +
                        "'");
    if (!(a.options.sarsa_epsilon >= 0.0 && a.options.sarsa_epsilon <= 1.0))
      throw ConfigError("epsilon must lie in [0, 1] for '" + a.label + "'");
    const BetaSchedule& b = a.options.beta;
    if (b.kind == BetaSchedule::Kind::Linear && !(b.value > 0.0))
      throw ConfigError("linear schedule needs k > 0 for '" + a.label + "'");
    if (b.kind == BetaSchedule::Kind::InverseBellmanError && !(b.value > 0.0))
      throw ConfigError("inverse_error schedule needs scale > 0 for '" +
                        a.label + "'");
    if (b.kind == BetaSchedule::Kind::Constant && !(b.value >= 0.0))
      throw ConfigError("constant schedule needs beta >= 0 for '" + a.label +
                        "'");
  }

  BuiltDomain dom;
  try {
    dom = build_domain(cfg.domain, cfg.base_seed, 0);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  const ValidationReport rep = validate_mdp(dom.mdp);
  if (!rep.ok()) {
    std::ostringstream os;
    os << "built domain fails validation: " << rep.violations.front();
    throw ConfigError(os.str());
  }
  if (cfg.exploration.kind == ExplorationRegime::Kind::EpsilonGreedy &&
      dom.start_state < 0)
    throw ConfigError("epsilon_greedy exploration needs a start cell");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  const int n_runs = cfg.runs;
  const int n_algos = static_cast<int>(cfg.algorithms.size());
  const bool per_run_domain =
      cfg.domain.kind == DomainConfig::Kind::Gridworld &&
      cfg.domain.cost.kind == CostVariant::GeneratedMeans;

  // Domains and their exact solutions, computed up front and shared when the
  // domain does not vary across runs.
  std::vector<BuiltDomain> domains;
  std::vector<ValueTable> v_stars;
  const int n_domains = per_run_domain ? n_runs : 1;
  domains.reserve(static_cast<std::size_t>(n_domains));
  v_stars.reserve(static_cast<std::size_t>(n_domains));
  for (int r = 0; r < n_domains; ++r) {
    domains.push_back(
        build_domain(cfg.domain, cfg.base_seed, static_cast<std::uint64_t>(r)));
    v_stars.push_back(value_iteration(domains.back().mdp).v);
  }
  auto domain_of = [&](int run) -> const BuiltDomain& {
    return domains[per_run_domain ? static_cast<std::size_t>(run) : 0];
  };
  auto v_star_of = [&](int run) -> const ValueTable& {
    return v_stars[per_run_domain ? static_cast<std::size_t>(run) : 0];
  };

  std::vector<std::uint8_t> include(
      static_cast<std::size_t>(domains[0].mdp.n_states));
  for (int s = 0; s < domains[0].mdp.n_states; ++s)
    include[static_cast<std::size_t>(s)] =
        domains[0].mdp.is_terminal(s) ? 0 : 1;

  ExperimentResult res;
  res.n_runs = n_runs;
  for (const AlgorithmConfig& a : cfg.algorithms) res.labels.push_back(a.label);
  res.domain = domains[0];
  const std::size_t n_tasks =
      static_cast<std::size_t>(n_algos) * static_cast<std::size_t>(n_runs);
  res.runs.assign(n_tasks, RunResult{});

  // Fixed task slots keep the output independent of scheduling.
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      const int algo = static_cast<int>(i / static_cast<std::size_t>(n_runs));
      const int run = static_cast<int>(i % static_cast<std::size_t>(n_runs));
      try {
        res.runs[i] = execute_run(cfg, cfg.algorithms[static_cast<std::size_t>(
                                      algo)],
                                  run, domain_of(run), v_star_of(run), include);
      } catch (...) {
        const std::lock_guard<std::mutex> g(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int workers = cfg.workers > 0
                    ? cfg.workers
                    : static_cast<int>(
                          std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(n_tasks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Run averages per algorithm, accumulated in run order.
  for (int a = 0; a < n_algos; ++a) {
    MetricSeries agg;
    agg.algorithm = cfg.algorithms[static_cast<std::size_t>(a)].label;
    const std::size_t n_points = res.run(a, 0).series.points.size();
    agg.points.assign(n_points, MetricPoint{});
    TransitionHistogram hist(domains[0].mdp.n_states);
    for (int r = 0; r < n_runs; ++r) {
      const RunResult& rr = res.run(a, r);
      if (rr.series.points.size() != n_points)
        throw std::logic_error("run series lengths disagree");
      for (std::size_t j = 0; j < n_points; ++j) {
        const MetricPoint& p = rr.series.points[j];
        MetricPoint& q = agg.points[j];
        q.iteration = p.iteration;
        q.bias += p.bias;
        q.mean_abs_error += p.mean_abs_error;
        q.policy_suboptimality += p.policy_suboptimality;
        q.bellman_error_avg += p.bellman_error_avg;
      }
      hist.merge(rr.histogram);
    }
    for (MetricPoint& q : agg.points) {
      q.bias /= n_runs;
      q.mean_abs_error /= n_runs;
      q.policy_suboptimality /= n_runs;
      q.bellman_error_avg /= n_runs;
    }
    res.aggregates.push_back(std::move(agg));
    res.histograms.push_back(std::move(hist));
  }
  return res;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + p.string());
  return f;
}

void close_out(std::ofstream& f, const fs::path& p) {
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

void emit_csv(const ExperimentResult& res, const ExperimentConfig& cfg,
              const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory: " + out_dir +
                             " (" + ec.message() + ")");

  {
    const fs::path p = dir / "aggregate.csv";
    std::ofstream f = open_out(p);
    f << "iteration,algorithm,bias,mean_abs_error,policy_suboptimality,"
         "bellman_error_avg,runs\n";
    for (std::size_t a = 0; a < res.aggregates.size(); ++a) {
      const MetricSeries& s = res.aggregates[a];
      for (const MetricPoint& q : s.points) {
        f << q.iteration << ',' << s.algorithm << ',' << g17(q.bias) << ','
          << g17(q.mean_abs_error) << ',' << g17(q.policy_suboptimality)
          << ',' << g17(q.bellman_error_avg) << ',' << res.n_runs << '\n';
      }
    }
    close_out(f, p);
  }

  if (cfg.per_run_csv) {
    const fs::path p = dir / "runs.csv";
    std::ofstream f = open_out(p);
    f << "iteration,algorithm,run,bias,mean_abs_error,policy_suboptimality,"
         "bellman_error_avg\n";
    for (std::size_t a = 0; a < res.labels.size(); ++a) {
      for (int r = 0; r < res.n_runs; ++r) {
        const RunResult& rr = res.run(static_cast<int>(a), r);
        for (const MetricPoint& q : rr.series.points) {
          f << q.iteration << ',' << res.labels[a] << ',' << r << ','
            << g17(q.bias) << ',' << g17(q.mean_abs_error) << ','
            << g17(q.policy_suboptimality) << ',' << g17(q.bellman_error_avg)
            << '\n';
        }
      }
    }
    close_out(f, p);
  }

  if (cfg.domain.kind == DomainConfig::Kind::Cliff) {
    for (std::size_t a = 0; a < res.labels.size(); ++a) {
      const TransitionHistogram& h = res.histograms[a];
      {
        const fs::path p = dir / ("visits_" + res.labels[a] + ".csv");
        std::ofstream f = open_out(p);
        f << "state,visits\n";
        for (int s = 0; s < h.n_states; ++s)
          f << s << ',' << h.state_visits[static_cast<std::size_t>(s)] << '\n';
        close_out(f, p);
      }
      {
        const fs::path p = dir / ("transitions_" + res.labels[a] + ".csv");
        std::ofstream f = open_out(p);
        f << "from_state,to_state,count\n";
        for (int s = 0; s < h.n_states; ++s) {
          for (int t = 0; t < h.n_states; ++t) {
            const std::uint64_t c =
                h.transition_counts[static_cast<std::size_t>(s) * h.n_states +
                                    t];
            if (c > 0) f << s << ',' << t << ',' << c << '\n';
          }
        }
        close_out(f, p);
      }
    }
  }
}

SweepResult k_sweep_task(const SweepTask& task, std::span<const double> ks) {
  if (ks.empty()) throw ConfigError("no sweep candidates");
  for (double k : ks)
    if (!(std::isfinite(k) && k > 0.0))
      throw ConfigError("sweep candidates must be positive");
  if (task.mdps.empty()) throw ConfigError("sweep needs at least one run");
  if (task.iterations == 0)
    throw ConfigError("sweep iterations must be positive");

  SweepResult out;
  for (double k : ks) {
    double total = 0.0;
    for (std::size_t r = 0; r < task.mdps.size(); ++r) {
      const TabularMdp& m = *task.mdps[r];
      RngStream rng(derive_seed(task.base_seed, r,
                                task.label + "#sweep:" + g17(k)));
      LearnerOptions opt = task.options;
      opt.beta = BetaSchedule::linear(k);
      Learner learner(m.n_states, m.n_actions, m.gamma,
                      StochasticPolicy::uniform(m.n_states, m.n_actions), opt);
      const int start = task.start_states.empty() ? 0 : task.start_states[r];
      ExplorationStream stream(task.regime, m, start);
      double cum = 0.0;
      for (std::uint64_t t = 0; t < task.iterations; ++t) {
        const TransitionSample x = stream.next(learner.table(0), rng);
        learner.update(x, rng);
        cum += x.cost;
      }
      if (task.realized_cost) {
        total += cum / static_cast<double>(task.iterations);
      } else {
        total += masked_mean(
            policy_evaluation(m, learner.greedy_policy()).v, task.include);
      }
    }
    out.points.push_back({k, total / static_cast<double>(task.mdps.size())});
  }

  const SweepPoint* best = &out.points[0];
  for (const SweepPoint& p : out.points) {
    if (p.score < best->score ||
        (p.score == best->score && p.k < best->k))
      best = &p;
  }
  out.chosen_k = best->k;
  return out;
}

SweepResult k_sweep(const ExperimentConfig& cfg, std::span<const double> ks) {
  validate_config(cfg);

  const AlgorithmConfig* target = nullptr;
  for (const AlgorithmConfig& a : cfg.algorithms) {
    if (a.options.algo == Algo::G &&
        a.options.beta.kind == BetaSchedule::Kind::Linear) {
      target = &a;
      break;
    }
  }
  if (target == nullptr)
    throw ConfigError(
        "sweep needs a g algorithm with a linear schedule in the config");

  const bool per_run_domain =
      cfg.domain.kind == DomainConfig::Kind::Gridworld &&
      cfg.domain.cost.kind == CostVariant::GeneratedMeans;
  const int n_runs = cfg.sweep_runs;
  std::vector<BuiltDomain> domains;
  for (int r = 0; r < (per_run_domain ? n_runs : 1); ++r)
    domains.push_back(
        build_domain(cfg.domain, cfg.base_seed, static_cast<std::uint64_t>(r)));

  SweepTask task;
  for (int r = 0; r < n_runs; ++r) {
    const BuiltDomain& d =
        domains[per_run_domain ? static_cast<std::size_t>(r) : 0];
    task.mdps.push_back(&d.mdp);
    task.start_states.push_back(d.start_state >= 0 ? d.start_state : 0);
  }
  task.regime = cfg.exploration;
  task.options = target->options;
  task.iterations = cfg.sweep_iterations > 0
                        ? cfg.sweep_iterations
                        : std::max<std::uint64_t>(1, cfg.iterations / 5);
  task.base_seed = cfg.base_seed;
  task.label = target->label;
  task.realized_cost = cfg.sweep_realized_cost;
  task.include.assign(static_cast<std::size_t>(domains[0].mdp.n_states), 1);
  for (int s = 0; s < domains[0].mdp.n_states; ++s)
    if (domains[0].mdp.is_terminal(s))
      task.include[static_cast<std::size_t>(s)] = 0;

  return k_sweep_task(task, ks);
}

}  // namespace glearn
