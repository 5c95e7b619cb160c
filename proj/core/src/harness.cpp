#include "odefit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "odefit/errors.hpp"
#include "odefit/metrics.hpp"
#include "odefit/number_format.hpp"
#include "odefit/svg_plot.hpp"

namespace odefit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent deterministic streams derived from the experiment seed.
enum class Stream : std::uint32_t { params = 1, swarm = 2, noise = 3, test = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, Index particles = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(particles)};
  return std::mt19937_64(seq);
}

double draw(std::mt19937_64& rng, const SampleRange& r) {
  if (r.log_uniform) {
    std::uniform_real_distribution<double> u(std::log(r.lo), std::log(r.hi));
    return std::exp(u(rng));
  }
  std::uniform_real_distribution<double> u(r.lo, r.hi);
  return u(rng);
}

// ---- config serialization ---------------------------------------------------

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + where);
    }
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json range_json(const SampleRange& r) {
  return {{"lo", r.lo}, {"hi", r.hi}, {"log_uniform", r.log_uniform}};
}

SampleRange range_from(const json& j, SampleRange r) {
  reject_unknown(j, {"lo", "hi", "log_uniform"}, "range");
  read_opt(j, "lo", r.lo);
  read_opt(j, "hi", r.hi);
  read_opt(j, "log_uniform", r.log_uniform);
  return r;
}

json params_json(const CSParams& p) {
  return {{"gamma", p.gamma}, {"c_a", p.c_a}, {"c_r", p.c_r}, {"l_a", p.l_a}, {"l_r", p.l_r}};
}

CSParams params_from(const json& j) {
  reject_unknown(j, {"gamma", "c_a", "c_r", "l_a", "l_r"}, "truth");
  CSParams p;
  p.gamma = j.at("gamma").get<double>();
  p.c_a = j.at("c_a").get<double>();
  p.c_r = j.at("c_r").get<double>();
  p.l_a = j.at("l_a").get<double>();
  p.l_r = j.at("l_r").get<double>();
  return p;
}

json solver_json(const SolverConfig& s) {
  json j;
  j["method"] = s.method == SolverMethod::dopri5 ? "dopri5" : "rk4";
  j["rtol"] = s.rtol;
  j["atol"] = s.atol;
  j["initial_step"] = s.initial_step ? json(*s.initial_step) : json(nullptr);
  j["max_steps"] = s.max_steps;
  j["safety"] = s.safety;
  j["min_scale"] = s.min_scale;
  j["max_scale"] = s.max_scale;
  j["rk4_substeps"] = s.rk4_substeps;
  return j;
}

SolverConfig solver_from(const json& j) {
  reject_unknown(j,
                 {"method", "rtol", "atol", "initial_step", "max_steps", "safety", "min_scale",
                  "max_scale", "rk4_substeps"},
                 "solver");
  SolverConfig s;
  if (j.contains("method")) {
    const auto m = j.at("method").get<std::string>();
    if (m == "dopri5") {
      s.method = SolverMethod::dopri5;
    } else if (m == "rk4") {
      s.method = SolverMethod::rk4;
    } else {
      throw ConfigError("unknown solver method '" + m + "'");
    }
  }
  read_opt(j, "rtol", s.rtol);
  read_opt(j, "atol", s.atol);
  if (j.contains("initial_step") && !j.at("initial_step").is_null()) {
    s.initial_step = j.at("initial_step").get<double>();
  }
  read_opt(j, "max_steps", s.max_steps);
  read_opt(j, "safety", s.safety);
  read_opt(j, "min_scale", s.min_scale);
  read_opt(j, "max_scale", s.max_scale);
  read_opt(j, "rk4_substeps", s.rk4_substeps);
  return s;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["particle_counts"] = c.particle_counts;
  j["grid"] = {{"t0", c.grid.t0}, {"h", c.grid.h}, {"num_intervals", c.grid.num_intervals}};
  j["truth"] = c.truth ? params_json(*c.truth) : json(nullptr);
  j["ranges"] = {{"gamma", range_json(c.ranges.gamma)}, {"c_a", range_json(c.ranges.c_a)},
                 {"c_r", range_json(c.ranges.c_r)},     {"l_a", range_json(c.ranges.l_a)},
                 {"l_r", range_json(c.ranges.l_r)}};
  j["swarm"] = {{"position_half_width", c.swarm.position_half_width},
                {"velocity_half_width", c.swarm.velocity_half_width},
                {"min_separation", c.swarm.min_separation},
                {"max_attempts", c.swarm.max_attempts}};
  j["init_perturbation"] = c.init_perturbation;
  j["noise_std"] = c.noise_std;
  j["epochs"] = c.epochs;
  j["test_trajectories"] = c.test_trajectories;
  j["seed"] = c.seed;
  json algs = json::array();
  for (Algorithm a : c.algorithms) algs.push_back(std::string(to_string(a)));
  j["algorithms"] = std::move(algs);
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  j["solver"] = solver_json(c.solver);
  j["rsse_every"] = c.rsse_every;
  j["midpoint_coeff"] = c.midpoint_coeff;
  j["rho"] = c.rho;
  j["generation_retries"] = c.generation_retries;
  return j;
}

// ---- sweep helpers -------------------------------------------------------------

/// Forwards to CSV and keeps the rows for plotting.
class CollectingSink final : public RecordSink {
 public:
  explicit CollectingSink(RecordSink* next) : next_(next) {}
  void on_epoch(const EpochRow& row) override {
    rows.push_back(row);
    if (next_ != nullptr) next_->on_epoch(row);
  }
  std::vector<EpochRow> rows;

 private:
  RecordSink* next_;
};

json entry_json(const RunSummaryEntry& e) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["epochs_run"] = e.epochs_run;
  j["mean_epoch_seconds"] = num(e.mean_epoch_seconds);
  j["total_seconds"] = num(e.total_seconds);
  j["final_sse"] = num(e.final_sse);
  j["final_rsse_ode"] = num(e.final_rsse_ode);
  j["test_mean_rsse"] = num(e.test_mean_rsse);
  j["test_failures"] = e.test_failures;
  j["status"] = std::string(to_string(e.status));
  if (!e.message.empty()) j["message"] = e.message;
  json theta = json::array();
  for (Index k = 0; k < e.theta.size(); ++k) theta.push_back(num(e.theta(k)));
  j["theta"] = std::move(theta);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

// ---- config --------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (model != "cucker_smale") throw ConfigError("unsupported model '" + model + "'");
  if (particle_counts.empty()) throw ConfigError("particle_counts must not be empty");
  for (Index n : particle_counts) {
    if (n < 1) throw ConfigError("particle counts must be positive");
  }
  grid.validate();
  solver.validate();
  for (const SampleRange* r : {&ranges.gamma, &ranges.c_a, &ranges.c_r, &ranges.l_a, &ranges.l_r}) {
    if (!(r->lo <= r->hi) || (r->log_uniform && !(r->lo > 0.0))) {
      throw ConfigError("parameter ranges need lo <= hi (and lo > 0 when log-uniform)");
    }
  }
  if (!(ranges.l_a.lo > 0.0) || !(ranges.l_r.lo > 0.0)) {
    throw ConfigError("potential lengths must be sampled from positive ranges");
  }
  if (truth && (!(truth->l_a > 0.0) || !(truth->l_r > 0.0))) {
    throw ConfigError("truth potential lengths must be positive");
  }
  if (!(swarm.position_half_width > 0.0) || !(swarm.velocity_half_width >= 0.0) ||
      !(swarm.min_separation >= 0.0) || swarm.max_attempts < 1) {
    throw ConfigError("invalid swarm sampler settings");
  }
  if (!(init_perturbation >= 0.0 && init_perturbation < 1.0)) {
    throw ConfigError("init_perturbation must lie in [0, 1)");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (test_trajectories < 1) throw ConfigError("test_trajectories must be positive");
  if (algorithms.empty()) throw ConfigError("no algorithms selected");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (rsse_every < 0) throw ConfigError("rsse_every must be non-negative");
  if (!(midpoint_coeff > 0.0)) throw ConfigError("midpoint_coeff must be positive");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (generation_retries < 0) throw ConfigError("generation_retries must be non-negative");
}

std::string to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"model", "particle_counts", "grid", "truth", "ranges", "swarm",
                    "init_perturbation", "noise_std", "epochs", "test_trajectories", "seed",
                    "algorithms", "out_dir", "threads", "solver", "rsse_every", "midpoint_coeff",
                    "rho", "generation_retries"},
                   "config");
    read_opt(j, "model", c.model);
    read_opt(j, "particle_counts", c.particle_counts);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g, {"t0", "h", "num_intervals"}, "grid");
      read_opt(g, "t0", c.grid.t0);
      read_opt(g, "h", c.grid.h);
      read_opt(g, "num_intervals", c.grid.num_intervals);
    }
    if (j.contains("truth") && !j.at("truth").is_null()) c.truth = params_from(j.at("truth"));
    if (j.contains("ranges")) {
      const auto& r = j.at("ranges");
      reject_unknown(r, {"gamma", "c_a", "c_r", "l_a", "l_r"}, "ranges");
      if (r.contains("gamma")) c.ranges.gamma = range_from(r.at("gamma"), c.ranges.gamma);
      if (r.contains("c_a")) c.ranges.c_a = range_from(r.at("c_a"), c.ranges.c_a);
      if (r.contains("c_r")) c.ranges.c_r = range_from(r.at("c_r"), c.ranges.c_r);
      if (r.contains("l_a")) c.ranges.l_a = range_from(r.at("l_a"), c.ranges.l_a);
      if (r.contains("l_r")) c.ranges.l_r = range_from(r.at("l_r"), c.ranges.l_r);
    }
    if (j.contains("swarm")) {
      const auto& s = j.at("swarm");
      reject_unknown(s,
                     {"position_half_width", "velocity_half_width", "min_separation",
                      "max_attempts"},
                     "swarm");
      read_opt(s, "position_half_width", c.swarm.position_half_width);
      read_opt(s, "velocity_half_width", c.swarm.velocity_half_width);
      read_opt(s, "min_separation", c.swarm.min_separation);
      read_opt(s, "max_attempts", c.swarm.max_attempts);
    }
    read_opt(j, "init_perturbation", c.init_perturbation);
    read_opt(j, "noise_std", c.noise_std);
    read_opt(j, "epochs", c.epochs);
    read_opt(j, "test_trajectories", c.test_trajectories);
    read_opt(j, "seed", c.seed);
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    read_opt(j, "out_dir", c.out_dir);
    read_opt(j, "threads", c.threads);
    if (j.contains("solver")) c.solver = solver_from(j.at("solver"));
    read_opt(j, "rsse_every", c.rsse_every);
    read_opt(j, "midpoint_coeff", c.midpoint_coeff);
    read_opt(j, "rho", c.rho);
    read_opt(j, "generation_retries", c.generation_retries);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

// ---- data ------------------------------------------------------------------------

CSParams sample_params(std::mt19937_64& rng, const ParamRanges& r) {
  CSParams p;
  p.gamma = draw(rng, r.gamma);
  p.c_a = draw(rng, r.c_a);
  p.c_r = draw(rng, r.c_r);
  p.l_a = draw(rng, r.l_a);
  p.l_r = draw(rng, r.l_r);
  return p;
}

CSParams perturb_params(std::mt19937_64& rng, const CSParams& truth, double fraction) {
  std::uniform_real_distribution<double> u(-fraction, fraction);
  Vector v = truth.to_vector();
  for (Index k = 0; k < v.size(); ++k) v(k) *= 1.0 + u(rng);
  return CSParams::from_vector(v);
}

Vector sample_swarm(std::mt19937_64& rng, Index n, const SwarmSampler& box) {
  std::uniform_real_distribution<double> pos(-box.position_half_width, box.position_half_width);
  std::uniform_real_distribution<double> vel(-box.velocity_half_width, box.velocity_half_width);
  Vector x(4 * n);
  const double min_sq = box.min_separation * box.min_separation;
  for (Index i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < box.max_attempts && !placed; ++attempt) {
      x(2 * i) = pos(rng);
      x(2 * i + 1) = pos(rng);
      placed = true;
      for (Index j = 0; j < i && placed; ++j) {
        const double dx = x(2 * i) - x(2 * j);
        const double dy = x(2 * i + 1) - x(2 * j + 1);
        // strict: coincident particles are never accepted, even with zero separation
        placed = dx * dx + dy * dy > min_sq && (dx != 0.0 || dy != 0.0);
      }
    }
    if (!placed) {
      throw ConfigError("could not place " + std::to_string(n) +
                        " particles with the requested separation");
    }
  }
  for (Index k = 0; k < 2 * n; ++k) x(2 * n + k) = vel(rng);
  return x;
}

Dataset generate_dataset(const ExperimentConfig& cfg, Index n, std::ostream* log) {
  cfg.validate();
  if (n < 1) throw ConfigError("particle count must be positive");
  Dataset d;
  d.num_particles = n;
  d.grid = cfg.grid;
  d.seed = cfg.seed;
  d.noise_std = cfg.noise_std;

  auto prng = make_rng(cfg.seed, Stream::params);
  d.truth = cfg.truth ? *cfg.truth : sample_params(prng, cfg.ranges);
  d.init = perturb_params(prng, d.truth, cfg.init_perturbation);

  const CuckerSmale field(n);
  const Vector truth = d.truth.to_vector();
  auto srng = make_rng(cfg.seed, Stream::swarm, n);
  bool ok = false;
  for (int attempt = 0; attempt <= cfg.generation_retries && !ok; ++attempt) {
    d.x0 = sample_swarm(srng, n, cfg.swarm);
    try {
      d.targets = solve(field, truth, d.x0, d.grid, cfg.solver).states;
      ok = true;
    } catch (const Error& e) {
      if (log != nullptr) {
        *log << "N=" << n << ": resampling initial state after solver failure (" << e.what()
             << ")\n";
      }
    }
  }
  if (!ok) {
    throw Error("N=" + std::to_string(n) + ": no solvable initial state after " +
                std::to_string(cfg.generation_retries + 1) + " attempts");
  }

  if (cfg.noise_std > 0.0) {
    auto nrng = make_rng(cfg.seed, Stream::noise, n);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    // Row 0 is the known initial condition and stays exact.
    for (Index i = 1; i < d.targets.rows(); ++i) {
      for (Index c = 0; c < d.targets.cols(); ++c) d.targets(i, c) += noise(nrng);
    }
  }

  auto trng = make_rng(cfg.seed, Stream::test, n);
  d.test_x0s.reserve(static_cast<std::size_t>(cfg.test_trajectories));
  for (int k = 0; k < cfg.test_trajectories; ++k) d.test_x0s.push_back(sample_swarm(trng, n, cfg.swarm));
  return d;
}

TestEvaluation evaluate_test(const VectorField& field, ConstVectorRef theta,
                             const std::vector<Vector>& test_x0s, ConstVectorRef truth,
                             const TimeGrid& grid, const SolverConfig& solver,
                             const ObservationMap& obs) {
  if (test_x0s.empty()) throw MetricError("test set is empty");
  TestEvaluation out;
  double total = 0.0;
  for (const Vector& x0 : test_x0s) {
    try {
      const StateMatrix target = observe(obs, solve(field, truth, x0, grid, solver).states);
      const StateMatrix pred = observe(obs, solve(field, theta, x0, grid, solver).states);
      total += rsse(pred, target);
      ++out.evaluated;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  out.mean_rsse = out.evaluated > 0 ? total / out.evaluated : kNaN;
  return out;
}

// ---- records -----------------------------------------------------------------------

CsvRecordSink::CsvRecordSink(std::ostream& out) : out_(out) { out_ << header() << '\n'; }

const char* CsvRecordSink::header() {
  return "epoch,sse,rsse_ode,grad_theta_norm,grad_x_norm,residual_norm,epoch_seconds";
}

void CsvRecordSink::on_epoch(const EpochRow& r) {
  out_ << r.epoch << ',' << format_double(r.sse) << ',' << format_double(r.rsse_ode) << ','
       << format_double(r.grad_theta_norm) << ',' << format_double(r.grad_x_norm) << ','
       << format_double(r.residual_norm) << ',' << format_double(r.epoch_seconds) << '\n';
}

bool RunSummary::any_failure() const {
  return std::any_of(entries.begin(), entries.end(), [](const RunSummaryEntry& e) {
    return e.status == RunStatus::diverged || e.status == RunStatus::solver_failed;
  });
}

std::string summary_to_json(const RunSummary& summary) {
  json runs = json::object();
  for (const auto& e : summary.entries) {
    runs[std::string(to_string(e.algorithm))][std::to_string(e.num_particles)] = entry_json(e);
  }
  json j;
  j["runs"] = std::move(runs);
  j["any_failure"] = summary.any_failure();
  return j.dump(2);
}

// ---- runs ---------------------------------------------------------------------------

TrainConfig train_config_for(const ExperimentConfig& cfg, Algorithm alg) {
  TrainConfig t = TrainConfig::defaults_for(alg);
  t.epochs = cfg.epochs;
  t.seed = cfg.seed;
  t.rho = cfg.rho;
  t.rsse_every = cfg.rsse_every;
  t.residual.midpoint_coeff = cfg.midpoint_coeff;
  return t;
}

RunSummaryEntry run_single(const ExperimentConfig& cfg, const Dataset& data, Algorithm alg,
                           RecordSink* sink) {
  const Index n = data.num_particles;
  const CuckerSmale field(n);
  const IdentityObservation obs(4 * n);
  const Problem problem{field, obs, data.targets, data.x0, data.grid, cfg.solver};
  const TrainConfig tcfg = train_config_for(cfg, alg);
  const TrainResult result = train(problem, TrainInit{data.init.to_vector(), {}, {}}, tcfg, sink);

  RunSummaryEntry e;
  e.algorithm = alg;
  e.num_particles = n;
  e.status = result.status;
  e.message = result.message;
  e.theta = result.theta;
  const auto& rows = result.record.rows;
  e.epochs_run = static_cast<int>(rows.size());
  double seconds = 0.0;
  for (const auto& r : rows) seconds += r.epoch_seconds;
  e.mean_epoch_seconds = rows.empty() ? kNaN : seconds / static_cast<double>(rows.size());
  e.total_seconds = rows.empty() ? 0.0 : e.mean_epoch_seconds * static_cast<double>(rows.size());
  e.final_sse = rows.empty() ? kNaN : rows.back().sse;
  e.final_rsse_ode = result.theta.allFinite()
                         ? rsse_on_ode(field, result.theta, data.x0, data.grid, cfg.solver, obs,
                                       data.targets)
                               .value_or(kNaN)
                         : kNaN;
  const TestEvaluation test = evaluate_test(field, result.theta, data.test_x0s,
                                            data.truth.to_vector(), data.grid, cfg.solver, obs);
  e.test_mean_rsse = test.mean_rsse;
  e.test_failures = test.failures;
  return e;
}

RunSummary run_benchmark(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const fs::path root(cfg.out_dir);
  fs::create_directories(root / "plots");
  write_text(root / "config.json", to_json(cfg) + "\n");

  std::vector<Dataset> datasets;
  for (Index n : cfg.particle_counts) {
    datasets.push_back(generate_dataset(cfg, n, log));
    fs::create_directories(root / ("N" + std::to_string(n)));
    save_dataset(root / ("N" + std::to_string(n)) / "dataset.txt", datasets.back());
  }

  struct Job {
    std::size_t dataset;
    Algorithm alg;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (Algorithm a : cfg.algorithms) jobs.push_back({d, a});
  }
  std::vector<RunSummaryEntry> entries(jobs.size());
  std::vector<std::vector<EpochRow>> records(jobs.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      const Dataset& data = datasets[job.dataset];
      const std::string alg_name(to_string(job.alg));
      const fs::path csv = root / ("N" + std::to_string(data.num_particles)) / (alg_name + ".csv");
      RunSummaryEntry& e = entries[k];
      std::ofstream out(csv);
      try {
        if (!out) throw Error("cannot write " + csv.string());
        CsvRecordSink csv_sink(out);
        CollectingSink collect(&csv_sink);
        e = run_single(cfg, data, job.alg, &collect);
        records[k] = std::move(collect.rows);
      } catch (const std::exception& ex) {
        e.algorithm = job.alg;
        e.num_particles = data.num_particles;
        e.status = RunStatus::diverged;
        e.message = ex.what();
        e.final_sse = e.final_rsse_ode = e.test_mean_rsse = kNaN;
      }
      out.flush();
      if (log != nullptr) {
        const std::lock_guard<std::mutex> lock(log_mutex);
        *log << alg_name << " N=" << data.num_particles << ": " << to_string(e.status)
             << ", final SSE " << format_double(e.final_sse) << ", mean epoch "
             << format_double(e.mean_epoch_seconds) << " s\n";
      }
    }
  };
  const int width = std::min<int>(cfg.threads, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunSummary summary{entries};
  write_text(root / "summary.json", summary_to_json(summary) + "\n");

  for (const Dataset& data : datasets) {
    std::vector<PlotSeries> sse_series;
    std::vector<PlotSeries> rsse_series;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (datasets[jobs[k].dataset].num_particles != data.num_particles) continue;
      PlotSeries s{std::string(to_string(jobs[k].alg)), {}, {}};
      PlotSeries r = s;
      for (const auto& row : records[k]) {
        s.x.push_back(row.epoch);
        s.y.push_back(row.sse);
        if (std::isfinite(row.rsse_ode)) {
          r.x.push_back(row.epoch);
          r.y.push_back(row.rsse_ode);
        }
      }
      sse_series.push_back(std::move(s));
      rsse_series.push_back(std::move(r));
    }
    const std::string tag = "N" + std::to_string(data.num_particles);
    write_text(root / "plots" / ("sse_" + tag + ".svg"),
               render_line_plot({"Training SSE, " + tag, "epoch", "SSE"}, sse_series));
    write_text(root / "plots" / ("rsse_" + tag + ".svg"),
               render_line_plot({"RSSE on ODE solution, " + tag, "epoch", "RSSE"}, rsse_series));
  }
  return summary;
}

}  // namespace odefit
