#pragma once

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "softgeo/analysis.hpp"
#include "softgeo/connection.hpp"
#include "softgeo/graph.hpp"
#include "softgeo/points.hpp"
#include "softgeo/quadrature.hpp"
#include "softgeo/regimes.hpp"

namespace softgeo {

struct RegimeRequest {
  Regime regime = Regime::Core;
  double p = 1.0;
  double alpha = 1.0;
  // Shape of the profile whose level radius the solver chooses. "step" keeps
  // the solved radius directly; "rayleigh" rescales rho so the profile's
  // level radius matches it (and requires p = 1, the profile peak).
  std::string shape = "step";
  double ray_beta = 1.0;
  double ray_gamma = 2.0;
};

struct ExperimentConfig {
  std::string point_model = "binomial";  // "binomial" or "poisson"
  double n_points = 0.0;                 // count resp. intensity
  int dimension = 2;
  std::optional<ConnectionFunction> connection;
  std::optional<RegimeRequest> regime;
  std::size_t trials = 1;
  uint64_t master_seed = 1;
  SamplerOptions sampler;
  bool want_thresholds = false;
  bool want_small_components = false;
  std::size_t small_components_max_order = 3;
  bool quadrature_reference = true;
  int threads = 1;
};

struct TrialRecord {
  uint64_t trial_id = 0;
  std::size_t n_points = 0;
  std::size_t n_edges = 0;
  std::size_t n0 = 0;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  bool connected = false;
  uint32_t min_degree = 0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> small_counts;  // [k] = components of order k
};

struct ExperimentResult {
  ExperimentConfig config;
  ConnectionFunction connection;  // resolved profile actually simulated
  std::optional<RegimeSolution> regime_solution;
  std::vector<TrialRecord> records;
  json summary;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

inline const std::vector<std::string> kKnownTopLevel = {
    "points", "dimension", "connection", "regime", "trials",
    "master_seed", "sampler", "statistics", "small_components_max_order",
    "quadrature_reference", "threads"};

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  detail::require(j.is_object(), "config: expected a JSON object");
  for (const auto& item : j.items())
    detail::require(std::find(detail::kKnownTopLevel.begin(),
                              detail::kKnownTopLevel.end(),
                              item.key()) != detail::kKnownTopLevel.end(),
                    "config: unknown key '" + item.key() + "'");

  detail::require(j.contains("points"), "config: missing 'points'");
  const auto& pts = j.at("points");
  cfg.point_model = pts.value("model", "binomial");
  detail::require(cfg.point_model == "binomial" || cfg.point_model == "poisson",
                  "config: points.model must be 'binomial' or 'poisson'");
  if (cfg.point_model == "binomial") {
    detail::require(pts.contains("n"), "config: binomial points need 'n'");
    cfg.n_points = pts.at("n").get<double>();
    detail::require(cfg.n_points >= 0.0 &&
                        cfg.n_points == std::floor(cfg.n_points),
                    "config: points.n must be a nonnegative integer");
  } else {
    detail::require(pts.contains("intensity"),
                    "config: poisson points need 'intensity'");
    cfg.n_points = pts.at("intensity").get<double>();
    detail::require(cfg.n_points >= 0.0 && std::isfinite(cfg.n_points),
                    "config: points.intensity must be finite and >= 0");
  }

  cfg.dimension = j.value("dimension", 2);
  detail::require(cfg.dimension == 2 || cfg.dimension == 3,
                  "config: dimension must be 2 or 3");

  const bool has_conn = j.contains("connection");
  const bool has_regime = j.contains("regime");
  detail::require(has_conn != has_regime,
                  "config: exactly one of 'connection' and 'regime' is required");
  if (has_conn) {
    cfg.connection = ConnectionFunction::parse(j.at("connection"));
    detail::require(cfg.connection->dim() == cfg.dimension,
                    "config: connection dimension differs from 'dimension'");
  } else {
    const auto& rj = j.at("regime");
    RegimeRequest rq;
    detail::require(rj.contains("regime"), "config: regime needs 'regime'");
    rq.regime = parse_regime(rj.at("regime").get<std::string>());
    rq.p = rj.value("p", 1.0);
    rq.alpha = rj.value("alpha", 1.0);
    if (rj.contains("shape")) {
      const auto& sj = rj.at("shape");
      rq.shape = sj.value("kind", "step");
      detail::require(rq.shape == "step" || rq.shape == "rayleigh",
                      "config: regime shape must be 'step' or 'rayleigh'");
      if (rq.shape == "rayleigh") {
        rq.ray_beta = sj.value("beta", 1.0);
        rq.ray_gamma = sj.value("gamma", 2.0);
      }
    }
    detail::require(cfg.dimension == 2, "config: regime solving is planar only");
    cfg.regime = rq;
  }

  cfg.trials = j.value("trials", std::size_t{1});
  detail::require(cfg.trials >= 1, "config: trials must be >= 1");
  cfg.master_seed = j.value("master_seed", uint64_t{1});

  if (j.contains("sampler")) {
    const auto& sj = j.at("sampler");
    const std::string mode = sj.value("mode", "cell_list");
    detail::require(mode == "cell_list" || mode == "exact",
                    "config: sampler.mode must be 'cell_list' or 'exact'");
    cfg.sampler.mode =
        mode == "exact" ? SamplerMode::Exact : SamplerMode::CellList;
    cfg.sampler.tail_eps = sj.value("tail_eps", 1e-12);
    detail::require(cfg.sampler.tail_eps > 0.0 && cfg.sampler.tail_eps < 1.0,
                    "config: sampler.tail_eps must lie in (0, 1)");
  }

  if (j.contains("statistics")) {
    detail::require(j.at("statistics").is_array(),
                    "config: statistics must be an array");
    for (const auto& s : j.at("statistics")) {
      const std::string name = s.get<std::string>();
      if (name == "thresholds")
        cfg.want_thresholds = true;
      else if (name == "small_components")
        cfg.want_small_components = true;
      else
        detail::require(false, "config: unknown statistic '" + name + "'");
    }
  }
  cfg.small_components_max_order = j.value("small_components_max_order",
                                           std::size_t{3});
  detail::require(cfg.small_components_max_order >= 1,
                  "config: small_components_max_order must be >= 1");
  cfg.quadrature_reference = j.value("quadrature_reference", true);
  cfg.threads = j.value("threads", 1);
  detail::require(cfg.threads >= 1 && cfg.threads <= 256,
                  "config: threads must lie in [1, 256]");
  return cfg;
}

// Normalized echo of the configuration. Execution details (threads) are
// deliberately left out so summaries are byte-identical across runners.
inline json config_echo(const ExperimentConfig& cfg) {
  json pts{{"model", cfg.point_model}};
  if (cfg.point_model == "binomial")
    pts["n"] = static_cast<uint64_t>(cfg.n_points);
  else
    pts["intensity"] = cfg.n_points;
  json j{{"points", pts}, {"dimension", cfg.dimension}};
  if (cfg.connection) {
    j["connection"] = *cfg.connection;
  } else {
    const auto& rq = *cfg.regime;
    json rj{{"regime", regime_name(rq.regime)}, {"p", rq.p},
            {"alpha", rq.alpha}};
    if (rq.shape == "rayleigh")
      rj["shape"] = json{{"kind", "rayleigh"},
                         {"beta", rq.ray_beta},
                         {"gamma", rq.ray_gamma}};
    else
      rj["shape"] = json{{"kind", "step"}};
    j["regime"] = rj;
  }
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["sampler"] =
      json{{"mode", cfg.sampler.mode == SamplerMode::Exact ? "exact"
                                                           : "cell_list"},
           {"tail_eps", cfg.sampler.tail_eps}};
  json stats = json::array();
  if (cfg.want_thresholds) stats.push_back("thresholds");
  if (cfg.want_small_components) stats.push_back("small_components");
  j["statistics"] = stats;
  if (cfg.want_small_components)
    j["small_components_max_order"] = cfg.small_components_max_order;
  j["quadrature_reference"] = cfg.quadrature_reference;
  return j;
}

// The profile a config actually simulates; regime requests are solved here.
inline ConnectionFunction resolve_connection(
    const ExperimentConfig& cfg, std::optional<RegimeSolution>* solution_out) {
  if (solution_out) solution_out->reset();
  if (cfg.connection) return *cfg.connection;
  const auto& rq = *cfg.regime;
  detail::require(cfg.n_points > 1.0,
                  "config: regime solving needs more than one point");
  RegimeSpec spec;
  spec.regime = rq.regime;
  spec.n = cfg.n_points;
  spec.p = rq.p;
  spec.alpha = rq.alpha;
  if (rq.shape == "step") {
    const RegimeSolution sol = solve_r(spec);
    if (solution_out) *solution_out = sol;
    return ConnectionFunction::step(sol.r, rq.p, 2);
  }
  detail::require(rq.p == 1.0,
                  "config: rayleigh regime shapes require p = 1 (profile peak)");
  const auto probe = ConnectionFunction::rayleigh(rq.ray_beta, rq.ray_gamma,
                                                  1.0, 2);
  const ShapeDescriptor sd = shape_integrals(probe);
  spec.J1 = sd.J1;
  spec.J2 = sd.J2;
  const RegimeSolution sol = solve_r(spec);
  if (solution_out) *solution_out = sol;
  // Scale rho so the profile's level radius lands on the solved radius.
  return ConnectionFunction::rayleigh(rq.ray_beta, rq.ray_gamma,
                                      sol.r / sd.rho_eta, 2);
}

// Total variation distance between the empirical histogram of counts and a
// Poisson law, including the Poisson mass beyond the largest observed count.
inline double tv_to_poisson(const std::map<std::size_t, std::size_t>& histogram,
                            std::size_t trials, double lambda) {
  if (trials == 0 || !(lambda >= 0.0))
    throw std::invalid_argument("tv_to_poisson: need trials > 0, lambda >= 0");
  const std::size_t kmax =
      histogram.empty() ? 0 : histogram.rbegin()->first;
  double pmf = std::exp(-lambda);
  double pmf_sum = 0.0;
  double tv = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    const auto it = histogram.find(k);
    const double emp =
        it == histogram.end()
            ? 0.0
            : static_cast<double>(it->second) / static_cast<double>(trials);
    tv += std::fabs(emp - pmf);
    pmf_sum += pmf;
    pmf *= lambda / static_cast<double>(k + 1);
  }
  tv += std::max(0.0, 1.0 - pmf_sum);  // unobserved upper tail
  return 0.5 * tv;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::optional<RegimeSolution> sol;
  ConnectionFunction resolved = resolve_connection(cfg, &sol);
  ExperimentResult result{cfg, std::move(resolved), sol, {}, {}};
  const ConnectionFunction& f = result.connection;
  detail::require(f.dim() == cfg.dimension,
                  "config: profile dimension differs from 'dimension'");
  if (cfg.want_thresholds)
    detail::require(f.kind() == Kind::Step,
                    "config: thresholds require a step profile");

  const std::size_t trials = cfg.trials;
  result.records.resize(trials);

  const auto run_trial = [&](std::size_t t) {
    const uint32_t stream = static_cast<uint32_t>(t);
    const PointSet pts =
        cfg.point_model == "binomial"
            ? sample_binomial(static_cast<std::size_t>(cfg.n_points),
                              cfg.dimension, cfg.master_seed, stream)
            : sample_poisson(cfg.n_points, cfg.dimension, cfg.master_seed,
                             stream);
    const SoftGraph g =
        sample_graph(pts, f, cfg.master_seed, stream, cfg.sampler);
    const ComponentSummary cs = component_summary(g);
    TrialRecord& rec = result.records[t];
    rec.trial_id = t;
    rec.n_points = cs.n_vertices;
    rec.n_edges = cs.n_edges;
    rec.n0 = cs.n0;
    rec.l1 = cs.l1;
    rec.l2 = cs.l2;
    rec.connected = cs.connected;
    rec.min_degree = cs.min_degree;
    if (cfg.want_small_components)
      rec.small_counts =
          small_component_counts(g, cfg.small_components_max_order);
    if (cfg.want_thresholds) {
      const ThresholdPair th = thresholds_fast(
          pts, f.step_probability(), cfg.master_seed, stream);
      rec.sigma = th.sigma;
      rec.tau = th.tau;
    }
  };

  const int threads = std::min<int>(cfg.threads, static_cast<int>(trials));
  if (threads <= 1) {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= trials) return;
          try {
            run_trial(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Aggregate in trial order so the summary never depends on scheduling.
  std::map<std::size_t, std::size_t> histogram;
  std::size_t sum_n0 = 0, n_connected = 0, n_ghost = 0, n_l2 = 0,
              n_sigma_eq_tau = 0;
  std::vector<std::size_t> small_sums(cfg.small_components_max_order + 1, 0);
  for (const TrialRecord& rec : result.records) {
    ++histogram[rec.n0];
    sum_n0 += rec.n0;
    if (rec.connected) ++n_connected;
    if (rec.n0 == 0 && !rec.connected) ++n_ghost;
    if (rec.l2 > 1) ++n_l2;
    if (cfg.want_thresholds && rec.sigma == rec.tau) ++n_sigma_eq_tau;
    if (cfg.want_small_components)
      for (std::size_t k = 1; k < rec.small_counts.size(); ++k)
        small_sums[k] += rec.small_counts[k];
  }
  const double dt = static_cast<double>(trials);

  json summary;
  summary["config"] = config_echo(cfg);
  json conn_json;
  to_json(conn_json, f);
  summary["resolved_connection"] = conn_json;
  if (result.regime_solution) {
    const auto& rs = *result.regime_solution;
    summary["regime_solution"] = json{{"regime", regime_name(rs.regime)},
                                      {"r", rs.r},
                                      {"nI", rs.nI},
                                      {"aux_root", rs.aux_root},
                                      {"u", rs.u},
                                      {"v", rs.v}};
  }
  summary["trials"] = trials;
  summary["master_seed"] = cfg.master_seed;
  summary["mean_n0"] = static_cast<double>(sum_n0) / dt;
  json hist;
  for (const auto& [k, c] : histogram) hist[std::to_string(k)] = c;
  summary["n0_histogram"] = hist;
  summary["freq_connected"] = static_cast<double>(n_connected) / dt;
  summary["freq_n0_zero_but_disconnected"] = static_cast<double>(n_ghost) / dt;
  summary["freq_l2_gt_1"] = static_cast<double>(n_l2) / dt;
  if (cfg.want_thresholds)
    summary["freq_sigma_eq_tau"] = static_cast<double>(n_sigma_eq_tau) / dt;
  if (cfg.want_small_components) {
    json means = json::array();
    for (std::size_t k = 1; k <= cfg.small_components_max_order; ++k)
      means.push_back(static_cast<double>(small_sums[k]) / dt);
    summary["small_component_means"] = means;
  }
  if (cfg.quadrature_reference) {
    IsolationOptions iopts;
    iopts.kernel = cfg.point_model == "binomial" ? Kernel::Binomial
                                                 : Kernel::Poisson;
    const IntegralResult ref = expected_isolated(cfg.n_points, f, iopts);
    summary["quadrature_reference"] =
        json{{"kernel", iopts.kernel == Kernel::Binomial ? "binomial"
                                                         : "poisson"},
             {"value", ref.value},
             {"error_estimate", ref.error_estimate},
             {"cells", ref.cells}};
    summary["tv_to_poisson"] = tv_to_poisson(histogram, trials, ref.value);
  }
  result.summary = std::move(summary);
  return result;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

inline void write_records_csv(const std::vector<TrialRecord>& records,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_records_csv: cannot open " + path);
  out << "trial_id,n_points,n_edges,n0,l1,l2,connected,min_degree,sigma,tau\n";
  for (const auto& rec : records) {
    out << rec.trial_id << ',' << rec.n_points << ',' << rec.n_edges << ','
        << rec.n0 << ',' << rec.l1 << ',' << rec.l2 << ','
        << (rec.connected ? 1 : 0) << ',' << rec.min_degree << ',';
    if (!std::isnan(rec.sigma)) out << detail::format_double(rec.sigma);
    out << ',';
    if (!std::isnan(rec.tau)) out << detail::format_double(rec.tau);
    out << '\n';
  }
  if (!out)
    throw std::runtime_error("write_records_csv: write failed for " + path);
}

inline std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "trial_id,n_points,n_edges,n0,l1,l2,connected,min_degree,sigma,tau")
    throw std::runtime_error("read_records_csv: unexpected header in " + path);
  std::vector<TrialRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const auto bad = [&]() {
      throw std::runtime_error("read_records_csv: bad row at line " +
                               std::to_string(lineno) + " in " + path);
    };
    // Eight unsigned fields, each consumed exactly up to its comma. A field
    // that merely starts with digits (say "5X") is corruption, not a value.
    unsigned long long u[8];
    for (int k = 0; k < 8; ++k) {
      if (*s < '0' || *s > '9') bad();
      errno = 0;
      u[k] = std::strtoull(s, &end, 10);
      if (end == s || *end != ',' || errno) bad();
      s = end + 1;
    }
    TrialRecord rec;
    rec.trial_id = u[0];
    rec.n_points = u[1];
    rec.n_edges = u[2];
    rec.n0 = u[3];
    rec.l1 = u[4];
    rec.l2 = u[5];
    if (u[6] > 1) bad();
    rec.connected = u[6] == 1;
    if (u[7] > 0xffffffffull) bad();
    rec.min_degree = static_cast<uint32_t>(u[7]);
    // sigma then tau; an empty field reads back as NaN
    const auto read_threshold = [&](bool last) {
      if (last ? *s == '\0' : *s == ',') {
        if (!last) ++s;
        return std::numeric_limits<double>::quiet_NaN();
      }
      const double v = std::strtod(s, &end);
      if (end == s || !(v >= 0.0)) bad();
      if (last ? *end != '\0' : *end != ',') bad();
      s = last ? end : end + 1;
      return v;
    };
    rec.sigma = read_threshold(false);
    rec.tau = read_threshold(true);
    records.push_back(rec);
  }
  return records;
}

// Writes records.csv and summary.json into the directory (created if absent).
inline void persist_experiment(const ExperimentResult& result,
                               const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_records_csv(result.records,
                    (std::filesystem::path(dir) / "records.csv").string());
  std::ofstream out(std::filesystem::path(dir) / "summary.json");
  if (!out)
    throw std::runtime_error("persist_experiment: cannot open summary.json");
  out << result.summary.dump(2) << '\n';
  if (!out)
    throw std::runtime_error("persist_experiment: write failed for summary.json");
}

struct LoadedExperiment {
  json summary;
  std::vector<TrialRecord> records;
};

// Reads a persisted experiment back and cross-checks every record-derived
// summary statistic against the stored values; throws on any mismatch.
inline LoadedExperiment load_experiment(const std::string& dir) {
  LoadedExperiment le;
  const auto base = std::filesystem::path(dir);
  {
    std::ifstream in(base / "summary.json");
    if (!in)
      throw std::runtime_error("load_experiment: cannot open summary.json");
    in >> le.summary;
  }
  le.records = read_records_csv((base / "records.csv").string());

  const std::size_t trials = le.summary.at("trials").get<std::size_t>();
  if (trials != le.records.size())
    throw std::runtime_error("load_experiment: record count differs from summary");
  // runs are persisted in trial order, so a permuted, duplicated, or renumbered
  // file is tampering even when the aggregates still balance
  for (std::size_t i = 0; i < le.records.size(); ++i)
    if (le.records[i].trial_id != i)
      throw std::runtime_error(
          "load_experiment: trial ids are not the ordered range 0..trials-1");
  std::map<std::size_t, std::size_t> histogram;
  std::size_t sum_n0 = 0, n_connected = 0, n_ghost = 0, n_l2 = 0;
  for (const auto& rec : le.records) {
    ++histogram[rec.n0];
    sum_n0 += rec.n0;
    if (rec.connected) ++n_connected;
    if (rec.n0 == 0 && !rec.connected) ++n_ghost;
    if (rec.l2 > 1) ++n_l2;
  }
  const double dt = static_cast<double>(trials);
  const auto check = [&](const char* key, double expect) {
    const double got = le.summary.at(key).get<double>();
    if (!(got == expect))
      throw std::runtime_error(std::string("load_experiment: stored '") + key +
                               "' disagrees with records");
  };
  check("mean_n0", static_cast<double>(sum_n0) / dt);
  check("freq_connected", static_cast<double>(n_connected) / dt);
  check("freq_n0_zero_but_disconnected", static_cast<double>(n_ghost) / dt);
  check("freq_l2_gt_1", static_cast<double>(n_l2) / dt);
  json hist;
  for (const auto& [k, c] : histogram) hist[std::to_string(k)] = c;
  if (le.summary.at("n0_histogram") != hist)
    throw std::runtime_error(
        "load_experiment: stored histogram disagrees with records");
  return le;
}

}  // namespace softgeo
