// Command line front end: sample graphs, run trial batches, evaluate the
// isolation integral, solve regime radii, and validate persisted runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "softgeo/softgeo.hpp"

namespace {

using softgeo::json;

json read_json_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw std::invalid_argument("cannot open '" + arg + "'");
  json j;
  in >> j;
  return j;
}

struct SimulateArgs {
  std::string connection;
  uint64_t n = 0;
  double intensity = -1.0;
  uint64_t seed = 1;
  uint32_t stream = 0;
  std::string mode = "cell_list";
  double tail_eps = 1e-12;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto f = softgeo::ConnectionFunction::parse(read_json_arg(a.connection));
  if ((a.n > 0) == (a.intensity >= 0.0))
    throw std::invalid_argument("simulate: give exactly one of --n and --intensity");
  softgeo::SamplerOptions opts;
  opts.mode = a.mode == "exact" ? softgeo::SamplerMode::Exact
                                : softgeo::SamplerMode::CellList;
  opts.tail_eps = a.tail_eps;
  const softgeo::PointSet pts =
      a.n > 0 ? softgeo::sample_binomial(a.n, f.dim(), a.seed, a.stream)
              : softgeo::sample_poisson(a.intensity, f.dim(), a.seed, a.stream);
  const softgeo::SoftGraph g =
      softgeo::sample_graph(pts, f, a.seed, a.stream, opts);
  const softgeo::ComponentSummary cs = softgeo::component_summary(g);
  if (!a.out.empty()) {
    std::filesystem::create_directories(a.out);
    softgeo::write_csv(pts, (std::filesystem::path(a.out) / "points.csv").string());
    std::ofstream eout(std::filesystem::path(a.out) / "edges.csv");
    if (!eout) throw std::runtime_error("simulate: cannot write edges.csv");
    eout << "i,j,length\n";
    char buf[32];
    for (const auto& [i, j] : g.edges) {
      const double d2 = pts.sq_dist(i, j);
      const int len = std::snprintf(buf, sizeof buf, "%.17g", std::sqrt(d2));
      eout << i << ',' << j << ',';
      eout.write(buf, len);
      eout << '\n';
    }
  }
  json out{{"n_points", cs.n_vertices},
           {"n_edges", cs.n_edges},
           {"n_components", cs.n_components},
           {"n0", cs.n0},
           {"l1", cs.l1},
           {"l2", cs.l2},
           {"min_degree", cs.min_degree},
           {"connected", cs.connected}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  int threads = 0;  // 0 = keep config value
};

int cmd_experiment(const ExperimentArgs& a) {
  softgeo::ExperimentConfig cfg =
      softgeo::parse_experiment_config(read_json_arg(a.config));
  if (a.threads > 0) cfg.threads = a.threads;
  const auto t0 = std::chrono::steady_clock::now();
  const softgeo::ExperimentResult result = softgeo::run_experiment(cfg);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  if (!a.out.empty()) softgeo::persist_experiment(result, a.out);
  std::cout << result.summary.dump(2) << '\n';
  std::fprintf(stderr, "runtime_seconds %.3f\n", dt.count());
  return 0;
}

struct IntegrateArgs {
  std::string connection;
  double intensity = 0.0;
  std::string kernel = "poisson";
  double rel_tol = 1e-8;
  std::size_t cell_budget = 400000;
  bool decompose = false;
};

int cmd_integrate(const IntegrateArgs& a) {
  const auto f = softgeo::ConnectionFunction::parse(read_json_arg(a.connection));
  softgeo::IsolationOptions opts;
  opts.kernel = a.kernel == "binomial" ? softgeo::Kernel::Binomial
                                       : softgeo::Kernel::Poisson;
  opts.rel_tol = a.rel_tol;
  opts.cell_budget = a.cell_budget;
  const softgeo::IntegralResult res =
      softgeo::expected_isolated(a.intensity, f, opts);
  json out{{"kernel", a.kernel},
           {"intensity", a.intensity},
           {"value", res.value},
           {"error_estimate", res.error_estimate},
           {"cells", res.cells}};
  if (a.decompose) {
    const auto bd = softgeo::boundary_decomposition(a.intensity, f);
    out["decomposition"] = json{{"interior", bd.interior},
                                {"side", bd.side},
                                {"corner", bd.corner},
                                {"total", bd.total},
                                {"a_n", bd.a_n},
                                {"nI", bd.nI}};
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct SolveArgs {
  std::string regime;
  double n = 0.0;
  double p = 1.0;
  double alpha = 1.0;
  std::string shape = "step";
  double J1 = -1.0;
  double J2 = -1.0;
};

int cmd_solve(const SolveArgs& a) {
  softgeo::RegimeSpec spec;
  spec.regime = softgeo::parse_regime(a.regime);
  spec.n = a.n;
  spec.p = a.p;
  spec.alpha = a.alpha;
  json shape_echo;
  // rho_eta of the unit-scale shape; the solved r divided by this is the
  // scale to instantiate the profile at
  double scale_ref = 1.0;
  if (a.shape == "step") {
    shape_echo = json{{"kind", "step"}};
  } else {
    if (a.p != 1.0)
      throw std::invalid_argument(
          "solve: non-step shapes carry their own attenuation, leave --p at 1");
    softgeo::ShapeDescriptor sd;
    if (a.shape.rfind("rayleigh:", 0) == 0) {
      double beta = 0.0, gamma = 0.0;
      if (std::sscanf(a.shape.c_str() + 9, "%lf,%lf", &beta, &gamma) != 2)
        throw std::invalid_argument(
            "solve: expected --shape rayleigh:beta,gamma");
      const auto probe =
          softgeo::ConnectionFunction::rayleigh(beta, gamma, 1.0, 2);
      sd = softgeo::shape_integrals(probe);
      shape_echo = json{{"kind", "rayleigh"}, {"beta", beta}, {"gamma", gamma}};
    } else {
      // anything else names a connection JSON file or inline object
      const auto f =
          softgeo::ConnectionFunction::parse(read_json_arg(a.shape));
      sd = softgeo::shape_integrals(f);
      spec.p = sd.mu;  // retention at the profile peak
      shape_echo = json(f);
    }
    spec.J1 = sd.J1;
    spec.J2 = sd.J2;
    scale_ref = sd.rho_eta;
  }
  if (a.J1 > 0.0) spec.J1 = a.J1;
  if (a.J2 > 0.0) spec.J2 = a.J2;
  const softgeo::RegimeSolution sol = softgeo::solve_r(spec);
  const softgeo::RegimeClass cls = softgeo::classify_regime(spec.n, spec.p);
  json out{{"regime", softgeo::regime_name(sol.regime)},
           {"n", a.n},
           {"p", spec.p},
           {"alpha", a.alpha},
           {"shape", shape_echo},
           {"J1", spec.J1},
           {"J2", spec.J2},
           {"r", sol.r},
           {"scale_factor", sol.r / scale_ref},
           {"nI_target", sol.nI},
           {"aux_root", sol.aux_root},
           {"ratios", json{{"u", sol.u}, {"v", sol.v}}},
           {"classification", json{{"regime", softgeo::regime_name(cls.regime)},
                                   {"u", cls.u},
                                   {"v", cls.v}}}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_report(const std::string& dir, const std::string& csv_path) {
  const softgeo::LoadedExperiment le = softgeo::load_experiment(dir);
  const json& s = le.summary;
  // compare against the quadrature mean when the run recorded one, otherwise
  // against the empirical mean
  const double lambda = s.contains("quadrature_reference")
                            ? s["quadrature_reference"]["value"].get<double>()
                            : s["mean_n0"].get<double>();
  const double trials = s["trials"].get<double>();
  std::map<std::size_t, double> freq;
  std::size_t kmax = 0;
  for (const auto& [key, count] : s["n0_histogram"].items()) {
    const std::size_t k = std::stoull(key);
    freq[k] = count.get<double>() / trials;
    kmax = std::max(kmax, k);
  }
  std::ostringstream csv;
  csv << "n0,empirical_freq,poisson_pmf\n";
  char buf[32];
  double pmf = std::exp(-lambda);
  for (std::size_t k = 0; k <= kmax || (pmf > 1e-12 && k <= kmax + 64); ++k) {
    const auto it = freq.find(k);
    csv << k << ',';
    std::snprintf(buf, sizeof buf, "%.12g", it == freq.end() ? 0.0 : it->second);
    csv << buf << ',';
    std::snprintf(buf, sizeof buf, "%.12g", pmf);
    csv << buf << '\n';
    pmf *= lambda / static_cast<double>(k + 1);
  }
  if (csv_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("report: cannot write " + csv_path);
    out << csv.str();
    std::fprintf(stderr, "wrote %s (%zu records validated)\n", csv_path.c_str(),
                 le.records.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft random geometric graph toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "sample one graph");
  simulate->add_option("--connection", sim.connection,
                       "connection JSON (file path or inline object)")
      ->required();
  simulate->add_option("--n", sim.n, "binomial point count");
  simulate->add_option("--intensity", sim.intensity, "poisson intensity");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--stream", sim.stream, "stream index");
  simulate->add_option("--mode", sim.mode, "sampler mode")
      ->check(CLI::IsMember({"exact", "cell_list"}));
  simulate->add_option("--tail-eps", sim.tail_eps, "cell list tail level");
  simulate->add_option("--out", sim.out, "directory for points.csv/edges.csv");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "run a trial batch");
  experiment->add_option("--config", exp.config,
                         "experiment config JSON (file path or inline object)")
      ->required();
  experiment->add_option("--out", exp.out, "directory for records + summary");
  experiment->add_option("--threads", exp.threads, "worker thread override");

  IntegrateArgs integ;
  auto* integrate =
      app.add_subcommand("integrate", "expected isolated count by quadrature");
  integrate->add_option("--connection", integ.connection,
                        "connection JSON (file path or inline object)")
      ->required();
  integrate->add_option("--intensity", integ.intensity, "points per unit volume")
      ->required();
  integrate->add_option("--kernel", integ.kernel, "point process kernel")
      ->check(CLI::IsMember({"poisson", "binomial"}));
  integrate->add_option("--rel-tol", integ.rel_tol, "relative tolerance");
  integrate->add_option("--cell-budget", integ.cell_budget, "max mesh leaves");
  integrate->add_flag("--decompose", integ.decompose,
                      "include the interior/side/corner split");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "radius for a target regime");
  solve_cmd->add_option("--regime", solve.regime, "target regime")->required();
  solve_cmd->add_option("--n", solve.n, "number of points")->required();
  solve_cmd->add_option("--p", solve.p, "retention probability");
  solve_cmd->add_option("--alpha", solve.alpha, "target expected isolated count");
  solve_cmd->add_option("--shape", solve.shape,
                        "step | rayleigh:beta,gamma | connection JSON "
                        "(file path or inline)");
  solve_cmd->add_option("--J1", solve.J1, "override ray shape constant J1");
  solve_cmd->add_option("--J2", solve.J2, "override polar shape constant J2");

  std::string report_dir;
  std::string report_csv;
  auto* report = app.add_subcommand(
      "report", "validate a persisted run and tabulate its count law");
  report->add_option("--dir", report_dir, "experiment directory")->required();
  report->add_option("--csv", report_csv,
                     "write the histogram table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (experiment->parsed()) return cmd_experiment(exp);
    if (integrate->parsed()) return cmd_integrate(integ);
    if (solve_cmd->parsed()) return cmd_solve(solve);
    if (report->parsed()) return cmd_report(report_dir, report_csv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
