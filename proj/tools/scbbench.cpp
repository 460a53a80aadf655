#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <atomic>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "scbadmm/baseline.hpp"
#include "scbadmm/instances.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace scbadmm;

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("instance spec: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

template <typename T>
T kv_get(const std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::istringstream in(it->second);
  T v{};
  if (!(in >> v) || !in.eof())
    throw std::runtime_error("instance spec: bad value for '" + key + "': " + it->second);
  return v;
}

Eigen::SparseMatrix<double> random_sparse_symmetric(int n0, unsigned long long seed) {
  std::mt19937_64 rng(seed * 2654435761ULL + 17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n0; ++i)
    for (int j = i; j < n0; ++j) {
      const double v = unif(rng);
      trips.emplace_back(i, j, v);
      if (i != j) trips.emplace_back(j, i, v);
    }
  Eigen::SparseMatrix<double> Q(n0, n0);
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

// Instance spec grammar:
//   scalar
//   qsdp:n=30,mE=20,rank=5,seed=1
//   biq:file=PATH,rank=5,seed=1      (or biq:n0=10,... for a synthetic cost)
//   ncm:n=20,alpha=0.1,kind=fro,seed=1   (kind in {fro, spec})
BuiltInstance build_instance(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "scalar") return build_scalar_qsdp();
  const auto kv = parse_kv(body);
  if (head == "qsdp") {
    return build_random_qsdp(kv_get(kv, "n", 30), kv_get(kv, "mE", 20), kv_get(kv, "rank", 5),
                             kv_get<unsigned long long>(kv, "seed", 0));
  }
  if (head == "biq") {
    const auto seed = kv_get<unsigned long long>(kv, "seed", 0);
    const int rank = kv_get(kv, "rank", 5);
    if (kv.count("file")) {
      const SparseInstanceData data = load_sparse_instance(kv.at("file"));
      return build_biq(data.Q, data.c, rank, seed);
    }
    const int n0 = kv_get(kv, "n0", 10);
    std::mt19937_64 rng(seed * 31337ULL + 5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vec c(n0);
    for (int i = 0; i < n0; ++i) c[i] = unif(rng);
    return build_biq(random_sparse_symmetric(n0, seed), c, rank, seed);
  }
  if (head == "ncm") {
    const auto it = kv.find("kind");
    const std::string kind = it == kv.end() ? "fro" : it->second;
    if (kind != "fro" && kind != "spec")
      throw std::runtime_error("instance spec: kind must be fro or spec");
    return build_ncm(kv_get(kv, "n", 20), kv_get(kv, "alpha", 0.1),
                     kind == "fro" ? NormKind::Frobenius : NormKind::Spectral,
                     kv_get<unsigned long long>(kv, "seed", 0));
  }
  throw std::runtime_error("instance spec: unknown family '" + head + "'");
}

SolveResult run_solver(const std::string& solver, const BuiltInstance& inst,
                       const SolverConfig& cfg) {
  if (solver == "scb") return scb_spadmm_solve(inst.problem, cfg, inst.residual);
  if (solver == "direct_admm") return direct_admm_solve(inst.problem, cfg, inst.residual);
  if (solver == "spadmm2") {
    if (inst.problem.p() != 0 || inst.problem.q() != 0)
      throw std::runtime_error("spadmm2 requires a 2-block instance (no quadratic blocks); '" +
                               inst.name + "' has " + std::to_string(inst.problem.p()) + "+" +
                               std::to_string(inst.problem.q()));
    return scb_spadmm_solve(inst.problem, cfg, inst.residual);
  }
  throw std::runtime_error("unknown solver '" + solver + "'");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_log_csv(const fs::path& path, const SolveResult& r) {
  std::ofstream out(path);
  out << "iter,eta,eta_P,eta_D,eta_gap,obj_P,obj_D,elapsed_s\n";
  for (const auto& t : r.trace)
    out << t.iter << "," << fmt(t.eta) << "," << fmt(t.eta_P) << "," << fmt(t.eta_D) << ","
        << fmt(t.eta_gap) << "," << fmt(t.obj_P) << "," << fmt(t.obj_D) << "," << fmt(t.elapsed_s)
        << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string summary_header() {
  return "name,solver,termination,iterations,eta,eta_P,eta_D,eta_gap,obj_P,obj_D,sigma,tau,tol,"
         "max_iter,seed";
}

std::string summary_row(const std::string& name, const std::string& solver, const SolveResult& r,
                        const SolverConfig& cfg) {
  const ResidualReport& t = r.trace.back();
  std::ostringstream os;
  os << name << "," << solver << "," << termination_name(r.termination) << "," << t.iter << ","
     << fmt(t.eta) << "," << fmt(t.eta_P) << "," << fmt(t.eta_D) << "," << fmt(t.eta_gap) << ","
     << fmt(t.obj_P) << "," << fmt(t.obj_D) << "," << fmt(cfg.sigma) << "," << fmt(cfg.tau) << ","
     << fmt(cfg.tol) << "," << cfg.max_iter << "," << cfg.seed;
  return os.str();
}

struct CommonOpts {
  std::vector<std::string> instances;
  std::vector<std::string> solvers;
  SolverConfig cfg;
  std::string out_dir = ".";
  std::string spec_file;
  int jobs = 1;
  bool tau_explicit = false;
};

// The directly extended baseline runs with tau = 1 unless overridden.
SolverConfig effective_cfg(const CommonOpts& o, const std::string& solver) {
  SolverConfig c = o.cfg;
  if (!o.tau_explicit && solver == "direct_admm") c.tau = 1.0;
  return c;
}

void apply_spec_file(CommonOpts& o, const CLI::App& app) {
  if (o.spec_file.empty()) return;
  std::ifstream in(o.spec_file);
  if (!in) throw std::runtime_error("cannot open spec file " + o.spec_file);
  json j;
  in >> j;
  auto unset = [&](const char* flag) { return app.get_option(flag)->count() == 0; };
  if (j.contains("instance") && unset("--instance")) {
    if (j["instance"].is_array())
      o.instances = j["instance"].get<std::vector<std::string>>();
    else
      o.instances = {j["instance"].get<std::string>()};
  }
  if (j.contains("solver") && unset("--solver")) {
    if (j["solver"].is_array())
      o.solvers = j["solver"].get<std::vector<std::string>>();
    else
      o.solvers = {j["solver"].get<std::string>()};
  }
  if (j.contains("sigma") && unset("--sigma")) o.cfg.sigma = j["sigma"].get<double>();
  if (j.contains("tau") && unset("--tau")) {
    o.cfg.tau = j["tau"].get<double>();
    o.tau_explicit = true;
  }
  if (j.contains("tol") && unset("--tol")) o.cfg.tol = j["tol"].get<double>();
  if (j.contains("max_iter") && unset("--max-iter")) o.cfg.max_iter = j["max_iter"].get<long>();
  if (j.contains("seed") && unset("--seed")) o.cfg.seed = j["seed"].get<unsigned long long>();
  if (j.contains("log_every") && unset("--log-every")) o.cfg.log_every = j["log_every"].get<long>();
  if (j.contains("out") && unset("--out")) o.out_dir = j["out"].get<std::string>();
  if (j.contains("jobs") && unset("--jobs")) o.jobs = j["jobs"].get<int>();
}

int cmd_run(CommonOpts& o) {
  if (o.instances.size() != 1) throw std::runtime_error("run: exactly one --instance required");
  if (o.solvers.empty()) o.solvers = {"scb"};
  if (o.solvers.size() != 1) throw std::runtime_error("run: exactly one --solver");
  const BuiltInstance inst = build_instance(o.instances[0]);
  const SolverConfig cfg = effective_cfg(o, o.solvers[0]);
  const SolveResult r = run_solver(o.solvers[0], inst, cfg);
  fs::create_directories(o.out_dir);
  write_log_csv(fs::path(o.out_dir) / "log.csv", r);
  {
    std::ofstream out(fs::path(o.out_dir) / "summary.csv");
    out << summary_header() << "\n" << summary_row(inst.name, o.solvers[0], r, cfg) << "\n";
    if (!out) throw std::runtime_error("cannot write summary.csv");
  }
  const ResidualReport& last = r.trace.back();
  std::cout << inst.name << " " << o.solvers[0] << ": " << termination_name(r.termination)
            << " after " << last.iter << " iterations, eta=" << last.eta << "\n";
  return r.termination == Termination::ToleranceMet ? 0 : 2;
}

struct PairedRun {
  size_t inst_idx, solver_idx;
  std::string inst_name;
  SolveResult result;
};

int cmd_compare(CommonOpts& o) {
  if (o.instances.empty()) throw std::runtime_error("compare: at least one --instance required");
  if (o.solvers.size() < 2) throw std::runtime_error("compare: at least two --solver entries");
  if (o.jobs < 1) o.jobs = 1;

  struct Task {
    size_t i, s;
  };
  std::vector<Task> tasks;
  for (size_t i = 0; i < o.instances.size(); ++i)
    for (size_t s = 0; s < o.solvers.size(); ++s) tasks.push_back({i, s});

  std::vector<PairedRun> runs(tasks.size());
  std::vector<std::string> errors;
  std::mutex err_mtx;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [i, s] = tasks[t];
      try {
        const BuiltInstance inst = build_instance(o.instances[i]);
        runs[t] = {i, s, inst.name, run_solver(o.solvers[s], inst, effective_cfg(o, o.solvers[s]))};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(err_mtx);
        errors.push_back(o.instances[i] + "/" + o.solvers[s] + ": " + e.what());
      }
    }
  };
  {
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(o.jobs, static_cast<int>(tasks.size()));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  fs::create_directories(o.out_dir);
  {
    std::ofstream out(fs::path(o.out_dir) / "compare.csv");
    out << summary_header() << "\n";
    for (const auto& r : runs)
      if (!r.result.trace.empty())
        out << summary_row(r.inst_name, o.solvers[r.solver_idx], r.result,
                           effective_cfg(o, o.solvers[r.solver_idx]))
            << "\n";
  }

  // Performance profile over iteration counts: (x, y) is on a solver's curve
  // iff it solves 100y% of the problems within x times the per-problem best.
  const size_t ni = o.instances.size(), ns = o.solvers.size();
  std::vector<std::vector<double>> iters(ns, std::vector<double>(ni, kInf));
  for (const auto& r : runs)
    if (!r.result.trace.empty() && r.result.termination == Termination::ToleranceMet)
      iters[r.solver_idx][r.inst_idx] = static_cast<double>(r.result.trace.back().iter);
  {
    std::ofstream out(fs::path(o.out_dir) / "profile.csv");
    out << "ratio,fraction,solver\n";
    for (size_t s = 0; s < ns; ++s) {
      std::vector<double> ratios;
      for (size_t i = 0; i < ni; ++i) {
        double best = kInf;
        for (size_t s2 = 0; s2 < ns; ++s2) best = std::min(best, iters[s2][i]);
        if (std::isfinite(iters[s][i]) && std::isfinite(best) && best > 0)
          ratios.push_back(iters[s][i] / best);
      }
      std::sort(ratios.begin(), ratios.end());
      for (size_t k = 0; k < ratios.size(); ++k) {
        // step value at this ratio: count of ratios <= ratios[k]
        size_t cnt = k + 1;
        while (k + 1 < ratios.size() && ratios[k + 1] == ratios[k]) cnt = ++k + 1;
        out << fmt(ratios[k]) << "," << fmt(static_cast<double>(cnt) / static_cast<double>(ni))
            << "," << o.solvers[s] << "\n";
      }
    }
  }

  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  if (!errors.empty()) return 1;
  bool all_solved = true;
  for (const auto& r : runs)
    if (r.result.termination != Termination::ToleranceMet) all_solved = false;
  return all_solved ? 0 : 2;
}

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--instance", o.instances, "Instance spec (repeatable for compare)");
  sub->add_option("--solver", o.solvers, "Solver: scb | direct_admm | spadmm2");
  sub->add_option("--sigma", o.cfg.sigma, "Penalty parameter");
  sub->add_option("--tau", o.cfg.tau, "Step length");
  sub->add_option("--tol", o.cfg.tol, "Stopping tolerance on eta");
  sub->add_option("--max-iter", o.cfg.max_iter, "Iteration cap");
  sub->add_option("--seed", o.cfg.seed, "Run seed (recorded in outputs)");
  sub->add_option("--log-every", o.cfg.log_every, "Trace cadence");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--spec", o.spec_file, "JSON spec file (flags override)");
  sub->add_option("--jobs", o.jobs, "Parallel worker slots (compare)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block semi-proximal ADMM benchmark harness"};
  app.require_subcommand(1);
  CommonOpts ro, co;
  CLI::App* run = app.add_subcommand("run", "Solve one instance and write log/summary CSVs");
  add_common(run, ro);
  CLI::App* cmp = app.add_subcommand("compare", "Paired solver runs + performance profile");
  add_common(cmp, co);
  CLI11_PARSE(app, argc, argv);
  ro.tau_explicit = run->get_option("--tau")->count() > 0;
  co.tau_explicit = cmp->get_option("--tau")->count() > 0;
  try {
    if (run->parsed()) {
      apply_spec_file(ro, *run);
      return cmd_run(ro);
    }
    apply_spec_file(co, *cmp);
    return cmd_compare(co);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
