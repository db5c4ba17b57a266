#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bopt/config.hpp"
#include "bopt/problems.hpp"
#include "bopt/rng.hpp"
#include "bopt/solvers.hpp"
#include "bopt/subproblem.hpp"
#include "bopt/trace_io.hpp"

namespace bopt {

struct SummaryRow {
  int m = 0;
  int n = 0;
  std::string algorithm;
  double mean_iterations = 0.0;
  double mean_obj = 0.0;
  double mean_acc = 0.0;
  double mean_time_s = 0.0;
  int completed = 0;
  int failed = 0;
};

struct ExperimentReport {
  std::vector<std::string> trace_files;
  std::string summary_file;
  std::vector<SummaryRow> summary;
  int failures = 0;
};

inline constexpr const char* kSummaryHeader =
    "m,n,algorithm,mean_iterations,mean_obj,mean_acc,mean_time_s,status";

namespace detail {

inline std::string trace_file_name(const ExperimentConfig& cfg, int m, int n, int seed_index,
                                   Method method) {
  std::ostringstream name;
  name << (cfg.family == Family::LpLs ? "lp_ls" : "nonneg_kl") << "_m" << m << "_n" << n
       << "_s" << seed_index << '_' << method_name(method) << ".csv";
  return name.str();
}

/// x0 for one run: iid standard normal for the unconstrained family,
/// |N(0,1)| + 0.1 elementwise for the nonnegative one (interior of dom phi,
/// offset keeps the initial Hessian away from the boundary blowup).
inline Vector draw_x0(Family family, Index n, std::uint64_t x0_seed) {
  Rng rng(x0_seed);
  Vector x0(n);
  if (family == Family::LpLs) {
    for (Index i = 0; i < n; ++i) x0[i] = rng.normal();
  } else {
    for (Index i = 0; i < n; ++i) x0[i] = std::abs(rng.normal()) + 0.1;
  }
  return x0;
}

}  // namespace detail

/// Run the full grid of (size, seed, solver) cells described by the config:
/// generate each instance, solve with every requested method, persist one
/// trace CSV per run, and aggregate one summary row per (size, solver).
/// Failures are recorded in the summary status column and do not stop the
/// sweep. Runs are sequenced in a fixed order, so identical configs produce
/// identical files (wall_ns excepted, unless timing = zero).
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  ExperimentReport report;

  struct Accumulator {
    double iters = 0, obj = 0, acc = 0, time_s = 0;
    int completed = 0, failed = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Accumulator> cells;

  for (std::size_t pair_idx = 0; pair_idx < cfg.sizes.size(); ++pair_idx) {
    const auto [m, n] = cfg.sizes[pair_idx];
    for (int seed_idx = 0; seed_idx < cfg.num_seeds; ++seed_idx) {
      const InstanceSpec spec = cfg.instance_spec(pair_idx, seed_idx);
      const GeneratedInstance inst = build_instance(spec);
      const Vector x0 = detail::draw_x0(cfg.family, n, mix_seed(spec.seed));

      if (cfg.save_matrices) {
        std::ostringstream stem;
        stem << (cfg.family == Family::LpLs ? "lp_ls" : "nonneg_kl") << "_m" << m << "_n" << n
             << "_s" << seed_idx;
        const fs::path base = fs::path(cfg.output_dir) / stem.str();
        write_matrix_bin(base.string() + ".A.bin", inst.A);
        write_matrix_bin(base.string() + ".b.bin", inst.b);
        write_matrix_bin(base.string() + ".xstar.bin", inst.x_star);
      }

      for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
        const Method method = cfg.solvers[s];
        Accumulator& acc = cells[{pair_idx, s}];
        try {
          SolverConfig scfg = cfg.solver_config(method);
          SolveOutcome outcome = solve(inst.problem, x0, scfg, &inst.x_star);
          if (cfg.zero_time)
            for (TraceRecord& row : outcome.trace) row.wall_ns = 0;
          const fs::path path =
              fs::path(cfg.output_dir) / detail::trace_file_name(cfg, m, n, seed_idx, method);
          write_trace_csv(path.string(), outcome.trace);
          report.trace_files.push_back(path.string());

          const TraceRecord& last = outcome.trace.back();
          acc.iters += outcome.iterations;
          acc.obj += last.obj;
          acc.acc += last.acc.value_or(0.0);
          acc.time_s += static_cast<double>(last.wall_ns) * 1e-9;
          ++acc.completed;
          if (log)
            *log << method_name(method) << " m=" << m << " n=" << n << " seed=" << seed_idx
                 << ": iters=" << outcome.iterations << " obj=" << last.obj
                 << (outcome.converged ? "" : " (cap)") << '\n';
        } catch (const std::exception& e) {
          ++acc.failed;
          ++report.failures;
          if (log)
            *log << method_name(method) << " m=" << m << " n=" << n << " seed=" << seed_idx
                 << ": FAILED: " << e.what() << '\n';
        }
      }
    }
  }

  for (std::size_t pair_idx = 0; pair_idx < cfg.sizes.size(); ++pair_idx)
    for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
      const Accumulator& acc = cells[{pair_idx, s}];
      SummaryRow row;
      row.m = cfg.sizes[pair_idx].first;
      row.n = cfg.sizes[pair_idx].second;
      row.algorithm = method_name(cfg.solvers[s]);
      if (acc.completed > 0) {
        row.mean_iterations = acc.iters / acc.completed;
        row.mean_obj = acc.obj / acc.completed;
        row.mean_acc = acc.acc / acc.completed;
        row.mean_time_s = acc.time_s / acc.completed;
      }
      row.completed = acc.completed;
      row.failed = acc.failed;
      report.summary.push_back(row);
    }

  const fs::path summary_path = fs::path(cfg.output_dir) / "summary.csv";
  std::ofstream out(summary_path, std::ios::binary);
  out << kSummaryHeader << '\n';
  for (const SummaryRow& row : report.summary) {
    out << row.m << ',' << row.n << ',' << row.algorithm << ','
        << format_double(row.mean_iterations) << ',' << format_double(row.mean_obj) << ','
        << format_double(row.mean_acc) << ',' << format_double(row.mean_time_s) << ','
        << (row.failed == 0 ? "ok" : "failed=" + std::to_string(row.failed)) << '\n';
  }
  report.summary_file = summary_path.string();
  return report;
}

// ---------------------------------------------------------------------------
// Verification suite: the release-gate checks behind `bench verify`.
// ---------------------------------------------------------------------------

struct VerifyReport {
  struct Item {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Item> items;

  bool ok() const {
    for (const Item& item : items)
      if (!item.pass) return false;
    return true;
  }
  void add(const std::string& name, bool pass, const std::string& detail) {
    items.push_back({name, pass, detail});
  }
};

namespace detail {

/// Max relative finite-difference error of grad f over `count` sampled
/// points. `sample` must return points interior to dom f with margin > h.
inline double max_grad_fd_error(const std::function<double(const Vector&)>& f_value,
                                const std::function<Vector(const Vector&)>& f_grad,
                                const std::function<Vector()>& sample, int count,
                                double h = 1e-6) {
  double worst = 0.0;
  for (int trial = 0; trial < count; ++trial) {
    const Vector x = sample();
    const Vector g = f_grad(x);
    Vector probe = x;
    for (Index i = 0; i < x.size(); ++i) {
      probe[i] = x[i] + h;
      const double fp = f_value(probe);
      probe[i] = x[i] - h;
      const double fm = f_value(probe);
      probe[i] = x[i];
      if (!std::isfinite(fp) || !std::isfinite(fm)) return kInf;
      const double diff = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(diff - g[i]) / (1.0 + std::abs(g[i])));
    }
  }
  return worst;
}

/// Interior sample with distance >= margin from every boundary and from the
/// lp kernel's curvature blowup at 0.
inline Vector sample_interior(Rng& rng, Index n, bool nonneg, double margin = 0.1) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double v = rng.normal();
    x[i] = nonneg ? std::abs(v) + margin : sgn(v == 0.0 ? 1.0 : v) * (std::abs(v) + margin);
  }
  return x;
}

inline MappingRequest random_mapping_request(Rng& rng, const GSpec& g_spec) {
  MappingRequest req;
  req.x = Vector::Constant(1, g_spec.kind == GSpec::Kind::L1PlusNonneg
                                  ? std::abs(rng.normal()) + 0.01
                                  : rng.normal());
  req.grad = Vector::Constant(1, 3.0 * rng.normal());
  req.lambda = 0.1 + 2.0 * rng.uniform();
  req.hess_diag = Vector::Constant(1, 0.2 + 5.0 * rng.uniform());
  req.g_spec = g_spec;
  return req;
}

}  // namespace detail

/// Max closed-form-vs-grid-oracle objective gap over `count` random 1-D
/// mapping requests with the given g structure.
inline double subproblem_oracle_sweep(const GSpec& g_spec, int count, std::uint64_t seed = 7) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const MappingRequest req = detail::random_mapping_request(rng, g_spec);
    const Vector y = approx_prox(req);
    worst = std::max(worst, subproblem_oracle_check(req, y, 5.0, 1e-4));
  }
  return worst;
}

/// Release gate: gradient checks, subproblem oracle checks, line-search
/// post-hoc condition checks, and monotonicity checks on small instances.
inline VerifyReport verify_suite(std::ostream* log = nullptr) {
  VerifyReport report;
  const auto note = [&](const std::string& name, bool pass, const std::string& detail) {
    report.add(name, pass, detail);
    if (log)
      *log << (pass ? "[pass] " : "[FAIL] ") << name << (detail.empty() ? "" : ": " + detail)
           << '\n';
  };

  // Kernel gradients against central differences.
  {
    const std::vector<std::shared_ptr<Kernel>> kernels = {
        make_kernel("sq_euclid"), make_kernel("shannon"), make_kernel("burg"),
        make_kernel("lp_quad(p=1.2)"), make_kernel("shannon_quad")};
    for (const auto& kernel : kernels) {
      Rng rng(11);
      const bool nonneg = kernel->name() == "shannon" || kernel->name() == "burg" ||
                          kernel->name() == "shannon_quad";
      double worst = 0.0;
      for (int trial = 0; trial < 50; ++trial) {
        const Vector x = detail::sample_interior(rng, 8, nonneg);
        worst = std::max(worst, kernel_grad_check(*kernel, x, 1e-6));
      }
      note("kernel gradient fd: " + kernel->name(), worst < 1e-5,
           "max rel err " + format_double(worst));
    }
  }

  // Problem gradients, both families.
  {
    InstanceSpec spec;
    spec.family = Family::LpLs;
    spec.m = 20;
    spec.n = 40;
    spec.seed = 3;
    const GeneratedInstance inst = build_lp_ls(spec);
    Rng rng(13);
    const double worst = detail::max_grad_fd_error(
        inst.problem.f_value, inst.problem.f_grad,
        [&] { return detail::sample_interior(rng, spec.n, false); }, 50);
    note("lp_ls gradient fd", worst < 1e-5, "max rel err " + format_double(worst));
  }
  {
    InstanceSpec spec;
    spec.family = Family::NonnegKl;
    spec.m = 30;
    spec.n = 20;
    spec.sparsity = 0.2;
    spec.seed = 5;
    spec.theta = 0.05;
    const GeneratedInstance inst = build_nonneg_kl(spec);
    Rng rng(17);
    const double worst = detail::max_grad_fd_error(
        inst.problem.f_value, inst.problem.f_grad,
        [&] { return detail::sample_interior(rng, spec.n, true); }, 50);
    note("nonneg_kl gradient fd", worst < 1e-5, "max rel err " + format_double(worst));
  }

  // Subproblem closed forms against the grid oracle.
  for (const auto& [g_spec, label] :
       {std::pair{GSpec::none(), "none"}, std::pair{GSpec::l1(0.7), "l1"},
        std::pair{GSpec::l1_plus_nonneg(0.3), "l1_plus_nonneg"}}) {
    const double gap = subproblem_oracle_sweep(g_spec, 200);
    note(std::string("subproblem oracle: ") + label, gap <= 1e-6,
         "max gap " + format_double(gap));
  }

  // Line-search conditions and monotone decrease on small instances.
  {
    InstanceSpec spec;
    spec.family = Family::LpLs;
    spec.m = 20;
    spec.n = 50;
    spec.seed = 23;
    const GeneratedInstance inst = build_lp_ls(spec);
    const Vector x0 = detail::draw_x0(Family::LpLs, spec.n, mix_seed(spec.seed));
    SolverConfig cfg;
    cfg.diagnostics = true;
    for (const Method method : {Method::AbpgVmaw, Method::Abpg}) {
      cfg.method = method;
      const SolveOutcome outcome = solve(inst.problem, x0, cfg, &inst.x_star);
      bool monotone = true;
      for (std::size_t i = 1; i < outcome.trace.size(); ++i)
        if (outcome.trace[i].obj > outcome.trace[i - 1].obj + 1e-10) monotone = false;
      note("lp_ls " + method_name(method) + " inequality checks",
           outcome.diagnostics_violations == 0 && outcome.ls_fallbacks == 0,
           "violations " + std::to_string(outcome.diagnostics_violations) + ", fallbacks " +
               std::to_string(outcome.ls_fallbacks));
      note("lp_ls " + method_name(method) + " monotone objective", monotone, "");
    }
  }
  {
    InstanceSpec spec;
    spec.family = Family::NonnegKl;
    spec.m = 40;
    spec.n = 20;
    spec.sparsity = 0.25;
    spec.seed = 29;
    spec.theta = 0.05;
    const GeneratedInstance inst = build_nonneg_kl(spec);
    const Vector x0 = detail::draw_x0(Family::NonnegKl, spec.n, mix_seed(spec.seed));
    SolverConfig cfg;
    cfg.diagnostics = true;
    for (const Method method : {Method::AbpgVmaw, Method::Abpg, Method::Bpg}) {
      cfg.method = method;
      const SolveOutcome outcome = solve(inst.problem, x0, cfg, &inst.x_star);
      bool monotone = true;
      for (std::size_t i = 1; i < outcome.trace.size(); ++i)
        if (outcome.trace[i].obj > outcome.trace[i - 1].obj + 1e-10) monotone = false;
      bool feasible = (outcome.x_final.array() > 0.0).all();
      note("nonneg_kl " + method_name(method) + " inequality checks",
           outcome.diagnostics_violations == 0,
           "violations " + std::to_string(outcome.diagnostics_violations));
      note("nonneg_kl " + method_name(method) + " monotone objective, feasible iterates",
           monotone && feasible, "");
    }
  }

  return report;
}

}  // namespace bopt
