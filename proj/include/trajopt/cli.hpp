#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajopt/conserved.hpp"
#include "trajopt/cooling.hpp"
#include "trajopt/io.hpp"
#include "trajopt/lift.hpp"
#include "trajopt/oracle.hpp"
#include "trajopt/polytope.hpp"
#include "trajopt/trajectory.hpp"

namespace trajopt::cli {

enum ExitCode : int { kOk = 0, kIo = 1, kParse = 2, kDomain = 3, kVerifyFailed = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AlphaOutOfRange:
    case ErrorCode::DimensionTooLarge:
    case ErrorCode::DimensionOverflow:
    case ErrorCode::WrongInstanceKind:
      return kDomain;
    default:
      return kParse;
  }
}

// edge LPs are solved only for vertex sets at most this large
inline constexpr std::size_t kEdgeCheckVertices = 5000;

/// Enumeration cap: TRAJOPT_MAX_ENUM_DIM when set to a positive integer.
inline std::size_t max_enum_dim() {
  if (const char* env = std::getenv("TRAJOPT_MAX_ENUM_DIM")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultMaxEnumDim;
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Loaded {
  GeneralizedInstance generalized;
  io::TrajectoryFile file;
};

/// Validates the instance and builds its trajectory. With initial
/// populations the trajectory is cut to start at the segment holding alpha_in
/// unless `full` is set.
inline Loaded load_and_build(const std::string& path, std::optional<double> eps_pop,
                             std::optional<double> eps_grad, bool full) {
  auto raw = io::load_instance(path);
  if (eps_pop) raw.eps_pop = *eps_pop;
  if (eps_grad) raw.eps_grad = *eps_grad;
  Loaded out;
  out.generalized = make_generalized(std::move(raw));
  const auto& inst = out.generalized.base;
  auto traj = build_generalized(out.generalized);
  if (inst.initial_populations) {
    const double alpha_in = target_value(*inst.initial_populations, inst.target);
    out.file.alpha_in = alpha_in;
    out.file.initial_cost = cost_value(*inst.initial_populations, inst.cost);
    if (!full) {
      traj = tail_from(traj, alpha_in);
      out.file.start = "initial_populations";
    }
  }
  out.file.trajectory = std::move(traj);
  return out;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    io::write_file(out_path, text);
  }
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  bool passed = true;
  bool skipped = false;
  std::string detail;
};

inline Check check_structure(const ProblemInstance& inst, const OptimalTrajectory& t) {
  Check c{"structure", true, false, {}};
  auto fail = [&](const std::string& why) {
    if (c.passed) c.detail = why;
    c.passed = false;
  };
  for (std::size_t s = 0; s < t.steps.size(); ++s) {
    const auto& st = t.steps[s];
    const auto& v0 = t.vertices[s];
    const auto& v1 = t.vertices[s + 1];
    if (!(t.breakpoints[s + 1].alpha > t.breakpoints[s].alpha)) fail("breakpoints not increasing at step " + std::to_string(s));
    if (s > 0 && st.gradient < t.steps[s - 1].gradient - 1e-12) fail("gradient decreases at step " + std::to_string(s));
    if (!same_vector(apply_swap(v0, st.k, st.l), v1, 1e-15)) fail("vertices " + std::to_string(s) + "," + std::to_string(s + 1) + " do not differ by the step swap");
    const double da = inst.target[st.k] - inst.target[st.l];
    const double expected = (inst.cost[st.k] - inst.cost[st.l]) / da;
    if (std::abs(expected - st.gradient) > 1e-12) fail("stored gradient of step " + std::to_string(s) + " disagrees with (E_k-E_l)/(a_k-a_l)");
    const double slope = (t.breakpoints[s + 1].omega - t.breakpoints[s].omega) /
                         (t.breakpoints[s + 1].alpha - t.breakpoints[s].alpha);
    if (std::abs(slope - st.gradient) > 1e-6 * (1.0 + std::abs(st.gradient))) fail("segment slope differs from gradient at step " + std::to_string(s));
    if (std::abs(st.alpha_end - st.alpha_start - st.delta_alpha) > 1e-12) fail("delta_alpha inconsistent at step " + std::to_string(s));
  }
  for (std::size_t s = 0; s < t.vertices.size(); ++s) {
    const auto& v = t.vertices[s];
    if (std::abs(target_value(v, inst.target) - t.breakpoints[s].alpha) > 1e-12 ||
        std::abs(cost_value(v, inst.cost) - t.breakpoints[s].omega) > 1e-12) {
      fail("breakpoint " + std::to_string(s) + " is not (a.V, E.V)");
    }
  }
  if (c.passed) c.detail = std::to_string(t.steps.size()) + (t.steps.size() == 1 ? " step" : " steps");
  return c;
}

/// A stored trajectory must match a fresh build of the same instance.
inline Check check_matches(const OptimalTrajectory& stored, const OptimalTrajectory& fresh) {
  Check c{"stored-trajectory", true, false, {}};
  if (stored.steps.size() != fresh.steps.size() || stored.dim() != fresh.dim()) {
    c.passed = false;
    c.detail = "step count or dimension differs from a fresh build";
    return c;
  }
  for (std::size_t s = 0; s < fresh.steps.size(); ++s) {
    const auto& a = stored.steps[s];
    const auto& b = fresh.steps[s];
    if (a.k != b.k || a.l != b.l || std::abs(a.gradient - b.gradient) > 1e-12 ||
        std::abs(a.alpha_start - b.alpha_start) > 1e-12 || std::abs(a.alpha_end - b.alpha_end) > 1e-12) {
      c.passed = false;
      c.detail = "step " + std::to_string(s) + " differs from a fresh build";
      return c;
    }
  }
  for (std::size_t s = 0; s < fresh.breakpoints.size(); ++s) {
    if (std::abs(stored.breakpoints[s].alpha - fresh.breakpoints[s].alpha) > 1e-12 ||
        std::abs(stored.breakpoints[s].omega - fresh.breakpoints[s].omega) > 1e-12 ||
        !same_vector(stored.vertices[s], fresh.vertices[s], 1e-12)) {
      c.passed = false;
      c.detail = "vertex " + std::to_string(s) + " differs from a fresh build";
      return c;
    }
  }
  c.detail = "identical to a fresh build";
  return c;
}

inline std::vector<Check> run_verify(const GeneralizedInstance& g, const OptimalTrajectory& traj,
                                     std::size_t samples, std::uint64_t seed, std::ostream& err) {
  std::vector<Check> checks;
  const auto& inst = g.base;
  checks.push_back(check_structure(inst, traj));

  const std::size_t cap = max_enum_dim();
  std::optional<VertexSet> vset;
  // the cap applies per block: a conserved observable splits the enumeration
  std::size_t widest = 0;
  for (const auto& b : g.structure.blocks) widest = std::max(widest, b.size());
  try {
    if (widest <= cap) vset = enumerate_generalized_vertices(g, cap, 400'000);
  } catch (const Error&) {
    vset.reset();
  }

  Check env{"envelope", true, false, {}};
  Check edges{"edges", true, false, {}};
  if (!vset) {
    env.skipped = edges.skipped = true;
    env.detail = edges.detail = "skipped: block dimension " + std::to_string(widest) + " above enumeration cap";
    err << "warning: d=" << widest << " exceeds TRAJOPT_MAX_ENUM_DIM=" << cap
        << ", enumeration checks skipped\n";
  } else {
    const auto poly = induced_polygon(*vset, inst.target, inst.cost);
    std::vector<double> alphas;
    for (const auto& b : traj.breakpoints) alphas.push_back(b.alpha);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(traj.alpha_min(), traj.alpha_max());
    for (int i = 0; i < 50; ++i) alphas.push_back(u(rng));
    double worst = 0.0;
    for (double a : alphas) worst = std::max(worst, std::abs(omega_opt(traj, a) - envelope_min_cost(poly, a)));
    env.passed = worst <= 1e-9;
    env.detail = "max |omega_opt - lower envelope| = " + fmt(worst) + " over " + std::to_string(alphas.size()) + " alphas";

    if (vset->count() <= kEdgeCheckVertices) {
      for (std::size_t s = 0; s < traj.steps.size() && edges.passed; ++s) {
        if (!is_edge(traj.vertices[s], traj.vertices[s + 1], *vset, inst.eps_pop)) {
          edges.passed = false;
          edges.detail = "step " + std::to_string(s) + " is not a polytope edge";
        }
      }
      if (edges.passed) edges.detail = "every step is a polytope edge";
    } else {
      edges.skipped = true;
      edges.detail = "skipped: more than " + std::to_string(kEdgeCheckVertices) + " vertices";
    }
  }
  checks.push_back(env);
  checks.push_back(edges);

  const auto report = monte_carlo_audit(inst, traj, samples, seed);
  Check audit{"monte-carlo", true, false, {}};
  audit.passed = report.passed();
  audit.detail = std::to_string(report.violations) + " violations in " + std::to_string(report.in_range) +
                 " in-range of " + std::to_string(report.samples) + " samples, min slack " +
                 fmt(report.in_range ? report.min_slack : 0.0);
  checks.push_back(audit);
  return checks;
}

// ---------------------------------------------------------------------------

inline std::vector<double> eval_grid(const OptimalTrajectory& t, std::size_t n) {
  std::vector<double> alphas;
  const double lo = t.alpha_min();
  const double hi = t.alpha_max();
  for (std::size_t i = 0; i < n; ++i) {
    alphas.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  if (n >= 1) alphas.back() = n == 1 ? lo : hi;
  for (const auto& b : t.breakpoints) alphas.push_back(b.alpha);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  return alphas;
}

inline std::string csv_row(const OptimalTrajectory& t, double alpha, std::optional<double> initial_cost) {
  const double w = omega_opt(t, alpha);
  std::string row = fmt(alpha) + "," + fmt(w) + ",";
  if (initial_cost) row += fmt(w - *initial_cost);
  return row + "\n";
}

inline io::Json cooling_instance_json(const CoolingInstance& ci) {
  auto doc = io::instance_to_json(ci.instance);
  return doc;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal cost trajectories under commuting target and cost observables", "trajopt"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::optional<double> eps_pop;
  std::optional<double> eps_grad;
  std::uint64_t seed = 1;
  app.add_option("--eps-pop", eps_pop, "population tolerance (overrides the instance file)");
  app.add_option("--eps-grad", eps_grad, "gradient tie tolerance (overrides the instance file)");
  app.add_option("--seed", seed, "random seed for verify");

  std::string spec_path;
  std::string out_path;
  bool full = false;

  auto* build_cmd = app.add_subcommand("build", "build the trajectory of an instance file");
  build_cmd->add_option("instance", spec_path, "instance JSON")->required();
  build_cmd->add_option("-o,--out", out_path, "output trajectory JSON (default stdout)");
  build_cmd->add_flag("--full", full, "keep the part below alpha_in");

  std::optional<double> alpha;
  std::optional<std::size_t> grid;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate omega_opt as CSV");
  eval_cmd->add_option("instance", spec_path, "instance JSON")->required();
  auto* alpha_opt = eval_cmd->add_option("--alpha", alpha, "single target value");
  auto* grid_opt = eval_cmd->add_option("--grid", grid, "number of evenly spaced alphas")->check(CLI::PositiveNumber);
  alpha_opt->excludes(grid_opt);
  eval_cmd->add_flag("--full", full, "keep the part below alpha_in");

  auto* lift_cmd = app.add_subcommand("lift", "lift a trajectory point to matrices");
  lift_cmd->add_option("instance", spec_path, "instance JSON")->required();
  lift_cmd->add_option("--alpha", alpha, "target value")->required();
  lift_cmd->add_option("-o,--out", out_path, "output JSON (default stdout)");
  lift_cmd->add_flag("--full", full, "keep the part below alpha_in");

  std::size_t samples = 10000;
  std::string traj_path;
  std::string report_path;
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle checks");
  verify_cmd->add_option("instance", spec_path, "instance JSON")->required();
  verify_cmd->add_option("--samples", samples, "Monte-Carlo samples");
  verify_cmd->add_option("--trajectory", traj_path, "also check a stored trajectory file");
  verify_cmd->add_option("--report", report_path, "write a JSON report");
  verify_cmd->add_flag("--full", full, "keep the part below alpha_in");

  std::string demo;
  std::vector<double> sys_e, machine_e, bath_e, sys_pop;
  double beta = 1.0;
  std::optional<double> beta_bath;
  auto* cool_cmd = app.add_subcommand("cool", "emit a cooling instance file");
  cool_cmd->add_option("--demo", demo, "working-example or incoherent")
      ->check(CLI::IsMember({"working-example", "incoherent"}));
  cool_cmd->add_option("--system-energies", sys_e)->delimiter(',');
  cool_cmd->add_option("--system-populations", sys_pop)->delimiter(',');
  cool_cmd->add_option("--machine-energies", machine_e)->delimiter(',');
  cool_cmd->add_option("--bath-energies", bath_e)->delimiter(',');
  cool_cmd->add_option("--beta", beta);
  cool_cmd->add_option("--beta-bath", beta_bath);
  cool_cmd->add_option("-o,--out", out_path, "output instance JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  }

  try {
    if (build_cmd->parsed()) {
      auto loaded = load_and_build(spec_path, eps_pop, eps_grad, full);
      emit(io::dump(io::trajectory_to_json(loaded.file)), out_path, out);
      return kOk;
    }
    if (eval_cmd->parsed()) {
      if (!alpha && !grid) {
        err << "error: eval needs --alpha or --grid\n";
        return kParse;
      }
      auto loaded = load_and_build(spec_path, eps_pop, eps_grad, full);
      const auto& t = loaded.file.trajectory;
      std::string csv = "alpha,omega,work\n";
      if (alpha) {
        csv += csv_row(t, *alpha, loaded.file.initial_cost);
      } else {
        for (double a : eval_grid(t, *grid)) csv += csv_row(t, a, loaded.file.initial_cost);
      }
      out << csv;
      return kOk;
    }
    if (lift_cmd->parsed()) {
      auto loaded = load_and_build(spec_path, eps_pop, eps_grad, full);
      const auto& t = loaded.file.trajectory;
      const auto lp = lift_point(t, *alpha);
      emit(io::dump(io::lifted_to_json(lp, *alpha, entry_point(t, *alpha))), out_path, out);
      return kOk;
    }
    if (verify_cmd->parsed()) {
      auto loaded = load_and_build(spec_path, eps_pop, eps_grad, full);
      const auto& t = loaded.file.trajectory;
      std::vector<Check> checks;
      if (!traj_path.empty()) {
        const auto stored = io::load_trajectory(traj_path);
        checks.push_back(check_matches(stored.trajectory, t));
        if (stored.trajectory.steps.size() == t.steps.size()) {
          auto c = check_structure(loaded.generalized.base, stored.trajectory);
          c.name = "stored-structure";
          checks.push_back(c);
        }
      }
      for (auto& c : run_verify(loaded.generalized, t, samples, seed, err)) checks.push_back(std::move(c));
      bool ok = true;
      io::Json report = io::Json::array();
      for (const auto& c : checks) {
        const char* status = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
        out << status << " " << c.name << ": " << c.detail << "\n";
        ok = ok && (c.skipped || c.passed);
        io::Json jc;
        jc["name"] = c.name;
        jc["status"] = status;
        jc["detail"] = c.detail;
        report.push_back(std::move(jc));
      }
      out << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
      if (!report_path.empty()) {
        io::Json doc;
        doc["passed"] = ok;
        doc["checks"] = std::move(report);
        io::write_file(report_path, io::dump(doc));
      }
      return ok ? kOk : kVerifyFailed;
    }
    if (cool_cmd->parsed()) {
      CoolingInstance ci;
      if (demo == "working-example") {
        ci = working_example();
      } else if (demo == "incoherent") {
        ci = incoherent_example();
      } else {
        if (sys_e.empty() || machine_e.empty()) {
          err << "error: cool needs --system-energies and --machine-energies (or --demo)\n";
          return kParse;
        }
        SystemSpec sys{sys_e, sys_pop.empty() ? std::nullopt : std::optional<Vector>(sys_pop)};
        SystemSpec machine{machine_e, std::nullopt};
        if (bath_e.empty()) {
          ci = coherent_instance(sys, machine, beta);
        } else {
          ci = incoherent_instance(sys, machine, SystemSpec{bath_e, std::nullopt}, beta,
                                   beta_bath.value_or(0.0));
        }
      }
      if (eps_pop) ci.instance.eps_pop = *eps_pop;
      if (eps_grad) ci.instance.eps_grad = *eps_grad;
      emit(io::dump(cooling_instance_json(ci)), out_path, out);
      return kOk;
    }
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kParse;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("trajopt");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace trajopt::cli
