// dynfl: command-line driver for the dynamic facility location pipeline.
//
// Subcommands: gen, validate, solve, preprocess, round, experiment, perturb,
// oracle, pipeline. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 statistical bound violation.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dynfl/errors.hpp"
#include "dynfl/evaluate.hpp"
#include "dynfl/instance.hpp"
#include "dynfl/lp.hpp"
#include "dynfl/oracle.hpp"
#include "dynfl/preprocess.hpp"
#include "dynfl/rounding.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBound = 3;

void print_bound_summary(const dynfl::ApproximationReport& rep) {
  std::cout << "lp objective      " << rep.lp_objective << "\n";
  std::cout << "mean rounded cost " << rep.mean_total << " (se " << rep.se_total << ")\n";
  std::cout << "ratio vs lp       " << rep.ratio_total << " (target 14)\n";
  std::cout << "component ratios  opening " << rep.ratio_opening << " (2), connection "
            << rep.ratio_connection << " (12), switching " << rep.ratio_switching << " (14)\n";
  if (rep.has_oracle)
    std::cout << "oracle cost       " << rep.oracle_cost << ", ratio vs opt " << rep.ratio_vs_opt
              << "\n";
  std::cout << "bound checks      " << rep.bounds.checks << " ("
            << (rep.bounds.pass ? "all pass" : "VIOLATION") << ")\n";
  std::cout << (rep.pass() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic facility location: LP rounding with competing exponential clocks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random drifting-metric instance");
  int gen_nf = 3, gen_nc = 5, gen_T = 3;
  double gen_drift = 0.1, gen_g = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--nf", gen_nf, "number of facilities");
  gen->add_option("--nc", gen_nc, "number of clients");
  gen->add_option("--T", gen_T, "number of time steps");
  gen->add_option("--drift", gen_drift, "per-step client movement bound");
  gen->add_option("--g", gen_g, "switching cost");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output instance file")->required();

  // validate
  auto* val = app.add_subcommand("validate", "check instance invariants");
  std::string val_in;
  val->add_option("--in", val_in, "instance file")->required();

  // solve
  auto* slv = app.add_subcommand("solve", "solve the LP relaxation");
  std::string slv_in, slv_out;
  double slv_tol = 1e-9;
  slv->add_option("--in", slv_in, "instance file")->required();
  slv->add_option("--out", slv_out, "output fractional solution file")->required();
  slv->add_option("--tol", slv_tol, "solver tolerance");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "stabilize and duplicate a fractional solution");
  std::string pre_in, pre_out;
  pre->add_option("--in", pre_in, "fractional solution file")->required();
  pre->add_option("--out", pre_out, "output preprocessed file")->required();

  // round
  auto* rnd = app.add_subcommand("round", "round a preprocessed solution once");
  std::string rnd_in, rnd_out;
  std::uint64_t rnd_seed = 1;
  rnd->add_option("--in", rnd_in, "preprocessed file")->required();
  rnd->add_option("--seed", rnd_seed, "clock seed");
  rnd->add_option("--out", rnd_out, "output rounded solution file")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo bound verification");
  std::string exp_in, exp_out;
  long long exp_trials = 100000;
  std::uint64_t exp_seed = 1;
  double exp_tol = 1e-9;
  bool exp_nots = false;
  exp->add_option("--in", exp_in, "instance file")->required();
  exp->add_option("--trials", exp_trials, "number of rounding trials");
  exp->add_option("--seed", exp_seed, "base seed");
  exp->add_option("--tol", exp_tol, "LP tolerance");
  exp->add_option("--out", exp_out, "output report file");
  exp->add_flag("--no-timestamp", exp_nots, "omit the timestamp field from the report");

  // perturb
  auto* prt = app.add_subcommand("perturb", "shared-clock sensitivity experiment");
  std::string prt_a, prt_b, prt_out;
  long long prt_trials = 100000;
  std::uint64_t prt_seed = 1;
  bool prt_nots = false;
  prt->add_option("--inA", prt_a, "first preprocessed file")->required();
  prt->add_option("--inB", prt_b, "second preprocessed file")->required();
  prt->add_option("--trials", prt_trials, "number of trials");
  prt->add_option("--seed", prt_seed, "base seed");
  prt->add_option("--out", prt_out, "output report file");
  prt->add_flag("--no-timestamp", prt_nots, "omit the timestamp field from the report");

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact brute-force optimum");
  std::string orc_in, orc_out;
  long long orc_limit = 1'000'000;
  orc->add_option("--in", orc_in, "instance file")->required();
  orc->add_option("--limit", orc_limit, "enumeration budget");
  orc->add_option("--out", orc_out, "output file");

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "solve, preprocess, verify, compare to oracle");
  std::string pip_in, pip_out;
  long long pip_trials = 100000, pip_limit = 1'000'000;
  std::uint64_t pip_seed = 1;
  double pip_tol = 1e-9;
  bool pip_nots = false;
  pip->add_option("--in", pip_in, "instance file")->required();
  pip->add_option("--trials", pip_trials, "number of rounding trials");
  pip->add_option("--seed", pip_seed, "base seed");
  pip->add_option("--tol", pip_tol, "LP tolerance");
  pip->add_option("--limit", pip_limit, "oracle enumeration budget");
  pip->add_option("--out", pip_out, "output report file");
  pip->add_flag("--no-timestamp", pip_nots, "omit the timestamp field from the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      dynfl::Instance inst =
          dynfl::generate_drifting(gen_nf, gen_nc, gen_T, gen_drift, gen_g, gen_seed);
      dynfl::write_instance(inst, gen_out);
      std::cout << "wrote " << gen_out << "\n";
    } else if (*val) {
      dynfl::Instance inst = dynfl::read_instance(val_in);
      dynfl::ValidationReport rep = dynfl::validate(inst);
      if (rep.pass()) {
        std::cout << "valid\n";
      } else {
        for (const auto& v : rep.violations)
          std::cout << "violation [" << v.kind << "] " << (v.message.empty() ? v.kind : v.message)
                    << "\n";
        return kExitData;
      }
    } else if (*slv) {
      dynfl::Instance inst = dynfl::read_instance(slv_in);
      dynfl::ValidationReport rep = dynfl::validate(inst);
      if (!rep.pass())
        throw dynfl::DataError("solve: invalid instance: " + rep.violations[0].message);
      dynfl::FractionalSolution frac = dynfl::solve(dynfl::build_relaxation(inst), slv_tol);
      dynfl::write_fractional(frac, slv_out);
      std::cout << "objective " << frac.objective << " (opening " << frac.opening
                << ", connection " << frac.connection << ", switching " << frac.switching
                << ")\n";
    } else if (*pre) {
      dynfl::FractionalSolution frac = dynfl::read_fractional(pre_in);
      dynfl::FractionalSolution stab = dynfl::stabilize(frac);
      dynfl::PreprocessedSolution prep = dynfl::duplicate_facilities(stab);
      dynfl::write_preprocessed(prep, pre_out);
      std::cout << prep.num_copies() << " copies\n";
    } else if (*rnd) {
      dynfl::PreprocessedSolution prep = dynfl::read_preprocessed(rnd_in);
      dynfl::Clocks clocks = dynfl::sample_clocks(prep, rnd_seed);
      dynfl::RoundedSolution sol = dynfl::round_all(prep, clocks);
      dynfl::write_rounded(sol, rnd_out, rnd_seed);
      std::cout << "wrote " << rnd_out << "\n";
    } else if (*exp) {
      dynfl::Instance inst = dynfl::read_instance(exp_in);
      dynfl::ApproximationReport rep =
          dynfl::approximation_report(inst, exp_trials, exp_seed, /*oracle_limit=*/0, 0, exp_tol);
      if (!exp_out.empty()) dynfl::write_report(rep, exp_out, !exp_nots);
      print_bound_summary(rep);
      if (!rep.pass()) return kExitBound;
    } else if (*prt) {
      dynfl::PreprocessedSolution a = dynfl::read_preprocessed(prt_a);
      dynfl::PreprocessedSolution b = dynfl::read_preprocessed(prt_b);
      dynfl::PerturbationStats stats =
          dynfl::perturbation_experiment(a, b, prt_trials, prt_seed);
      if (!prt_out.empty()) dynfl::write_perturbation_report(stats, prt_out, !prt_nots);
      for (int t = 0; t < stats.T; ++t)
        std::cout << "t=" << t << " |K|=" << stats.changed_clients[t].size()
                  << " mean differing paths " << stats.differing_paths[t].mean(stats.trials)
                  << " (bound " << stats.checks[t].bound << ")\n";
      std::cout << (stats.pass ? "PASS" : "FAIL") << "\n";
      if (!stats.pass) return kExitBound;
    } else if (*orc) {
      dynfl::Instance inst = dynfl::read_instance(orc_in);
      dynfl::ExactSolution sol = dynfl::brute_force(inst, orc_limit);
      if (!orc_out.empty()) dynfl::write_exact(sol, orc_out);
      std::cout << "optimum " << sol.cost << " (" << sol.tuples_examined
                << " tuples examined)\n";
    } else if (*pip) {
      dynfl::Instance inst = dynfl::read_instance(pip_in);
      dynfl::ApproximationReport rep =
          dynfl::approximation_report(inst, pip_trials, pip_seed, pip_limit, 0, pip_tol);
      if (!pip_out.empty()) dynfl::write_report(rep, pip_out, !pip_nots);
      print_bound_summary(rep);
      if (!rep.pass()) return kExitBound;
    }
  } catch (const dynfl::ParseError& e) {
    std::cerr << "dynfl: parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const dynfl::DataError& e) {
    std::cerr << "dynfl: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const dynfl::SolverError& e) {
    std::cerr << "dynfl: solver error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
