#pragma once

// Cost evaluation and Monte Carlo verification of the rounding guarantees:
// per-step opening / connection / switching bounds, per-copy opening
// frequencies, per-edge path traversal counts, and the end-to-end
// approximation ratio against the LP optimum (and the exact optimum where
// the oracle is affordable).

#include <cstdint>
#include <string>
#include <vector>

#include "dynfl/instance.hpp"
#include "dynfl/lp.hpp"
#include "dynfl/oracle.hpp"
#include "dynfl/preprocess.hpp"
#include "dynfl/rounding.hpp"

namespace dynfl {

struct CostBreakdown {
  double opening = 0.0;
  double connection = 0.0;
  double switching = 0.0;
  double total = 0.0;
};

/// Exact objective of a rounded solution, with per-time opening costs and
/// g per (client, step) assignment change.
CostBreakdown cost(const Instance& inst, const RoundedSolution& sol);

/// Mean/variance accumulator for real-valued per-trial observations.
struct MeanVar {
  double sum = 0.0, sumsq = 0.0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const MeanVar& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean(long long n) const;
  double std_error(long long n) const;  // sample std / sqrt(n); NaN when n < 2
};

/// Same, for integer observations; merging is exact so aggregation order
/// cannot change the result.
struct CountVar {
  long long sum = 0, sumsq = 0;
  void add(long long v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const CountVar& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean(long long n) const;
  double std_error(long long n) const;
};

struct TrialStats {
  long long trials = 0;
  int T = 0, n_copies = 0, n_clients = 0;

  std::vector<std::vector<long long>> open_count;          // [t][copy]
  std::vector<std::vector<std::pair<int, int>>> edges;     // [t] -> (copy, client)
  std::vector<std::vector<CountVar>> edge_traversals;      // [t][edge]

  std::vector<MeanVar> copy_open_cost;  // [t]: sum of f over open copies
  std::vector<MeanVar> orig_open_cost;  // [t]: sum of f over open originals
  std::vector<MeanVar> conn_cost;       // [t]
  std::vector<CountVar> copy_switches;  // [t], t < T-1
  std::vector<CountVar> orig_switches;  // [t], t < T-1

  // Per-trial totals (original level), accumulated jointly so their standard
  // errors account for cross-step correlation.
  MeanVar total_opening;
  MeanVar total_connection;
  CountVar total_switches;
  MeanVar total_cost;

  double open_frequency(int t, int copy) const {
    return static_cast<double>(open_count[t][copy]) / static_cast<double>(trials);
  }
};

/// Rounds `trials` times with seeds base_seed .. base_seed+trials-1 and
/// aggregates. Deterministic in (base_seed, trials) regardless of `threads`
/// (0 = hardware concurrency): trials are reduced in fixed-size chunks and
/// chunk results are combined in index order.
TrialStats run_trials(const Instance& inst, const PreprocessedSolution& prep, long long trials,
                      std::uint64_t base_seed, int threads = 0);

struct BoundCheck {
  std::string name;
  int t = -1;
  int i = -1, j = -1;  // witness entity, when meaningful
  double empirical = 0.0;
  double se = 0.0;
  double bound = 0.0;
  // For one-sided bounds: how many sigma the mean lies beyond the bound
  // (0 when under it). For the frequency equality: |mean - predicted|/sigma.
  double sigma_distance = 0.0;
  bool pass = true;
};

struct BoundReport {
  std::vector<BoundCheck> opening;     // per t: E[sum f Y] <= sum f y (copy level)
  std::vector<BoundCheck> connection;  // per t: E[sum d X] <= 6 sum d x
  std::vector<BoundCheck> switching;   // per t: E[#row switches] <= 7 |Z^t|
  BoundCheck open_freq_worst;          // over (copy in F^t, t): frequency == y
  BoundCheck edge_worst;               // over (edge, t): traversals <= 6 x
  long long checks = 0;
  bool pass = true;
};

/// Evaluates every bound at the 4-sigma acceptance threshold.
BoundReport check_bounds(const TrialStats& stats, const PreprocessedSolution& prep,
                         const Instance& inst);

struct PerturbationStats {
  long long trials = 0;
  int T = 0;
  std::vector<std::vector<int>> changed_clients;   // per t (the set K)
  std::vector<CountVar> differing_paths;           // per t
  std::vector<CountVar> differing_assignments;     // per t; lower-bounds the above
  std::vector<BoundCheck> checks;                  // per t: mean <= 7 |K_t|
  bool pass = true;
};

/// Rounds two preprocessed solutions with the one shared set of clocks per
/// trial and counts clients whose connection paths differ. The inputs must
/// share copies and clients exactly.
PerturbationStats perturbation_experiment(const PreprocessedSolution& a,
                                          const PreprocessedSolution& b, long long trials,
                                          std::uint64_t base_seed, int threads = 0);

struct ApproximationReport {
  double lp_objective = 0.0;
  LpComponents lp;
  int n_copies = 0;
  long long trials = 0;
  std::uint64_t seed = 0;

  double mean_total = 0.0, se_total = 0.0;
  double mean_opening = 0.0, se_opening = 0.0;
  double mean_connection = 0.0, se_connection = 0.0;
  double mean_switching = 0.0, se_switching = 0.0;

  // Ratios use mean + 4 se in the numerator; component ratios compare against
  // the LP components, with targets (2, 12, 14); the totals target 14.
  double ratio_total = 0.0;
  double ratio_opening = 0.0, ratio_connection = 0.0, ratio_switching = 0.0;
  bool component_bounds_pass = true;
  bool total_bound_pass = true;

  bool has_oracle = false;
  double oracle_cost = 0.0;
  double ratio_vs_opt = 0.0;
  bool opt_bound_pass = true;

  BoundReport bounds;

  bool pass() const {
    return bounds.pass && component_bounds_pass && total_bound_pass && opt_bound_pass;
  }
};

/// Full pipeline: solve -> stabilize -> duplicate -> Monte Carlo rounding,
/// plus the exact oracle when (2^|F|)^T <= oracle_limit (0 disables it).
ApproximationReport approximation_report(const Instance& inst, long long trials,
                                         std::uint64_t seed, long long oracle_limit = 0,
                                         int threads = 0, double tol = 1e-9);

void write_report(const ApproximationReport& report, const std::string& path, bool with_timestamp);
void write_perturbation_report(const PerturbationStats& stats, const std::string& path,
                               bool with_timestamp);

}  // namespace dynfl
