#include "dynfl/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

namespace {

constexpr long long kChunkTrials = 256;
constexpr double kSigma = 4.0;  // acceptance threshold for every statistical check

double nan_d() { return std::numeric_limits<double>::quiet_NaN(); }
double inf_d() { return std::numeric_limits<double>::infinity(); }

int resolve_threads(int threads, long long n_chunks) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return static_cast<int>(std::min<long long>(threads, std::max<long long>(1, n_chunks)));
}

// Runs fn(thread_idx, chunk_index, first_trial, last_trial) over fixed-size
// chunks on a small thread pool. Chunking is what makes aggregation order
// (and thus the floating-point sums) independent of the thread count.
template <typename Fn>
void for_each_chunk(long long trials, int n_threads, Fn&& fn) {
  long long n_chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  std::atomic<long long> next{0};
  auto worker = [&](int tid) {
    for (;;) {
      long long c = next.fetch_add(1);
      if (c >= n_chunks) return;
      long long first = c * kChunkTrials;
      long long last = std::min(trials, first + kChunkTrials);
      fn(tid, c, first, last);
    }
  };
  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker, i);
    for (auto& th : pool) th.join();
  }
}

}  // namespace

double MeanVar::mean(long long n) const { return n > 0 ? sum / static_cast<double>(n) : nan_d(); }

double MeanVar::std_error(long long n) const {
  if (n < 2) return nan_d();
  double m = sum / static_cast<double>(n);
  double var = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  return std::sqrt(std::max(0.0, var) / static_cast<double>(n));
}

double CountVar::mean(long long n) const {
  return n > 0 ? static_cast<double>(sum) / static_cast<double>(n) : nan_d();
}

double CountVar::std_error(long long n) const {
  if (n < 2) return nan_d();
  double m = static_cast<double>(sum) / static_cast<double>(n);
  double var = (static_cast<double>(sumsq) - static_cast<double>(n) * m * m) /
               static_cast<double>(n - 1);
  return std::sqrt(std::max(0.0, var) / static_cast<double>(n));
}

CostBreakdown cost(const Instance& inst, const RoundedSolution& sol) {
  if (sol.T != inst.T) throw DataError("cost: solution has wrong number of time steps");
  const int nf = inst.num_facilities();
  const int nc = inst.num_clients();
  CostBreakdown c;
  for (int t = 0; t < sol.T; ++t) {
    if (static_cast<int>(sol.assignment[t].size()) != nc)
      throw DataError("cost: assignment has wrong client count");
    for (int i : sol.open_facilities[t]) {
      if (i < 0 || i >= nf) throw DataError("cost: dangling facility index");
      c.opening += inst.open_cost(i, t);
    }
    for (int j = 0; j < nc; ++j) {
      int i = sol.assignment[t][j];
      if (i < 0 || i >= nf) throw DataError("cost: dangling assignment");
      if (!std::binary_search(sol.open_facilities[t].begin(), sol.open_facilities[t].end(), i))
        throw DataError("cost: client assigned to a facility that is not open");
      c.connection += inst.dist(t, i, j);
    }
  }
  long long switches = 0;
  for (int t = 0; t + 1 < sol.T; ++t)
    for (int j = 0; j < nc; ++j)
      if (sol.assignment[t][j] != sol.assignment[t + 1][j]) ++switches;
  c.switching = inst.g * static_cast<double>(switches);
  c.total = c.opening + c.connection + c.switching;
  return c;
}

// --- Monte Carlo trials ------------------------------------------------------

namespace {

// Trial-independent data shared by all workers.
struct TrialLayout {
  const Instance* inst;
  const PreprocessedSolution* prep;
  std::vector<std::vector<std::pair<int, int>>> edges;  // [t] -> (copy, client)
  std::vector<std::vector<int>> edge_base;              // [t][client]

  int edge_id(int t, int j, int copy) const {
    const auto& conn = prep->connections[t][j];
    auto it = std::lower_bound(conn.begin(), conn.end(), copy);
    return edge_base[t][j] + static_cast<int>(it - conn.begin());
  }
};

TrialLayout make_layout(const Instance& inst, const PreprocessedSolution& prep) {
  TrialLayout lay;
  lay.inst = &inst;
  lay.prep = &prep;
  lay.edges.resize(prep.T);
  lay.edge_base.assign(prep.T, std::vector<int>(prep.n_clients, 0));
  for (int t = 0; t < prep.T; ++t)
    for (int j = 0; j < prep.n_clients; ++j) {
      lay.edge_base[t][j] = static_cast<int>(lay.edges[t].size());
      for (int c : prep.connections[t][j]) lay.edges[t].push_back({c, j});
    }
  return lay;
}

struct ChunkAccum {
  std::vector<std::vector<long long>> open_count;
  std::vector<std::vector<CountVar>> edge_traversals;
  std::vector<MeanVar> copy_open_cost, orig_open_cost, conn_cost;
  std::vector<CountVar> copy_switches, orig_switches;
  MeanVar total_opening, total_connection;
  CountVar total_switches;
  MeanVar total_cost;

  void init(const TrialLayout& lay) {
    int T = lay.prep->T;
    open_count.assign(T, std::vector<long long>(lay.prep->num_copies(), 0));
    edge_traversals.resize(T);
    for (int t = 0; t < T; ++t) edge_traversals[t].assign(lay.edges[t].size(), CountVar{});
    copy_open_cost.assign(T, MeanVar{});
    orig_open_cost.assign(T, MeanVar{});
    conn_cost.assign(T, MeanVar{});
    copy_switches.assign(std::max(0, T - 1), CountVar{});
    orig_switches.assign(std::max(0, T - 1), CountVar{});
    total_opening = MeanVar{};
    total_connection = MeanVar{};
    total_switches = CountVar{};
    total_cost = MeanVar{};
  }
};

// Per-worker scratch; everything here is reused across trials.
struct Worker {
  const TrialLayout& lay;
  std::vector<ConnectionGraph> graphs;  // one per t
  Clocks clocks;
  PathWorkspace ws;
  std::vector<PathVertex> path;
  std::vector<char> copy_open, orig_open;
  std::vector<int> edge_buf;                   // per (t) reused
  std::vector<std::vector<int>> copy_assign;   // [t][client]
  std::vector<std::vector<int>> orig_assign;

  explicit Worker(const TrialLayout& layout) : lay(layout) {
    const auto& prep = *lay.prep;
    graphs.reserve(prep.T);
    for (int t = 0; t < prep.T; ++t) {
      ConnectionGraph g;
      g.support = build_support(prep, t);
      graphs.push_back(std::move(g));
    }
    copy_open.resize(prep.num_copies());
    orig_open.resize(prep.n_originals);
    copy_assign.assign(prep.T, std::vector<int>(prep.n_clients, -1));
    orig_assign.assign(prep.T, std::vector<int>(prep.n_clients, -1));
  }

  void run_trial(std::uint64_t seed, ChunkAccum& acc) {
    const auto& prep = *lay.prep;
    const auto& inst = *lay.inst;
    sample_clocks_into(prep, seed, clocks);

    double trial_opening = 0.0, trial_conn = 0.0;
    for (int t = 0; t < prep.T; ++t) {
      ConnectionGraph& g = graphs[t];
      orient(clocks, g);
      g.verify();

      std::fill(copy_open.begin(), copy_open.end(), 0);
      std::fill(orig_open.begin(), orig_open.end(), 0);
      double open_cost_copies = 0.0, open_cost_orig = 0.0;
      const auto& fcopies = g.support.copies;
      for (std::size_t fi = 0; fi < fcopies.size(); ++fi) {
        int copy = fcopies[fi];
        int j = g.copy_out[fi];
        if (g.client_out[j] != copy) continue;
        copy_open[copy] = 1;
        ++acc.open_count[t][copy];
        int orig = prep.copy_original[copy];
        open_cost_copies += inst.open_cost(orig, t);
        if (!orig_open[orig]) {
          orig_open[orig] = 1;
          open_cost_orig += inst.open_cost(orig, t);
        }
      }

      edge_buf.assign(lay.edges[t].size(), 0);
      double conn = 0.0;
      for (int j = 0; j < prep.n_clients; ++j) {
        connection_path_into(j, g, ws, path);
        int assigned = -1;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
          const PathVertex &a = path[k], &b = path[k + 1];
          int client = a.is_facility ? b.id : a.id;
          int copy = a.is_facility ? a.id : b.id;
          ++edge_buf[lay.edge_id(t, client, copy)];
        }
        for (auto it = path.rbegin(); it != path.rend(); ++it)
          if (it->is_facility) {
            assigned = it->id;
            break;
          }
        if (assigned < 0 || !copy_open[assigned])
          throw SolverError("rounding: client assigned to an unopened facility");
        copy_assign[t][j] = assigned;
        int orig = prep.copy_original[assigned];
        orig_assign[t][j] = orig;
        conn += inst.dist(t, orig, j);
      }
      for (std::size_t e = 0; e < edge_buf.size(); ++e)
        acc.edge_traversals[t][e].add(edge_buf[e]);

      acc.copy_open_cost[t].add(open_cost_copies);
      acc.orig_open_cost[t].add(open_cost_orig);
      acc.conn_cost[t].add(conn);
      trial_opening += open_cost_orig;
      trial_conn += conn;
    }

    long long trial_switches = 0;
    for (int t = 0; t + 1 < prep.T; ++t) {
      long long sc = 0, so = 0;
      for (int j = 0; j < prep.n_clients; ++j) {
        if (copy_assign[t][j] != copy_assign[t + 1][j]) ++sc;
        if (orig_assign[t][j] != orig_assign[t + 1][j]) ++so;
      }
      acc.copy_switches[t].add(sc);
      acc.orig_switches[t].add(so);
      trial_switches += so;
    }
    acc.total_opening.add(trial_opening);
    acc.total_connection.add(trial_conn);
    acc.total_switches.add(trial_switches);
    acc.total_cost.add(trial_opening + trial_conn + inst.g * static_cast<double>(trial_switches));
  }
};

}  // namespace

TrialStats run_trials(const Instance& inst, const PreprocessedSolution& prep, long long trials,
                      std::uint64_t base_seed, int threads) {
  if (trials < 1) throw DataError("run_trials: trials must be >= 1");
  if (inst.T != prep.T || inst.num_facilities() != prep.n_originals ||
      inst.num_clients() != prep.n_clients)
    throw DataError("run_trials: instance/preprocessed dimensions do not match");

  TrialLayout lay = make_layout(inst, prep);
  long long n_chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  int n_threads = resolve_threads(threads, n_chunks);
  std::vector<ChunkAccum> chunks(n_chunks);
  std::vector<std::unique_ptr<Worker>> workers(n_threads);

  for_each_chunk(trials, n_threads, [&](int tid, long long c, long long first, long long last) {
    if (!workers[tid]) workers[tid] = std::make_unique<Worker>(lay);
    chunks[c].init(lay);
    for (long long k = first; k < last; ++k)
      workers[tid]->run_trial(base_seed + static_cast<std::uint64_t>(k), chunks[c]);
  });

  TrialStats stats;
  stats.trials = trials;
  stats.T = prep.T;
  stats.n_copies = prep.num_copies();
  stats.n_clients = prep.n_clients;
  stats.edges = lay.edges;
  stats.open_count.assign(prep.T, std::vector<long long>(prep.num_copies(), 0));
  stats.edge_traversals.resize(prep.T);
  for (int t = 0; t < prep.T; ++t) stats.edge_traversals[t].assign(lay.edges[t].size(), CountVar{});
  stats.copy_open_cost.assign(prep.T, MeanVar{});
  stats.orig_open_cost.assign(prep.T, MeanVar{});
  stats.conn_cost.assign(prep.T, MeanVar{});
  stats.copy_switches.assign(std::max(0, prep.T - 1), CountVar{});
  stats.orig_switches.assign(std::max(0, prep.T - 1), CountVar{});

  for (const ChunkAccum& c : chunks) {
    for (int t = 0; t < prep.T; ++t) {
      for (int i = 0; i < prep.num_copies(); ++i) stats.open_count[t][i] += c.open_count[t][i];
      for (std::size_t e = 0; e < lay.edges[t].size(); ++e)
        stats.edge_traversals[t][e].merge(c.edge_traversals[t][e]);
      stats.copy_open_cost[t].merge(c.copy_open_cost[t]);
      stats.orig_open_cost[t].merge(c.orig_open_cost[t]);
      stats.conn_cost[t].merge(c.conn_cost[t]);
    }
    for (int t = 0; t + 1 < prep.T; ++t) {
      stats.copy_switches[t].merge(c.copy_switches[t]);
      stats.orig_switches[t].merge(c.orig_switches[t]);
    }
    stats.total_opening.merge(c.total_opening);
    stats.total_connection.merge(c.total_connection);
    stats.total_switches.merge(c.total_switches);
    stats.total_cost.merge(c.total_cost);
  }
  return stats;
}

// --- Bound checks ------------------------------------------------------------

namespace {

BoundCheck one_sided(std::string name, int t, double mean, double se, double bound) {
  BoundCheck b;
  b.name = std::move(name);
  b.t = t;
  b.empirical = mean;
  b.se = std::isfinite(se) ? se : 0.0;
  b.bound = bound;
  if (mean <= bound) {
    b.sigma_distance = 0.0;
    b.pass = true;
  } else if (b.se > 0.0) {
    b.sigma_distance = (mean - bound) / b.se;
    b.pass = b.sigma_distance <= kSigma;
  } else {
    b.sigma_distance = inf_d();
    b.pass = false;
  }
  return b;
}

}  // namespace

BoundReport check_bounds(const TrialStats& stats, const PreprocessedSolution& prep,
                         const Instance& inst) {
  if (stats.T != prep.T || stats.n_copies != prep.num_copies() ||
      stats.n_clients != prep.n_clients)
    throw DataError("check_bounds: stats/preprocessed dimensions do not match");
  if (inst.T != prep.T || inst.num_facilities() != prep.n_originals)
    throw DataError("check_bounds: instance/preprocessed dimensions do not match");

  BoundReport rep;
  const long long n = stats.trials;

  for (int t = 0; t < prep.T; ++t) {
    double open_bound = 0.0;
    for (int c = 0; c < prep.num_copies(); ++c)
      if (prep.active[t][c])
        open_bound += inst.open_cost(prep.copy_original[c], t) * prep.copy_fraction[c];
    rep.opening.push_back(one_sided("opening", t, stats.copy_open_cost[t].mean(n),
                                    stats.copy_open_cost[t].std_error(n), open_bound));

    double conn_bound = 0.0;
    for (auto [c, j] : stats.edges[t])
      conn_bound += inst.dist(t, prep.copy_original[c], j) * prep.copy_fraction[c];
    rep.connection.push_back(one_sided("connection", t, stats.conn_cost[t].mean(n),
                                       stats.conn_cost[t].std_error(n), 6.0 * conn_bound));
  }
  for (int t = 0; t + 1 < prep.T; ++t) {
    double zt = static_cast<double>(change_set(prep, t).size());
    rep.switching.push_back(one_sided("switching", t, stats.copy_switches[t].mean(n),
                                      stats.copy_switches[t].std_error(n), 7.0 * zt));
  }

  // Per-copy opening frequency must match y exactly (in expectation) for
  // copies in the support.
  rep.open_freq_worst = BoundCheck{"open_frequency", -1, -1, -1, 0, 0, 0, 0.0, true};
  for (int t = 0; t < prep.T; ++t) {
    for (int c : prep.support_copies(t)) {
      double y = prep.copy_fraction[c];
      double freq = stats.open_frequency(t, c);
      double sigma = std::sqrt(std::max(0.0, y * (1.0 - y)) / static_cast<double>(n));
      double dist_sigma;
      if (sigma > 0.0)
        dist_sigma = std::abs(freq - y) / sigma;
      else
        dist_sigma = freq == y ? 0.0 : inf_d();
      ++rep.checks;
      if (dist_sigma >= rep.open_freq_worst.sigma_distance) {
        rep.open_freq_worst =
            BoundCheck{"open_frequency", t, c, -1, freq, sigma, y, dist_sigma, dist_sigma <= kSigma};
      }
    }
  }

  // Per-edge traversal bound: mean <= 6 x.
  rep.edge_worst = BoundCheck{"edge_traversal", -1, -1, -1, 0, 0, 0, 0.0, true};
  bool edge_seen = false;
  for (int t = 0; t < prep.T; ++t) {
    for (std::size_t e = 0; e < stats.edges[t].size(); ++e) {
      auto [c, j] = stats.edges[t][e];
      BoundCheck b = one_sided("edge_traversal", t, stats.edge_traversals[t][e].mean(n),
                               stats.edge_traversals[t][e].std_error(n),
                               6.0 * prep.copy_fraction[c]);
      b.i = c;
      b.j = j;
      ++rep.checks;
      if (!edge_seen || b.sigma_distance > rep.edge_worst.sigma_distance ||
          (b.sigma_distance == rep.edge_worst.sigma_distance &&
           b.empirical - b.bound > rep.edge_worst.empirical - rep.edge_worst.bound)) {
        rep.edge_worst = b;
        edge_seen = true;
      }
    }
  }

  rep.checks += static_cast<long long>(rep.opening.size() + rep.connection.size() +
                                       rep.switching.size());
  rep.pass = rep.open_freq_worst.pass && rep.edge_worst.pass;
  for (const auto* list : {&rep.opening, &rep.connection, &rep.switching})
    for (const BoundCheck& b : *list) rep.pass = rep.pass && b.pass;
  return rep;
}

// --- Perturbation experiment --------------------------------------------------

PerturbationStats perturbation_experiment(const PreprocessedSolution& a,
                                          const PreprocessedSolution& b, long long trials,
                                          std::uint64_t base_seed, int threads) {
  if (trials < 1) throw DataError("perturbation_experiment: trials must be >= 1");
  if (a.T != b.T || a.n_clients != b.n_clients || a.copy_original != b.copy_original ||
      a.copy_fraction != b.copy_fraction)
    throw DataError("perturbation_experiment: inputs must share copies and clients");

  PerturbationStats stats;
  stats.trials = trials;
  stats.T = a.T;
  stats.changed_clients.resize(a.T);
  for (int t = 0; t < a.T; ++t)
    for (int j = 0; j < a.n_clients; ++j)
      if (a.connections[t][j] != b.connections[t][j]) stats.changed_clients[t].push_back(j);

  struct Chunk {
    std::vector<CountVar> paths, assigns;
  };
  struct PairWorker {
    std::vector<ConnectionGraph> ga, gb;
    Clocks clocks;
    PathWorkspace ws;
    std::vector<PathVertex> pa, pb;
    PairWorker(const PreprocessedSolution& a, const PreprocessedSolution& b) {
      for (int t = 0; t < a.T; ++t) {
        ConnectionGraph x, y;
        x.support = build_support(a, t);
        y.support = build_support(b, t);
        ga.push_back(std::move(x));
        gb.push_back(std::move(y));
      }
    }
  };
  long long n_chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  int n_threads = resolve_threads(threads, n_chunks);
  std::vector<Chunk> chunks(n_chunks);
  std::vector<std::unique_ptr<PairWorker>> workers(n_threads);

  for_each_chunk(trials, n_threads, [&](int tid, long long c, long long first, long long last) {
    if (!workers[tid]) workers[tid] = std::make_unique<PairWorker>(a, b);
    PairWorker& w = *workers[tid];
    chunks[c].paths.assign(a.T, CountVar{});
    chunks[c].assigns.assign(a.T, CountVar{});
    for (long long k = first; k < last; ++k) {
      sample_clocks_into(a, base_seed + static_cast<std::uint64_t>(k), w.clocks);
      for (int t = 0; t < a.T; ++t) {
        orient(w.clocks, w.ga[t]);
        orient(w.clocks, w.gb[t]);
        w.ga[t].verify();
        w.gb[t].verify();
        long long diff_paths = 0, diff_assign = 0;
        for (int j = 0; j < a.n_clients; ++j) {
          connection_path_into(j, w.ga[t], w.ws, w.pa);
          connection_path_into(j, w.gb[t], w.ws, w.pb);
          if (w.pa != w.pb) ++diff_paths;
          auto last_fac = [](const std::vector<PathVertex>& p) {
            for (auto it = p.rbegin(); it != p.rend(); ++it)
              if (it->is_facility) return it->id;
            return -1;
          };
          if (last_fac(w.pa) != last_fac(w.pb)) ++diff_assign;
        }
        chunks[c].paths[t].add(diff_paths);
        chunks[c].assigns[t].add(diff_assign);
      }
    }
  });

  stats.differing_paths.assign(a.T, CountVar{});
  stats.differing_assignments.assign(a.T, CountVar{});
  for (const Chunk& c : chunks)
    for (int t = 0; t < a.T; ++t) {
      stats.differing_paths[t].merge(c.paths[t]);
      stats.differing_assignments[t].merge(c.assigns[t]);
    }

  stats.pass = true;
  for (int t = 0; t < a.T; ++t) {
    double bound = 7.0 * static_cast<double>(stats.changed_clients[t].size());
    BoundCheck b = one_sided("differing_paths", t, stats.differing_paths[t].mean(trials),
                             stats.differing_paths[t].std_error(trials), bound);
    stats.pass = stats.pass && b.pass;
    stats.checks.push_back(std::move(b));
  }
  return stats;
}

// --- End-to-end report ---------------------------------------------------------

namespace {

// (mean + 4 se) / denom with guards for zero denominators.
double margin_ratio(double mean, double se, double denom) {
  double num = mean + kSigma * (std::isfinite(se) ? se : 0.0);
  if (denom > 1e-12) return num / denom;
  return num <= 1e-9 ? 0.0 : inf_d();
}

}  // namespace

ApproximationReport approximation_report(const Instance& inst, long long trials,
                                         std::uint64_t seed, long long oracle_limit, int threads,
                                         double tol) {
  ValidationReport val = validate(inst);
  if (!val.pass())
    throw DataError("approximation_report: invalid instance: " + val.violations[0].message);

  ApproximationReport rep;
  rep.trials = trials;
  rep.seed = seed;

  Relaxation rel = build_relaxation(inst);
  FractionalSolution frac = solve(rel, tol);
  rep.lp_objective = frac.objective;
  rep.lp = {frac.opening, frac.connection, frac.switching};

  FractionalSolution stab = stabilize(frac);
  PreprocessedSolution prep = duplicate_facilities(stab);
  rep.n_copies = prep.num_copies();

  TrialStats stats = run_trials(inst, prep, trials, seed, threads);
  rep.bounds = check_bounds(stats, prep, inst);

  const long long n = trials;
  rep.mean_total = stats.total_cost.mean(n);
  rep.se_total = stats.total_cost.std_error(n);
  rep.mean_opening = stats.total_opening.mean(n);
  rep.se_opening = stats.total_opening.std_error(n);
  rep.mean_connection = stats.total_connection.mean(n);
  rep.se_connection = stats.total_connection.std_error(n);
  rep.mean_switching = inst.g * stats.total_switches.mean(n);
  rep.se_switching = inst.g * stats.total_switches.std_error(n);
  if (!std::isfinite(rep.se_switching)) rep.se_switching = nan_d();

  rep.ratio_total = margin_ratio(rep.mean_total, rep.se_total, rep.lp_objective);
  rep.ratio_opening = margin_ratio(rep.mean_opening, rep.se_opening, rep.lp.opening);
  rep.ratio_connection = margin_ratio(rep.mean_connection, rep.se_connection, rep.lp.connection);
  rep.ratio_switching = margin_ratio(rep.mean_switching, rep.se_switching, rep.lp.switching);
  rep.total_bound_pass = rep.ratio_total <= 14.0;
  rep.component_bounds_pass =
      rep.ratio_opening <= 2.0 && rep.ratio_connection <= 12.0 && rep.ratio_switching <= 14.0;

  double enum_size = std::pow(std::pow(2.0, inst.num_facilities()), inst.T);
  if (oracle_limit > 0 && enum_size <= static_cast<double>(oracle_limit)) {
    ExactSolution exact = brute_force(inst, oracle_limit);
    rep.has_oracle = true;
    rep.oracle_cost = exact.cost;
    rep.ratio_vs_opt = margin_ratio(rep.mean_total, rep.se_total, exact.cost);
    rep.opt_bound_pass = rep.ratio_vs_opt <= 14.0;
  }
  return rep;
}

// --- JSON io ---------------------------------------------------------------

using nlohmann::json;

namespace {

json to_json(const BoundCheck& b) {
  json j;
  j["name"] = b.name;
  if (b.t >= 0) j["t"] = b.t;
  if (b.i >= 0) j["i"] = b.i;
  if (b.j >= 0) j["j"] = b.j;
  j["empirical"] = b.empirical;
  j["se"] = b.se;
  j["bound"] = b.bound;
  j["sigma_distance"] = std::isfinite(b.sigma_distance) ? json(b.sigma_distance) : json("inf");
  j["pass"] = b.pass;
  return j;
}

json to_json(const BoundReport& rep) {
  json j;
  json opening = json::array(), connection = json::array(), switching = json::array();
  for (const auto& b : rep.opening) opening.push_back(to_json(b));
  for (const auto& b : rep.connection) connection.push_back(to_json(b));
  for (const auto& b : rep.switching) switching.push_back(to_json(b));
  j["opening"] = std::move(opening);
  j["connection"] = std::move(connection);
  j["switching"] = std::move(switching);
  j["open_frequency_worst"] = to_json(rep.open_freq_worst);
  j["edge_traversal_worst"] = to_json(rep.edge_worst);
  j["checks"] = rep.checks;
  j["pass"] = rep.pass;
  return j;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

void write_report(const ApproximationReport& rep, const std::string& path, bool with_timestamp) {
  json j;
  j["config"] = {{"trials", rep.trials}, {"seed", rep.seed}};
  j["lp"] = {{"objective", rep.lp_objective},
             {"opening", rep.lp.opening},
             {"connection", rep.lp.connection},
             {"switching", rep.lp.switching}};
  j["preprocess"] = {{"copies", rep.n_copies}};
  j["rounding"] = {{"mean_total", rep.mean_total},
                   {"se_total", json_safe(rep.se_total)},
                   {"mean_opening", rep.mean_opening},
                   {"se_opening", json_safe(rep.se_opening)},
                   {"mean_connection", rep.mean_connection},
                   {"se_connection", json_safe(rep.se_connection)},
                   {"mean_switching", rep.mean_switching},
                   {"se_switching", json_safe(rep.se_switching)}};
  j["ratios"] = {{"total", json_safe(rep.ratio_total)},
                 {"opening", json_safe(rep.ratio_opening)},
                 {"connection", json_safe(rep.ratio_connection)},
                 {"switching", json_safe(rep.ratio_switching)},
                 {"targets", {{"total", 14.0}, {"opening", 2.0}, {"connection", 12.0}, {"switching", 14.0}}}};
  if (rep.has_oracle)
    j["oracle"] = {{"cost", rep.oracle_cost},
                   {"ratio_vs_opt", json_safe(rep.ratio_vs_opt)},
                   {"pass", rep.opt_bound_pass}};
  j["bounds"] = to_json(rep.bounds);
  j["pass"] = rep.pass();
  if (with_timestamp) j["timestamp"] = iso_timestamp();
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

void write_perturbation_report(const PerturbationStats& stats, const std::string& path,
                               bool with_timestamp) {
  json j;
  j["trials"] = stats.trials;
  j["T"] = stats.T;
  j["changed_clients"] = stats.changed_clients;
  json per_t = json::array();
  for (int t = 0; t < stats.T; ++t) {
    json e = to_json(stats.checks[t]);
    e["mean_differing_paths"] = stats.differing_paths[t].mean(stats.trials);
    e["mean_differing_assignments"] = stats.differing_assignments[t].mean(stats.trials);
    per_t.push_back(std::move(e));
  }
  j["per_t"] = std::move(per_t);
  j["pass"] = stats.pass;
  if (with_timestamp) j["timestamp"] = iso_timestamp();
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

}  // namespace dynfl
