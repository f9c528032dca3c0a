#include "dynfl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

std::pair<std::vector<int>, double> per_client_dp(const std::vector<std::vector<int>>& open_sets,
                                                  int client, const Instance& inst) {
  const int T = static_cast<int>(open_sets.size());
  if (T != inst.T) throw DataError("per_client_dp: open set count differs from T");
  for (const auto& a : open_sets)
    if (a.empty()) throw DataError("per_client_dp: empty open set");

  // cost[t][k]: best cost of serving steps 0..t ending at open_sets[t][k].
  std::vector<std::vector<double>> cost(T);
  std::vector<std::vector<int>> parent(T);
  cost[0].resize(open_sets[0].size());
  parent[0].assign(open_sets[0].size(), -1);
  for (std::size_t k = 0; k < open_sets[0].size(); ++k)
    cost[0][k] = inst.dist(0, open_sets[0][k], client);

  for (int t = 1; t < T; ++t) {
    // Cheapest predecessor; smallest index on ties for determinism.
    int best_prev = 0;
    for (std::size_t k = 1; k < open_sets[t - 1].size(); ++k)
      if (cost[t - 1][k] < cost[t - 1][best_prev]) best_prev = static_cast<int>(k);

    cost[t].resize(open_sets[t].size());
    parent[t].resize(open_sets[t].size());
    for (std::size_t k = 0; k < open_sets[t].size(); ++k) {
      int fac = open_sets[t][k];
      double switch_cost = cost[t - 1][best_prev] + inst.g;
      int from = best_prev;
      // Staying at the same facility avoids g when it was open at t-1.
      auto it = std::lower_bound(open_sets[t - 1].begin(), open_sets[t - 1].end(), fac);
      if (it != open_sets[t - 1].end() && *it == fac) {
        int idx = static_cast<int>(it - open_sets[t - 1].begin());
        if (cost[t - 1][idx] <= switch_cost) {
          switch_cost = cost[t - 1][idx];
          from = idx;
        }
      }
      cost[t][k] = inst.dist(t, fac, client) + switch_cost;
      parent[t][k] = from;
    }
  }

  int best = 0;
  for (std::size_t k = 1; k < open_sets[T - 1].size(); ++k)
    if (cost[T - 1][k] < cost[T - 1][best]) best = static_cast<int>(k);
  std::vector<int> seq(T);
  int k = best;
  for (int t = T - 1; t >= 0; --t) {
    seq[t] = open_sets[t][k];
    k = parent[t][k];
  }
  return {std::move(seq), cost[T - 1][best]};
}

ExactSolution brute_force(const Instance& inst, long long limit) {
  const int nf = inst.num_facilities();
  const int nc = inst.num_clients();
  const int T = inst.T;
  if (nf < 1 || nc < 1 || T < 1) throw DataError("brute_force: empty instance");
  if (nf >= 62) throw DataError("brute_force: too many facilities");

  double tuples = std::pow(std::pow(2.0, nf), T);
  if (tuples > static_cast<double>(limit))
    throw DataError("brute_force: enumeration budget exceeded: (2^" + std::to_string(nf) +
                    ")^" + std::to_string(T) + " > " + std::to_string(limit));

  const long long n_masks = (1LL << nf) - 1;  // nonempty subsets per step

  // Per (t, mask): opening cost of the set.
  std::vector<std::vector<double>> mask_open_cost(T, std::vector<double>(n_masks + 1, 0.0));
  for (int t = 0; t < T; ++t)
    for (long long m = 1; m <= n_masks; ++m)
      for (int i = 0; i < nf; ++i)
        if (m & (1LL << i)) mask_open_cost[t][m] += inst.open_cost(i, t);

  std::vector<std::vector<int>> mask_members(n_masks + 1);
  for (long long m = 1; m <= n_masks; ++m)
    for (int i = 0; i < nf; ++i)
      if (m & (1LL << i)) mask_members[m].push_back(i);

  ExactSolution best;
  best.cost = std::numeric_limits<double>::infinity();

  // Odometer over (mask_1, ..., mask_T), leftmost step most significant, so
  // strict improvement keeps the lexicographically first optimal tuple.
  std::vector<long long> masks(T, 1);
  std::vector<std::vector<int>> open_sets(T);
  std::vector<std::vector<int>> assign(nc);
  for (;;) {
    ++best.tuples_examined;
    double c = 0.0;
    for (int t = 0; t < T; ++t) {
      c += mask_open_cost[t][masks[t]];
      open_sets[t] = mask_members[masks[t]];
    }
    if (c < best.cost) {  // opening cost alone may already lose
      double total = c;
      bool better = true;
      for (int j = 0; j < nc && better; ++j) {
        auto [seq, jc] = per_client_dp(open_sets, j, inst);
        total += jc;
        assign[j] = std::move(seq);
        if (total >= best.cost) better = false;
      }
      if (better && total < best.cost) {
        best.cost = total;
        best.open = open_sets;
        best.assignment = assign;
      }
    }

    int t = T - 1;
    while (t >= 0 && masks[t] == n_masks) masks[t--] = 1;
    if (t < 0) break;
    ++masks[t];
  }
  return best;
}

ExactSolution brute_force_classic(const Instance& inst) {
  if (inst.T != 1) throw DataError("brute_force_classic: requires T == 1");
  const int nf = inst.num_facilities();
  const int nc = inst.num_clients();
  ExactSolution best;
  best.cost = std::numeric_limits<double>::infinity();
  for (long long m = 1; m < (1LL << nf); ++m) {
    ++best.tuples_examined;
    double c = 0.0;
    std::vector<int> members;
    for (int i = 0; i < nf; ++i)
      if (m & (1LL << i)) {
        c += inst.open_cost(i, 0);
        members.push_back(i);
      }
    std::vector<int> assign(nc);
    for (int j = 0; j < nc; ++j) {
      int arg = members[0];
      for (int i : members)
        if (inst.dist(0, i, j) < inst.dist(0, arg, j)) arg = i;
      assign[j] = arg;
      c += inst.dist(0, arg, j);
    }
    if (c < best.cost) {
      best.cost = c;
      best.open = {members};
      best.assignment.assign(nc, {});
      for (int j = 0; j < nc; ++j) best.assignment[j] = {assign[j]};
    }
  }
  return best;
}

using nlohmann::json;

void write_exact(const ExactSolution& sol, const std::string& path) {
  json doc;
  doc["cost"] = sol.cost;
  doc["open"] = sol.open;
  doc["assignment"] = sol.assignment;
  doc["tuples_examined"] = sol.tuples_examined;
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << doc.dump(2) << "\n";
}

ExactSolution read_exact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  ExactSolution sol;
  sol.cost = doc.at("cost").get<double>();
  sol.open = doc.at("open").get<std::vector<std::vector<int>>>();
  sol.assignment = doc.at("assignment").get<std::vector<std::vector<int>>>();
  sol.tuples_examined = doc.value("tuples_examined", 0LL);
  return sol;
}

}  // namespace dynfl
