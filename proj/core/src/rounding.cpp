#include "dynfl/rounding.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

void sample_clocks_into(const PreprocessedSolution& prep, std::uint64_t seed, Clocks& c) {
  c.seed = seed;
  c.facility.resize(prep.num_copies());
  c.client.resize(prep.n_clients);
  for (int i = 0; i < prep.num_copies(); ++i) {
    double rate = prep.copy_fraction[i];
    if (!(rate > 0.0)) throw DataError("sample_clocks: copy with nonpositive opening fraction");
    c.facility[i] = rng::clock_from_uniform(rng::unit_uniform(seed, rng::kFacilityStream, i), rate);
  }
  for (int j = 0; j < prep.n_clients; ++j)
    c.client[j] = rng::clock_from_uniform(rng::unit_uniform(seed, rng::kClientStream, j), 1.0);
}

Clocks sample_clocks(const PreprocessedSolution& prep, std::uint64_t seed) {
  Clocks c;
  sample_clocks_into(prep, seed, c);
  return c;
}

SupportGraph build_support(const PreprocessedSolution& prep, int t) {
  if (t < 0 || t >= prep.T) throw DataError("build_support: t out of range");
  SupportGraph g;
  g.t = t;
  g.n_clients = prep.n_clients;
  g.fac_of = prep.connections[t];
  std::vector<char> present(prep.num_copies(), 0);
  for (int j = 0; j < prep.n_clients; ++j) {
    if (g.fac_of[j].empty())
      throw DataError("build_support: client " + std::to_string(j) +
                      " has empty support at t=" + std::to_string(t) + " (corrupt input)");
    for (int c : g.fac_of[j]) present[c] = 1;
  }
  g.copy_pos.assign(prep.num_copies(), -1);
  for (int c = 0; c < prep.num_copies(); ++c)
    if (present[c]) {
      g.copy_pos[c] = static_cast<int>(g.copies.size());
      g.copies.push_back(c);
    }
  g.clients_of.resize(g.copies.size());
  for (int j = 0; j < prep.n_clients; ++j)
    for (int c : g.fac_of[j]) g.clients_of[g.copy_pos[c]].push_back(j);
  return g;
}

void orient(const Clocks& clocks, ConnectionGraph& graph) {
  const SupportGraph& s = graph.support;
  graph.client_out.resize(s.n_clients);
  graph.copy_out.resize(s.copies.size());
  for (int j = 0; j < s.n_clients; ++j) {
    int best = s.fac_of[j][0];
    for (std::size_t k = 1; k < s.fac_of[j].size(); ++k) {
      int c = s.fac_of[j][k];
      if (facility_clock_less(clocks, c, best)) best = c;
    }
    graph.client_out[j] = best;
  }
  for (std::size_t fi = 0; fi < s.copies.size(); ++fi) {
    const auto& cl = s.clients_of[fi];
    int best = cl[0];
    for (std::size_t k = 1; k < cl.size(); ++k)
      if (client_clock_less(clocks, cl[k], best)) best = cl[k];
    graph.copy_out[fi] = best;
  }
}

ConnectionGraph build_connection_graph(const PreprocessedSolution& prep, int t,
                                       const Clocks& clocks) {
  ConnectionGraph g;
  g.support = build_support(prep, t);
  orient(clocks, g);
  g.verify();
  return g;
}

void ConnectionGraph::verify() const {
  // Vertices: clients 0..nc-1, then support copies by index. Every vertex has
  // exactly one outgoing arc (by construction), so the cycles of the successor
  // map are what we check: each must have exactly two arcs.
  const int nc = support.n_clients;
  const int nfc = static_cast<int>(support.copies.size());
  const int n = nc + nfc;
  thread_local std::vector<int> state;  // 0 unseen, 1 on current walk, 2 done
  thread_local std::vector<int> order;
  state.assign(n, 0);
  order.assign(n, -1);

  auto succ = [&](int v) {
    if (v < nc) return nc + support.copy_pos[client_out[v]];
    return copy_out[v - nc];
  };

  for (int start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    int v = start, steps = 0;
    while (state[v] == 0) {
      state[v] = 1;
      order[v] = steps++;
      v = succ(v);
    }
    if (state[v] == 1) {
      int cycle_len = steps - order[v];
      if (cycle_len != 2)
        throw SolverError("connection graph contains a simple cycle of length " +
                          std::to_string(cycle_len));
    }
    int u = start;
    while (state[u] == 1) {
      state[u] = 2;
      u = succ(u);
    }
  }
}

void connection_path_into(int j, const ConnectionGraph& graph, PathWorkspace& ws,
                          std::vector<PathVertex>& out) {
  const SupportGraph& s = graph.support;
  out.clear();
  if (ws.client_mark.size() < static_cast<std::size_t>(s.n_clients))
    ws.client_mark.assign(s.n_clients, 0);
  if (ws.copy_mark.size() < s.copies.size()) ws.copy_mark.assign(s.copies.size(), 0);
  if (++ws.epoch == 0) {
    std::fill(ws.client_mark.begin(), ws.client_mark.end(), 0);
    std::fill(ws.copy_mark.begin(), ws.copy_mark.end(), 0);
    ws.epoch = 1;
  }

  bool at_client = true;
  int cur = j;
  for (;;) {
    if (at_client) {
      if (ws.client_mark[cur] == ws.epoch) return;
      ws.client_mark[cur] = ws.epoch;
      out.push_back({false, cur});
      cur = graph.client_out[cur];
      at_client = false;
    } else {
      int fi = s.copy_pos[cur];
      if (ws.copy_mark[fi] == ws.epoch) return;
      ws.copy_mark[fi] = ws.epoch;
      out.push_back({true, cur});
      cur = graph.copy_out[fi];
      at_client = true;
    }
  }
}

std::vector<PathVertex> connection_path(int j, const ConnectionGraph& graph) {
  PathWorkspace ws;
  std::vector<PathVertex> out;
  connection_path_into(j, graph, ws, out);
  return out;
}

TimestepRounding round_timestep_graph(const PreprocessedSolution& prep, int t,
                                      const Clocks& clocks) {
  ConnectionGraph g = build_connection_graph(prep, t, clocks);
  TimestepRounding r;
  const SupportGraph& s = g.support;
  std::vector<char> open(prep.num_copies(), 0);
  for (std::size_t fi = 0; fi < s.copies.size(); ++fi) {
    int j = g.copy_out[fi];
    if (g.client_out[j] == s.copies[fi]) {
      open[s.copies[fi]] = 1;
      r.open_copies.push_back(s.copies[fi]);
    }
  }
  r.assignment.assign(prep.n_clients, -1);
  PathWorkspace ws;
  std::vector<PathVertex> path;
  for (int j = 0; j < prep.n_clients; ++j) {
    connection_path_into(j, g, ws, path);
    for (auto it = path.rbegin(); it != path.rend(); ++it)
      if (it->is_facility) {
        r.assignment[j] = it->id;
        break;
      }
    if (r.assignment[j] < 0 || !open[r.assignment[j]])
      throw SolverError("rounding: client assigned to an unopened facility");
  }
  return r;
}

TimestepRounding round_timestep_sequential(const PreprocessedSolution& prep, int t,
                                           const Clocks& clocks) {
  SupportGraph s = build_support(prep, t);
  std::vector<int> order(prep.n_clients);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return client_clock_less(clocks, a, b); });

  TimestepRounding r;
  r.assignment.assign(prep.n_clients, -1);
  std::vector<char> open(prep.num_copies(), 0);
  for (int j : order) {
    int i = s.fac_of[j][0];
    for (std::size_t k = 1; k < s.fac_of[j].size(); ++k)
      if (facility_clock_less(clocks, s.fac_of[j][k], i)) i = s.fac_of[j][k];
    const auto& cl = s.clients_of[s.copy_pos[i]];
    int jprime = cl[0];
    for (std::size_t k = 1; k < cl.size(); ++k)
      if (client_clock_less(clocks, cl[k], jprime)) jprime = cl[k];
    if (jprime == j) {
      open[i] = 1;
      r.assignment[j] = i;
    } else {
      if (r.assignment[jprime] < 0)
        throw SolverError("sequential rounding: dependency client not yet connected");
      r.assignment[j] = r.assignment[jprime];
    }
  }
  for (int c = 0; c < prep.num_copies(); ++c)
    if (open[c]) r.open_copies.push_back(c);
  return r;
}

RoundedSolution round_all(const PreprocessedSolution& prep, const Clocks& clocks) {
  RoundedSolution sol;
  sol.T = prep.T;
  sol.facility_ids = prep.facility_ids;
  sol.client_ids = prep.client_ids;
  sol.open_facilities.resize(prep.T);
  sol.assignment.resize(prep.T);
  sol.open_copies.resize(prep.T);
  sol.copy_assignment.resize(prep.T);
  for (int t = 0; t < prep.T; ++t) {
    TimestepRounding r = round_timestep_graph(prep, t, clocks);
    sol.open_copies[t] = r.open_copies;
    sol.copy_assignment[t] = r.assignment;
    std::vector<int> originals;
    originals.reserve(r.open_copies.size());
    for (int c : r.open_copies) originals.push_back(prep.copy_original[c]);
    std::sort(originals.begin(), originals.end());
    originals.erase(std::unique(originals.begin(), originals.end()), originals.end());
    sol.open_facilities[t] = std::move(originals);
    sol.assignment[t].resize(prep.n_clients);
    for (int j = 0; j < prep.n_clients; ++j)
      sol.assignment[t][j] = prep.copy_original[r.assignment[j]];
  }
  return sol;
}

// --- JSON io ---------------------------------------------------------------

using nlohmann::json;

void write_rounded(const RoundedSolution& sol, const std::string& path, std::uint64_t seed) {
  json doc;
  doc["T"] = sol.T;
  doc["seed"] = seed;
  auto fac_name = [&](int i) {
    return i < static_cast<int>(sol.facility_ids.size()) ? sol.facility_ids[i]
                                                         : "f" + std::to_string(i);
  };
  if (!sol.facility_ids.empty()) doc["facilities"] = sol.facility_ids;
  if (!sol.client_ids.empty()) doc["clients"] = sol.client_ids;
  json open = json::array(), assign = json::array();
  for (int t = 0; t < sol.T; ++t) {
    json ot = json::array();
    for (int i : sol.open_facilities[t]) ot.push_back(fac_name(i));
    open.push_back(std::move(ot));
    json at = json::array();
    for (int i : sol.assignment[t]) at.push_back(fac_name(i));
    assign.push_back(std::move(at));
  }
  doc["open"] = std::move(open);
  doc["assignment"] = std::move(assign);
  doc["debug"] = {{"open_facility_indices", sol.open_facilities},
                  {"assignment_indices", sol.assignment},
                  {"open_copies", sol.open_copies},
                  {"copy_assignment", sol.copy_assignment}};
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << doc.dump(2) << "\n";
}

RoundedSolution read_rounded(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const char* key : {"T", "debug"})
    if (!doc.contains(key)) throw ParseError(path + ": missing field '" + std::string(key) + "'");
  RoundedSolution sol;
  sol.T = doc["T"].get<int>();
  if (doc.contains("facilities")) sol.facility_ids = doc["facilities"].get<std::vector<std::string>>();
  if (doc.contains("clients")) sol.client_ids = doc["clients"].get<std::vector<std::string>>();
  const json& dbg = doc["debug"];
  sol.open_facilities = dbg.at("open_facility_indices").get<std::vector<std::vector<int>>>();
  sol.assignment = dbg.at("assignment_indices").get<std::vector<std::vector<int>>>();
  sol.open_copies = dbg.at("open_copies").get<std::vector<std::vector<int>>>();
  sol.copy_assignment = dbg.at("copy_assignment").get<std::vector<std::vector<int>>>();
  if (static_cast<int>(sol.open_facilities.size()) != sol.T ||
      static_cast<int>(sol.assignment.size()) != sol.T)
    throw ParseError(path + ": debug arrays must have T slices");
  return sol;
}

}  // namespace dynfl
