#include "dynfl/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

std::vector<int> PreprocessedSolution::support_copies(int t) const {
  std::vector<char> seen(num_copies(), 0);
  for (const auto& conn : connections[t])
    for (int c : conn) seen[c] = 1;
  std::vector<int> out;
  for (int c = 0; c < num_copies(); ++c)
    if (seen[c]) out.push_back(c);
  return out;
}

void PreprocessedSolution::aggregate(std::vector<double>& x_out, std::vector<double>& y_out) const {
  x_out.assign(static_cast<std::size_t>(T) * n_originals * n_clients, 0.0);
  y_out.assign(static_cast<std::size_t>(T) * n_originals, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < num_copies(); ++c)
      if (active[t][c])
        y_out[static_cast<std::size_t>(t) * n_originals + copy_original[c]] += copy_fraction[c];
    for (int j = 0; j < n_clients; ++j)
      for (int c : connections[t][j])
        x_out[(static_cast<std::size_t>(t) * n_originals + copy_original[c]) * n_clients + j] +=
            copy_fraction[c];
  }
}

std::vector<int> compute_boundaries(const FractionalSolution& frac, int client) {
  const int T = frac.T;
  std::vector<int> bounds{0};
  int a = 0;
  std::vector<double> window_min(frac.nf);
  while (a < T) {
    // Grow the window [a, b); the min-sum is non-increasing in b, so the
    // largest feasible b is the last one before the sum drops below 1/2.
    for (int i = 0; i < frac.nf; ++i) window_min[i] = frac.xv(a, i, client);
    int best = a + 1;
    for (int b = a + 2; b <= T; ++b) {
      double sum = 0.0;
      for (int i = 0; i < frac.nf; ++i) {
        window_min[i] = std::min(window_min[i], frac.xv(b - 1, i, client));
        sum += window_min[i];
      }
      if (sum >= 0.5)
        best = b;
      else
        break;
    }
    bounds.push_back(best);
    a = best;
  }
  return bounds;
}

FractionalSolution stabilize(const FractionalSolution& frac) {
  std::string why;
  if (!check_feasible(frac, kFeasTol, &why))
    throw DataError("stabilize: infeasible input (" + why + ")");

  const int T = frac.T, nf = frac.nf, nc = frac.nc;
  FractionalSolution out = FractionalSolution::zeros(T, nf, nc);
  out.facility_ids = frac.facility_ids;
  out.client_ids = frac.client_ids;
  out.objective = out.opening = out.connection = out.switching =
      std::numeric_limits<double>::quiet_NaN();

  for (int j = 0; j < nc; ++j) {
    std::vector<int> bounds = compute_boundaries(frac, j);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      int a = bounds[k], b = bounds[k + 1];
      std::vector<double> m(nf, std::numeric_limits<double>::infinity());
      double norm = 0.0;
      for (int i = 0; i < nf; ++i) {
        for (int u = a; u < b; ++u) m[i] = std::min(m[i], frac.xv(u, i, j));
        norm += m[i];
      }
      // The boundary rule guarantees norm >= 1/2 on the same floats.
      for (int i = 0; i < nf; ++i) {
        double v = m[i] / norm;
        for (int u = a; u < b; ++u) out.xv(u, i, j) = v;
      }
    }
  }

  for (int t = 0; t < T; ++t)
    for (int i = 0; i < nf; ++i) out.yv(t, i) = 2.0 * frac.yv(t, i);

  if (T > 1) {
    double z_new = 0.0, z_old = 0.0;
    for (int t = 0; t + 1 < T; ++t)
      for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nc; ++j) {
          double v = std::max(0.0, out.xv(t, i, j) - out.xv(t + 1, i, j));
          out.zv(t, i, j) = v;
          z_new += v;
          z_old += frac.zv(t, i, j);
        }
    // Top up to exactly double the original switching mass. The deficit is
    // nonnegative (up to float noise); it all goes on the first (i,j) pair
    // at the first step, which is as good as any other placement.
    double deficit = 2.0 * z_old - z_new;
    if (deficit < -1e-9)
      throw DataError("stabilize: switching mass exceeds doubled input");
    if (deficit > 0.0) out.zv(0, 0, 0) += deficit;
  }
  return out;
}

namespace {

struct TaggedValue {
  double value;
  bool is_y;       // else an x value
  int t;
  int j;           // client, when is_y == false
};

}  // namespace

PreprocessedSolution duplicate_facilities(const FractionalSolution& frac) {
  std::string why;
  if (!check_feasible(frac, kFeasTol, &why))
    throw DataError("duplicate_facilities: infeasible input (" + why + ")");

  const int T = frac.T, nf = frac.nf, nc = frac.nc;
  PreprocessedSolution prep;
  prep.T = T;
  prep.n_originals = nf;
  prep.n_clients = nc;
  prep.facility_ids = frac.facility_ids;
  prep.client_ids = frac.client_ids;
  prep.copies_of.resize(nf);
  prep.active.assign(T, {});
  prep.connections.assign(T, std::vector<std::vector<int>>(nc));

  for (int t = 0; t + 1 < T; ++t)
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nc; ++j) prep.z_total += frac.zv(t, i, j);

  std::vector<TaggedValue> values;
  for (int i = 0; i < nf; ++i) {
    values.clear();
    for (int t = 0; t < T; ++t) {
      if (frac.yv(t, i) > kSnapTol) values.push_back({frac.yv(t, i), true, t, -1});
      for (int j = 0; j < nc; ++j)
        if (frac.xv(t, i, j) > kSnapTol) values.push_back({frac.xv(t, i, j), false, t, j});
    }
    if (values.empty()) continue;  // facility unused everywhere

    std::sort(values.begin(), values.end(),
              [](const TaggedValue& a, const TaggedValue& b) { return a.value < b.value; });

    // Cluster values whose consecutive gap is <= kSnapTol; the cluster
    // maximum becomes the threshold. Consecutive thresholds then differ by
    // more than kSnapTol, so no near-zero copy can appear.
    std::vector<double> thresholds;
    std::vector<int> cluster_of(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k == 0 || values[k].value - values[k - 1].value > kSnapTol)
        thresholds.push_back(values[k].value);
      else
        thresholds.back() = values[k].value;
      cluster_of[k] = static_cast<int>(thresholds.size()) - 1;
    }

    int first_copy = prep.num_copies();
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      double o = k == 0 ? thresholds[0] : thresholds[k] - thresholds[k - 1];
      prep.copy_original.push_back(i);
      prep.copy_fraction.push_back(o);
      prep.copies_of[i].push_back(first_copy + static_cast<int>(k));
    }

    // Activations and connections are prefixes of the copy list: the entity
    // with cluster index k uses copies 0..k of this facility.
    std::vector<std::vector<int>> y_cluster(T, std::vector<int>());  // per t, singleton or empty
    for (std::size_t k = 0; k < values.size(); ++k) {
      const TaggedValue& tv = values[k];
      if (tv.is_y) {
        y_cluster[tv.t].assign(1, cluster_of[k]);
      } else {
        auto& conn = prep.connections[tv.t][tv.j];
        for (int c = 0; c <= cluster_of[k]; ++c) conn.push_back(first_copy + c);
      }
    }
    for (int t = 0; t < T; ++t) {
      prep.active[t].resize(prep.num_copies(), 0);
      if (!y_cluster[t].empty())
        for (int c = 0; c <= y_cluster[t][0]; ++c) prep.active[t][first_copy + c] = 1;
    }
  }
  for (int t = 0; t < T; ++t) prep.active[t].resize(prep.num_copies(), 0);

  // A connected copy must be active (x <= y in the input guarantees it).
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < nc; ++j) {
      auto& conn = prep.connections[t][j];
      std::sort(conn.begin(), conn.end());
      for (int c : conn)
        if (!prep.active[t][c])
          throw DataError("duplicate_facilities: connection to an inactive copy slab");
    }
  return prep;
}

std::vector<int> change_set(const FractionalSolution& frac, int t, double eps) {
  if (t < 0 || t + 1 >= frac.T) throw DataError("change_set: t out of range");
  std::vector<int> out;
  for (int j = 0; j < frac.nc; ++j) {
    for (int i = 0; i < frac.nf; ++i) {
      if (std::abs(frac.xv(t, i, j) - frac.xv(t + 1, i, j)) > eps) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

std::vector<int> change_set(const PreprocessedSolution& prep, int t) {
  if (t < 0 || t + 1 >= prep.T) throw DataError("change_set: t out of range");
  std::vector<int> out;
  for (int j = 0; j < prep.n_clients; ++j)
    if (prep.connections[t][j] != prep.connections[t + 1][j]) out.push_back(j);
  return out;
}

PreprocessedSolution slice_time(const PreprocessedSolution& prep, int first, int last) {
  if (first < 0 || last > prep.T || first >= last)
    throw DataError("slice_time: bad time range");
  PreprocessedSolution out = prep;
  out.T = last - first;
  out.active.assign(prep.active.begin() + first, prep.active.begin() + last);
  out.connections.assign(prep.connections.begin() + first, prep.connections.begin() + last);
  out.z_total = 0.0;
  return out;
}

// --- JSON io ---------------------------------------------------------------

using nlohmann::json;

void write_preprocessed(const PreprocessedSolution& prep, const std::string& path) {
  json doc;
  doc["T"] = prep.T;
  if (!prep.facility_ids.empty()) doc["facilities"] = prep.facility_ids;
  if (!prep.client_ids.empty()) doc["clients"] = prep.client_ids;
  json copies = json::array();
  for (int c = 0; c < prep.num_copies(); ++c)
    copies.push_back({{"original", prep.copy_original[c]}, {"o", prep.copy_fraction[c]}});
  doc["copies"] = std::move(copies);
  doc["back_map"] = prep.copy_original;
  json active = json::array();
  for (int t = 0; t < prep.T; ++t) {
    json row = json::array();
    for (char a : prep.active[t]) row.push_back(a ? 1 : 0);
    active.push_back(std::move(row));
  }
  doc["active"] = std::move(active);
  doc["connect"] = prep.connections;
  doc["z_total"] = prep.z_total;
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << doc.dump(2) << "\n";
}

PreprocessedSolution read_preprocessed(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const char* key : {"T", "copies", "back_map", "active", "connect"})
    if (!doc.contains(key)) throw ParseError(path + ": missing field '" + std::string(key) + "'");

  PreprocessedSolution prep;
  prep.T = doc["T"].get<int>();
  if (doc.contains("facilities")) prep.facility_ids = doc["facilities"].get<std::vector<std::string>>();
  if (doc.contains("clients")) prep.client_ids = doc["clients"].get<std::vector<std::string>>();

  const json& copies = doc["copies"];
  for (const json& c : copies) {
    prep.copy_original.push_back(c.at("original").get<int>());
    prep.copy_fraction.push_back(c.at("o").get<double>());
  }
  std::vector<int> back = doc["back_map"].get<std::vector<int>>();
  if (back != prep.copy_original)
    throw ParseError(path + ": back_map disagrees with copies[].original");

  prep.n_originals = prep.facility_ids.empty()
                         ? (prep.copy_original.empty()
                                ? 0
                                : *std::max_element(prep.copy_original.begin(),
                                                    prep.copy_original.end()) +
                                      1)
                         : static_cast<int>(prep.facility_ids.size());
  prep.copies_of.resize(prep.n_originals);
  for (int c = 0; c < prep.num_copies(); ++c) prep.copies_of[prep.copy_original[c]].push_back(c);

  const json& active = doc["active"];
  const json& connect = doc["connect"];
  if (static_cast<int>(active.size()) != prep.T || static_cast<int>(connect.size()) != prep.T)
    throw ParseError(path + ": 'active'/'connect' must have T slices");
  prep.active.resize(prep.T);
  prep.connections.resize(prep.T);
  for (int t = 0; t < prep.T; ++t) {
    if (static_cast<int>(active[t].size()) != prep.num_copies())
      throw ParseError(path + ": 'active' slice has wrong copy count");
    prep.active[t].resize(prep.num_copies());
    for (int c = 0; c < prep.num_copies(); ++c)
      prep.active[t][c] = active[t][c].get<int>() ? 1 : 0;
    prep.connections[t] = connect[t].get<std::vector<std::vector<int>>>();
  }
  prep.n_clients = prep.client_ids.empty()
                       ? static_cast<int>(prep.connections[0].size())
                       : static_cast<int>(prep.client_ids.size());
  for (int t = 0; t < prep.T; ++t)
    if (static_cast<int>(prep.connections[t].size()) != prep.n_clients)
      throw ParseError(path + ": 'connect' slice has wrong client count");
  prep.z_total = doc.value("z_total", 0.0);
  return prep;
}

}  // namespace dynfl
