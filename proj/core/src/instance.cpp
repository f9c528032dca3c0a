#include "dynfl/instance.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

namespace {

// Euclidean distances computed in floating point can miss the triangle
// inequality by rounding error only; anything below this is not a violation.
constexpr double kMetricSlack = 1e-9;

double u01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

Instance Instance::create(int nf, int nc, int T) {
  Instance inst;
  inst.T = T;
  inst.facility_ids.reserve(nf);
  inst.client_ids.reserve(nc);
  for (int i = 0; i < nf; ++i) inst.facility_ids.push_back("f" + std::to_string(i));
  for (int j = 0; j < nc; ++j) inst.client_ids.push_back("c" + std::to_string(j));
  inst.open_cost_data.assign(static_cast<std::size_t>(nf) * T, 0.0);
  inst.dist_data.assign(static_cast<std::size_t>(T) * nf * nc, 0.0);
  return inst;
}

ValidationReport validate(const Instance& inst) {
  ValidationReport report;
  auto add = [&](Violation v) { report.violations.push_back(std::move(v)); };

  const int nf = inst.num_facilities();
  const int nc = inst.num_clients();

  if (inst.T < 1) add({"structure", "T must be >= 1, got " + std::to_string(inst.T)});
  if (nf < 1) add({"structure", "at least one facility required"});
  if (nc < 1) add({"structure", "at least one client required"});
  if (!report.pass()) return report;

  if (inst.open_cost_data.size() != static_cast<std::size_t>(nf) * inst.T)
    add({"structure", "open_cost array has wrong shape"});
  if (inst.dist_data.size() != static_cast<std::size_t>(inst.T) * nf * nc)
    add({"structure", "dist array has wrong shape"});
  if (!report.pass()) return report;

  if (!std::isfinite(inst.g) || inst.g < 0.0)
    add({"sign", "switching cost g must be finite and >= 0"});
  for (int i = 0; i < nf; ++i)
    for (int t = 0; t < inst.T; ++t) {
      double f = inst.open_cost(i, t);
      if (!std::isfinite(f) || f < 0.0) {
        Violation v{"sign", "open_cost must be finite and >= 0"};
        v.i = i;
        v.t = t;
        add(std::move(v));
      }
    }
  for (int t = 0; t < inst.T; ++t)
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nc; ++j) {
        double d = inst.dist(t, i, j);
        if (!std::isfinite(d) || d < 0.0) {
          Violation v{"sign", "distance must be finite and >= 0"};
          v.t = t;
          v.i = i;
          v.j = j;
          v.magnitude = d;
          add(std::move(v));
        }
      }
  if (!report.pass()) return report;

  // Bipartite triangle inequality: d(i,j) <= d(i,j') + d(i',j') + d(i',j).
  // Quadruples with i == i' or j == j' hold trivially. Reports the worst
  // witness per time step.
  for (int t = 0; t < inst.T; ++t) {
    Violation worst;
    worst.magnitude = 0.0;
    for (int i = 0; i < nf; ++i)
      for (int i2 = 0; i2 < nf; ++i2) {
        if (i2 == i) continue;
        for (int j = 0; j < nc; ++j)
          for (int j2 = 0; j2 < nc; ++j2) {
            if (j2 == j) continue;
            double lhs = inst.dist(t, i, j);
            double rhs = inst.dist(t, i, j2) + inst.dist(t, i2, j2) + inst.dist(t, i2, j);
            double excess = lhs - rhs;
            if (excess > worst.magnitude) {
              worst.kind = "triangle";
              worst.t = t;
              worst.i = i;
              worst.i2 = i2;
              worst.j = j;
              worst.j2 = j2;
              worst.magnitude = excess;
            }
          }
      }
    if (worst.magnitude > kMetricSlack) {
      std::ostringstream msg;
      msg << "triangle inequality violated at t=" << worst.t << ": d(" << worst.i << ","
          << worst.j << ") exceeds d(" << worst.i << "," << worst.j2 << ") + d(" << worst.i2
          << "," << worst.j2 << ") + d(" << worst.i2 << "," << worst.j << ") by "
          << worst.magnitude;
      worst.message = msg.str();
      add(std::move(worst));
    }
  }
  return report;
}

Instance generate_drifting(int nf, int nc, int T, double drift, double g, std::uint64_t seed) {
  if (nf < 1 || nc < 1 || T < 1)
    throw DataError("generate_drifting: counts must be >= 1");
  if (!(drift >= 0.0))
    throw DataError("generate_drifting: drift must be >= 0");

  Instance inst = Instance::create(nf, nc, T);
  inst.g = g;

  std::mt19937_64 gen(seed);
  std::vector<std::pair<double, double>> fac(nf), cli(nc);
  for (int i = 0; i < nf; ++i) {
    fac[i] = {u01(gen), u01(gen)};
    double f = 0.5 + 1.5 * u01(gen);
    for (int t = 0; t < T; ++t) inst.open_cost(i, t) = f;
  }
  for (int j = 0; j < nc; ++j) cli[j] = {u01(gen), u01(gen)};

  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int t = 0; t < T; ++t) {
    if (t > 0) {
      for (int j = 0; j < nc; ++j) {
        double angle = kTwoPi * u01(gen);
        double radius = drift * u01(gen);
        cli[j].first += radius * std::cos(angle);
        cli[j].second += radius * std::sin(angle);
      }
    }
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nc; ++j)
        inst.dist(t, i, j) = std::hypot(fac[i].first - cli[j].first, fac[i].second - cli[j].second);
  }
  return inst;
}

// --- JSON io ---------------------------------------------------------------

using nlohmann::json;

namespace {

const json& require_field(const json& obj, const char* key, const std::string& origin) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(origin + ": missing field '" + std::string(key) + "'");
  return *it;
}

}  // namespace

Instance instance_from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(origin + ": top-level value must be an object");

  const json& jfac = require_field(doc, "facilities", origin);
  const json& jcli = require_field(doc, "clients", origin);
  const json& jT = require_field(doc, "T", origin);
  const json& jg = require_field(doc, "g", origin);
  const json& jdist = require_field(doc, "dist", origin);

  if (!jT.is_number_integer())
    throw ParseError(origin + ": field 'T' must be an integer");
  int T = jT.get<int>();
  if (T < 1) throw ParseError(origin + ": field 'T' must be >= 1");
  if (!jfac.is_array() || jfac.empty())
    throw ParseError(origin + ": field 'facilities' must be a nonempty array");
  if (!jcli.is_array() || jcli.empty())
    throw ParseError(origin + ": field 'clients' must be a nonempty array");

  int nf = static_cast<int>(jfac.size());
  int nc = static_cast<int>(jcli.size());
  Instance inst = Instance::create(nf, nc, T);
  inst.g = jg.get<double>();

  for (int i = 0; i < nf; ++i) {
    const json& f = jfac[i];
    if (!f.is_object())
      throw ParseError(origin + ": facilities[" + std::to_string(i) + "] must be an object");
    inst.facility_ids[i] = require_field(f, "id", origin).get<std::string>();
    const json& oc = require_field(f, "open_cost", origin);
    if (oc.is_number()) {
      double v = oc.get<double>();
      for (int t = 0; t < T; ++t) inst.open_cost(i, t) = v;
    } else if (oc.is_array()) {
      if (static_cast<int>(oc.size()) != T)
        throw ParseError(origin + ": facilities[" + std::to_string(i) +
                         "].open_cost array must have T entries");
      for (int t = 0; t < T; ++t) inst.open_cost(i, t) = oc[t].get<double>();
    } else {
      throw ParseError(origin + ": facilities[" + std::to_string(i) +
                       "].open_cost must be a number or an array");
    }
  }
  for (int j = 0; j < nc; ++j) inst.client_ids[j] = jcli[j].get<std::string>();

  if (!jdist.is_array() || static_cast<int>(jdist.size()) != T)
    throw ParseError(origin + ": field 'dist' must be an array of T time slices");
  for (int t = 0; t < T; ++t) {
    const json& slice = jdist[t];
    if (!slice.is_array() || static_cast<int>(slice.size()) != nf)
      throw ParseError(origin + ": dist[" + std::to_string(t) + "] must have |F| rows");
    for (int i = 0; i < nf; ++i) {
      const json& row = slice[i];
      if (!row.is_array() || static_cast<int>(row.size()) != nc)
        throw ParseError(origin + ": dist[" + std::to_string(t) + "][" + std::to_string(i) +
                         "] must have |C| entries");
      for (int j = 0; j < nc; ++j) inst.dist(t, i, j) = row[j].get<double>();
    }
  }
  return inst;
}

std::string instance_to_json_text(const Instance& inst) {
  json doc;
  json facs = json::array();
  for (int i = 0; i < inst.num_facilities(); ++i) {
    json f;
    f["id"] = inst.facility_ids[i];
    bool constant = true;
    for (int t = 1; t < inst.T && constant; ++t)
      constant = inst.open_cost(i, t) == inst.open_cost(i, 0);
    if (constant) {
      f["open_cost"] = inst.open_cost(i, 0);
    } else {
      json arr = json::array();
      for (int t = 0; t < inst.T; ++t) arr.push_back(inst.open_cost(i, t));
      f["open_cost"] = std::move(arr);
    }
    facs.push_back(std::move(f));
  }
  doc["facilities"] = std::move(facs);
  doc["clients"] = inst.client_ids;
  doc["T"] = inst.T;
  doc["g"] = inst.g;
  json dist = json::array();
  for (int t = 0; t < inst.T; ++t) {
    json slice = json::array();
    for (int i = 0; i < inst.num_facilities(); ++i) {
      json row = json::array();
      for (int j = 0; j < inst.num_clients(); ++j) row.push_back(inst.dist(t, i, j));
      slice.push_back(std::move(row));
    }
    dist.push_back(std::move(slice));
  }
  doc["dist"] = std::move(dist);
  return doc.dump(2) + "\n";
}

Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json_text(buf.str(), path);
}

void write_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << instance_to_json_text(inst);
}

}  // namespace dynfl
