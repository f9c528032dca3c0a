#pragma once

// Dynamic facility location instances: a set of facilities and clients, T
// per-time bipartite metrics d_t(i,j), per-time opening costs f_i^t and a
// switching cost g. Instances are immutable after construction and safe to
// share read-only across threads.

#include <cstdint>
#include <string>
#include <vector>

namespace dynfl {

struct Instance {
  std::vector<std::string> facility_ids;
  std::vector<std::string> client_ids;
  int T = 0;
  double g = 0.0;

  // Dense storage: open_cost is facility-major, dist is [t][facility][client].
  std::vector<double> open_cost_data;
  std::vector<double> dist_data;

  int num_facilities() const { return static_cast<int>(facility_ids.size()); }
  int num_clients() const { return static_cast<int>(client_ids.size()); }

  double open_cost(int i, int t) const { return open_cost_data[static_cast<std::size_t>(i) * T + t]; }
  double& open_cost(int i, int t) { return open_cost_data[static_cast<std::size_t>(i) * T + t]; }

  double dist(int t, int i, int j) const {
    return dist_data[(static_cast<std::size_t>(t) * num_facilities() + i) * num_clients() + j];
  }
  double& dist(int t, int i, int j) {
    return dist_data[(static_cast<std::size_t>(t) * num_facilities() + i) * num_clients() + j];
  }

  /// Zero-filled instance with auto-generated ids f0..f{nf-1}, c0..c{nc-1}.
  static Instance create(int nf, int nc, int T);

  bool operator==(const Instance&) const = default;
};

struct Violation {
  std::string kind;  // "structure", "sign", "finite", "triangle"
  std::string message;
  int t = -1;
  int i = -1, i2 = -1;  // witnessing facilities (triangle)
  int j = -1, j2 = -1;  // witnessing clients (triangle)
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool pass() const { return violations.empty(); }
};

/// Check the instance invariants: positive counts, finite nonnegative costs,
/// and for every t the bipartite triangle inequality
///   d_t(i,j) <= d_t(i,j') + d_t(i',j') + d_t(i',j).
/// Violations are reported, not thrown; the triangle scan reports the worst
/// witness per time step.
ValidationReport validate(const Instance& inst);

/// Random planar instance: facilities fixed, clients drift each step by a
/// random offset of magnitude <= drift, d_t = Euclidean distance (a metric by
/// construction). Deterministic in seed.
Instance generate_drifting(int nf, int nc, int T, double drift, double g, std::uint64_t seed);

Instance read_instance(const std::string& path);
void write_instance(const Instance& inst, const std::string& path);

/// JSON text forms (the file operations are thin wrappers around these).
Instance instance_from_json_text(const std::string& text, const std::string& origin = "<string>");
std::string instance_to_json_text(const Instance& inst);

}  // namespace dynfl
