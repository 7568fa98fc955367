#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fdl {

/// Fixed communication topology: one virtual leader plus N followers.
///
/// Followers are indexed 0..N-1 internally; diagnostics and files use 1-based
/// agent ids with 0 reserved for the leader.
struct Topology {
  int n_followers = 0;
  Eigen::MatrixXd adjacency;    // N x N, a_ij between followers
  Eigen::VectorXd leader_links; // a_i0, the diagonal of Delta

  /// Build from a 1-based undirected edge list and 1-based leader links.
  static Topology from_edges(int n_followers,
                             const std::vector<std::pair<int, int>>& edges,
                             const std::vector<double>& edge_weights,
                             const std::vector<std::pair<int, double>>& leader_links);
};

/// Throws std::invalid_argument for asymmetric adjacency, a non-zero
/// diagonal, negative weights or inconsistent sizes.
void validate_topology(const Topology& t);

struct LaplacianPair {
  Eigen::MatrixXd full;     // (N+1) x (N+1), leader first
  Eigen::MatrixXd follower; // L1 = L_s + Delta
  Eigen::MatrixXd delta;    // diag(a_10 .. a_N0)

  /// Laplacian of the follower subgraph alone (L1 - Delta).
  [[nodiscard]] Eigen::MatrixXd subgraph() const { return follower - delta; }
};

LaplacianPair build_laplacians(const Topology& t);

struct ConnectivityReport {
  bool ok = false;
  double min_eigenvalue = 0.0; // of L1
  std::vector<int> unreachable; // 1-based follower ids
  std::string diagnostic;
};

/// Leader reaches every follower through leader links plus the undirected
/// follower subgraph, and L1 is positive definite (relative tolerance 1e-9).
ConnectivityReport check_assumption3(const Topology& t);

inline constexpr double kPositiveDefiniteRelTol = 1e-9;

} // namespace fdl
