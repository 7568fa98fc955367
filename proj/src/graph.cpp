#include "fdl/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace fdl {

Topology Topology::from_edges(int n_followers,
                              const std::vector<std::pair<int, int>>& edges,
                              const std::vector<double>& edge_weights,
                              const std::vector<std::pair<int, double>>& leader_links) {
  if (n_followers <= 0) {
    throw std::invalid_argument("topology: n_followers must be positive");
  }
  if (edge_weights.size() != edges.size()) {
    throw std::invalid_argument("topology: one weight per edge required");
  }
  Topology t;
  t.n_followers = n_followers;
  t.adjacency = Eigen::MatrixXd::Zero(n_followers, n_followers);
  t.leader_links = Eigen::VectorXd::Zero(n_followers);
  auto check_id = [n_followers](int id) {
    if (id < 1 || id > n_followers) {
      throw std::invalid_argument("topology: agent id " + std::to_string(id) + " out of range");
    }
  };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    check_id(a);
    check_id(b);
    if (a == b) {
      throw std::invalid_argument("topology: self loop on agent " + std::to_string(a));
    }
    t.adjacency(a - 1, b - 1) = edge_weights[e];
    t.adjacency(b - 1, a - 1) = edge_weights[e];
  }
  for (const auto& [id, w] : leader_links) {
    check_id(id);
    t.leader_links(id - 1) = w;
  }
  return t;
}

void validate_topology(const Topology& t) {
  const int n = t.n_followers;
  if (n <= 0) {
    throw std::invalid_argument("topology: n_followers must be positive");
  }
  if (t.adjacency.rows() != n || t.adjacency.cols() != n || t.leader_links.size() != n) {
    throw std::invalid_argument("topology: adjacency/leader_links size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (t.adjacency(i, i) != 0.0) {
      throw std::invalid_argument("topology: adjacency diagonal must be zero");
    }
    if (t.leader_links(i) < 0.0) {
      throw std::invalid_argument("topology: negative leader link weight");
    }
    for (int j = 0; j < n; ++j) {
      if (t.adjacency(i, j) < 0.0) {
        throw std::invalid_argument("topology: negative adjacency weight");
      }
      if (t.adjacency(i, j) != t.adjacency(j, i)) {
        throw std::invalid_argument("topology: follower adjacency must be symmetric");
      }
    }
  }
}

LaplacianPair build_laplacians(const Topology& t) {
  validate_topology(t);
  const int n = t.n_followers;
  LaplacianPair out;
  out.delta = t.leader_links.asDiagonal();
  out.follower = -t.adjacency;
  for (int i = 0; i < n; ++i) {
    out.follower(i, i) = t.adjacency.row(i).sum() + t.leader_links(i);
  }
  out.full = Eigen::MatrixXd::Zero(n + 1, n + 1);
  out.full.block(1, 0, n, 1) = -t.leader_links;
  out.full.block(1, 1, n, n) = out.follower;
  return out;
}

ConnectivityReport check_assumption3(const Topology& t) {
  ConnectivityReport rep;
  try {
    validate_topology(t);
  } catch (const std::invalid_argument& e) {
    rep.diagnostic = e.what();
    return rep;
  }
  const int n = t.n_followers;

  std::vector<bool> seen(n, false);
  std::deque<int> frontier;
  for (int i = 0; i < n; ++i) {
    if (t.leader_links(i) > 0.0) {
      seen[i] = true;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop_front();
    for (int j = 0; j < n; ++j) {
      if (!seen[j] && t.adjacency(i, j) > 0.0) {
        seen[j] = true;
        frontier.push_back(j);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) rep.unreachable.push_back(i + 1);
  }

  const Eigen::MatrixXd l1 = build_laplacians(t).follower;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l1, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  const double scale = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const bool pd = scale > 0.0 && rep.min_eigenvalue > kPositiveDefiniteRelTol * scale;

  rep.ok = rep.unreachable.empty() && pd;
  std::ostringstream msg;
  if (!rep.unreachable.empty()) {
    msg << "leader cannot reach followers {";
    for (std::size_t k = 0; k < rep.unreachable.size(); ++k) {
      msg << (k ? "," : "") << rep.unreachable[k];
    }
    msg << "}";
  } else if (!pd) {
    msg << "L1 not positive definite (min eigenvalue " << rep.min_eigenvalue << ")";
  }
  rep.diagnostic = msg.str();
  return rep;
}

} // namespace fdl
