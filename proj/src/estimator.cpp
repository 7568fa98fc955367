#include "fdl/estimator.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdl {

ObserverParams ObserverParams::defaults(const LeaderModel& leader, double k1) {
  const int n = leader.n;
  ObserverParams p;
  p.K1 = -k1 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  p.K2 = Eigen::MatrixXd::Zero(leader.n_r(), 2 * n);
  p.K2.rightCols(n) = -leader.B0.transpose();
  return p;
}

void ObserverParams::validate(int n, int n_r) const {
  if (K1.rows() != 2 * n || K1.cols() != 2 * n) throw std::invalid_argument("observer: K1 must be 2n x 2n");
  if (K2.rows() != n_r || K2.cols() != 2 * n) throw std::invalid_argument("observer: K2 must be n_r x 2n");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw std::invalid_argument("observer: alpha1, alpha2 must be positive");
  if (!(smoothing_eps >= 0.0)) throw std::invalid_argument("observer: smoothing_eps must be >= 0");
}

std::vector<Eigen::VectorXd> consensus_error(const std::vector<Eigen::VectorXd>& estimates,
                                             const Eigen::VectorXd& leader_state, const Topology& topo) {
  const int n_agents = topo.n_followers;
  if (static_cast<int>(estimates.size()) != n_agents) {
    throw std::invalid_argument("consensus_error: one estimate per follower required");
  }
  std::vector<Eigen::VectorXd> phi(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    if (estimates[i].size() != leader_state.size()) {
      throw std::invalid_argument("consensus_error: estimate dimension mismatch");
    }
    phi[i] = topo.leader_links(i) * (estimates[i] - leader_state);
    for (int j = 0; j < n_agents; ++j) {
      const double a = topo.adjacency(i, j);
      if (a != 0.0) phi[i] += a * (estimates[i] - estimates[j]);
    }
  }
  return phi;
}

Eigen::VectorXd sign_normalize(const Eigen::VectorXd& v, double eps) {
  const double norm = v.norm();
  if (eps > 0.0) return v / std::max(norm, eps);
  if (norm == 0.0) return Eigen::VectorXd::Zero(v.size());
  return v / norm;
}

Eigen::VectorXd observer_rate(const ObserverParams& params, const LeaderModel& leader,
                              const Eigen::VectorXd& estimate, const Eigen::VectorXd& phi) {
  const int n = leader.n;
  Eigen::VectorXd rate(2 * n);
  rate.head(n) = estimate.tail(n);
  rate.tail(n) = leader.A0 * estimate;
  rate += params.alpha1 * (params.K1 * phi);
  rate.tail(n) += params.alpha2 * (leader.B0 * sign_normalize(params.K2 * phi, params.smoothing_eps));
  return rate;
}

std::vector<Eigen::VectorXd> observer_derivative(const ObserverParams& params,
                                                 const std::vector<Eigen::VectorXd>& estimates,
                                                 const Eigen::VectorXd& leader_state, const Topology& topo,
                                                 const LeaderModel& leader) {
  params.validate(leader.n, leader.n_r());
  const auto phi = consensus_error(estimates, leader_state, topo);
  std::vector<Eigen::VectorXd> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out[i] = observer_rate(params, leader, estimates[i], phi[i]);
  }
  return out;
}

} // namespace fdl
