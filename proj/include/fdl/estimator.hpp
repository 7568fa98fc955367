#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fdl/graph.hpp"
#include "fdl/models.hpp"

namespace fdl {

/// Gains of the cooperative leader-state observer.
struct ObserverParams {
  Eigen::MatrixXd K1; // 2n x 2n
  Eigen::MatrixXd K2; // n_r x 2n
  double alpha1 = 1.0;
  double alpha2 = 200.0;
  /// 0 selects the exact discontinuous unit-vector law.
  double smoothing_eps = 0.5;

  /// K1 = -k1 I, K2 = -[0 | B0^T]: both correction terms oppose the
  /// neighbourhood disagreement phi.
  static ObserverParams defaults(const LeaderModel& leader, double k1 = 3.0);

  void validate(int n, int n_r) const;
};

/// phi_i = sum_j a_ij (xhat_i - xhat_j) + a_i0 (xhat_i - x0).
std::vector<Eigen::VectorXd> consensus_error(const std::vector<Eigen::VectorXd>& estimates,
                                             const Eigen::VectorXd& leader_state, const Topology& topo);

/// eps = 0: v/|v| (0 at v = 0). eps > 0: v / max(|v|, eps).
Eigen::VectorXd sign_normalize(const Eigen::VectorXd& v, double eps);

/// [phat'; vhat'] = [vhat; A0 xhat] + alpha1 K1 phi + alpha2 [0; B0] f1(K2 phi).
Eigen::VectorXd observer_rate(const ObserverParams& params, const LeaderModel& leader,
                              const Eigen::VectorXd& estimate, const Eigen::VectorXd& phi);

std::vector<Eigen::VectorXd> observer_derivative(const ObserverParams& params,
                                                 const std::vector<Eigen::VectorXd>& estimates,
                                                 const Eigen::VectorXd& leader_state, const Topology& topo,
                                                 const LeaderModel& leader);

} // namespace fdl
