#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdl/rbf.hpp"

namespace fdl {

struct ControllerGains {
  std::vector<Eigen::MatrixXd> H1; // per agent, n x n SPD
  std::vector<Eigen::MatrixXd> H2;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double sigma = 0.0;

  static ControllerGains shared(int n_agents, const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2,
                                double gamma1, double gamma2, double sigma);

  /// Throws std::invalid_argument on shape errors, non-symmetric or
  /// non-positive-definite H matrices, or non-positive scalars.
  void validate(int n_agents, int n) const;
  /// Agents for which H2 - H1 is not positive definite (0-based).
  [[nodiscard]] std::vector<int> agents_with_weak_h2() const;
};

struct FormationSpec {
  std::vector<Eigen::VectorXd> offsets; // p_i*
};

/// z1 = p - (phat + offset).
Eigen::VectorXd tracking_error(const Eigen::VectorXd& p, const Eigen::VectorXd& p_hat, const Eigen::VectorXd& offset);

/// beta = J^T (-H1 z1 + phat').
Eigen::VectorXd virtual_control(const Eigen::MatrixXd& J, const Eigen::MatrixXd& H1, const Eigen::VectorXd& z1,
                                const Eigen::VectorXd& p_hat_dot);

/// tau = W^T S - H2 z2 - J^T z1, with nn_out = W^T S already evaluated.
Eigen::VectorXd control_law(const Eigen::VectorXd& nn_out, const Eigen::MatrixXd& H2, const Eigen::VectorXd& z2,
                            const Eigen::MatrixXd& J, const Eigen::VectorXd& z1);

/// beta' = J'^T (phat' - H1 z1) + J^T (phat'' - H1 z1'),  z1' = J nu - phat'.
Eigen::VectorXd virtual_control_rate(const Eigen::MatrixXd& J, const Eigen::MatrixXd& J_dot,
                                     const Eigen::MatrixXd& H1, const Eigen::VectorXd& z1,
                                     const Eigen::VectorXd& z1_dot, const Eigen::VectorXd& p_hat_dot,
                                     const Eigen::VectorXd& p_hat_ddot);

/// Cooperative weight law for all agents at once.
///
/// `weights` holds one column per agent; within a column the layout is
/// channel-major (entry k * N_n + j is neuron j of output k). Writes
///   dW_i = -gamma1 (S(x_i) z2_{k,i} + sigma W_i) - gamma2 sum_j a_ij (W_i - W_j)
/// into `out`, where `follower_laplacian` is the follower-subgraph Laplacian
/// (leader links excluded).
void weight_update_derivative(const Eigen::Ref<const Eigen::MatrixXd>& weights,
                              const std::vector<SparseRegressor>& regressors,
                              const std::vector<Eigen::VectorXd>& z2, double gamma1, double gamma2, double sigma,
                              const Eigen::MatrixXd& follower_laplacian, Eigen::Ref<Eigen::MatrixXd> out);

} // namespace fdl
