#include "fdl/controller.hpp"

#include <stdexcept>
#include <string>

namespace fdl {
namespace {

bool symmetric_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 0.0;
}

} // namespace

ControllerGains ControllerGains::shared(int n_agents, const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2,
                                       double gamma1, double gamma2, double sigma) {
  ControllerGains g;
  g.H1.assign(n_agents, h1);
  g.H2.assign(n_agents, h2);
  g.gamma1 = gamma1;
  g.gamma2 = gamma2;
  g.sigma = sigma;
  return g;
}

void ControllerGains::validate(int n_agents, int n) const {
  if (static_cast<int>(H1.size()) != n_agents || static_cast<int>(H2.size()) != n_agents) {
    throw std::invalid_argument("controller: one H1/H2 per agent required");
  }
  for (int i = 0; i < n_agents; ++i) {
    if (H1[i].rows() != n || H1[i].cols() != n || H2[i].rows() != n || H2[i].cols() != n) {
      throw std::invalid_argument("controller: H1/H2 must be n x n");
    }
    if (!symmetric_positive_definite(H1[i])) {
      throw std::invalid_argument("controller: H1 of agent " + std::to_string(i + 1) +
                                  " must be symmetric positive definite");
    }
    if (!symmetric_positive_definite(H2[i])) {
      throw std::invalid_argument("controller: H2 of agent " + std::to_string(i + 1) +
                                  " must be symmetric positive definite");
    }
  }
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("controller: gamma1, gamma2 and sigma must be positive");
  }
}

std::vector<int> ControllerGains::agents_with_weak_h2() const {
  std::vector<int> weak;
  for (std::size_t i = 0; i < H1.size() && i < H2.size(); ++i) {
    if (!symmetric_positive_definite(H2[i] - H1[i])) weak.push_back(static_cast<int>(i));
  }
  return weak;
}

Eigen::VectorXd tracking_error(const Eigen::VectorXd& p, const Eigen::VectorXd& p_hat, const Eigen::VectorXd& offset) {
  return p - p_hat - offset;
}

Eigen::VectorXd virtual_control(const Eigen::MatrixXd& J, const Eigen::MatrixXd& H1, const Eigen::VectorXd& z1,
                                const Eigen::VectorXd& p_hat_dot) {
  return J.transpose() * (p_hat_dot - H1 * z1);
}

Eigen::VectorXd control_law(const Eigen::VectorXd& nn_out, const Eigen::MatrixXd& H2, const Eigen::VectorXd& z2,
                            const Eigen::MatrixXd& J, const Eigen::VectorXd& z1) {
  return nn_out - H2 * z2 - J.transpose() * z1;
}

Eigen::VectorXd virtual_control_rate(const Eigen::MatrixXd& J, const Eigen::MatrixXd& J_dot,
                                     const Eigen::MatrixXd& H1, const Eigen::VectorXd& z1,
                                     const Eigen::VectorXd& z1_dot, const Eigen::VectorXd& p_hat_dot,
                                     const Eigen::VectorXd& p_hat_ddot) {
  return J_dot.transpose() * (p_hat_dot - H1 * z1) + J.transpose() * (p_hat_ddot - H1 * z1_dot);
}

void weight_update_derivative(const Eigen::Ref<const Eigen::MatrixXd>& weights,
                              const std::vector<SparseRegressor>& regressors,
                              const std::vector<Eigen::VectorXd>& z2, double gamma1, double gamma2, double sigma,
                              const Eigen::MatrixXd& follower_laplacian, Eigen::Ref<Eigen::MatrixXd> out) {
  const Eigen::Index n_agents = weights.cols();
  if (static_cast<Eigen::Index>(regressors.size()) != n_agents ||
      static_cast<Eigen::Index>(z2.size()) != n_agents || follower_laplacian.rows() != n_agents ||
      follower_laplacian.cols() != n_agents || out.rows() != weights.rows() || out.cols() != n_agents) {
    throw std::invalid_argument("weight_update_derivative: dimension mismatch");
  }
  const Eigen::Index n_out = n_agents > 0 ? z2[0].size() : 0;
  if (n_out == 0 || weights.rows() % n_out != 0) {
    throw std::invalid_argument("weight_update_derivative: weight rows must be n * N_n");
  }
  const Eigen::Index n_neurons = weights.rows() / n_out;

  // Sum_j a_ij (W_i - W_j) is column i of W L_s (L_s symmetric).
  Eigen::MatrixXd mix = gamma2 * follower_laplacian;
  mix.diagonal().array() += gamma1 * sigma;
  out.noalias() = -(weights * mix);

  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const auto& s = regressors[i];
    for (Eigen::Index k = 0; k < n_out; ++k) {
      const double g = gamma1 * z2[i](k);
      if (g == 0.0) continue;
      for (std::size_t e = 0; e < s.size(); ++e) {
        out(k * n_neurons + s.index[e], i) -= g * s.value[e];
      }
    }
  }
}

} // namespace fdl
