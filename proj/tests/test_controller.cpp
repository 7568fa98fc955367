#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fdl/controller.hpp"
#include "fdl/graph.hpp"

namespace {

Eigen::Vector3d v3(double a, double b, double c) { return {a, b, c}; }

fdl::SparseRegressor sparse(std::vector<int> idx, std::vector<double> val) { return {std::move(idx), std::move(val)}; }

// Per-agent, per-entry evaluation of the cooperative weight law.
Eigen::MatrixXd reference_update(const Eigen::MatrixXd& w, const std::vector<fdl::SparseRegressor>& s,
                                 const std::vector<Eigen::VectorXd>& z2, double g1, double g2, double sigma,
                                 const Eigen::MatrixXd& adj) {
  const Eigen::Index agents = w.cols();
  const Eigen::Index n = z2[0].size();
  const Eigen::Index neurons = w.rows() / n;
  Eigen::MatrixXd out(w.rows(), agents);
  for (Eigen::Index i = 0; i < agents; ++i) {
    const Eigen::VectorXd dense_s = [&] {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(neurons);
      for (std::size_t e = 0; e < s[i].size(); ++e) d(s[i].index[e]) = s[i].value[e];
      return d;
    }();
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < neurons; ++j) {
        const Eigen::Index r = k * neurons + j;
        double coupling = 0.0;
        for (Eigen::Index m = 0; m < agents; ++m) coupling += adj(i, m) * (w(r, i) - w(r, m));
        out(r, i) = -g1 * (dense_s(j) * z2[i](k) + sigma * w(r, i)) - g2 * coupling;
      }
    }
  }
  return out;
}

} // namespace

TEST_CASE("position tracking error") {
  const Eigen::VectorXd p = v3(50, 40, 0), phat = v3(0, 0, 0), off = v3(7, -7, 0);
  CHECK((fdl::tracking_error(p, phat, off) - v3(43, 47, 0)).norm() == 0.0);
  CHECK(fdl::tracking_error(v3(8, 1, 2), v3(1, 2, 3), v3(7, -1, -1)).isZero(0.0));
  CHECK(fdl::tracking_error(v3(1, 2, 3), v3(1, 2, 3), v3(0, 0, 0)).isZero(0.0));
}

TEST_CASE("virtual control") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd pd = v3(1, -2, 3);
  CHECK((fdl::virtual_control(eye, 5.0 * eye, Eigen::VectorXd::Zero(3), pd) - pd).norm() == 0.0);
  CHECK((fdl::virtual_control(eye, 4.0 * eye, v3(1, 2, 3), Eigen::VectorXd::Zero(3)) + 4.0 * v3(1, 2, 3)).norm() ==
        0.0);
  const Eigen::MatrixXd h1 = 900.0 * Eigen::Vector3d(0.8, 1.0, 1.5).asDiagonal().toDenseMatrix();
  const auto beta = fdl::virtual_control(eye, h1, v3(1, 1, 1), Eigen::VectorXd::Zero(3));
  CHECK((beta - v3(-720, -900, -1350)).norm() <= 1e-12);
}

TEST_CASE("control law") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(fdl::control_law(zero, 3.0 * eye, zero, eye, zero).isZero(0.0));
  CHECK((fdl::control_law(zero, 3.0 * eye, v3(1, 2, 3), eye, zero) + 3.0 * v3(1, 2, 3)).norm() == 0.0);
  CHECK((fdl::control_law(v3(4, 5, 6), 3.0 * eye, zero, eye, zero) - v3(4, 5, 6)).norm() == 0.0);
  CHECK((fdl::control_law(zero, 3.0 * eye, zero, eye, v3(1, 0, -1)) + v3(1, 0, -1)).norm() == 0.0);
}

TEST_CASE("virtual control rate matches differentiation along a path") {
  // constant J, smooth phat(t) and z1(t): beta(t) = J^T (phat'(t) - H1 z1(t))
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd h1 = Eigen::Vector3d(2.0, 3.0, 4.0).asDiagonal();
  auto phat_dot = [](double t) { return v3(std::cos(t), std::sin(2 * t), t * t); };
  auto phat_ddot = [](double t) { return v3(-std::sin(t), 2 * std::cos(2 * t), 2 * t); };
  auto z1 = [](double t) { return v3(std::exp(-t), t, 1.0); };
  auto z1_dot = [](double t) { return v3(-std::exp(-t), 1.0, 0.0); };
  auto beta = [&](double t) { return fdl::virtual_control(j, h1, z1(t), phat_dot(t)); };
  const double t = 0.7, h = 1e-5;
  const Eigen::VectorXd fd = (beta(t + h) - beta(t - h)) / (2 * h);
  const auto an = fdl::virtual_control_rate(j, Eigen::MatrixXd::Zero(3, 3), h1, z1(t), z1_dot(t), phat_dot(t),
                                            phat_ddot(t));
  CHECK((an - fd).norm() <= 1e-8 * (1.0 + an.norm()));
}

TEST_CASE("cooperative weight law") {
  const auto topo = fdl::Topology::from_edges(4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}}, {1, 2, 1, 0.5}, {{1, 1.0}});
  const auto lp = fdl::build_laplacians(topo);
  const Eigen::MatrixXd ls = lp.subgraph();
  const int n = 3, neurons = 5;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::NullaryExpr(n * neurons, 4, [&] { return u(rng); });
  std::vector<fdl::SparseRegressor> s{sparse({0, 3}, {0.5, 0.25}), sparse({}, {}), sparse({1, 2, 4}, {1, 0.1, 0.2}),
                                      sparse({4}, {0.9})};
  std::vector<Eigen::VectorXd> z2;
  for (int i = 0; i < 4; ++i) z2.push_back(Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); }));
  Eigen::MatrixXd out(n * neurons, 4);

  SUBCASE("matches the entrywise formula") {
    fdl::weight_update_derivative(w, s, z2, 7.0, 1.5, 0.01, ls, out);
    CHECK((out - reference_update(w, s, z2, 7.0, 1.5, 0.01, topo.adjacency)).norm() <= 1e-12);
  }
  SUBCASE("fixed point at zero weights without excitation") {
    const std::vector<Eigen::VectorXd> zero(4, Eigen::VectorXd::Zero(n));
    fdl::weight_update_derivative(Eigen::MatrixXd::Zero(n * neurons, 4), s, zero, 7.0, 1.5, 0.01, ls, out);
    CHECK(out.isZero(0.0));
  }
  SUBCASE("consensus equilibrium") {
    const std::vector<Eigen::VectorXd> zero(4, Eigen::VectorXd::Zero(n));
    const Eigen::MatrixXd same = w.col(0).replicate(1, 4);
    fdl::weight_update_derivative(same, s, zero, 7.0, 1.5, 0.0, ls, out);
    CHECK(out.cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("leakage alone decays every weight") {
    const std::vector<Eigen::VectorXd> zero(4, Eigen::VectorXd::Zero(n));
    fdl::weight_update_derivative(w, s, zero, 7.0, 0.0, 0.01, ls, out);
    CHECK((out + 0.07 * w).norm() <= 1e-14);
  }
  SUBCASE("consensus exchange conserves the weight sum") {
    const std::vector<Eigen::VectorXd> zero(4, Eigen::VectorXd::Zero(n));
    fdl::weight_update_derivative(w, s, zero, 7.0, 1.5, 0.0, ls, out);
    CHECK(out.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("two agents exchange antisymmetrically") {
    const auto two = fdl::Topology::from_edges(2, {{1, 2}}, {1.0}, {{1, 1.0}});
    const Eigen::MatrixXd l2 = fdl::build_laplacians(two).subgraph();
    Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(n * neurons, 2);
    w2.col(0) = w.col(0);
    const std::vector<Eigen::VectorXd> zero(2, Eigen::VectorXd::Zero(n));
    Eigen::MatrixXd out2(n * neurons, 2);
    fdl::weight_update_derivative(w2, {s[0], s[1]}, zero, 7.0, 2.0, 0.0, l2, out2);
    CHECK((out2.col(0) + 2.0 * w.col(0)).norm() <= 1e-14);
    CHECK((out2.col(1) - 2.0 * w.col(0)).norm() <= 1e-14);
  }
  SUBCASE("relabeling agents permutes the update") {
    std::vector<int> perm{2, 0, 3, 1};
    Eigen::PermutationMatrix<Eigen::Dynamic> pm(4);
    for (int i = 0; i < 4; ++i) pm.indices()(i) = perm[i];
    // new agent perm[i] is old agent i
    Eigen::MatrixXd wp(n * neurons, 4);
    std::vector<fdl::SparseRegressor> sp(4);
    std::vector<Eigen::VectorXd> zp(4);
    for (int i = 0; i < 4; ++i) {
      wp.col(perm[i]) = w.col(i);
      sp[perm[i]] = s[i];
      zp[perm[i]] = z2[i];
    }
    const Eigen::MatrixXd lsp = pm * ls * pm.transpose();
    fdl::weight_update_derivative(w, s, z2, 7.0, 1.5, 0.01, ls, out);
    Eigen::MatrixXd outp(n * neurons, 4);
    fdl::weight_update_derivative(wp, sp, zp, 7.0, 1.5, 0.01, lsp, outp);
    for (int i = 0; i < 4; ++i) CHECK((outp.col(perm[i]) - out.col(i)).norm() <= 1e-12);
  }
}

TEST_CASE("gain validation") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  auto g = fdl::ControllerGains::shared(4, 2.0 * eye, 3.0 * eye, 1.0, 1.0, 1e-3);
  CHECK_NOTHROW(g.validate(4, 3));
  CHECK(g.agents_with_weak_h2().empty());
  g.H1[2](1, 1) = -1.0;
  CHECK_THROWS_AS(g.validate(4, 3), std::invalid_argument);
  g = fdl::ControllerGains::shared(4, 2.0 * eye, 1.0 * eye, 1.0, 1.0, 1e-3);
  CHECK(g.agents_with_weak_h2().size() == 4);
  g = fdl::ControllerGains::shared(4, 2.0 * eye, 3.0 * eye, 0.0, 1.0, 1e-3);
  CHECK_THROWS_AS(g.validate(4, 3), std::invalid_argument);
}
