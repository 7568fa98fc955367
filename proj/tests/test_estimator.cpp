#include <doctest.h>

#include <random>

#include "fdl/estimator.hpp"
#include "fdl/sim.hpp"

namespace {

fdl::LeaderModel leader3() {
  fdl::LeaderModel m;
  m.n = 3;
  m.A0 = Eigen::MatrixXd::Zero(3, 6);
  m.A0(0, 0) = -1.0;
  m.A0(2, 2) = -1.0;
  m.B0 = Eigen::MatrixXd::Zero(3, 1);
  m.B0(1, 0) = 1.0;
  m.input = fdl::InputSignal::zero(1);
  m.r_star = 1.0;
  return m;
}

fdl::Topology ring4() {
  return fdl::Topology::from_edges(4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}}, {1, 1, 1, 1}, {{1, 1.0}});
}

} // namespace

TEST_CASE("neighbourhood disagreement") {
  SUBCASE("all estimates equal the leader") {
    const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(6, -1.0, 4.0);
    const auto phi = fdl::consensus_error(std::vector<Eigen::VectorXd>(4, x0), x0, ring4());
    for (const auto& p : phi) CHECK(p.isZero(0.0));
  }
  SUBCASE("single follower") {
    const auto t = fdl::Topology::from_edges(1, {}, {}, {{1, 1.0}});
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 1.0);
    const Eigen::VectorXd e = (Eigen::VectorXd(2) << 0.5, -2.0).finished();
    const auto phi = fdl::consensus_error({x0 + e}, x0, t);
    CHECK((phi[0] - e).norm() == 0.0);
  }
  SUBCASE("two followers, leader heard by the first") {
    const auto t = fdl::Topology::from_edges(2, {{1, 2}}, {1.0}, {{1, 1.0}});
    const Eigen::VectorXd x0 = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
    const Eigen::VectorXd x2 = (Eigen::VectorXd(2) << -3.0, 0.5).finished();
    const auto phi = fdl::consensus_error({x0, x2}, x0, t);
    CHECK((phi[0] - (x0 - x2)).norm() == 0.0);
    CHECK((phi[1] - (x2 - x0)).norm() == 0.0);
  }
  SUBCASE("leader state only enters through leader links") {
    const auto t = ring4();
    std::vector<Eigen::VectorXd> est(4, Eigen::VectorXd::Zero(6));
    const auto a = fdl::consensus_error(est, Eigen::VectorXd::Zero(6), t);
    const auto b = fdl::consensus_error(est, Eigen::VectorXd::Constant(6, 5.0), t);
    CHECK((a[0] - b[0]).norm() > 0.0);
    for (int i = 1; i < 4; ++i) CHECK((a[i] - b[i]).norm() == 0.0);
  }
}

TEST_CASE("sign normalization") {
  const Eigen::Vector2d zero(0.0, 0.0);
  CHECK(fdl::sign_normalize(zero, 0.0).isZero(0.0));
  CHECK(fdl::sign_normalize(zero, 0.5).isZero(0.0));
  CHECK((fdl::sign_normalize(Eigen::Vector2d(3.0, 4.0), 0.0) - Eigen::Vector2d(0.6, 0.8)).norm() <= 1e-15);
  CHECK((fdl::sign_normalize(Eigen::Vector2d(0.3, 0.4), 1.0) - Eigen::Vector2d(0.3, 0.4)).norm() <= 1e-15);

  std::mt19937 rng(9);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(3, [&] { return g(rng); });
    CHECK(fdl::sign_normalize(v, 0.7).norm() <= 1.0 + 1e-15);
    CHECK(fdl::sign_normalize(v, 0.0).norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("observer rate") {
  const auto leader = leader3();
  auto params = fdl::ObserverParams::defaults(leader, 10.0);
  params.validate(3, 1);
  SUBCASE("estimates at a resting leader") {
    const auto d = fdl::observer_derivative(params, std::vector<Eigen::VectorXd>(4, Eigen::VectorXd::Zero(6)),
                                            Eigen::VectorXd::Zero(6), ring4(), leader);
    for (const auto& r : d) CHECK(r.isZero(0.0));
  }
  SUBCASE("no correction gains copy the leader's linear part") {
    params.alpha1 = 0.0;
    params.alpha2 = 0.0;
    const Eigen::VectorXd xh = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    const Eigen::VectorXd phi = Eigen::VectorXd::Constant(6, 3.0);
    const auto r = fdl::observer_rate(params, leader, xh, phi);
    CHECK((r.head(3) - xh.tail(3)).norm() == 0.0);
    CHECK((r.tail(3) - leader.A0 * xh).norm() == 0.0);
  }
  SUBCASE("correction opposes the disagreement") {
    const Eigen::VectorXd phi = (Eigen::VectorXd(6) << 1, 0, 0, 0, 2, 0).finished();
    const auto r = fdl::observer_rate(params, leader, Eigen::VectorXd::Zero(6), phi);
    CHECK(r(0) == doctest::Approx(-10.0));
    CHECK(r(4) < -20.0);
  }
}

TEST_CASE("estimation error stays at zero from a consistent start") {
  const auto leader = leader3();
  const auto params = fdl::ObserverParams::defaults(leader, 10.0);
  const auto topo = ring4();
  Eigen::VectorXd y(6 * 5);
  const Eigen::VectorXd x0 = (Eigen::VectorXd(6) << 0, 80, 0, 80, 0, 80).finished();
  for (int i = 0; i < 5; ++i) y.segment(6 * i, 6) = x0;
  auto f = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& out) {
    out.resize(s.size());
    out.head(6) = fdl::leader_derivative(leader, s.head(6), t);
    std::vector<Eigen::VectorXd> est;
    for (int i = 1; i < 5; ++i) est.push_back(s.segment(6 * i, 6));
    const auto d = fdl::observer_derivative(params, est, s.head(6), topo, leader);
    for (int i = 1; i < 5; ++i) out.segment(6 * i, 6) = d[i - 1];
  };
  fdl::Rk4 rk(y.size());
  for (int k = 0; k < 2000; ++k) rk.step(f, 1e-3 * k, 1e-3, y);
  for (int i = 1; i < 5; ++i) CHECK((y.segment(6 * i, 6) - y.head(6)).norm() == 0.0);
}
