#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fdl/rbf.hpp"

using fdl::AxisBounds;

namespace {

std::vector<AxisBounds> box(int dim, double lo, double hi) { return std::vector<AxisBounds>(dim, {lo, hi}); }

Eigen::VectorXd dense_of(const fdl::SparseRegressor& s, int size) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(size);
  for (std::size_t e = 0; e < s.size(); ++e) d(s.index[e]) = s.value[e];
  return d;
}

} // namespace

TEST_CASE("shipped lattice has 4096 centers") {
  const auto g = fdl::build_grid(6, 4, box(6, -100, 100), 90.0);
  CHECK(g.size() == 4096);
  const double pts[] = {-100.0, -100.0 / 3.0, 100.0 / 3.0, 100.0};
  for (int m = 0; m < 4; ++m) CHECK(g.axis_point(0, m) == doctest::Approx(pts[m]).epsilon(1e-14));
  std::set<double> axis5;
  for (int j = 0; j < g.size(); ++j) axis5.insert(g.center(j)(5));
  CHECK(axis5.size() == 4);
  // axis 0 is the most significant digit
  CHECK(g.center(1)(5) == doctest::Approx(-100.0 / 3.0));
  CHECK(g.center(1)(0) == -100.0);
  CHECK(g.center(1024)(0) == doctest::Approx(-100.0 / 3.0));
}

TEST_CASE("small lattices") {
  const auto g1 = fdl::build_grid(1, 2, box(1, 0, 1), 1.0);
  REQUIRE(g1.size() == 2);
  CHECK(g1.center(0)(0) == 0.0);
  CHECK(g1.center(1)(0) == 1.0);

  const auto g2 = fdl::build_grid(2, 3, box(2, -1, 1), 1.0);
  CHECK(g2.size() == 9);
  CHECK(g2.find_center(Eigen::Vector2d(0.0, 0.0)) == 4);
  CHECK(g2.find_center(Eigen::Vector2d(0.5, 0.0)) == -1);
}

TEST_CASE("lattice size guard") {
  CHECK_THROWS_AS(fdl::build_grid(6, 4, box(6, -1, 1), 1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(fdl::build_grid(2, 3, box(2, 1, -1), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fdl::build_grid(2, 3, box(2, -1, 1), 0.0), std::invalid_argument);
}

TEST_CASE("gaussian regressor values") {
  const auto g = fdl::build_grid(1, 2, box(1, 0, 10), 90.0);
  CHECK(fdl::regressor(g, Eigen::VectorXd::Constant(1, 0.0))(0) == 1.0);
  CHECK(fdl::regressor(g, Eigen::VectorXd::Constant(1, 3.0))(0) == doctest::Approx(0.904837418).epsilon(1e-9));
  const auto g2 = fdl::build_grid(1, 2, box(1, 0, 10), 4.0);
  CHECK(fdl::regressor(g2, Eigen::VectorXd::Constant(1, 2.0))(0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("regressor bounds") {
  const auto g = fdl::build_grid(3, 4, box(3, -5, 5), 9.0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const auto s = fdl::regressor(g, x);
    CHECK(s.minCoeff() > 0.0);
    CHECK(s.maxCoeff() <= 1.0);
    CHECK(s.norm() <= std::sqrt(static_cast<double>(g.size())));
  }
}

TEST_CASE("localized regressor") {
  const auto g = fdl::build_grid(2, 5, box(2, -2, 2), 0.8);
  SUBCASE("huge radius equals the full regressor") {
    const Eigen::Vector2d x(0.3, -1.1);
    const auto loc = fdl::localized_regressor(g, x, 10.0 * g.diameter());
    CHECK(loc.size() == static_cast<std::size_t>(g.size()));
    CHECK((dense_of(loc, g.size()) - fdl::regressor(g, x)).norm() == 0.0);
  }
  SUBCASE("tiny radius at a center keeps one entry") {
    const auto loc = fdl::localized_regressor(g, g.center(7), 0.5 * g.spacing(0));
    REQUIRE(loc.size() == 1);
    CHECK(loc.index[0] == 7);
    CHECK(loc.value[0] == 1.0);
  }
  SUBCASE("dropped mass is under the tail bound") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> ux(-2.5, 2.5), uw(-3.0, 3.0);
    const double radius = 1.2;
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(2, [&] { return ux(rng); });
      const Eigen::MatrixXd w = Eigen::MatrixXd::NullaryExpr(1, g.size(), [&] { return uw(rng); });
      const auto loc = fdl::localized_regressor(g, x, radius);
      const double gap = std::abs((w * (fdl::regressor(g, x) - dense_of(loc, g.size())))(0));
      CHECK(gap <= fdl::localized_tail_bound(g, radius, w.cwiseAbs().maxCoeff()));
      for (std::size_t e = 1; e < loc.size(); ++e) CHECK(loc.index[e - 1] < loc.index[e]);
    }
  }
}

TEST_CASE("network output") {
  const auto g = fdl::build_grid(2, 3, box(2, -1, 1), 1.0);
  const Eigen::Vector2d x(0.2, 0.4);
  const auto s = fdl::regressor(g, x);
  CHECK(fdl::nn_output(Eigen::MatrixXd::Zero(2, g.size()), s).isZero(0.0));
  for (int j = 0; j < g.size(); ++j) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, g.size());
    w(0, j) = 1.0;
    CHECK(fdl::nn_output(w, s)(0) == s(j));
    CHECK(fdl::nn_output(w, fdl::localized_regressor(g, x, 100.0))(0) == s(j));
  }
}

TEST_CASE("mean weights") {
  std::vector<fdl::WeightSample> hist;
  const Eigen::MatrixXd w = (Eigen::MatrixXd(2, 2) << 1, -2, 3, 4).finished();
  SUBCASE("constant history") {
    for (int k = 0; k <= 10; ++k) hist.push_back({0.1 * k, w});
    CHECK((fdl::mean_weights(hist, 0.2, 0.8) - w).norm() == 0.0);
    std::vector<fdl::WeightSample> fine;
    for (int k = 0; k <= 1000; ++k) fine.push_back({0.001 * k, w});
    CHECK((fdl::mean_weights(fine, 0.2, 0.8) - w).norm() <= 1e-14);
  }
  SUBCASE("linear ramp") {
    for (int k = 0; k <= 1000; ++k) hist.push_back({0.001 * k, (0.001 * k) * w});
    CHECK((fdl::mean_weights(hist, 0.0, 1.0) - 0.5 * w).norm() <= 1e-12);
  }
  SUBCASE("single sample window") {
    hist.push_back({0.0, w});
    hist.push_back({1.0, 2.0 * w});
    CHECK((fdl::mean_weights(hist, 0.9, 1.1) - 2.0 * w).norm() == 0.0);
  }
  SUBCASE("linearity") {
    std::vector<fdl::WeightSample> a, b, sum;
    for (int k = 0; k <= 20; ++k) {
      a.push_back({0.05 * k, std::sin(k) * w});
      b.push_back({0.05 * k, std::cos(k) * w.transpose()});
      sum.push_back({0.05 * k, 2.0 * a.back().weights - 3.0 * b.back().weights});
    }
    const Eigen::MatrixXd lhs = fdl::mean_weights(sum, 0.1, 0.9);
    const Eigen::MatrixXd rhs = 2.0 * fdl::mean_weights(a, 0.1, 0.9) - 3.0 * fdl::mean_weights(b, 0.1, 0.9);
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
  SUBCASE("empty window") {
    hist.push_back({0.0, w});
    CHECK_THROWS_AS(fdl::mean_weights(hist, 0.5, 0.6), std::invalid_argument);
  }
  SUBCASE("accumulator matches the batch mean") {
    fdl::WeightMeanAccumulator acc(0.2, 0.8);
    for (int k = 0; k <= 10; ++k) {
      hist.push_back({0.1 * k, (1.0 + k) * w});
      acc.add(hist.back().t, hist.back().weights);
    }
    CHECK((acc.mean() - fdl::mean_weights(hist, 0.2, 0.8)).norm() <= 1e-14);
  }
}

TEST_CASE("zeta partition") {
  const auto g = fdl::build_grid(2, 4, box(2, -3, 3), 1.0);
  SUBCASE("point at a center") {
    const std::vector<Eigen::VectorXd> traj{g.center(5)};
    const auto part = fdl::partition_zeta(g, traj, 0.5 * g.spacing(0));
    CHECK(part.near == std::vector<int>{5});
    CHECK(part.far.size() == static_cast<std::size_t>(g.size() - 1));
  }
  SUBCASE("radius beyond the diameter") {
    const std::vector<Eigen::VectorXd> traj{Eigen::Vector2d(0.1, 0.2)};
    CHECK(fdl::partition_zeta(g, traj, g.diameter()).far.empty());
  }
  SUBCASE("far centers are far from every sample") {
    std::vector<Eigen::VectorXd> traj;
    for (int k = 0; k < 60; ++k) traj.push_back(Eigen::Vector2d(2.0 * std::cos(0.1 * k), std::sin(0.1 * k)));
    const double radius = 1.3;
    const auto part = fdl::partition_zeta(g, traj, radius);
    CHECK(part.near.size() + part.far.size() == static_cast<std::size_t>(g.size()));
    for (int j : part.far) {
      for (const auto& x : traj) CHECK((x - g.center(j)).norm() > radius);
    }
    for (int j : part.near) {
      double best = 1e300;
      for (const auto& x : traj) best = std::min(best, (x - g.center(j)).norm());
      CHECK(best <= radius);
    }
  }
}
