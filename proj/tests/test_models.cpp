#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fdl/models.hpp"
#include "fdl/sim.hpp"

namespace {

fdl::LeaderModel siv_leader() {
  fdl::LeaderModel m;
  m.n = 3;
  m.A0 = Eigen::MatrixXd::Zero(3, 6);
  m.A0(0, 0) = -1.0;
  m.A0(2, 2) = -1.0;
  m.B0 = Eigen::MatrixXd::Zero(3, 1);
  m.B0(1, 0) = 1.0;
  m.input = fdl::InputSignal::sinusoid(Eigen::VectorXd::Constant(1, -80.0), 1.0, 0.0);
  m.r_star = 80.0;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

} // namespace

TEST_CASE("leader derivative at the initial state") {
  const auto m = siv_leader();
  m.validate();
  const auto d = fdl::leader_derivative(m, vec({0, 80, 0, 80, 0, 80}), 0.0);
  CHECK((d - vec({80, 0, 80, 0, -80, 0})).norm() == doctest::Approx(0.0));
}

TEST_CASE("leader equilibrium and pure integrator") {
  auto m = siv_leader();
  m.input = fdl::InputSignal::zero(1);
  m.r_star = 1.0;
  CHECK(fdl::leader_derivative(m, Eigen::VectorXd::Zero(6), 3.0).isZero(0.0));

  m.A0.setZero();
  m.B0.setZero();
  const auto x = vec({1, 2, 3, 4, 5, 6});
  const auto d = fdl::leader_derivative(m, x, 0.5);
  CHECK((d.head(3) - x.tail(3)).isZero(0.0));
  CHECK(d.tail(3).isZero(0.0));
}

TEST_CASE("leader validation") {
  auto m = siv_leader();
  m.r_star = 10.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = siv_leader();
  m.A0 = Eigen::MatrixXd::Zero(3, 5);
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("input signal catalog") {
  const auto s = fdl::InputSignal::sinusoid(Eigen::VectorXd::Constant(1, -80.0), 1.0, 0.0);
  CHECK(s(0.0)(0) == doctest::Approx(-80.0));
  CHECK(s(std::numbers::pi)(0) == doctest::Approx(80.0));
  CHECK(s.sup_norm() == doctest::Approx(80.0));
  CHECK(fdl::InputSignal::constant(vec({3, 4})).sup_norm() == doctest::Approx(5.0));
  CHECK(fdl::InputSignal::zero(2).sup_norm() == 0.0);
}

TEST_CASE("example vessel at rest") {
  const fdl::ExampleVesselPlant pm;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  const auto r = fdl::plant_derivative(pm, z, z, z);
  CHECK(r.p_dot.isZero(0.0));
  CHECK(r.nu_dot.isZero(0.0));

  const auto push = fdl::plant_derivative(pm, z, z, vec({25, 0, 0}));
  CHECK((push.nu_dot - vec({1, 0, 0})).norm() <= 1e-14);
}

TEST_CASE("example vessel kinematics are the identity") {
  const fdl::ExampleVesselPlant pm;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const Eigen::VectorXd nu = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const auto r = fdl::plant_derivative(pm, p, nu, Eigen::VectorXd::Zero(3));
    CHECK((r.p_dot - nu).norm() == 0.0);
    const Eigen::MatrixXd j = pm.rotation(p);
    CHECK((j * j.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-10);
  }
}

TEST_CASE("coriolis matrix is skew symmetric") {
  const fdl::ExampleVesselPlant pm;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::VectorXd nu = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const Eigen::MatrixXd c = pm.coriolis(Eigen::VectorXd::Zero(3), nu);
    CHECK((c + c.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("closed-form force agrees with the matrix forms") {
  const fdl::ExampleVesselPlant pm;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const Eigen::VectorXd nu = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const Eigen::VectorXd expect = pm.coriolis(p, nu) * nu + pm.damping(p, nu) * nu + pm.gravity(p);
    CHECK((pm.force(p, nu, nullptr) - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
  }
}

TEST_CASE("kinetic energy decays at the damping power") {
  const fdl::ExampleVesselPlant pm;
  const Eigen::MatrixXd m = pm.inertia();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  auto f = [&](double, const Eigen::VectorXd& nu, Eigen::VectorXd& out) {
    out = fdl::plant_derivative(pm, zero, nu, zero).nu_dot;
  };
  auto energy = [&](const Eigen::VectorXd& nu) { return 0.5 * nu.dot(m * nu); };
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd nu = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const auto one = fdl::rk4_step(f, 0.0, h, nu);
    const auto two = fdl::rk4_step(f, h, h, one);
    const double rate = (-energy(two) + 4.0 * energy(one) - 3.0 * energy(nu)) / (2.0 * h);
    const double power = -nu.dot(pm.damping(zero, nu) * nu);
    CHECK(rate == doctest::Approx(power).epsilon(1e-4));
  }
}

TEST_CASE("lumped uncertainty") {
  const fdl::ExampleVesselPlant pm;
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  CHECK(fdl::true_G(pm, z, z, z).isZero(0.0));
  CHECK((fdl::true_G(pm, z, z, vec({1, 0, 0})) - vec({25, 0, 0})).norm() == 0.0);

  const Eigen::Matrix3d m = Eigen::Vector3d(2.0, 3.0, 4.0).asDiagonal();
  const fdl::ConstantMatrixPlant gonly(m, Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3), vec({1, -2, 9.81}));
  CHECK((fdl::true_G(gonly, z, z, z) - vec({1, -2, 9.81})).norm() == 0.0);
}

TEST_CASE("inertia must be symmetric positive definite") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(fdl::ConstantMatrixPlant(bad, Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3),
                                           Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("representable plant reproduces its weights") {
  auto grid = std::make_shared<fdl::RbfGrid>(
      fdl::build_grid(2, 3, std::vector<fdl::AxisBounds>(2, {-1.0, 1.0}), 0.5));
  const fdl::RepresentablePlant pm(Eigen::MatrixXd::Identity(1, 1), grid, {{0, 4, 2.0}, {0, 0, -1.0}});
  const Eigen::VectorXd p = vec({0.3}), nu = vec({-0.2});
  Eigen::VectorXd x(2);
  x << 0.3, -0.2;
  const double expect = 2.0 * std::exp(-x.squaredNorm() / 0.5) - std::exp(-(x - vec({-1, -1})).squaredNorm() / 0.5);
  CHECK(pm.representable_G(p, nu)(0) == doctest::Approx(expect).epsilon(1e-14));
  const Eigen::VectorXd bd = vec({0.7});
  CHECK(fdl::true_G(pm, p, nu, bd)(0) == doctest::Approx(expect).epsilon(1e-14));
}
