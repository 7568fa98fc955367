#include "fdl/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdl {

InputSignal InputSignal::zero(int n_r) {
  InputSignal s;
  s.kind_ = Kind::Zero;
  s.amplitude_ = Eigen::VectorXd::Zero(n_r);
  return s;
}

InputSignal InputSignal::constant(Eigen::VectorXd value) {
  InputSignal s;
  s.kind_ = Kind::Constant;
  s.amplitude_ = std::move(value);
  return s;
}

InputSignal InputSignal::sinusoid(Eigen::VectorXd amplitude, double omega, double phase) {
  InputSignal s;
  s.kind_ = Kind::Sinusoid;
  s.amplitude_ = std::move(amplitude);
  s.omega_ = omega;
  s.phase_ = phase;
  return s;
}

Eigen::VectorXd InputSignal::operator()(double t) const {
  switch (kind_) {
    case Kind::Zero:
      return Eigen::VectorXd::Zero(amplitude_.size());
    case Kind::Constant:
      return amplitude_;
    case Kind::Sinusoid:
      return amplitude_ * std::cos(omega_ * t + phase_);
  }
  return Eigen::VectorXd::Zero(amplitude_.size());
}

double InputSignal::sup_norm() const {
  return kind_ == Kind::Zero ? 0.0 : amplitude_.norm();
}

void LeaderModel::validate() const {
  if (n <= 0) throw std::invalid_argument("leader: n must be positive");
  if (A0.rows() != n || A0.cols() != 2 * n) throw std::invalid_argument("leader: A0 must be n x 2n");
  if (B0.rows() != n || B0.cols() < 1) throw std::invalid_argument("leader: B0 must be n x n_r");
  if (input.size() != B0.cols()) throw std::invalid_argument("leader: input size must equal B0 columns");
  if (!(r_star > 0.0)) throw std::invalid_argument("leader: r_star must be positive");
  if (input.sup_norm() > r_star * (1.0 + 1e-12)) {
    throw std::invalid_argument("leader: input exceeds the bound r_star");
  }
}

Eigen::VectorXd leader_derivative(const LeaderModel& m, const Eigen::VectorXd& x0, double t) {
  if (x0.size() != 2 * m.n || m.A0.cols() != 2 * m.n || m.A0.rows() != m.n || m.B0.rows() != m.n) {
    throw std::invalid_argument("leader_derivative: dimension mismatch");
  }
  Eigen::VectorXd dx(2 * m.n);
  dx.head(m.n) = x0.tail(m.n);
  dx.tail(m.n) = m.A0 * x0 + m.B0 * m.input(t);
  return dx;
}

PlantModel::PlantModel(Eigen::MatrixXd inertia) : inertia_(std::move(inertia)) {
  if (inertia_.rows() != inertia_.cols() || inertia_.rows() == 0) {
    throw std::invalid_argument("plant: inertia must be square");
  }
  if (!inertia_.isApprox(inertia_.transpose(), 1e-12)) {
    throw std::invalid_argument("plant: inertia must be symmetric");
  }
  llt_.compute(inertia_);
  if (llt_.info() != Eigen::Success) {
    throw std::invalid_argument("plant: inertia must be positive definite");
  }
}

Eigen::MatrixXd PlantModel::rotation_rate(const Eigen::VectorXd& p, const Eigen::VectorXd& pdot) const {
  const double h = 1e-6 * std::max(1.0, p.norm());
  return (rotation(p + h * pdot) - rotation(p - h * pdot)) / (2.0 * h);
}

Eigen::VectorXd PlantModel::force(const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                                  const Eigen::VectorXd*) const {
  return coriolis(p, nu) * nu + damping(p, nu) * nu + gravity(p);
}

PlantRates plant_derivative(const PlantModel& pm, const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                            const Eigen::VectorXd& tau, const Eigen::VectorXd* beta_dot) {
  const int n = pm.dim();
  if (p.size() != n || nu.size() != n || tau.size() != n) {
    throw std::invalid_argument("plant_derivative: dimension mismatch");
  }
  if (pm.force_uses_beta_dot() && beta_dot == nullptr) {
    throw std::invalid_argument("plant_derivative: plant " + pm.name() + " needs beta_dot");
  }
  PlantRates r;
  r.p_dot = pm.rotation(p) * nu;
  r.nu_dot = pm.solve_inertia(tau - pm.force(p, nu, beta_dot));
  return r;
}

Eigen::VectorXd true_G(const PlantModel& pm, const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                       const Eigen::VectorXd& beta_dot) {
  const int n = pm.dim();
  if (p.size() != n || nu.size() != n || beta_dot.size() != n) {
    throw std::invalid_argument("true_G: dimension mismatch");
  }
  return pm.inertia() * beta_dot + pm.force(p, nu, &beta_dot);
}

// ---------------------------------------------------------------------------

Eigen::Matrix3d ExampleVesselPlant::example_inertia() {
  Eigen::Matrix3d m;
  m << 25.0, 0.0, 0.0,
       0.0, 33.0, 1.15,
       0.0, 1.15, 2.8;
  return m;
}

ExampleVesselPlant::ExampleVesselPlant() : PlantModel(example_inertia()) {}

Eigen::MatrixXd ExampleVesselPlant::coriolis(const Eigen::VectorXd&, const Eigen::VectorXd& nu) const {
  const double c13 = 33.0 * nu(1) + 1.15 * nu(2);
  const double c23 = 25.0 * nu(0);
  Eigen::Matrix3d c;
  c << 0.0, 0.0, -c13,
       0.0, 0.0, c23,
       c13, -c23, 0.0;
  return c;
}

Eigen::MatrixXd ExampleVesselPlant::damping(const Eigen::VectorXd&, const Eigen::VectorXd& nu) const {
  Eigen::Matrix3d d;
  d << 0.8 + 1.3 * std::abs(nu(0)), 0.0, 0.0,
       0.0, 0.9 + 36.0 * std::abs(nu(1)), -0.1,
       0.0, -0.1, 0.0;
  return d;
}

Eigen::VectorXd ExampleVesselPlant::gravity(const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(3);
}

Eigen::MatrixXd ExampleVesselPlant::rotation(const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Identity(3, 3);
}

Eigen::MatrixXd ExampleVesselPlant::rotation_rate(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(3, 3);
}

Eigen::VectorXd ExampleVesselPlant::force(const Eigen::VectorXd&, const Eigen::VectorXd& nu,
                                          const Eigen::VectorXd*) const {
  // C(nu) nu + D(nu) nu written out; same values as the matrix forms above
  const double c13 = 33.0 * nu(1) + 1.15 * nu(2);
  const double c23 = 25.0 * nu(0);
  Eigen::VectorXd f(3);
  f(0) = -c13 * nu(2) + (0.8 + 1.3 * std::abs(nu(0))) * nu(0);
  f(1) = c23 * nu(2) + (0.9 + 36.0 * std::abs(nu(1))) * nu(1) - 0.1 * nu(2);
  f(2) = c13 * nu(0) - c23 * nu(1) - 0.1 * nu(1);
  return f;
}

// ---------------------------------------------------------------------------

ConstantMatrixPlant::ConstantMatrixPlant(Eigen::MatrixXd inertia, Eigen::MatrixXd d0, Eigen::VectorXd d_abs,
                                         Eigen::VectorXd g)
    : PlantModel(std::move(inertia)), d0_(std::move(d0)), d_abs_(std::move(d_abs)), g_(std::move(g)) {
  const int n = dim();
  if (d0_.rows() != n || d0_.cols() != n || d_abs_.size() != n || g_.size() != n) {
    throw std::invalid_argument("constant_matrix plant: D0, d_abs and g must match M");
  }
}

Eigen::MatrixXd ConstantMatrixPlant::coriolis(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(dim(), dim());
}

Eigen::MatrixXd ConstantMatrixPlant::damping(const Eigen::VectorXd&, const Eigen::VectorXd& nu) const {
  Eigen::MatrixXd d = d0_;
  d.diagonal() += d_abs_.cwiseProduct(nu.cwiseAbs());
  return d;
}

Eigen::VectorXd ConstantMatrixPlant::gravity(const Eigen::VectorXd&) const { return g_; }

Eigen::MatrixXd ConstantMatrixPlant::rotation(const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Identity(dim(), dim());
}

Eigen::MatrixXd ConstantMatrixPlant::rotation_rate(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(dim(), dim());
}

// ---------------------------------------------------------------------------

RepresentablePlant::RepresentablePlant(Eigen::MatrixXd inertia, std::shared_ptr<const RbfGrid> grid,
                                       std::vector<Entry> entries)
    : PlantModel(std::move(inertia)), grid_(std::move(grid)), entries_(std::move(entries)) {
  if (!grid_) throw std::invalid_argument("representable plant: grid required");
  if (grid_->dim() != 2 * dim()) throw std::invalid_argument("representable plant: grid dimension must be 2n");
  ideal_ = Eigen::MatrixXd::Zero(dim(), grid_->size());
  for (const auto& e : entries_) {
    if (e.channel < 0 || e.channel >= dim() || e.neuron < 0 || e.neuron >= grid_->size()) {
      throw std::invalid_argument("representable plant: weight entry out of range");
    }
    ideal_(e.channel, e.neuron) = e.value;
  }
}

Eigen::VectorXd RepresentablePlant::representable_G(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const {
  Eigen::VectorXd x(2 * dim());
  x << p, nu;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (const auto& e : entries_) {
    const double d2 = (x - grid_->center(e.neuron)).squaredNorm();
    g(e.channel) += e.value * std::exp(-d2 / grid_->width(e.neuron));
  }
  return g;
}

Eigen::MatrixXd RepresentablePlant::coriolis(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(dim(), dim());
}

Eigen::MatrixXd RepresentablePlant::damping(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(dim(), dim());
}

Eigen::VectorXd RepresentablePlant::gravity(const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(dim());
}

Eigen::MatrixXd RepresentablePlant::rotation(const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Identity(dim(), dim());
}

Eigen::MatrixXd RepresentablePlant::rotation_rate(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Zero(dim(), dim());
}

Eigen::VectorXd RepresentablePlant::force(const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                                          const Eigen::VectorXd* beta_dot) const {
  if (beta_dot == nullptr) throw std::invalid_argument("representable plant: beta_dot required");
  return representable_G(p, nu) - inertia() * (*beta_dot);
}

} // namespace fdl
