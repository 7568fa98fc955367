#include "fdl/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdl {

RbfGrid::RbfGrid(int dim, int per_dim, std::vector<AxisBounds> bounds, Eigen::VectorXd widths)
    : dim_(dim), per_dim_(per_dim), bounds_(std::move(bounds)), widths_(std::move(widths)) {
  if (dim_ < 1) throw std::invalid_argument("rbf: dimension must be >= 1");
  if (per_dim_ < 2) throw std::invalid_argument("rbf: per_dim must be >= 2");
  if (static_cast<int>(bounds_.size()) != dim_) {
    throw std::invalid_argument("rbf: one bounds pair per axis required");
  }
  for (int a = 0; a < dim_; ++a) {
    if (!(bounds_[a].lo < bounds_[a].hi)) {
      throw std::invalid_argument("rbf: axis " + std::to_string(a) + " needs lo < hi");
    }
  }
  std::size_t count = 1;
  for (int a = 0; a < dim_; ++a) count *= static_cast<std::size_t>(per_dim_);
  uniform_ = widths_.size() == 1;
  if (!uniform_ && static_cast<std::size_t>(widths_.size()) != count) {
    throw std::invalid_argument("rbf: widths must be uniform or one per neuron");
  }
  if (widths_.size() == 0 || (widths_.array() <= 0.0).any()) {
    throw std::invalid_argument("rbf: widths must be positive");
  }

  centers_.resize(dim_, static_cast<Eigen::Index>(count));
  std::vector<int> m(dim_, 0);
  for (std::size_t j = 0; j < count; ++j) {
    for (int a = 0; a < dim_; ++a) centers_(a, static_cast<Eigen::Index>(j)) = axis_point(a, m[a]);
    for (int a = dim_ - 1; a >= 0; --a) {
      if (++m[a] < per_dim_) break;
      m[a] = 0;
    }
  }
}

double RbfGrid::spacing(int axis) const {
  return (bounds_[axis].hi - bounds_[axis].lo) / (per_dim_ - 1);
}

double RbfGrid::axis_point(int axis, int m) const {
  // endpoint-exact: the last point is hi, not lo + (P-1)*spacing
  if (m == per_dim_ - 1) return bounds_[axis].hi;
  return bounds_[axis].lo + m * spacing(axis);
}

double RbfGrid::diameter() const {
  double d2 = 0.0;
  for (const auto& b : bounds_) d2 += (b.hi - b.lo) * (b.hi - b.lo);
  return std::sqrt(d2);
}

int RbfGrid::find_center(const Eigen::VectorXd& c, double tol) const {
  if (c.size() != dim_) return -1;
  int j = 0;
  for (int a = 0; a < dim_; ++a) {
    const double u = (c(a) - bounds_[a].lo) / spacing(a);
    const int m = static_cast<int>(std::lround(u));
    if (m < 0 || m >= per_dim_ || std::abs(axis_point(a, m) - c(a)) > tol) return -1;
    j = j * per_dim_ + m;
  }
  return j;
}

RbfGrid build_grid(int dim_q, int per_dim, const std::vector<AxisBounds>& bounds, double width,
                   std::size_t max_centers) {
  if (per_dim < 2) throw std::invalid_argument("rbf: per_dim must be >= 2");
  if (dim_q < 1) throw std::invalid_argument("rbf: dimension must be >= 1");
  double count = 1.0;
  for (int a = 0; a < dim_q; ++a) count *= per_dim;
  if (count > static_cast<double>(max_centers)) {
    throw std::invalid_argument("rbf: " + std::to_string(per_dim) + "^" + std::to_string(dim_q) +
                                " centers exceeds the configured cap of " +
                                std::to_string(max_centers));
  }
  return RbfGrid(dim_q, per_dim, bounds, Eigen::VectorXd::Constant(1, width));
}

Eigen::VectorXd regressor(const RbfGrid& grid, const Eigen::VectorXd& x) {
  if (x.size() != grid.dim()) throw std::invalid_argument("rbf: input dimension mismatch");
  const Eigen::RowVectorXd d2 = (grid.centers().colwise() - x).colwise().squaredNorm();
  Eigen::VectorXd s(grid.size());
  for (int j = 0; j < grid.size(); ++j) s(j) = std::exp(-d2(j) / grid.width(j));
  return s;
}

void localized_regressor_into(const RbfGrid& grid, const Eigen::VectorXd& x, double radius,
                              SparseRegressor& out) {
  if (x.size() != grid.dim()) throw std::invalid_argument("rbf: input dimension mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("rbf: localization radius must be positive");
  out.index.clear();
  out.value.clear();

  const int q = grid.dim();
  const int p = grid.per_dim();
  // per-axis bucket range of lattice indices within radius of x
  std::vector<int> lo(q);
  std::vector<int> hi(q);
  for (int a = 0; a < q; ++a) {
    const double h = grid.spacing(a);
    const double b = grid.bounds()[a].lo;
    const double l = std::ceil((x(a) - radius - b) / h - 1e-12);
    const double u = std::floor((x(a) + radius - b) / h + 1e-12);
    lo[a] = static_cast<int>(std::max(l, 0.0));
    hi[a] = static_cast<int>(std::min(u, static_cast<double>(p - 1)));
    if (lo[a] > hi[a]) return;
  }

  const double r2 = radius * radius;
  std::vector<int> m = lo;
  while (true) {
    double d2 = 0.0;
    int j = 0;
    for (int a = 0; a < q; ++a) {
      const double d = x(a) - grid.axis_point(a, m[a]);
      d2 += d * d;
      j = j * p + m[a];
    }
    if (d2 <= r2) {
      out.index.push_back(j);
      out.value.push_back(std::exp(-d2 / grid.width(j)));
    }
    int a = q - 1;
    for (; a >= 0; --a) {
      if (++m[a] <= hi[a]) break;
      m[a] = lo[a];
    }
    if (a < 0) break;
  }
}

SparseRegressor localized_regressor(const RbfGrid& grid, const Eigen::VectorXd& x, double radius) {
  SparseRegressor out;
  localized_regressor_into(grid, x, radius, out);
  return out;
}

double localized_tail_bound(const RbfGrid& grid, double radius, double max_abs_weight) {
  return grid.size() * std::exp(-radius * radius / grid.max_width()) * max_abs_weight;
}

Eigen::VectorXd nn_output(const Eigen::MatrixXd& weights, const Eigen::VectorXd& s) {
  if (weights.cols() != s.size()) throw std::invalid_argument("rbf: weight/regressor length mismatch");
  return weights * s;
}

Eigen::VectorXd nn_output(const Eigen::MatrixXd& weights, const SparseRegressor& s) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(weights.rows());
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (s.index[e] >= weights.cols()) throw std::invalid_argument("rbf: regressor index out of range");
    out += weights.col(s.index[e]) * s.value[e];
  }
  return out;
}

Eigen::MatrixXd mean_weights(std::span<const WeightSample> history, double t_a, double t_b) {
  if (!(t_b >= t_a)) throw std::invalid_argument("mean_weights: window must satisfy t_b >= t_a");
  Eigen::MatrixXd sum;
  std::size_t count = 0;
  for (const auto& s : history) {
    if (s.t < t_a || s.t > t_b) continue;
    if (count == 0) {
      sum = s.weights;
    } else {
      if (s.weights.rows() != sum.rows() || s.weights.cols() != sum.cols()) {
        throw std::invalid_argument("mean_weights: inconsistent sample shapes");
      }
      sum += s.weights;
    }
    ++count;
  }
  if (count == 0) throw std::invalid_argument("mean_weights: empty window");
  return sum / static_cast<double>(count);
}

Eigen::MatrixXd WeightMeanAccumulator::mean() const {
  if (count_ == 0) throw std::runtime_error("mean weights: no samples in window");
  return sum_ / static_cast<double>(count_);
}

ZetaPartition partition_zeta(const RbfGrid& grid, std::span<const Eigen::VectorXd> samples,
                             double radius) {
  if (samples.empty()) throw std::invalid_argument("partition_zeta: no trajectory samples");
  std::vector<char> hit(grid.size(), 0);
  SparseRegressor scratch;
  for (const auto& x : samples) {
    localized_regressor_into(grid, x, radius, scratch);
    for (int j : scratch.index) hit[j] = 1;
  }
  ZetaPartition part;
  for (int j = 0; j < grid.size(); ++j) (hit[j] ? part.near : part.far).push_back(j);
  return part;
}

} // namespace fdl
