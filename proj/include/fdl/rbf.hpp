#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fdl {

struct AxisBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Gaussian RBF centers on a regular lattice, endpoints included.
///
/// Neuron j maps to the multi-index (m_0, ..., m_{q-1}) with axis 0 most
/// significant: j = ((m_0 * P + m_1) * P + ...) + m_{q-1}, P = per_dim.
class RbfGrid {
 public:
  RbfGrid(int dim, int per_dim, std::vector<AxisBounds> bounds, Eigen::VectorXd widths);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int per_dim() const { return per_dim_; }
  [[nodiscard]] int size() const { return static_cast<int>(centers_.cols()); }
  [[nodiscard]] const std::vector<AxisBounds>& bounds() const { return bounds_; }
  [[nodiscard]] const Eigen::MatrixXd& centers() const { return centers_; }
  [[nodiscard]] auto center(int j) const { return centers_.col(j); }
  [[nodiscard]] double width(int j) const { return uniform_ ? widths_(0) : widths_(j); }
  [[nodiscard]] double max_width() const { return widths_.maxCoeff(); }
  [[nodiscard]] bool uniform_width() const { return uniform_; }
  [[nodiscard]] double spacing(int axis) const;
  [[nodiscard]] double axis_point(int axis, int m) const;
  /// Euclidean diameter of the bounding box.
  [[nodiscard]] double diameter() const;

  /// Index of the lattice point equal to c within tol, or -1.
  [[nodiscard]] int find_center(const Eigen::VectorXd& c, double tol = 1e-9) const;

 private:
  int dim_;
  int per_dim_;
  std::vector<AxisBounds> bounds_;
  Eigen::VectorXd widths_;
  bool uniform_;
  Eigen::MatrixXd centers_; // dim x N_n
};

inline constexpr std::size_t kDefaultMaxCenters = std::size_t{1} << 22;

/// per_dim^dim_q centers, evenly spaced per axis with spacing (hi-lo)/(per_dim-1).
RbfGrid build_grid(int dim_q, int per_dim, const std::vector<AxisBounds>& bounds, double width,
                   std::size_t max_centers = kDefaultMaxCenters);

/// Dense regressor S(x), s_j = exp(-|x - xi_j|^2 / gamma_j).
Eigen::VectorXd regressor(const RbfGrid& grid, const Eigen::VectorXd& x);

struct SparseRegressor {
  std::vector<int> index; // ascending
  std::vector<double> value;

  [[nodiscard]] std::size_t size() const { return index.size(); }
  [[nodiscard]] bool empty() const { return index.empty(); }
};

/// Entries of S(x) whose centers lie within `radius` of x (inclusive).
SparseRegressor localized_regressor(const RbfGrid& grid, const Eigen::VectorXd& x, double radius);

/// Same as localized_regressor but reuses `out`'s storage.
void localized_regressor_into(const RbfGrid& grid, const Eigen::VectorXd& x, double radius,
                              SparseRegressor& out);

/// Upper bound on |w^T (S - S_local)| for any weight vector with max |w_i| <= max_abs_weight.
double localized_tail_bound(const RbfGrid& grid, double radius, double max_abs_weight);

/// output_k = W_k^T S where `weights` is n x N_n (one row per output channel).
Eigen::VectorXd nn_output(const Eigen::MatrixXd& weights, const Eigen::VectorXd& s);
Eigen::VectorXd nn_output(const Eigen::MatrixXd& weights, const SparseRegressor& s);

/// One logged weight sample.
struct WeightSample {
  double t = 0.0;
  Eigen::MatrixXd weights;
};

/// Arithmetic mean of the samples with t in [t_a, t_b]. Throws on an empty window.
Eigen::MatrixXd mean_weights(std::span<const WeightSample> history, double t_a, double t_b);

/// Running mean of weight snapshots, fed by the integrator.
class WeightMeanAccumulator {
 public:
  WeightMeanAccumulator() = default;
  WeightMeanAccumulator(double t_a, double t_b) : t_a_(t_a), t_b_(t_b) {}

  /// Accumulates when t lies in the window; returns true if it did.
  template <class Derived>
  bool add(double t, const Eigen::MatrixBase<Derived>& w) {
    if (t < t_a_ || t > t_b_) return false;
    if (count_ == 0) {
      sum_ = w;
    } else {
      sum_ += w;
    }
    ++count_;
    return true;
  }
  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] double t_a() const { return t_a_; }
  [[nodiscard]] double t_b() const { return t_b_; }
  /// Throws if nothing was accumulated.
  [[nodiscard]] Eigen::MatrixXd mean() const;

 private:
  double t_a_ = 0.0;
  double t_b_ = 0.0;
  std::size_t count_ = 0;
  Eigen::MatrixXd sum_;
};

struct ZetaPartition {
  std::vector<int> near; // zeta: within radius of some trajectory sample
  std::vector<int> far;  // zeta-bar: complement
};

ZetaPartition partition_zeta(const RbfGrid& grid, std::span<const Eigen::VectorXd> samples,
                             double radius);

} // namespace fdl
