#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fdl/rbf.hpp"

namespace fdl {

/// Leader input r(t) drawn from a small declarative catalog.
class InputSignal {
 public:
  enum class Kind { Zero, Constant, Sinusoid };

  static InputSignal zero(int n_r);
  static InputSignal constant(Eigen::VectorXd value);
  /// amplitude * cos(omega * t + phase), componentwise amplitude.
  static InputSignal sinusoid(Eigen::VectorXd amplitude, double omega, double phase);

  [[nodiscard]] Eigen::VectorXd operator()(double t) const;
  [[nodiscard]] int size() const { return static_cast<int>(amplitude_.size()); }
  [[nodiscard]] Kind kind() const { return kind_; }
  /// sup_t |r(t)|, exact for every catalog entry.
  [[nodiscard]] double sup_norm() const;
  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] double phase() const { return phase_; }
  [[nodiscard]] const Eigen::VectorXd& amplitude() const { return amplitude_; }

 private:
  Kind kind_ = Kind::Zero;
  Eigen::VectorXd amplitude_;
  double omega_ = 0.0;
  double phase_ = 0.0;
};

/// Virtual leader: p0' = v0, v0' = A0 x0 + B0 r(t).
struct LeaderModel {
  int n = 0;
  Eigen::MatrixXd A0; // n x 2n
  Eigen::MatrixXd B0; // n x n_r
  InputSignal input;
  double r_star = 0.0;

  [[nodiscard]] int n_r() const { return static_cast<int>(B0.cols()); }
  /// Throws std::invalid_argument on inconsistent shapes or r_star < sup|r|.
  void validate() const;
};

Eigen::VectorXd leader_derivative(const LeaderModel& m, const Eigen::VectorXd& x0, double t);

/// Mechanical plant  p' = J(p) nu,  M nu' + C nu + D nu + g = tau  with constant M.
///
/// The plant is written through its generalized force F, so that M nu' = tau - F.
/// For a mechanical plant F = C nu + D nu + g; a manufactured plant may also
/// depend on the backstepping signal beta-dot (see force_uses_beta_dot()).
class PlantModel {
 public:
  virtual ~PlantModel() = default;

  [[nodiscard]] int dim() const { return static_cast<int>(inertia_.rows()); }
  [[nodiscard]] const Eigen::MatrixXd& inertia() const { return inertia_; }
  /// Solves M a = b through the stored Cholesky factor.
  [[nodiscard]] Eigen::VectorXd solve_inertia(const Eigen::VectorXd& b) const { return llt_.solve(b); }

  [[nodiscard]] virtual Eigen::MatrixXd coriolis(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const = 0;
  [[nodiscard]] virtual Eigen::MatrixXd damping(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const = 0;
  [[nodiscard]] virtual Eigen::VectorXd gravity(const Eigen::VectorXd& p) const = 0;
  [[nodiscard]] virtual Eigen::MatrixXd rotation(const Eigen::VectorXd& p) const = 0;
  /// dJ/dt along p' = pdot. Default: centered difference of rotation().
  [[nodiscard]] virtual Eigen::MatrixXd rotation_rate(const Eigen::VectorXd& p, const Eigen::VectorXd& pdot) const;
  [[nodiscard]] virtual bool constant_rotation() const { return false; }

  [[nodiscard]] virtual bool force_uses_beta_dot() const { return false; }
  [[nodiscard]] virtual Eigen::VectorXd force(const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                                              const Eigen::VectorXd* beta_dot) const;

  [[nodiscard]] virtual std::string name() const = 0;

 protected:
  /// Throws std::invalid_argument unless M is symmetric positive definite.
  explicit PlantModel(Eigen::MatrixXd inertia);

 private:
  Eigen::MatrixXd inertia_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct PlantRates {
  Eigen::VectorXd p_dot;
  Eigen::VectorXd nu_dot;
};

/// beta_dot is required only when pm.force_uses_beta_dot().
PlantRates plant_derivative(const PlantModel& pm, const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                            const Eigen::VectorXd& tau, const Eigen::VectorXd* beta_dot = nullptr);

/// G = M beta_dot + C nu + D nu + g, the lumped uncertainty the network learns.
/// Analysis-only: the controller never calls this.
Eigen::VectorXd true_G(const PlantModel& pm, const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                       const Eigen::VectorXd& beta_dot);

/// Three-DOF vessel used in the illustrative example: g = 0, J = I3.
class ExampleVesselPlant final : public PlantModel {
 public:
  ExampleVesselPlant();
  static Eigen::Matrix3d example_inertia();

  Eigen::MatrixXd coriolis(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::MatrixXd damping(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::VectorXd gravity(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation_rate(const Eigen::VectorXd& p, const Eigen::VectorXd& pdot) const override;
  bool constant_rotation() const override { return true; }
  Eigen::VectorXd force(const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                        const Eigen::VectorXd* beta_dot) const override;
  std::string name() const override { return "example_vessel"; }
};

/// C = 0, D = D0 + diag(d_abs .* |nu|), constant g, J = I.
class ConstantMatrixPlant final : public PlantModel {
 public:
  ConstantMatrixPlant(Eigen::MatrixXd inertia, Eigen::MatrixXd d0, Eigen::VectorXd d_abs, Eigen::VectorXd g);

  Eigen::MatrixXd coriolis(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::MatrixXd damping(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::VectorXd gravity(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation_rate(const Eigen::VectorXd& p, const Eigen::VectorXd& pdot) const override;
  bool constant_rotation() const override { return true; }
  std::string name() const override { return "constant_matrix"; }

 private:
  Eigen::MatrixXd d0_;
  Eigen::VectorXd d_abs_;
  Eigen::VectorXd g_;
};

/// Manufactured plant whose lumped uncertainty is exactly G(x) = W*^T S(x):
/// F = W*^T S(x) - M beta_dot, hence M beta_dot + F = W*^T S(x) and the
/// ideal approximation error vanishes identically. J = I.
class RepresentablePlant final : public PlantModel {
 public:
  struct Entry {
    int channel; // 0-based output k
    int neuron;
    double value;
  };

  RepresentablePlant(Eigen::MatrixXd inertia, std::shared_ptr<const RbfGrid> grid, std::vector<Entry> entries);

  /// Dense W*, n x N_n.
  [[nodiscard]] const Eigen::MatrixXd& ideal_weights() const { return ideal_; }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const RbfGrid& grid() const { return *grid_; }
  /// W*^T S(x) with the full regressor.
  [[nodiscard]] Eigen::VectorXd representable_G(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const;

  Eigen::MatrixXd coriolis(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::MatrixXd damping(const Eigen::VectorXd& p, const Eigen::VectorXd& nu) const override;
  Eigen::VectorXd gravity(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd rotation_rate(const Eigen::VectorXd& p, const Eigen::VectorXd& pdot) const override;
  bool constant_rotation() const override { return true; }
  bool force_uses_beta_dot() const override { return true; }
  Eigen::VectorXd force(const Eigen::VectorXd& p, const Eigen::VectorXd& nu,
                        const Eigen::VectorXd* beta_dot) const override;
  std::string name() const override { return "representable"; }

 private:
  std::shared_ptr<const RbfGrid> grid_;
  std::vector<Entry> entries_;
  Eigen::MatrixXd ideal_;
};

} // namespace fdl
