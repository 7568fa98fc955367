#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdl/controller.hpp"
#include "fdl/estimator.hpp"
#include "fdl/graph.hpp"
#include "fdl/models.hpp"
#include "fdl/rbf.hpp"

namespace fdl {

/// Offsets into the flat state vector.
///
///   [ x0 (2n) | agent 1 | agent 2 | ... ]
///   agent i = [ p_i (n) | nu_i (n) | xhat_i (2n) | W_i (n * N_n) ]
///
/// W_i is channel-major: entry k * N_n + j is neuron j of output channel k.
struct StateLayout {
  int n = 0;
  int agents = 0;
  int neurons = 0;

  [[nodiscard]] Eigen::Index agent_stride() const { return 4 * n + static_cast<Eigen::Index>(n) * neurons; }
  [[nodiscard]] Eigen::Index agent(int i) const { return 2 * n + i * agent_stride(); }
  [[nodiscard]] Eigen::Index position(int i) const { return agent(i); }
  [[nodiscard]] Eigen::Index velocity(int i) const { return agent(i) + n; }
  [[nodiscard]] Eigen::Index estimate(int i) const { return agent(i) + 2 * n; }
  [[nodiscard]] Eigen::Index weights(int i) const { return agent(i) + 4 * n; }
  [[nodiscard]] Eigen::Index weight_rows() const { return static_cast<Eigen::Index>(n) * neurons; }
  [[nodiscard]] Eigen::Index size() const { return 2 * n + agents * agent_stride(); }

  /// Human-readable name of a flat index, e.g. "agent 2 W[k=1, neuron 17]".
  [[nodiscard]] std::string component_name(Eigen::Index idx) const;

  /// All agents' weights as an (n * N_n) x N matrix view, one column per agent.
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> weight_matrix(const Eigen::VectorXd& s) const;
  [[nodiscard]] Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>> weight_matrix(Eigen::VectorXd& s) const;
  /// Agent i's weights as an n x N_n matrix (row k = channel k).
  [[nodiscard]] Eigen::MatrixXd agent_weights(const Eigen::VectorXd& s, int i) const;
};

struct InitialConditions {
  Eigen::VectorXd leader;                  // x0(0) = (p0, v0)
  std::vector<Eigen::VectorXd> positions;  // p_i(0)
  std::vector<Eigen::VectorXd> velocities; // nu_i(0)
  std::vector<Eigen::VectorXd> estimates;  // xhat_i(0)
};

/// Everything the coupled ODE needs. Weights always start at zero.
struct Scenario {
  std::string name;
  LeaderModel leader;
  std::shared_ptr<const PlantModel> plant;
  Topology topology;
  ObserverParams observer;
  ControllerGains gains;
  FormationSpec formation;
  std::shared_ptr<const RbfGrid> grid;
  /// Regressor entries farther than this from x_i are dropped; infinity keeps all.
  double localization_radius = 45.0;
  InitialConditions initial;

  [[nodiscard]] int n() const { return leader.n; }
  [[nodiscard]] int agents() const { return topology.n_followers; }
  [[nodiscard]] StateLayout layout() const;
  /// Throws std::invalid_argument on the first inconsistency.
  void validate() const;
  [[nodiscard]] Eigen::VectorXd initial_state() const;
};

/// Per-agent quantities produced while evaluating the derivative.
struct AgentSignals {
  Eigen::VectorXd z1, z2, beta, beta_dot, tau, nn_out, p_hat_dot, p_hat_ddot;
  SparseRegressor regressor;
};

/// Scratch buffers and precomputed matrices reused across evaluations.
class SystemModel {
 public:
  explicit SystemModel(const Scenario& scenario);

  [[nodiscard]] const Scenario& scenario() const { return sc_; }
  [[nodiscard]] const StateLayout& layout() const { return layout_; }
  [[nodiscard]] const LaplacianPair& laplacians() const { return lap_; }

  /// Flat derivative of the full closed loop; optionally exposes per-agent signals.
  void derivative(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out,
                  std::vector<AgentSignals>* signals = nullptr);

  /// Same values, but weight entries of neurons that have never been active
  /// are left untouched in `out` (their derivative is exactly zero as long as
  /// their weights are zero). A neuron becomes active once it enters some
  /// agent's localized regressor and stays active.
  void derivative_active(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out,
                         std::vector<AgentSignals>* signals = nullptr);

  /// Flat indices that derivative_active() writes.
  [[nodiscard]] const std::vector<Eigen::Index>& support() const { return support_; }
  [[nodiscard]] const std::vector<int>& active_neurons() const { return active_list_; }
  /// Marks every neuron carrying a nonzero weight in `state` as active.
  void activate_nonzero(const Eigen::VectorXd& state);

 private:
  void evaluate(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out, std::vector<AgentSignals>* signals,
                bool full);
  void activate(int neuron);

  const Scenario& sc_;
  StateLayout layout_;
  LaplacianPair lap_;
  Eigen::MatrixXd subgraph_laplacian_;
  std::vector<Eigen::VectorXd> estimates_;
  std::vector<Eigen::VectorXd> obs_rates_;
  std::vector<Eigen::VectorXd> z2_;
  std::vector<SparseRegressor> regressors_;
  std::vector<AgentSignals> local_signals_;
  Eigen::MatrixXd mix_; // gamma1 sigma I + gamma2 L_s
  std::vector<char> active_;
  std::vector<int> active_list_;
  std::vector<Eigen::Index> support_;
};

Eigen::VectorXd system_derivative(const Scenario& scenario, double t, const Eigen::VectorXd& state);

/// Raised when any RK4 stage produces a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, std::string component)
      : std::runtime_error("non-finite state at t=" + std::to_string(t) + " in " + component),
        t_(t), component_(std::move(component)) {}
  [[nodiscard]] double time() const { return t_; }
  [[nodiscard]] const std::string& component() const { return component_; }

 private:
  double t_;
  std::string component_;
};

/// Classical four-stage Runge-Kutta on a flat vector.
class Rk4 {
 public:
  using Derivative = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
  using Namer = std::function<std::string(Eigen::Index)>;

  explicit Rk4(Eigen::Index size)
      : k1_(Eigen::VectorXd::Zero(size)), k2_(Eigen::VectorXd::Zero(size)), k3_(Eigen::VectorXd::Zero(size)),
        k4_(Eigen::VectorXd::Zero(size)), tmp_(Eigen::VectorXd::Zero(size)) {}

  /// Advances y from t to t + dt in place. Throws DivergenceError.
  void step(const Derivative& f, double t, double dt, Eigen::VectorXd& y, const Namer& namer = {});

  /// Same step restricted to the entries listed by `support`, which may grow
  /// between stages. Entries outside the support must have a zero derivative
  /// and must not be modified between calls; `f` may leave them unwritten.
  void step_on_support(const Derivative& f, const std::vector<Eigen::Index>& support, double t, double dt,
                       Eigen::VectorXd& y, const Namer& namer = {});

 private:
  void check(const Eigen::VectorXd& v, double t, const Namer& namer) const;
  void check(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& support, double t,
             const Namer& namer) const;
  Eigen::VectorXd k1_, k2_, k3_, k4_, tmp_;
  bool synced_ = false;
};

/// Convenience wrapper: one RK4 step of an arbitrary system.
Eigen::VectorXd rk4_step(const Rk4::Derivative& f, double t, double dt, const Eigen::VectorXd& y);

struct RunConfig {
  double dt = 1e-3;
  double t_end = 200.0;
  int log_stride = 10;
  std::vector<double> checkpoints;        // absolute times; empty = 0, 0.5T, 0.8T, T
  std::optional<double> mean_window_start; // default 0.8 T
  std::optional<double> mean_window_end;   // default T

  void validate() const;
  [[nodiscard]] std::vector<double> checkpoint_times() const;
  [[nodiscard]] double window_start() const { return mean_window_start.value_or(0.8 * t_end); }
  [[nodiscard]] double window_end() const { return mean_window_end.value_or(t_end); }
  [[nodiscard]] long long steps() const;
};

struct WeightCheckpoint {
  double t = 0.0;
  std::vector<Eigen::MatrixXd> weights; // per agent, n x N_n
};

enum class RunStatus { Completed, Diverged };

inline constexpr int kLogSchemaVersion = 1;

/// Time-indexed record of a run.
struct RunLog {
  int schema_version = kLogSchemaVersion;
  int n = 0;
  int agents = 0;
  int neurons = 0;
  std::vector<std::string> columns;
  std::vector<double> data; // row-major
  std::vector<WeightCheckpoint> checkpoints;
  std::optional<WeightCheckpoint> mean_weights; // t = number of samples is not stored here
  double mean_t_a = 0.0;
  double mean_t_b = 0.0;
  std::size_t mean_samples = 0;
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0; // integration time; kept out of the CSV

  [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : data.size() / columns.size(); }
  [[nodiscard]] std::size_t cols() const { return columns.size(); }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
  /// Throws std::out_of_range for an unknown column.
  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] std::vector<double> series(const std::string& name) const;
  [[nodiscard]] Eigen::VectorXd vector_at(std::size_t row, std::size_t first_col, int len) const;
};

/// Column names for a given problem size; the order is part of the schema.
std::vector<std::string> log_columns(int n, int agents, int n_r);

/// Integrates from the scenario's initial conditions; a divergence stops the
/// run and returns the partial log with status Diverged.
RunLog run_scenario(const Scenario& scenario, const RunConfig& config);

} // namespace fdl
