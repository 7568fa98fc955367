#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdl/rbf.hpp"
#include "fdl/sim.hpp"

namespace fdl {

/// Ceilings for the boundedness monitor and knobs for the metric suite.
struct AnalysisSettings {
  double pe_window = 0.0;      // T0; 0 = one period of the leader input (t_end / 10 without one)
  double pe_radius = 0.0;      // d_loc; 0 = scenario localization radius
  double pe_start = 0.0;       // transient cut for the PE sweep; 0 = 0.1 t_end
  double z1_ceiling = 1e3;
  double z2_ceiling = 1e4;
  double w_inf_ceiling = 1e4;
  double estimator_tolerance = 0.8; // on max_i |phat_i - p0|
  double estimator_deadline = 10.0; // s
};

// ---------------------------------------------------------------------------
// tracking and estimation

struct TrackingMetrics {
  std::vector<double> t;
  std::vector<std::vector<double>> error; // per agent, |p_i - p0 - p_i*|
  std::vector<double> steady;             // mean over [t_a, t_b]; NaN for an empty window
  std::vector<double> decay_rate;         // -slope of log e over the transient; NaN if too short
};

TrackingMetrics tracking_metrics(const RunLog& log, const FormationSpec& formation, double t_a, double t_b);

/// Least-squares rate of e(t) ~ c exp(-rate t) on [0, first t with e < 5 steady].
double decay_rate_fit(const std::vector<double>& t, const std::vector<double>& e, double steady);

struct EstimationMetrics {
  std::vector<double> t;
  std::vector<std::vector<double>> state_error;    // per agent, |xhat_i - x0|
  std::vector<std::vector<double>> position_error; // per agent, |phat_i - p0|
  std::vector<double> max_position_error;          // max over agents
  /// Earliest logged time after which max_position_error stays <= tolerance; NaN if never.
  double settle_time = 0.0;
};

EstimationMetrics estimation_metrics(const RunLog& log, double tolerance);

/// max over t in [t_a, t_b] and pairs i<j of |(p_i - p_j) - (p_i* - p_j*)|; NaN for an empty window.
double formation_deviation(const RunLog& log, const FormationSpec& formation, double t_a, double t_b);

// ---------------------------------------------------------------------------
// learning

struct ApproximationEntry {
  int agent = 0;   // 0-based
  int channel = 0; // 0-based
  double rms_error = 0.0;
  double rms_true = 0.0;
  bool relative = true; // false: rms_true == 0, value is the absolute RMS
  [[nodiscard]] double value() const { return relative ? rms_error / rms_true : rms_error; }
};

/// Along logged samples with t in [t_a, t_b], compares G(x_i) (from the plant
/// and the logged beta-dot) with weights[i] * S(x_i) using the full regressor.
/// Returns one entry per (agent, channel); empty if the window holds no rows.
std::vector<ApproximationEntry> approximation_error(const RunLog& log, const Scenario& scenario,
                                                    const std::vector<Eigen::MatrixXd>& weights, double t_a,
                                                    double t_b);

/// Relative RMS difference between the logged analytic beta-dot and a centered
/// difference of the logged beta, over interior rows in [t_a, t_b]; worst agent.
double beta_dot_fd_discrepancy(const RunLog& log, double t_a, double t_b);

inline constexpr double kBetaDotAgreement = 1e-2;

struct ConsensusMetrics {
  std::vector<double> t;                 // checkpoint times
  std::vector<Eigen::VectorXd> pairwise; // per checkpoint, max_{i,j} |W_k,i - W_k,j| per k
  std::vector<Eigen::MatrixXd> norms;    // per checkpoint, n x N matrix of |W_k,i|
};

/// Per channel k, max over agent pairs of |W_k,i - W_k,j|. banks[i] is n x N_n.
Eigen::VectorXd max_pairwise_distance(const std::vector<Eigen::MatrixXd>& banks);

ConsensusMetrics consensus_metrics(const std::vector<WeightCheckpoint>& checkpoints);

/// Largest rise of a series above its running minimum, max_t (c(t) - min_{s<=t} c(s)).
double rise_above_running_min(const std::vector<double>& c);

/// rise_above_running_min(c) relative to the first value, max(c.front(), floor).
double ripple_above_running_min(const std::vector<double>& c, double floor);

// ---------------------------------------------------------------------------
// excitation and localization

struct PeResult {
  double eta = 0.0;    // smallest eigenvalue of the Gram integral
  double lambda_max = 0.0;
  double t0 = 0.0;
  double window = 0.0;
  std::size_t samples = 0;
  /// eta above the round-off floor |zeta| * machine eps * lambda_max.
  [[nodiscard]] bool positive(std::size_t zeta_size) const;
};

/// Trapezoid-rule Gram integral of S_zeta S_zeta^T over samples with t in
/// [t0, t0 + window]. Throws std::invalid_argument for an empty zeta set or
/// fewer than two samples in the window.
PeResult pe_metric(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& x, const RbfGrid& grid,
                   const std::vector<int>& zeta, double t0, double window);

struct PeSweep {
  double min_eta = 0.0;
  bool all_positive = false;
  std::size_t windows = 0;
  std::size_t min_zeta = 0;
  int worst_agent = -1;
  double worst_t0 = 0.0;
};

/// Slides windows of length T0 (start step T0 / 8) over [t_start, t_end - T0]
/// along each agent's logged x_i; zeta per agent = centers within `radius`
/// of that agent's trajectory on [t_start, t_end].
PeSweep pe_sweep(const RunLog& log, const RbfGrid& grid, double radius, double t_start, double window);

/// Logged x_i = [p_i; nu_i] samples of one agent.
std::vector<Eigen::VectorXd> agent_inputs(const RunLog& log, int agent);

struct FarNeuronEntry {
  int agent = 0;
  int channel = 0;
  double far_max = 0.0;  // max |w| over zeta-bar
  double near_max = 0.0; // max |w| over zeta
};

struct FarNeuronReport {
  bool applicable = false; // false when zeta-bar is empty
  std::size_t near_count = 0;
  std::size_t far_count = 0;
  std::vector<FarNeuronEntry> entries;
  [[nodiscard]] double worst_ratio() const;
};

FarNeuronReport far_neuron_check(const std::vector<Eigen::MatrixXd>& weights, const ZetaPartition& partition);

/// Partition against the union of every agent's logged trajectory.
ZetaPartition trajectory_partition(const RunLog& log, const RbfGrid& grid, double radius);

// ---------------------------------------------------------------------------
// synthetic-plant checks

/// |z2' computed by the composed system - z2' from the error dynamics
///  M^{-1}((W - W*)^T S - J^T z1 - H2 z2)| per agent. `tau_perturbation` is
/// added to every agent's control in the composed side only.
/// Throws std::invalid_argument unless the plant is a RepresentablePlant.
std::vector<double> closed_loop_residual(const Scenario& scenario, double t, const Eigen::VectorXd& state,
                                         const Eigen::VectorXd* tau_perturbation = nullptr);

/// |W_zeta,k,i - W*_zeta,k| / |W*_zeta,k| per (agent, channel), stacked over
/// channels with a nonzero ideal block; returns the worst.
double ideal_weight_error(const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& ideal,
                          const std::vector<int>& zeta, Eigen::MatrixXd* per_agent_channel = nullptr);

// ---------------------------------------------------------------------------
// boundedness

struct BoundednessReport {
  bool finite = true;
  double z1_sup = 0.0;
  double z2_sup = 0.0;
  double w_inf_sup = 0.0;
};

BoundednessReport boundedness_monitor(const RunLog& log, double t_from);

// ---------------------------------------------------------------------------
// report

struct Verdict {
  int criterion = 0;
  std::string name;
  bool applicable = true;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct MetricReport {
  TrackingMetrics tracking;
  EstimationMetrics estimation;
  double formation_dev = 0.0;
  std::vector<ApproximationEntry> approx_mean;  // W-bar
  std::vector<ApproximationEntry> approx_final; // last checkpoint
  double beta_dot_discrepancy = 0.0;
  ConsensusMetrics consensus;
  Eigen::VectorXd consensus_ripple; // per k, on the logged cons_k over the last half
  PeSweep pe;
  FarNeuronReport far;
  std::optional<double> ideal_error; // synthetic plant only
  BoundednessReport bounds;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;
};

/// Runs every single-log metric and the verdicts that a single log can decide.
MetricReport analyze_run(const RunLog& log, const Scenario& scenario, const AnalysisSettings& settings);

} // namespace fdl
