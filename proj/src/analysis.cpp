#include "fdl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fdl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string agent_col(int i, const std::string& stem, int k) {
  return "a" + std::to_string(i + 1) + "_" + stem + std::to_string(k + 1);
}

struct Columns {
  std::size_t p0 = 0;
  std::vector<std::size_t> p, nu, phat, vhat, z1, z2, beta, betadot, winf;

  explicit Columns(const RunLog& log) {
    p0 = log.column("p0_1");
    for (int i = 0; i < log.agents; ++i) {
      p.push_back(log.column(agent_col(i, "p", 0)));
      nu.push_back(log.column(agent_col(i, "nu", 0)));
      phat.push_back(log.column(agent_col(i, "phat", 0)));
      vhat.push_back(log.column(agent_col(i, "vhat", 0)));
      z1.push_back(log.column(agent_col(i, "z1_", 0)));
      z2.push_back(log.column(agent_col(i, "z2_", 0)));
      beta.push_back(log.column(agent_col(i, "beta", 0)));
      betadot.push_back(log.column(agent_col(i, "betadot", 0)));
      winf.push_back(log.column("a" + std::to_string(i + 1) + "_winf"));
    }
  }
};

std::vector<double> times(const RunLog& log) {
  std::vector<double> t(log.rows());
  for (std::size_t r = 0; r < log.rows(); ++r) t[r] = log.at(r, 0);
  return t;
}

bool in_window(double t, double t_a, double t_b) {
  const double slack = 1e-9 * std::max({1.0, std::abs(t_a), std::abs(t_b)});
  return t >= t_a - slack && t <= t_b + slack;
}

double mean_in_window(const std::vector<double>& t, const std::vector<double>& v, double t_a, double t_b) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (in_window(t[r], t_a, t_b)) {
      sum += v[r];
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : kNaN;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// tracking and estimation

double decay_rate_fit(const std::vector<double>& t, const std::vector<double>& e, double steady) {
  const double threshold = std::isfinite(steady) ? 5.0 * steady : 0.0;
  double st = 0.0, se = 0.0, stt = 0.0, ste = 0.0;
  std::size_t m = 0;
  for (std::size_t r = 0; r < t.size() && r < e.size(); ++r) {
    if (e[r] < threshold) break;
    if (!(e[r] > 0.0)) continue;
    const double y = std::log(e[r]);
    st += t[r];
    se += y;
    stt += t[r] * t[r];
    ste += t[r] * y;
    ++m;
  }
  if (m < 2) return kNaN;
  const double md = static_cast<double>(m);
  const double denom = md * stt - st * st;
  if (!(denom > 0.0)) return kNaN;
  return -(md * ste - st * se) / denom;
}

TrackingMetrics tracking_metrics(const RunLog& log, const FormationSpec& formation, double t_a, double t_b) {
  TrackingMetrics out;
  out.t = times(log);
  const int n = log.n;
  if (static_cast<int>(formation.offsets.size()) != log.agents) {
    throw std::invalid_argument("tracking_metrics: one offset per agent required");
  }
  if (log.rows() == 0) {
    out.error.assign(log.agents, {});
    out.steady.assign(log.agents, kNaN);
    out.decay_rate.assign(log.agents, kNaN);
    return out;
  }
  const Columns cols(log);
  for (int i = 0; i < log.agents; ++i) {
    std::vector<double> e(log.rows());
    for (std::size_t r = 0; r < log.rows(); ++r) {
      const Eigen::VectorXd d = log.vector_at(r, cols.p[i], n) - log.vector_at(r, cols.p0, n) - formation.offsets[i];
      e[r] = d.norm();
    }
    const double steady = mean_in_window(out.t, e, t_a, t_b);
    out.steady.push_back(steady);
    out.decay_rate.push_back(decay_rate_fit(out.t, e, steady));
    out.error.push_back(std::move(e));
  }
  return out;
}

EstimationMetrics estimation_metrics(const RunLog& log, double tolerance) {
  EstimationMetrics out;
  out.t = times(log);
  const int n = log.n;
  out.state_error.assign(log.agents, std::vector<double>(log.rows()));
  out.position_error.assign(log.agents, std::vector<double>(log.rows()));
  out.max_position_error.assign(log.rows(), 0.0);
  if (log.rows() == 0) {
    out.settle_time = kNaN;
    return out;
  }
  const Columns cols(log);
  for (std::size_t r = 0; r < log.rows(); ++r) {
    const Eigen::VectorXd p0 = log.vector_at(r, cols.p0, n);
    const Eigen::VectorXd v0 = log.vector_at(r, cols.p0 + n, n);
    for (int i = 0; i < log.agents; ++i) {
      const Eigen::VectorXd dp = log.vector_at(r, cols.phat[i], n) - p0;
      const Eigen::VectorXd dv = log.vector_at(r, cols.vhat[i], n) - v0;
      out.position_error[i][r] = dp.norm();
      out.state_error[i][r] = std::sqrt(dp.squaredNorm() + dv.squaredNorm());
      out.max_position_error[r] = std::max(out.max_position_error[r], out.position_error[i][r]);
    }
  }
  std::size_t first_good = log.rows();
  for (std::size_t r = log.rows(); r-- > 0;) {
    if (!(out.max_position_error[r] <= tolerance)) break;
    first_good = r;
  }
  out.settle_time = first_good < log.rows() ? out.t[first_good] : kNaN;
  return out;
}

double formation_deviation(const RunLog& log, const FormationSpec& formation, double t_a, double t_b) {
  if (log.rows() == 0) return kNaN;
  const Columns cols(log);
  const int n = log.n;
  double worst = kNaN;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    if (!in_window(log.at(r, 0), t_a, t_b)) continue;
    if (std::isnan(worst)) worst = 0.0;
    for (int i = 0; i < log.agents; ++i) {
      for (int j = i + 1; j < log.agents; ++j) {
        const Eigen::VectorXd d = (log.vector_at(r, cols.p[i], n) - log.vector_at(r, cols.p[j], n)) -
                                  (formation.offsets[i] - formation.offsets[j]);
        worst = std::max(worst, d.norm());
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// learning

std::vector<Eigen::VectorXd> agent_inputs(const RunLog& log, int agent) {
  std::vector<Eigen::VectorXd> xs;
  if (log.rows() == 0) return xs;
  const int n = log.n;
  const std::size_t cp = log.column(agent_col(agent, "p", 0));
  const std::size_t cv = log.column(agent_col(agent, "nu", 0));
  xs.reserve(log.rows());
  for (std::size_t r = 0; r < log.rows(); ++r) {
    Eigen::VectorXd x(2 * n);
    x << log.vector_at(r, cp, n), log.vector_at(r, cv, n);
    xs.push_back(std::move(x));
  }
  return xs;
}

std::vector<ApproximationEntry> approximation_error(const RunLog& log, const Scenario& scenario,
                                                    const std::vector<Eigen::MatrixXd>& weights, double t_a,
                                                    double t_b) {
  if (static_cast<int>(weights.size()) != log.agents) {
    throw std::invalid_argument("approximation_error: one weight bank per agent required");
  }
  std::vector<ApproximationEntry> out;
  if (log.rows() == 0) return out;
  const Columns cols(log);
  const int n = log.n;
  const PlantModel& plant = *scenario.plant;
  for (int i = 0; i < log.agents; ++i) {
    Eigen::VectorXd err2 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd true2 = Eigen::VectorXd::Zero(n);
    std::size_t count = 0;
    for (std::size_t r = 0; r < log.rows(); ++r) {
      if (!in_window(log.at(r, 0), t_a, t_b)) continue;
      const Eigen::VectorXd p = log.vector_at(r, cols.p[i], n);
      const Eigen::VectorXd nu = log.vector_at(r, cols.nu[i], n);
      const Eigen::VectorXd bd = log.vector_at(r, cols.betadot[i], n);
      Eigen::VectorXd x(2 * n);
      x << p, nu;
      const Eigen::VectorXd g = true_G(plant, p, nu, bd);
      const Eigen::VectorXd g_hat = weights[i] * regressor(*scenario.grid, x);
      err2 += (g - g_hat).cwiseAbs2();
      true2 += g.cwiseAbs2();
      ++count;
    }
    if (count == 0) return {};
    for (int k = 0; k < n; ++k) {
      ApproximationEntry e;
      e.agent = i;
      e.channel = k;
      e.rms_error = std::sqrt(err2(k) / static_cast<double>(count));
      e.rms_true = std::sqrt(true2(k) / static_cast<double>(count));
      e.relative = e.rms_true > 0.0;
      out.push_back(e);
    }
  }
  return out;
}

double beta_dot_fd_discrepancy(const RunLog& log, double t_a, double t_b) {
  if (log.rows() < 3) return kNaN;
  const Columns cols(log);
  const int n = log.n;
  double worst = kNaN;
  for (int i = 0; i < log.agents; ++i) {
    double diff2 = 0.0;
    double ref2 = 0.0;
    for (std::size_t r = 1; r + 1 < log.rows(); ++r) {
      const double t = log.at(r, 0);
      if (!in_window(t, t_a, t_b)) continue;
      const double h_back = t - log.at(r - 1, 0);
      const double h_fwd = log.at(r + 1, 0) - t;
      if (std::abs(h_back - h_fwd) > 1e-9 * std::max(h_back, h_fwd)) continue;
      const Eigen::VectorXd fd =
          (log.vector_at(r + 1, cols.beta[i], n) - log.vector_at(r - 1, cols.beta[i], n)) / (h_back + h_fwd);
      const Eigen::VectorXd an = log.vector_at(r, cols.betadot[i], n);
      diff2 += (fd - an).squaredNorm();
      ref2 += an.squaredNorm();
    }
    if (ref2 > 0.0) worst = std::isnan(worst) ? std::sqrt(diff2 / ref2) : std::max(worst, std::sqrt(diff2 / ref2));
  }
  return worst;
}

Eigen::VectorXd max_pairwise_distance(const std::vector<Eigen::MatrixXd>& banks) {
  if (banks.size() < 2) throw std::invalid_argument("consensus: at least two agents required");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(banks[0].rows());
  for (std::size_t i = 0; i < banks.size(); ++i) {
    for (std::size_t j = i + 1; j < banks.size(); ++j) {
      out = out.cwiseMax((banks[i] - banks[j]).rowwise().norm());
    }
  }
  return out;
}

ConsensusMetrics consensus_metrics(const std::vector<WeightCheckpoint>& checkpoints) {
  ConsensusMetrics out;
  for (const auto& c : checkpoints) {
    out.t.push_back(c.t);
    out.pairwise.push_back(max_pairwise_distance(c.weights));
    Eigen::MatrixXd norms(c.weights[0].rows(), static_cast<Eigen::Index>(c.weights.size()));
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
      norms.col(static_cast<Eigen::Index>(i)) = c.weights[i].rowwise().norm();
    }
    out.norms.push_back(std::move(norms));
  }
  return out;
}

double rise_above_running_min(const std::vector<double>& c) {
  double run_min = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double v : c) {
    run_min = std::min(run_min, v);
    worst = std::max(worst, v - run_min);
  }
  return worst;
}

double ripple_above_running_min(const std::vector<double>& c, double floor) {
  if (c.empty()) return 0.0;
  return rise_above_running_min(c) / std::max(c.front(), floor);
}

// ---------------------------------------------------------------------------
// excitation and localization

bool PeResult::positive(std::size_t zeta_size) const {
  const double floor = static_cast<double>(zeta_size) * std::numeric_limits<double>::epsilon() * lambda_max;
  return lambda_max > 0.0 && eta > floor;
}

namespace {

Eigen::VectorXd local_values(const RbfGrid& grid, const std::vector<int>& zeta, const Eigen::VectorXd& x) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(zeta.size()));
  for (std::size_t m = 0; m < zeta.size(); ++m) {
    const int j = zeta[m];
    s(static_cast<Eigen::Index>(m)) = std::exp(-(x - grid.center(j)).squaredNorm() / grid.width(j));
  }
  return s;
}

PeResult gram_eigen(const Eigen::MatrixXd& gram, double t0, double window, std::size_t samples) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  PeResult r;
  r.eta = eig.eigenvalues().minCoeff();
  r.lambda_max = eig.eigenvalues().maxCoeff();
  r.t0 = t0;
  r.window = window;
  r.samples = samples;
  return r;
}

} // namespace

PeResult pe_metric(const std::vector<double>& t, const std::vector<Eigen::VectorXd>& x, const RbfGrid& grid,
                   const std::vector<int>& zeta, double t0, double window) {
  if (zeta.empty()) throw std::invalid_argument("pe_metric: empty zeta set");
  if (t.size() != x.size()) throw std::invalid_argument("pe_metric: time and sample counts differ");
  const auto q = static_cast<Eigen::Index>(zeta.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
  std::size_t used = 0;
  Eigen::VectorXd prev;
  double t_prev = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (!in_window(t[r], t0, t0 + window)) continue;
    Eigen::VectorXd s = local_values(grid, zeta, x[r]);
    if (used > 0) {
      const double h = t[r] - t_prev;
      gram.noalias() += 0.5 * h * (prev * prev.transpose() + s * s.transpose());
    }
    prev = std::move(s);
    t_prev = t[r];
    ++used;
  }
  if (used < 2) throw std::invalid_argument("pe_metric: fewer than two samples in the window");
  return gram_eigen(gram, t0, window, used);
}

PeSweep pe_sweep(const RunLog& log, const RbfGrid& grid, double radius, double t_start, double window) {
  PeSweep out;
  out.min_eta = std::numeric_limits<double>::infinity();
  out.min_zeta = std::numeric_limits<std::size_t>::max();
  out.all_positive = true;
  const auto t = times(log);
  if (t.empty() || !(window > 0.0) || t.back() < t_start + window) {
    out.all_positive = false;
    out.min_eta = kNaN;
    out.min_zeta = 0;
    return out;
  }
  for (int i = 0; i < log.agents; ++i) {
    const auto xs = agent_inputs(log, i);
    std::vector<Eigen::VectorXd> tail;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (t[r] >= t_start - 1e-12) {
        tail.push_back(xs[r]);
        rows.push_back(r);
      }
    }
    const auto zeta = partition_zeta(grid, tail, radius).near;
    out.min_zeta = std::min(out.min_zeta, zeta.size());
    if (zeta.empty()) {
      out.all_positive = false;
      out.min_eta = 0.0;
      out.worst_agent = i;
      continue;
    }
    const auto q = static_cast<Eigen::Index>(zeta.size());
    // per-interval trapezoid contributions, summed per window
    std::vector<Eigen::VectorXd> s(rows.size());
    for (std::size_t m = 0; m < rows.size(); ++m) s[m] = local_values(grid, zeta, tail[m]);
    const double step = window / 8.0;
    for (double t0 = t_start; t0 + window <= t.back() + 1e-9; t0 += step) {
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
      std::size_t used = 0;
      for (std::size_t m = 0; m + 1 < rows.size(); ++m) {
        const double ta = t[rows[m]];
        const double tb = t[rows[m + 1]];
        if (!in_window(ta, t0, t0 + window) || !in_window(tb, t0, t0 + window)) continue;
        gram.noalias() += 0.5 * (tb - ta) * (s[m] * s[m].transpose() + s[m + 1] * s[m + 1].transpose());
        ++used;
      }
      const PeResult r = gram_eigen(gram, t0, window, used + 1);
      ++out.windows;
      if (r.eta < out.min_eta) {
        out.min_eta = r.eta;
        out.worst_agent = i;
        out.worst_t0 = t0;
      }
      if (!r.positive(zeta.size())) out.all_positive = false;
    }
  }
  if (out.windows == 0) out.all_positive = false;
  return out;
}

double FarNeuronReport::worst_ratio() const {
  double worst = 0.0;
  for (const auto& e : entries) {
    if (e.far_max == 0.0) continue;
    worst = std::max(worst, e.near_max > 0.0 ? e.far_max / e.near_max : std::numeric_limits<double>::infinity());
  }
  return worst;
}

FarNeuronReport far_neuron_check(const std::vector<Eigen::MatrixXd>& weights, const ZetaPartition& partition) {
  FarNeuronReport out;
  out.near_count = partition.near.size();
  out.far_count = partition.far.size();
  out.applicable = !partition.far.empty();
  if (!out.applicable) return out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (Eigen::Index k = 0; k < weights[i].rows(); ++k) {
      FarNeuronEntry e;
      e.agent = static_cast<int>(i);
      e.channel = static_cast<int>(k);
      for (int j : partition.far) e.far_max = std::max(e.far_max, std::abs(weights[i](k, j)));
      for (int j : partition.near) e.near_max = std::max(e.near_max, std::abs(weights[i](k, j)));
      out.entries.push_back(e);
    }
  }
  return out;
}

ZetaPartition trajectory_partition(const RunLog& log, const RbfGrid& grid, double radius) {
  std::vector<Eigen::VectorXd> all;
  for (int i = 0; i < log.agents; ++i) {
    auto xs = agent_inputs(log, i);
    all.insert(all.end(), std::make_move_iterator(xs.begin()), std::make_move_iterator(xs.end()));
  }
  return partition_zeta(grid, all, radius);
}

// ---------------------------------------------------------------------------
// synthetic-plant checks

std::vector<double> closed_loop_residual(const Scenario& scenario, double t, const Eigen::VectorXd& state,
                                         const Eigen::VectorXd* tau_perturbation) {
  const auto* plant = dynamic_cast<const RepresentablePlant*>(scenario.plant.get());
  if (!plant) throw std::invalid_argument("closed_loop_residual: plant has no exactly representable G");
  SystemModel model(scenario);
  Eigen::VectorXd out;
  std::vector<AgentSignals> sig;
  model.derivative(t, state, out, &sig);
  const StateLayout& lay = model.layout();
  const int n = lay.n;
  std::vector<double> res;
  for (int i = 0; i < lay.agents; ++i) {
    const Eigen::VectorXd p = state.segment(lay.position(i), n);
    const Eigen::VectorXd nu = state.segment(lay.velocity(i), n);
    Eigen::VectorXd nu_dot = out.segment(lay.velocity(i), n);
    if (tau_perturbation) nu_dot += plant->solve_inertia(*tau_perturbation);
    const Eigen::VectorXd z2_dot_composed = nu_dot - sig[i].beta_dot;

    Eigen::VectorXd x(2 * n);
    x << p, nu;
    const Eigen::VectorXd s = regressor(*scenario.grid, x);
    const Eigen::MatrixXd w_tilde = lay.agent_weights(state, i) - plant->ideal_weights();
    const Eigen::MatrixXd J = plant->rotation(p);
    const Eigen::VectorXd rhs = w_tilde * s - J.transpose() * sig[i].z1 - scenario.gains.H2[i] * sig[i].z2;
    res.push_back((z2_dot_composed - plant->solve_inertia(rhs)).norm());
  }
  return res;
}

double ideal_weight_error(const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& ideal,
                          const std::vector<int>& zeta, Eigen::MatrixXd* per_agent_channel) {
  const Eigen::Index n = ideal.rows();
  Eigen::MatrixXd table = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(weights.size()), n, kNaN);
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      double diff2 = 0.0;
      double ref2 = 0.0;
      for (int j : zeta) {
        diff2 += std::pow(weights[i](k, j) - ideal(k, j), 2);
        ref2 += ideal(k, j) * ideal(k, j);
      }
      if (ref2 == 0.0) continue;
      const double e = std::sqrt(diff2 / ref2);
      table(static_cast<Eigen::Index>(i), k) = e;
      worst = std::max(worst, e);
    }
  }
  if (per_agent_channel) *per_agent_channel = table;
  return worst;
}

// ---------------------------------------------------------------------------
// boundedness

BoundednessReport boundedness_monitor(const RunLog& log, double t_from) {
  BoundednessReport out;
  if (log.rows() == 0) return out;
  const Columns cols(log);
  const int n = log.n;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    for (std::size_t c = 0; c < log.cols(); ++c) {
      if (!std::isfinite(log.at(r, c))) out.finite = false;
    }
    if (log.at(r, 0) < t_from) continue;
    for (int i = 0; i < log.agents; ++i) {
      out.z1_sup = std::max(out.z1_sup, log.vector_at(r, cols.z1[i], n).norm());
      out.z2_sup = std::max(out.z2_sup, log.vector_at(r, cols.z2[i], n).norm());
      out.w_inf_sup = std::max(out.w_inf_sup, log.at(r, cols.winf[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// report

MetricReport analyze_run(const RunLog& log, const Scenario& scenario, const AnalysisSettings& settings) {
  MetricReport rep;
  const double t_a = log.mean_t_a;
  const double t_b = log.mean_t_b;
  const double t_end = log.rows() ? log.at(log.rows() - 1, 0) : 0.0;
  const bool complete = log.status == RunStatus::Completed && log.rows() > 1;
  auto add = [&rep](int id, std::string name, bool applicable, bool pass, double value, double threshold,
                    std::string detail) {
    rep.verdicts.push_back({id, std::move(name), applicable, applicable && pass, value, threshold, std::move(detail)});
  };
  if (!complete) {
    rep.notes.push_back(log.rows() <= 1 ? "log holds no integrated rows; windows are empty"
                                        : "run did not complete: " + log.message);
  }

  // 1 estimator
  rep.estimation = estimation_metrics(log, settings.estimator_tolerance);
  {
    const double st = rep.estimation.settle_time;
    bool pass = std::isfinite(st) && st <= settings.estimator_deadline;
    std::string detail = "settles below " + fmt(settings.estimator_tolerance) + " at t=" + fmt(st);
    if (log.wall_seconds > 0.0) {
      pass = pass && log.wall_seconds <= 120.0;
      detail += ", runtime " + fmt(log.wall_seconds) + " s (limit 120)";
    }
    add(1, "estimator convergence", complete, pass, st, settings.estimator_deadline, detail);
  }

  // 2 tracking, 3 formation
  rep.tracking = tracking_metrics(log, scenario.formation, t_a, t_b);
  {
    double worst = 0.0;
    bool rates_ok = true;
    bool any = false;
    std::ostringstream d;
    for (std::size_t i = 0; i < rep.tracking.steady.size(); ++i) {
      const double s = rep.tracking.steady[i];
      if (std::isfinite(s)) any = true;
      worst = std::max(worst, std::isfinite(s) ? s : std::numeric_limits<double>::infinity());
      rates_ok = rates_ok && std::isfinite(rep.tracking.decay_rate[i]) && rep.tracking.decay_rate[i] > 0.0;
      d << "a" << i + 1 << ": steady " << fmt(s) << " rate " << fmt(rep.tracking.decay_rate[i]) << "; ";
    }
    add(2, "tracking", complete && any, worst <= 1.0 && rates_ok, worst, 1.0, d.str());
  }
  rep.formation_dev = formation_deviation(log, scenario.formation, t_a, t_b);
  add(3, "formation geometry", complete && std::isfinite(rep.formation_dev), rep.formation_dev <= 1.5,
      rep.formation_dev, 1.5, "max pairwise displacement error in the mean window");

  // 4 consensus
  if (!log.checkpoints.empty() && log.agents >= 2) rep.consensus = consensus_metrics(log.checkpoints);
  {
    const int n = log.n;
    rep.consensus_ripple = Eigen::VectorXd::Zero(n);
    bool applicable = complete && !rep.consensus.t.empty();
    bool pass = applicable;
    double worst_ratio = 0.0;
    std::ostringstream d;
    if (applicable) {
      const Eigen::VectorXd& pw = rep.consensus.pairwise.back();
      const Eigen::MatrixXd& norms = rep.consensus.norms.back();
      const auto t = times(log);
      for (int k = 0; k < n; ++k) {
        const double scale = norms.row(k).maxCoeff();
        const double ratio = scale > 0.0 ? pw(k) / scale : (pw(k) > 0.0 ? 1.0 : 0.0);
        worst_ratio = std::max(worst_ratio, ratio);
        const auto series = log.series("cons_" + std::to_string(k + 1));
        std::vector<double> half;
        for (std::size_t r = 0; r < t.size(); ++r) {
          if (t[r] >= 0.5 * t_end - 1e-9) half.push_back(series[r]);
        }
        rep.consensus_ripple(k) = ripple_above_running_min(half, std::max(1e-12 * scale, 1e-300));
        if (ratio > 0.10 || rep.consensus_ripple(k) > 0.05) pass = false;
        d << "k" << k + 1 << ": final " << fmt(pw(k)) << " / max |W| " << fmt(scale) << " = " << fmt(ratio)
          << ", ripple " << fmt(rep.consensus_ripple(k)) << " (rise " << fmt(rise_above_running_min(half)) << "); ";
      }
    }
    add(4, "weight consensus", applicable, pass, worst_ratio, 0.10, d.str());
  }

  // 5 learning accuracy
  const double radius = settings.pe_radius;
  if (complete && log.mean_weights) {
    rep.approx_mean = approximation_error(log, scenario, log.mean_weights->weights, t_a, t_b);
    if (!log.checkpoints.empty()) {
      rep.approx_final = approximation_error(log, scenario, log.checkpoints.back().weights, t_a, t_b);
    }
    rep.beta_dot_discrepancy = beta_dot_fd_discrepancy(log, t_a, t_b);
    if (std::isfinite(rep.beta_dot_discrepancy) && rep.beta_dot_discrepancy > kBetaDotAgreement) {
      rep.notes.push_back("analytic beta-dot and its finite-difference check differ by " +
                          fmt(rep.beta_dot_discrepancy) + " (gate " + fmt(kBetaDotAgreement) + ")");
    }
  }
  if (complete && !log.checkpoints.empty()) {
    rep.far = far_neuron_check(log.checkpoints.back().weights, trajectory_partition(log, *scenario.grid, radius));
  }
  {
    double worst = 0.0;
    bool any = false;
    std::ostringstream d;
    for (const auto& e : rep.approx_mean) {
      if (!e.relative) continue;
      any = true;
      worst = std::max(worst, e.value());
    }
    const double far_ratio = rep.far.worst_ratio();
    const bool far_ok = !rep.far.applicable || far_ratio <= 0.05;
    d << "worst relative RMS " << fmt(worst) << "; far/near weight ratio " << fmt(far_ratio)
      << (rep.far.applicable ? "" : " (no far neurons)") << "; beta-dot FD discrepancy "
      << fmt(rep.beta_dot_discrepancy);
    add(5, "learning accuracy", complete && any, worst <= 0.20 && far_ok, worst, 0.20, d.str());
  }

  // 6 representable plant (single-log part)
  if (const auto* rp = dynamic_cast<const RepresentablePlant*>(scenario.plant.get());
      rp && complete && !log.checkpoints.empty()) {
    const auto zeta = trajectory_partition(log, *scenario.grid, radius).near;
    rep.ideal_error = ideal_weight_error(log.checkpoints.back().weights, rp->ideal_weights(), zeta);
    add(6, "representable oracle", true, *rep.ideal_error <= 0.05, *rep.ideal_error, 0.05,
        "weight error on zeta at t_end over all agents; residual identity is checked separately");
  } else {
    add(6, "representable oracle", false, false, kNaN, 0.05, "needs the representable plant");
  }

  // 7 excitation
  const double pe_start = settings.pe_start;
  rep.pe = pe_sweep(log, *scenario.grid, radius, pe_start, settings.pe_window);
  add(7, "persistent excitation", complete && rep.pe.windows > 0, rep.pe.all_positive, rep.pe.min_eta, 0.0,
      std::to_string(rep.pe.windows) + " windows of " + fmt(settings.pe_window) + " s from t=" + fmt(pe_start) +
          ", min |zeta| " + std::to_string(rep.pe.min_zeta));

  add(8, "numerics", false, false, kNaN, 0.0, "needs repeated runs (acceptance suite)");

  // 9 boundedness
  rep.bounds = boundedness_monitor(log, 0.0);
  {
    const bool pass = rep.bounds.finite && rep.bounds.z1_sup <= settings.z1_ceiling &&
                      rep.bounds.z2_sup <= settings.z2_ceiling && rep.bounds.w_inf_sup <= settings.w_inf_ceiling;
    add(9, "boundedness", log.rows() > 0, pass && complete, rep.bounds.z1_sup, settings.z1_ceiling,
        "sup |z1| " + fmt(rep.bounds.z1_sup) + ", sup |z2| " + fmt(rep.bounds.z2_sup) + ", sup |W|inf " +
            fmt(rep.bounds.w_inf_sup) + (rep.bounds.finite ? "" : ", non-finite values present"));
  }
  return rep;
}

} // namespace fdl
