#include "fdl/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace fdl {

// ---------------------------------------------------------------------------
// layout

std::string StateLayout::component_name(Eigen::Index idx) const {
  std::ostringstream os;
  if (idx < 0 || idx >= size()) {
    os << "index " << idx << " (out of range)";
    return os.str();
  }
  if (idx < 2 * n) {
    os << "leader " << (idx < n ? "p0[" : "v0[") << (idx % n) + 1 << "]";
    return os.str();
  }
  const Eigen::Index rel = idx - 2 * n;
  const int i = static_cast<int>(rel / agent_stride());
  const Eigen::Index off = rel % agent_stride();
  os << "agent " << i + 1 << " ";
  if (off < n) {
    os << "p[" << off + 1 << "]";
  } else if (off < 2 * n) {
    os << "nu[" << off - n + 1 << "]";
  } else if (off < 4 * n) {
    os << "xhat[" << off - 2 * n + 1 << "]";
  } else {
    const Eigen::Index w = off - 4 * n;
    os << "W[k=" << w / neurons + 1 << ", neuron " << w % neurons << "]";
  }
  return os.str();
}

Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> StateLayout::weight_matrix(const Eigen::VectorXd& s) const {
  return {s.data() + weights(0), weight_rows(), agents, Eigen::OuterStride<>(agent_stride())};
}

Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>> StateLayout::weight_matrix(Eigen::VectorXd& s) const {
  return {s.data() + weights(0), weight_rows(), agents, Eigen::OuterStride<>(agent_stride())};
}

Eigen::MatrixXd StateLayout::agent_weights(const Eigen::VectorXd& s, int i) const {
  // channel-major storage is an N_n x n column-major block
  Eigen::Map<const Eigen::MatrixXd> block(s.data() + weights(i), neurons, n);
  return block.transpose();
}

// ---------------------------------------------------------------------------
// scenario

StateLayout Scenario::layout() const {
  return StateLayout{leader.n, topology.n_followers, grid ? grid->size() : 0};
}

void Scenario::validate() const {
  leader.validate();
  const int nn = leader.n;
  const int na = topology.n_followers;
  if (!plant) throw std::invalid_argument("scenario: plant missing");
  if (plant->dim() != nn) throw std::invalid_argument("scenario: plant dimension must equal leader n");
  validate_topology(topology);
  const auto conn = check_assumption3(topology);
  if (!conn.ok) throw std::invalid_argument("scenario: connectivity: " + conn.diagnostic);
  observer.validate(nn, leader.n_r());
  gains.validate(na, nn);
  if (static_cast<int>(formation.offsets.size()) != na) {
    throw std::invalid_argument("scenario: one formation offset per agent required");
  }
  for (const auto& o : formation.offsets) {
    if (o.size() != nn) throw std::invalid_argument("scenario: formation offset must have n entries");
  }
  if (!grid) throw std::invalid_argument("scenario: RBF grid missing");
  if (grid->dim() != 2 * nn) throw std::invalid_argument("scenario: RBF grid dimension must be 2n");
  if (!(localization_radius > 0.0)) throw std::invalid_argument("scenario: localization radius must be positive");
  if (initial.leader.size() != 2 * nn) throw std::invalid_argument("scenario: leader initial state must have 2n entries");
  auto check_list = [na](const std::vector<Eigen::VectorXd>& v, int len, const char* what) {
    if (static_cast<int>(v.size()) != na) {
      throw std::invalid_argument(std::string("scenario: one ") + what + " per agent required");
    }
    for (const auto& e : v) {
      if (e.size() != len) throw std::invalid_argument(std::string("scenario: wrong length for ") + what);
    }
  };
  check_list(initial.positions, nn, "initial position");
  check_list(initial.velocities, nn, "initial velocity");
  check_list(initial.estimates, 2 * nn, "initial observer state");
}

Eigen::VectorXd Scenario::initial_state() const {
  const StateLayout lay = layout();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(lay.size());
  const int nn = leader.n;
  s.head(2 * nn) = initial.leader;
  for (int i = 0; i < lay.agents; ++i) {
    s.segment(lay.position(i), nn) = initial.positions[i];
    s.segment(lay.velocity(i), nn) = initial.velocities[i];
    s.segment(lay.estimate(i), 2 * nn) = initial.estimates[i];
  }
  return s;
}

// ---------------------------------------------------------------------------
// closed loop

SystemModel::SystemModel(const Scenario& scenario)
    : sc_(scenario), layout_(scenario.layout()), lap_(build_laplacians(scenario.topology)) {
  subgraph_laplacian_ = lap_.subgraph();
  const int na = layout_.agents;
  estimates_.resize(na);
  obs_rates_.resize(na);
  z2_.resize(na);
  regressors_.resize(na);
  mix_ = sc_.gains.gamma2 * subgraph_laplacian_;
  mix_.diagonal().array() += sc_.gains.gamma1 * sc_.gains.sigma;
  active_.assign(layout_.neurons, 0);
  for (int i = 0; i < na; ++i) {
    for (Eigen::Index k = 0; k < 4 * layout_.n; ++k) support_.push_back(layout_.agent(i) + k);
  }
  for (Eigen::Index k = 0; k < 2 * layout_.n; ++k) support_.push_back(k);
}

void SystemModel::activate(int neuron) {
  if (active_[neuron]) return;
  active_[neuron] = 1;
  active_list_.push_back(neuron);
  for (int i = 0; i < layout_.agents; ++i) {
    for (int k = 0; k < layout_.n; ++k) {
      support_.push_back(layout_.weights(i) + static_cast<Eigen::Index>(k) * layout_.neurons + neuron);
    }
  }
}

void SystemModel::activate_nonzero(const Eigen::VectorXd& state) {
  for (int i = 0; i < layout_.agents; ++i) {
    const Eigen::Index w0 = layout_.weights(i);
    for (Eigen::Index r = 0; r < layout_.weight_rows(); ++r) {
      if (state(w0 + r) != 0.0) activate(static_cast<int>(r % layout_.neurons));
    }
  }
}

void SystemModel::derivative(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out,
                             std::vector<AgentSignals>* signals) {
  evaluate(t, state, out, signals, true);
}

void SystemModel::derivative_active(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out,
                                    std::vector<AgentSignals>* signals) {
  evaluate(t, state, out, signals, false);
}

void SystemModel::evaluate(double t, const Eigen::VectorXd& state, Eigen::VectorXd& out,
                           std::vector<AgentSignals>* signals, bool full) {
  const StateLayout& lay = layout_;
  const int n = lay.n;
  const int na = lay.agents;
  const Topology& topo = sc_.topology;
  const PlantModel& plant = *sc_.plant;
  if (state.size() != lay.size()) throw std::invalid_argument("system_derivative: state size mismatch");
  if (out.size() != lay.size()) {
    out.resize(lay.size());
    full = true;
  }
  if (full) {
    out.setZero();
    activate_nonzero(state);
  }

  const Eigen::VectorXd x0 = state.head(2 * n);
  const Eigen::VectorXd leader_rate = leader_derivative(sc_.leader, x0, t);
  out.head(2 * n) = leader_rate;

  for (int i = 0; i < na; ++i) estimates_[i] = state.segment(lay.estimate(i), 2 * n);
  const auto phi = consensus_error(estimates_, x0, topo);
  for (int i = 0; i < na; ++i) {
    obs_rates_[i] = observer_rate(sc_.observer, sc_.leader, estimates_[i], phi[i]);
    out.segment(lay.estimate(i), 2 * n) = obs_rates_[i];
  }

  std::vector<AgentSignals>& sig = signals ? *signals : local_signals_;
  sig.resize(na);

  for (int i = 0; i < na; ++i) {
    AgentSignals& a = sig[i];
    // phi_i' from the observer rates, leader slot pinned to the true leader
    Eigen::VectorXd phi_dot = topo.leader_links(i) * (obs_rates_[i] - leader_rate);
    for (int j = 0; j < na; ++j) {
      const double w = topo.adjacency(i, j);
      if (w != 0.0) phi_dot += w * (obs_rates_[i] - obs_rates_[j]);
    }

    const Eigen::VectorXd p = state.segment(lay.position(i), n);
    const Eigen::VectorXd nu = state.segment(lay.velocity(i), n);
    const Eigen::MatrixXd J = plant.rotation(p);
    const Eigen::MatrixXd& H1 = sc_.gains.H1[i];
    const Eigen::MatrixXd& H2 = sc_.gains.H2[i];

    a.p_hat_dot = obs_rates_[i].head(n);
    a.p_hat_ddot = obs_rates_[i].tail(n) + sc_.observer.alpha1 * (sc_.observer.K1 * phi_dot).head(n);

    a.z1 = tracking_error(p, estimates_[i].head(n), sc_.formation.offsets[i]);
    a.beta = virtual_control(J, H1, a.z1, a.p_hat_dot);
    a.z2 = nu - a.beta;

    Eigen::VectorXd x(2 * n);
    x << p, nu;
    localized_regressor_into(*sc_.grid, x, sc_.localization_radius, a.regressor);
    a.nn_out = Eigen::VectorXd::Zero(n);
    const Eigen::Index w0 = lay.weights(i);
    for (std::size_t e = 0; e < a.regressor.size(); ++e) {
      const int j = a.regressor.index[e];
      activate(j);
      for (int k = 0; k < n; ++k) {
        a.nn_out(k) += state(w0 + static_cast<Eigen::Index>(k) * lay.neurons + j) * a.regressor.value[e];
      }
    }
    a.tau = control_law(a.nn_out, H2, a.z2, J, a.z1);

    const Eigen::VectorXd p_dot = J * nu;
    const Eigen::VectorXd z1_dot = p_dot - a.p_hat_dot;
    const Eigen::MatrixXd J_dot =
        plant.constant_rotation() ? Eigen::MatrixXd::Zero(n, n) : plant.rotation_rate(p, p_dot);
    a.beta_dot = virtual_control_rate(J, J_dot, H1, a.z1, z1_dot, a.p_hat_dot, a.p_hat_ddot);

    out.segment(lay.position(i), n) = p_dot;
    out.segment(lay.velocity(i), n) = plant.solve_inertia(a.tau - plant.force(p, nu, &a.beta_dot));
  }

  // Weight law, row by row over active neurons:
  //   dW_i = -gamma1 (S z2 + sigma W_i) - gamma2 sum_j a_ij (W_i - W_j)
  const double g1 = sc_.gains.gamma1;
  for (int j : active_list_) {
    for (int k = 0; k < n; ++k) {
      const Eigen::Index row = static_cast<Eigen::Index>(k) * lay.neurons + j;
      for (int i = 0; i < na; ++i) {
        double acc = 0.0;
        for (int l = 0; l < na; ++l) acc -= mix_(l, i) * state(lay.weights(l) + row);
        out(lay.weights(i) + row) = acc;
      }
    }
  }
  for (int i = 0; i < na; ++i) {
    const AgentSignals& a = sig[i];
    const Eigen::Index w0 = lay.weights(i);
    for (int k = 0; k < n; ++k) {
      const double g = g1 * a.z2(k);
      for (std::size_t e = 0; e < a.regressor.size(); ++e) {
        out(w0 + static_cast<Eigen::Index>(k) * lay.neurons + a.regressor.index[e]) -= g * a.regressor.value[e];
      }
    }
  }
}

Eigen::VectorXd system_derivative(const Scenario& scenario, double t, const Eigen::VectorXd& state) {
  SystemModel model(scenario);
  Eigen::VectorXd out;
  model.derivative(t, state, out);
  return out;
}

// ---------------------------------------------------------------------------
// integrator

void Rk4::check(const Eigen::VectorXd& v, double t, const Namer& namer) const {
  if (v.allFinite()) return;
  Eigen::Index bad = 0;
  while (bad < v.size() && std::isfinite(v(bad))) ++bad;
  throw DivergenceError(t, namer ? namer(bad) : "component " + std::to_string(bad));
}

void Rk4::check(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& support, double t,
                const Namer& namer) const {
  for (Eigen::Index idx : support) {
    if (!std::isfinite(v(idx))) throw DivergenceError(t, namer ? namer(idx) : "component " + std::to_string(idx));
  }
}

void Rk4::step(const Derivative& f, double t, double dt, Eigen::VectorXd& y, const Namer& namer) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4: dt must be positive");
  synced_ = false;
  const double h2 = 0.5 * dt;
  f(t, y, k1_);
  check(k1_, t, namer);
  tmp_ = y + h2 * k1_;
  f(t + h2, tmp_, k2_);
  check(k2_, t + h2, namer);
  tmp_ = y + h2 * k2_;
  f(t + h2, tmp_, k3_);
  check(k3_, t + h2, namer);
  tmp_ = y + dt * k3_;
  f(t + dt, tmp_, k4_);
  check(k4_, t + dt, namer);
  y += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  check(y, t + dt, namer);
}

void Rk4::step_on_support(const Derivative& f, const std::vector<Eigen::Index>& support, double t, double dt,
                          Eigen::VectorXd& y, const Namer& namer) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4: dt must be positive");
  if (!synced_) {
    // entries outside the support keep k = 0 and tmp = y from here on
    k1_.setZero();
    k2_.setZero();
    k3_.setZero();
    k4_.setZero();
    tmp_ = y;
    synced_ = true;
  }
  const double h2 = 0.5 * dt;
  f(t, y, k1_);
  check(k1_, support, t, namer);
  for (Eigen::Index i : support) tmp_(i) = y(i) + h2 * k1_(i);
  f(t + h2, tmp_, k2_);
  check(k2_, support, t + h2, namer);
  for (Eigen::Index i : support) tmp_(i) = y(i) + h2 * k2_(i);
  f(t + h2, tmp_, k3_);
  check(k3_, support, t + h2, namer);
  for (Eigen::Index i : support) tmp_(i) = y(i) + dt * k3_(i);
  f(t + dt, tmp_, k4_);
  check(k4_, support, t + dt, namer);
  const double h6 = dt / 6.0;
  for (Eigen::Index i : support) {
    y(i) += h6 * (k1_(i) + 2.0 * k2_(i) + 2.0 * k3_(i) + k4_(i));
    tmp_(i) = y(i);
  }
  check(y, support, t + dt, namer);
}

Eigen::VectorXd rk4_step(const Rk4::Derivative& f, double t, double dt, const Eigen::VectorXd& y) {
  Rk4 rk(y.size());
  Eigen::VectorXd out = y;
  rk.step(f, t, dt, out);
  return out;
}

// ---------------------------------------------------------------------------
// run

void RunConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("run: dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("run: t_end must be >= dt");
  if (log_stride < 1) throw std::invalid_argument("run: log_stride must be >= 1");
  if (!(window_end() > window_start())) throw std::invalid_argument("run: mean window must satisfy t_b > t_a");
  if (window_start() < 0.0 || window_end() > t_end + 0.5 * dt) {
    throw std::invalid_argument("run: mean window must lie inside [0, t_end]");
  }
  for (double c : checkpoints) {
    if (c < 0.0 || c > t_end + 0.5 * dt) throw std::invalid_argument("run: checkpoint outside [0, t_end]");
  }
}

std::vector<double> RunConfig::checkpoint_times() const {
  if (!checkpoints.empty()) return checkpoints;
  return {0.0, 0.5 * t_end, 0.8 * t_end, t_end};
}

long long RunConfig::steps() const { return std::llround(t_end / dt); }

std::size_t RunLog::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("run log: no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> RunLog::series(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

Eigen::VectorXd RunLog::vector_at(std::size_t row, std::size_t first_col, int len) const {
  Eigen::VectorXd v(len);
  for (int k = 0; k < len; ++k) v(k) = at(row, first_col + k);
  return v;
}

std::vector<std::string> log_columns(int n, int agents, int n_r) {
  std::vector<std::string> c{"t"};
  auto add = [&c](const std::string& stem, int count) {
    for (int k = 1; k <= count; ++k) c.push_back(stem + std::to_string(k));
  };
  add("p0_", n);
  add("v0_", n);
  add("r_", n_r);
  for (int i = 1; i <= agents; ++i) {
    const std::string a = "a" + std::to_string(i) + "_";
    add(a + "p", n);
    add(a + "nu", n);
    add(a + "phat", n);
    add(a + "vhat", n);
    add(a + "z1_", n);
    add(a + "z2_", n);
    add(a + "tau", n);
    add(a + "beta", n);
    add(a + "betadot", n);
    c.push_back(a + "est_err");
    c.push_back(a + "track_err");
    add(a + "wnorm", n);
    c.push_back(a + "winf");
  }
  add("cons_", n);
  return c;
}

namespace {

class LogWriter {
 public:
  LogWriter(const Scenario& sc, RunLog& log) : sc_(sc), log_(log), lay_(sc.layout()) {}

  void row(double t, const Eigen::VectorXd& s, const std::vector<AgentSignals>& sig) {
    const int n = lay_.n;
    auto& d = log_.data;
    d.push_back(t);
    for (int k = 0; k < 2 * n; ++k) d.push_back(s(k));
    const Eigen::VectorXd r = sc_.leader.input(t);
    for (Eigen::Index k = 0; k < r.size(); ++k) d.push_back(r(k));
    const Eigen::VectorXd x0 = s.head(2 * n);
    std::vector<Eigen::MatrixXd> w(lay_.agents);
    for (int i = 0; i < lay_.agents; ++i) {
      const AgentSignals& a = sig[i];
      auto push = [&d](const Eigen::VectorXd& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) d.push_back(v(k));
      };
      const Eigen::VectorXd p = s.segment(lay_.position(i), n);
      const Eigen::VectorXd xhat = s.segment(lay_.estimate(i), 2 * n);
      push(p);
      push(s.segment(lay_.velocity(i), n));
      push(xhat);
      push(a.z1);
      push(a.z2);
      push(a.tau);
      push(a.beta);
      push(a.beta_dot);
      d.push_back((xhat - x0).norm());
      d.push_back((p - x0.head(n) - sc_.formation.offsets[i]).norm());
      w[i] = lay_.agent_weights(s, i);
      for (int k = 0; k < n; ++k) d.push_back(w[i].row(k).norm());
      d.push_back(w[i].cwiseAbs().maxCoeff());
    }
    for (int k = 0; k < n; ++k) {
      double worst = 0.0;
      for (int i = 0; i < lay_.agents; ++i) {
        for (int j = i + 1; j < lay_.agents; ++j) worst = std::max(worst, (w[i].row(k) - w[j].row(k)).norm());
      }
      d.push_back(worst);
    }
  }

 private:
  const Scenario& sc_;
  RunLog& log_;
  StateLayout lay_;
};

WeightCheckpoint snapshot(const StateLayout& lay, double t, const Eigen::VectorXd& s) {
  WeightCheckpoint c;
  c.t = t;
  for (int i = 0; i < lay.agents; ++i) c.weights.push_back(lay.agent_weights(s, i));
  return c;
}

} // namespace

RunLog run_scenario(const Scenario& scenario, const RunConfig& config) {
  scenario.validate();
  config.validate();

  SystemModel model(scenario);
  const StateLayout& lay = model.layout();
  RunLog log;
  log.n = lay.n;
  log.agents = lay.agents;
  log.neurons = lay.neurons;
  log.columns = log_columns(lay.n, lay.agents, scenario.leader.n_r());
  log.mean_t_a = config.window_start();
  log.mean_t_b = config.window_end();

  const long long steps = config.steps();
  std::vector<long long> checkpoint_steps;
  for (double c : config.checkpoint_times()) {
    checkpoint_steps.push_back(std::clamp(std::llround(c / config.dt), 0LL, steps));
  }

  Eigen::VectorXd state = scenario.initial_state();
  Eigen::VectorXd scratch(lay.size());
  std::vector<AgentSignals> signals;
  LogWriter writer(scenario, log);
  WeightMeanAccumulator mean(config.window_start() - 1e-9 * config.t_end, config.window_end() + 1e-9 * config.t_end);
  bool input_warned = false;

  auto record = [&](long long k) {
    const double t = static_cast<double>(k) * config.dt;
    model.derivative(t, state, scratch, &signals);
    writer.row(t, state, signals);
    if (mean.add(t, lay.weight_matrix(state))) log.mean_samples = mean.count();
    if (!input_warned && scenario.leader.input(t).norm() > scenario.leader.r_star * (1.0 + 1e-12)) {
      log.warnings.push_back("leader input exceeds r_star at t=" + std::to_string(t));
      input_warned = true;
    }
  };
  auto maybe_checkpoint = [&](long long k) {
    for (long long c : checkpoint_steps) {
      if (c == k) {
        log.checkpoints.push_back(snapshot(lay, static_cast<double>(k) * config.dt, state));
        break;
      }
    }
  };

  const auto clock_start = std::chrono::steady_clock::now();
  record(0);
  maybe_checkpoint(0);

  model.activate_nonzero(state);
  Rk4 rk(lay.size());
  const Rk4::Derivative f = [&model](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    model.derivative_active(t, y, dy);
  };
  const Rk4::Namer namer = [&lay](Eigen::Index idx) { return lay.component_name(idx); };

  for (long long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k - 1) * config.dt;
    try {
      rk.step_on_support(f, model.support(), t, config.dt, state, namer);
    } catch (const DivergenceError& e) {
      log.status = RunStatus::Diverged;
      log.message = e.what();
      break;
    }
    if (k % config.log_stride == 0 || k == steps) record(k);
    maybe_checkpoint(k);
  }

  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  if (mean.count() > 0) {
    const Eigen::MatrixXd m = mean.mean();
    WeightCheckpoint c;
    c.t = config.window_end();
    for (int i = 0; i < lay.agents; ++i) {
      Eigen::Map<const Eigen::MatrixXd> block(m.col(i).data(), lay.neurons, lay.n);
      c.weights.push_back(block.transpose());
    }
    log.mean_weights = std::move(c);
  }
  return log;
}

} // namespace fdl
