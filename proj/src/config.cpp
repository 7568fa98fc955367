#include "fdl/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

namespace fdl {

ConfigInvalid::ConfigInvalid(std::vector<ConfigError> errors)
    : std::runtime_error([&errors] {
        std::ostringstream os;
        os << errors.size() << " config error(s)";
        for (const auto& e : errors) os << "\n  " << e.path << ": " << e.message;
        return os.str();
      }()),
      errors_(std::move(errors)) {}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must look like key.path=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw std::invalid_argument("override has an empty path segment: " + key);
    if (!node->is_object()) {
      if (!node->is_null()) throw std::invalid_argument("override path crosses a non-object at '" + part + "'");
      *node = Json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

namespace {

/// Collects errors while reading a document; every getter returns a usable
/// value even on failure so that parsing can continue.
class Reader {
 public:
  explicit Reader(std::vector<ConfigError>& errors) : errors_(errors) {}

  void fail(const std::string& path, const std::string& msg) { errors_.push_back({path, msg}); }
  [[nodiscard]] std::size_t error_count() const { return errors_.size(); }

  const Json* find(const Json& obj, const std::string& key) const {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  const Json& section(const Json& root, const std::string& key) {
    static const Json empty = Json::object();
    const Json* s = find(root, key);
    if (!s) {
      fail(key, "required section missing");
      return empty;
    }
    if (!s->is_object()) {
      fail(key, "must be an object");
      return empty;
    }
    return *s;
  }

  std::optional<double> number(const Json& obj, const std::string& key, const std::string& path, bool required) {
    const Json* v = find(obj, key);
    if (!v) {
      if (required) fail(path, "required number missing");
      return std::nullopt;
    }
    if (!v->is_number()) {
      fail(path, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  double number_or(const Json& obj, const std::string& key, const std::string& path, double fallback) {
    return number(obj, key, path, false).value_or(fallback);
  }

  double positive(const Json& obj, const std::string& key, const std::string& path, std::optional<double> fallback) {
    const auto v = number(obj, key, path, !fallback.has_value());
    if (!v) return fallback.value_or(1.0);
    if (!(*v > 0.0)) fail(path, "must be positive");
    return *v;
  }

  std::optional<int> integer(const Json& obj, const std::string& key, const std::string& path, bool required) {
    const Json* v = find(obj, key);
    if (!v) {
      if (required) fail(path, "required integer missing");
      return std::nullopt;
    }
    if (!v->is_number_integer()) {
      fail(path, "must be an integer");
      return std::nullopt;
    }
    return v->get<int>();
  }

  std::optional<Eigen::VectorXd> vector(const Json& v, const std::string& path, int expected = -1) {
    if (!v.is_array()) {
      fail(path, "must be an array of numbers");
      return std::nullopt;
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) {
        fail(path + "[" + std::to_string(k) + "]", "must be a number");
        return std::nullopt;
      }
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    if (expected >= 0 && out.size() != expected) {
      fail(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(out.size()));
      return std::nullopt;
    }
    return out;
  }

  std::optional<Eigen::VectorXd> vector(const Json& obj, const std::string& key, const std::string& path,
                                        int expected, bool required) {
    const Json* v = find(obj, key);
    if (!v) {
      if (required) fail(path, "required array missing");
      return std::nullopt;
    }
    return vector(*v, path, expected);
  }

  /// Row-major nested array, or {"diag": [...], "scale": s} for diagonal matrices.
  std::optional<Eigen::MatrixXd> matrix(const Json& v, const std::string& path, int rows, int cols) {
    if (v.is_object()) {
      const Json* d = find(v, "diag");
      if (!d) {
        fail(path, "matrix object needs a 'diag' array");
        return std::nullopt;
      }
      const auto diag = vector(*d, path + ".diag", rows);
      const double scale = number_or(v, "scale", path + ".scale", 1.0);
      if (!diag) return std::nullopt;
      if (rows != cols) {
        fail(path, "diagonal form needs a square matrix");
        return std::nullopt;
      }
      return Eigen::MatrixXd((scale * *diag).asDiagonal());
    }
    if (!v.is_array()) {
      fail(path, "must be a nested array or a {diag, scale} object");
      return std::nullopt;
    }
    if (rows >= 0 && static_cast<int>(v.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
      return std::nullopt;
    }
    Eigen::MatrixXd m;
    for (std::size_t r = 0; r < v.size(); ++r) {
      const auto row = vector(v[r], path + "[" + std::to_string(r) + "]", cols);
      if (!row) return std::nullopt;
      if (r == 0) m.resize(static_cast<Eigen::Index>(v.size()), row->size());
      if (row->size() != m.cols()) {
        fail(path, "ragged rows");
        return std::nullopt;
      }
      m.row(static_cast<Eigen::Index>(r)) = row->transpose();
    }
    return m;
  }

  std::optional<Eigen::MatrixXd> matrix(const Json& obj, const std::string& key, const std::string& path, int rows,
                                        int cols, bool required) {
    const Json* v = find(obj, key);
    if (!v) {
      if (required) fail(path, "required matrix missing");
      return std::nullopt;
    }
    return matrix(*v, path, rows, cols);
  }

  std::vector<Eigen::VectorXd> vector_list(const Json& obj, const std::string& key, const std::string& path,
                                           int count, int len, bool required, const Eigen::VectorXd& fill) {
    const Json* v = find(obj, key);
    if (!v) {
      if (required) fail(path, "required list missing");
      return std::vector<Eigen::VectorXd>(std::max(count, 0), fill);
    }
    if (!v->is_array()) {
      fail(path, "must be an array of arrays");
      return std::vector<Eigen::VectorXd>(std::max(count, 0), fill);
    }
    if (count >= 0 && static_cast<int>(v->size()) != count) {
      fail(path, "expected " + std::to_string(count) + " entries (one per agent), got " + std::to_string(v->size()));
    }
    std::vector<Eigen::VectorXd> out;
    for (std::size_t k = 0; k < v->size(); ++k) {
      out.push_back(vector((*v)[k], path + "[" + std::to_string(k) + "]", len).value_or(fill));
    }
    out.resize(std::max(count, 0), fill);
    return out;
  }

 private:
  std::vector<ConfigError>& errors_;
};

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-12)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 0.0;
}

std::string describe_min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  std::ostringstream os;
  os << "must be symmetric positive definite (smallest eigenvalue " << eig.eigenvalues().minCoeff() << ")";
  return os.str();
}

std::optional<InputSignal> read_input(Reader& rd, const Json& leader, int n_r) {
  const Json* in = rd.find(leader, "input");
  if (!in) {
    rd.fail("leader.input", "required object missing (kind: zero | constant | sinusoid)");
    return std::nullopt;
  }
  const Json* kind = rd.find(*in, "kind");
  if (!kind || !kind->is_string()) {
    rd.fail("leader.input.kind", "must be one of zero, constant, sinusoid");
    return std::nullopt;
  }
  const std::string k = kind->get<std::string>();
  if (k == "zero") return InputSignal::zero(n_r);
  if (k == "constant") {
    const auto v = rd.vector(*in, "value", "leader.input.value", n_r, true);
    if (!v) return std::nullopt;
    return InputSignal::constant(*v);
  }
  if (k == "sinusoid") {
    const auto amp = rd.vector(*in, "amplitude", "leader.input.amplitude", n_r, true);
    const double omega = rd.number(*in, "omega", "leader.input.omega", true).value_or(1.0);
    const double phase = rd.number_or(*in, "phase", "leader.input.phase", 0.0);
    if (!amp) return std::nullopt;
    return InputSignal::sinusoid(*amp, omega, phase);
  }
  rd.fail("leader.input.kind", "unknown input kind '" + k + "'");
  return std::nullopt;
}

std::shared_ptr<const PlantModel> read_plant(Reader& rd, const Json& plant, int n,
                                             const std::shared_ptr<const RbfGrid>& grid) {
  const Json* kind = rd.find(plant, "kind");
  if (!kind || !kind->is_string()) {
    rd.fail("plant.kind", "must be one of example_vessel, constant_matrix, representable");
    return nullptr;
  }
  const std::string k = kind->get<std::string>();
  auto inertia = [&]() -> std::optional<Eigen::MatrixXd> {
    auto m = rd.matrix(plant, "M", "plant.M", n, n, true);
    if (m && !is_spd(*m)) {
      rd.fail("plant.M", describe_min_eigenvalue(*m));
      return std::nullopt;
    }
    return m;
  };
  if (k == "example_vessel") {
    if (n != 3) {
      rd.fail("plant.kind", "example_vessel needs n = 3");
      return nullptr;
    }
    return std::make_shared<ExampleVesselPlant>();
  }
  if (k == "constant_matrix") {
    const auto m = inertia();
    const auto d0 = rd.matrix(plant, "D0", "plant.D0", n, n, false);
    const auto d_abs = rd.vector(plant, "d_abs", "plant.d_abs", n, false);
    const auto g = rd.vector(plant, "g", "plant.g", n, false);
    if (!m) return nullptr;
    return std::make_shared<ConstantMatrixPlant>(*m, d0.value_or(Eigen::MatrixXd::Zero(n, n)),
                                                 d_abs.value_or(Eigen::VectorXd::Zero(n)),
                                                 g.value_or(Eigen::VectorXd::Zero(n)));
  }
  if (k == "representable") {
    const auto m = inertia();
    const Json* w = rd.find(plant, "weights");
    if (!w || !w->is_array() || w->empty()) {
      rd.fail("plant.weights", "representable plant needs a non-empty weights array");
      return nullptr;
    }
    std::vector<RepresentablePlant::Entry> entries;
    for (std::size_t e = 0; e < w->size(); ++e) {
      const std::string path = "plant.weights[" + std::to_string(e) + "]";
      const Json& item = (*w)[e];
      const auto ch = rd.integer(item, "channel", path + ".channel", true);
      const auto value = rd.number(item, "value", path + ".value", true);
      int neuron = -1;
      if (const Json* c = rd.find(item, "center")) {
        const auto cv = rd.vector(*c, path + ".center", 2 * n);
        if (cv && grid) {
          neuron = grid->find_center(*cv, 1e-6);
          if (neuron < 0) rd.fail(path + ".center", "not a grid center");
        }
      } else if (const auto idx = rd.integer(item, "neuron", path + ".neuron", false)) {
        neuron = *idx;
        if (grid && (neuron < 0 || neuron >= grid->size())) rd.fail(path + ".neuron", "neuron index out of range");
      } else {
        rd.fail(path, "needs 'center' or 'neuron'");
      }
      if (ch && (*ch < 1 || *ch > n)) rd.fail(path + ".channel", "channel must be in 1..n");
      if (ch && value && neuron >= 0) entries.push_back({*ch - 1, neuron, *value});
    }
    if (!m || !grid || entries.size() != w->size()) return nullptr;
    return std::make_shared<RepresentablePlant>(*m, grid, std::move(entries));
  }
  rd.fail("plant.kind", "unknown plant kind '" + k + "'");
  return nullptr;
}

std::shared_ptr<const RbfGrid> read_grid(Reader& rd, const Json& g, int n, double& radius) {
  const auto per_dim = rd.integer(g, "per_dim", "grid.per_dim", true);
  const double width = rd.positive(g, "width", "grid.width", std::nullopt);
  radius = std::numeric_limits<double>::infinity();
  if (const Json* r = rd.find(g, "localization_radius"); r && !r->is_null()) {
    radius = rd.positive(g, "localization_radius", "grid.localization_radius", std::nullopt);
  }
  const int q = 2 * n;
  std::vector<AxisBounds> bounds;
  const Json* b = rd.find(g, "bounds");
  if (!b || !b->is_array() || b->empty()) {
    rd.fail("grid.bounds", "required: [lo, hi] for all axes or one [lo, hi] per axis");
    return nullptr;
  }
  if ((*b)[0].is_number()) {
    const auto lh = rd.vector(*b, "grid.bounds", 2);
    if (!lh) return nullptr;
    bounds.assign(q, AxisBounds{(*lh)(0), (*lh)(1)});
  } else {
    if (static_cast<int>(b->size()) != q) {
      rd.fail("grid.bounds", "expected one [lo, hi] pair per input dimension (2n)");
      return nullptr;
    }
    for (int a = 0; a < q; ++a) {
      const auto lh = rd.vector((*b)[a], "grid.bounds[" + std::to_string(a) + "]", 2);
      if (!lh) return nullptr;
      bounds.push_back({(*lh)(0), (*lh)(1)});
    }
  }
  for (int a = 0; a < q; ++a) {
    if (!(bounds[a].hi > bounds[a].lo)) {
      rd.fail("grid.bounds", "axis " + std::to_string(a) + " needs hi > lo");
      return nullptr;
    }
  }
  if (!per_dim) return nullptr;
  if (*per_dim < 2) {
    rd.fail("grid.per_dim", "must be at least 2");
    return nullptr;
  }
  const auto max_centers = rd.integer(g, "max_centers", "grid.max_centers", false);
  try {
    return std::make_shared<RbfGrid>(build_grid(q, *per_dim, bounds, width,
                                                max_centers ? static_cast<std::size_t>(*max_centers)
                                                            : kDefaultMaxCenters));
  } catch (const std::exception& e) {
    rd.fail("grid", e.what());
    return nullptr;
  }
}

std::optional<ScenarioConfig> parse(const Json& root, std::vector<ConfigError>& errors) {
  Reader rd(errors);
  if (!root.is_object()) {
    rd.fail("", "config must be a JSON object");
    return std::nullopt;
  }
  ScenarioConfig cfg;
  cfg.source = root;
  Scenario& sc = cfg.scenario;

  if (const Json* name = rd.find(root, "name"); name && name->is_string() && !name->get<std::string>().empty()) {
    sc.name = name->get<std::string>();
  } else {
    rd.fail("name", "required non-empty string");
  }

  // leader
  const Json& leader = rd.section(root, "leader");
  const auto a0 = rd.matrix(leader, "A0", "leader.A0", -1, -1, true);
  int n = 0;
  if (a0) {
    n = static_cast<int>(a0->rows());
    if (a0->cols() != 2 * n || n == 0) {
      rd.fail("leader.A0", "must be n x 2n");
      n = 0;
    }
  }
  const auto b0 = rd.matrix(leader, "B0", "leader.B0", n > 0 ? n : -1, -1, true);
  const int n_r = b0 ? static_cast<int>(b0->cols()) : 0;
  const auto input = read_input(rd, leader, n_r);
  const auto x0 = rd.vector(leader, "x0", "leader.x0", n > 0 ? 2 * n : -1, true);
  if (a0 && b0 && input && n > 0) {
    sc.leader.n = n;
    sc.leader.A0 = *a0;
    sc.leader.B0 = *b0;
    sc.leader.input = *input;
    sc.leader.r_star = rd.number_or(leader, "r_star", "leader.r_star", input->sup_norm());
    if (!(sc.leader.r_star > 0.0)) {
      rd.fail("leader.r_star", "must be positive (defaults to the input's sup norm)");
    } else if (sc.leader.r_star < input->sup_norm() * (1.0 - 1e-12)) {
      rd.fail("leader.r_star", "must bound the input's sup norm (" + std::to_string(input->sup_norm()) + ")");
    }
  }
  if (x0) sc.initial.leader = *x0;

  // topology
  const Json& topo = rd.section(root, "topology");
  const int followers = rd.integer(topo, "followers", "topology.followers", true).value_or(0);
  if (followers < 2 && rd.find(topo, "followers")) rd.fail("topology.followers", "need at least 2 followers");
  {
    std::vector<std::pair<int, int>> edges;
    std::vector<double> weights;
    std::vector<std::pair<int, double>> links;
    bool ok = followers >= 2;
    const Json* e = rd.find(topo, "edges");
    if (!e || !e->is_array()) {
      rd.fail("topology.edges", "required array of [i, j] pairs (1-based)");
      ok = false;
    } else {
      for (std::size_t k = 0; k < e->size(); ++k) {
        const auto pr = rd.vector((*e)[k], "topology.edges[" + std::to_string(k) + "]", 2);
        if (!pr) {
          ok = false;
          continue;
        }
        const int i = static_cast<int>((*pr)(0));
        const int j = static_cast<int>((*pr)(1));
        if (i < 1 || j < 1 || i > followers || j > followers || i == j) {
          rd.fail("topology.edges[" + std::to_string(k) + "]", "endpoints must be distinct followers in 1..N");
          ok = false;
        }
        edges.emplace_back(i, j);
      }
    }
    if (const Json* w = rd.find(topo, "edge_weights")) {
      const auto wv = rd.vector(*w, "topology.edge_weights", static_cast<int>(edges.size()));
      if (wv) {
        for (Eigen::Index k = 0; k < wv->size(); ++k) {
          if (!((*wv)(k) > 0.0)) rd.fail("topology.edge_weights", "weights must be positive");
          weights.push_back((*wv)(k));
        }
      } else {
        ok = false;
      }
    } else {
      weights.assign(edges.size(), 1.0);
    }
    const Json* l = rd.find(topo, "leader_links");
    if (!l || !l->is_array() || l->empty()) {
      rd.fail("topology.leader_links", "required array of [agent, weight] pairs (1-based)");
      ok = false;
    } else {
      for (std::size_t k = 0; k < l->size(); ++k) {
        const std::string path = "topology.leader_links[" + std::to_string(k) + "]";
        const auto pr = rd.vector((*l)[k], path, 2);
        if (!pr) {
          ok = false;
          continue;
        }
        const int i = static_cast<int>((*pr)(0));
        if (i < 1 || i > followers) {
          rd.fail(path, "agent must be in 1..N");
          ok = false;
        }
        if (!((*pr)(1) > 0.0)) {
          rd.fail(path, "leader link weight must be positive");
          ok = false;
        }
        links.emplace_back(i, (*pr)(1));
      }
    }
    if (ok) {
      try {
        sc.topology = Topology::from_edges(followers, edges, weights, links);
        validate_topology(sc.topology);
        const auto rep = check_assumption3(sc.topology);
        if (!rep.ok) rd.fail("topology", "connectivity: " + rep.diagnostic);
      } catch (const std::exception& ex) {
        rd.fail("topology", ex.what());
      }
    }
  }

  // grid (before the plant, which may reference centers)
  const Json& grid = rd.section(root, "grid");
  if (n > 0) sc.grid = read_grid(rd, grid, n, sc.localization_radius);

  const Json& plant = rd.section(root, "plant");
  if (n > 0) sc.plant = read_plant(rd, plant, n, sc.grid);

  // observer
  const Json& obs = rd.section(root, "observer");
  if (n > 0 && b0) {
    const double k1 = rd.positive(obs, "k1", "observer.k1", 3.0);
    sc.observer = ObserverParams::defaults(sc.leader, k1);
    if (const auto m = rd.matrix(obs, "K1", "observer.K1", 2 * n, 2 * n, false)) sc.observer.K1 = *m;
    if (const auto m = rd.matrix(obs, "K2", "observer.K2", n_r, 2 * n, false)) sc.observer.K2 = *m;
    sc.observer.alpha1 = rd.positive(obs, "alpha1", "observer.alpha1", 1.0);
    sc.observer.alpha2 = rd.positive(obs, "alpha2", "observer.alpha2", 200.0);
    sc.observer.smoothing_eps = rd.number_or(obs, "smoothing_eps", "observer.smoothing_eps", 1e-3);
    if (sc.observer.smoothing_eps < 0.0) rd.fail("observer.smoothing_eps", "must be >= 0");
  }

  // controller
  const Json& ctl = rd.section(root, "controller");
  {
    const auto h1 = rd.matrix(ctl, "H1", "controller.H1", n > 0 ? n : -1, n > 0 ? n : -1, true);
    const auto h2 = rd.matrix(ctl, "H2", "controller.H2", n > 0 ? n : -1, n > 0 ? n : -1, true);
    if (h1 && !is_spd(*h1)) rd.fail("controller.H1", describe_min_eigenvalue(*h1));
    if (h2 && !is_spd(*h2)) rd.fail("controller.H2", describe_min_eigenvalue(*h2));
    const double g1 = rd.positive(ctl, "gamma1", "controller.gamma1", std::nullopt);
    const double g2 = rd.positive(ctl, "gamma2", "controller.gamma2", std::nullopt);
    const double sg = rd.positive(ctl, "sigma", "controller.sigma", std::nullopt);
    if (h1 && h2 && followers > 0) sc.gains = ControllerGains::shared(followers, *h1, *h2, g1, g2, sg);
  }

  // formation and initial conditions
  const Json& form = rd.section(root, "formation");
  const Eigen::VectorXd zero_n = Eigen::VectorXd::Zero(std::max(n, 0));
  sc.formation.offsets = rd.vector_list(form, "offsets", "formation.offsets", followers, n, true, zero_n);
  const Json& init = rd.section(root, "initial");
  sc.initial.positions = rd.vector_list(init, "positions", "initial.positions", followers, n, true, zero_n);
  sc.initial.velocities = rd.vector_list(init, "velocities", "initial.velocities", followers, n, false, zero_n);
  sc.initial.estimates = rd.vector_list(init, "estimates", "initial.estimates", followers, 2 * n, false,
                                        Eigen::VectorXd::Zero(2 * std::max(n, 0)));

  // run
  const Json* run = rd.find(root, "run");
  const Json run_obj = run && run->is_object() ? *run : Json::object();
  if (run && !run->is_object()) rd.fail("run", "must be an object");
  cfg.run.dt = rd.positive(run_obj, "dt", "run.dt", 1e-3);
  cfg.run.t_end = rd.positive(run_obj, "t_end", "run.t_end", 200.0);
  cfg.run.log_stride = rd.integer(run_obj, "log_stride", "run.log_stride", false).value_or(10);
  if (const auto c = rd.vector(run_obj, "checkpoints", "run.checkpoints", -1, false)) {
    cfg.run.checkpoints.assign(c->data(), c->data() + c->size());
  }
  if (const auto w = rd.vector(run_obj, "mean_window", "run.mean_window", 2, false)) {
    cfg.run.mean_window_start = (*w)(0);
    cfg.run.mean_window_end = (*w)(1);
  }
  try {
    cfg.run.validate();
  } catch (const std::exception& e) {
    rd.fail("run", e.what());
  }

  // analysis
  const Json* an = rd.find(root, "analysis");
  const Json an_obj = an && an->is_object() ? *an : Json::object();
  AnalysisSettings& as = cfg.analysis;
  as.pe_window = rd.number_or(an_obj, "pe_window", "analysis.pe_window", 0.0);
  as.pe_radius = rd.number_or(an_obj, "pe_radius", "analysis.pe_radius", 0.0);
  as.pe_start = rd.number_or(an_obj, "pe_start", "analysis.pe_start", 0.0);
  as.z1_ceiling = rd.positive(an_obj, "z1_ceiling", "analysis.z1_ceiling", as.z1_ceiling);
  as.z2_ceiling = rd.positive(an_obj, "z2_ceiling", "analysis.z2_ceiling", as.z2_ceiling);
  as.w_inf_ceiling = rd.positive(an_obj, "w_inf_ceiling", "analysis.w_inf_ceiling", as.w_inf_ceiling);
  as.estimator_tolerance =
      rd.positive(an_obj, "estimator_tolerance", "analysis.estimator_tolerance", as.estimator_tolerance);
  as.estimator_deadline = rd.positive(an_obj, "estimator_deadline", "analysis.estimator_deadline", as.estimator_deadline);
  if (as.pe_window == 0.0) {
    const double w = sc.leader.input.omega();
    as.pe_window = (sc.leader.input.kind() == InputSignal::Kind::Sinusoid && w > 0.0)
                       ? 2.0 * std::numbers::pi / w
                       : 0.1 * cfg.run.t_end;
  }
  if (as.pe_radius == 0.0) {
    as.pe_radius = std::isfinite(sc.localization_radius) ? sc.localization_radius : 45.0;
  }
  if (as.pe_start == 0.0) as.pe_start = 0.1 * cfg.run.t_end;
  if (as.pe_window < 0.0) rd.fail("analysis.pe_window", "must be positive");
  if (as.pe_radius < 0.0) rd.fail("analysis.pe_radius", "must be positive");

  if (const Json* out = rd.find(root, "output"); out && out->is_object()) {
    if (const Json* d = rd.find(*out, "dir"); d && d->is_string()) cfg.output_dir = d->get<std::string>();
  }
  if (cfg.output_dir.empty()) cfg.output_dir = "out/" + (sc.name.empty() ? std::string("run") : sc.name);

  if (rd.error_count() > 0) return std::nullopt;
  try {
    sc.validate();
  } catch (const std::exception& e) {
    rd.fail("scenario", e.what());
    return std::nullopt;
  }
  return cfg;
}

} // namespace

std::vector<ConfigError> validate_config(const Json& config) {
  std::vector<ConfigError> errors;
  (void)parse(config, errors);
  return errors;
}

ScenarioConfig load_config(const Json& config) {
  std::vector<ConfigError> errors;
  auto cfg = parse(config, errors);
  if (!cfg) throw ConfigInvalid(std::move(errors));
  return std::move(*cfg);
}

} // namespace fdl
