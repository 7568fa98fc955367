#include "fdl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef FDL_VERSION
#define FDL_VERSION "unknown"
#endif

namespace fdl {

namespace fs = std::filesystem;

std::string code_version() { return FDL_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(where + ": not a number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> lines(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view v(text);
  std::size_t start = 0;
  while (start < v.size()) {
    auto end = v.find('\n', start);
    if (end == std::string_view::npos) end = v.size();
    auto line = v.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::string weights_csv(const std::vector<WeightCheckpoint>& checkpoints) {
  std::string s = "checkpoint_t,agent,k,neuron,value\n";
  for (const auto& c : checkpoints) {
    const std::string t = format_double(c.t);
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
      const Eigen::MatrixXd& w = c.weights[i];
      for (Eigen::Index k = 0; k < w.rows(); ++k) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
          s += t;
          s += ',';
          s += std::to_string(i + 1);
          s += ',';
          s += std::to_string(k + 1);
          s += ',';
          s += std::to_string(j);
          s += ',';
          s += format_double(w(k, j));
          s += '\n';
        }
      }
    }
  }
  return s;
}

std::vector<WeightCheckpoint> read_weights_csv(const fs::path& path, int n, int agents, int neurons) {
  const std::string text = read_text(path);
  const auto ls = lines(text);
  if (ls.empty() || ls[0] != "checkpoint_t,agent,k,neuron,value") {
    throw IoError(path.string() + ": unexpected header");
  }
  std::vector<WeightCheckpoint> out;
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(r + 1);
    const auto f = split(ls[r]);
    if (f.size() != 5) throw IoError(where + ": expected 5 fields");
    const double t = parse_double(f[0], where);
    const int i = static_cast<int>(parse_double(f[1], where)) - 1;
    const int k = static_cast<int>(parse_double(f[2], where)) - 1;
    const int j = static_cast<int>(parse_double(f[3], where));
    if (i < 0 || i >= agents || k < 0 || k >= n || j < 0 || j >= neurons) throw IoError(where + ": index out of range");
    if (out.empty() || out.back().t != t) {
      WeightCheckpoint c;
      c.t = t;
      c.weights.assign(agents, Eigen::MatrixXd::Zero(n, neurons));
      out.push_back(std::move(c));
    }
    out.back().weights[i](k, j) = parse_double(f[4], where);
  }
  return out;
}

const char* status_name(RunStatus s) { return s == RunStatus::Completed ? "completed" : "diverged"; }

} // namespace

std::string log_csv(const RunLog& log) {
  std::string s;
  for (std::size_t c = 0; c < log.cols(); ++c) {
    if (c) s += ',';
    s += log.columns[c];
  }
  s += '\n';
  for (std::size_t r = 0; r < log.rows(); ++r) {
    for (std::size_t c = 0; c < log.cols(); ++c) {
      if (c) s += ',';
      s += format_double(log.at(r, c));
    }
    s += '\n';
  }
  return s;
}

void write_run(const fs::path& dir, const ScenarioConfig& config, const RunLog& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / kLogFile, log_csv(log));
  write_text(dir / kCheckpointFile, weights_csv(log.checkpoints));
  if (log.mean_weights) write_text(dir / kMeanWeightFile, weights_csv({*log.mean_weights}));

  Json meta;
  meta["schema_version"] = log.schema_version;
  meta["code_version"] = code_version();
  meta["status"] = status_name(log.status);
  meta["message"] = log.message;
  meta["warnings"] = log.warnings;
  meta["n"] = log.n;
  meta["agents"] = log.agents;
  meta["neurons"] = log.neurons;
  meta["rows"] = log.rows();
  meta["columns"] = log.columns;
  meta["files"] = {{"log", kLogFile}, {"checkpoints", kCheckpointFile}};
  Json cps = Json::array();
  for (const auto& c : log.checkpoints) cps.push_back(c.t);
  meta["checkpoint_times"] = cps;
  meta["mean_window"] = {log.mean_t_a, log.mean_t_b};
  meta["mean_samples"] = log.mean_samples;
  if (log.mean_weights) meta["files"]["mean_weights"] = kMeanWeightFile;
  meta["wall_seconds"] = log.wall_seconds;
  meta["config"] = config.source;
  write_text(dir / kMetadataFile, meta.dump(2) + "\n");
}

Json read_run_config(const fs::path& dir) {
  const Json meta = read_json_file(dir / kMetadataFile);
  if (!meta.contains("config")) throw IoError((dir / kMetadataFile).string() + ": no config echo");
  return meta["config"];
}

RunLog read_run(const fs::path& dir) {
  const Json meta = read_json_file(dir / kMetadataFile);
  RunLog log;
  try {
    const int version = meta.at("schema_version").get<int>();
    if (version != kLogSchemaVersion) {
      throw IoError("schema version " + std::to_string(version) + " does not match " +
                    std::to_string(kLogSchemaVersion));
    }
    log.n = meta.at("n").get<int>();
    log.agents = meta.at("agents").get<int>();
    log.neurons = meta.at("neurons").get<int>();
    log.status = meta.at("status").get<std::string>() == "completed" ? RunStatus::Completed : RunStatus::Diverged;
    log.message = meta.value("message", "");
    log.warnings = meta.value("warnings", std::vector<std::string>{});
    log.mean_t_a = meta.at("mean_window").at(0).get<double>();
    log.mean_t_b = meta.at("mean_window").at(1).get<double>();
    log.mean_samples = meta.value("mean_samples", std::size_t{0});
    log.wall_seconds = meta.value("wall_seconds", 0.0);
  } catch (const Json::exception& e) {
    throw IoError((dir / kMetadataFile).string() + ": " + e.what());
  }

  const std::string text = read_text(dir / kLogFile);
  const auto ls = lines(text);
  if (ls.empty()) throw IoError((dir / kLogFile).string() + ": empty file");
  for (auto name : split(ls[0])) log.columns.emplace_back(name);
  const int n_r = static_cast<int>(log.columns.size()) - static_cast<int>(log_columns(log.n, log.agents, 0).size());
  if (n_r < 0 || log.columns != log_columns(log.n, log.agents, n_r)) {
    throw IoError((dir / kLogFile).string() + ": column header does not match schema version " +
                  std::to_string(kLogSchemaVersion));
  }
  log.data.reserve((ls.size() - 1) * log.columns.size());
  double t_prev = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r < ls.size(); ++r) {
    const std::string where = (dir / kLogFile).string() + ":" + std::to_string(r + 1);
    const auto f = split(ls[r]);
    if (f.size() != log.columns.size()) throw IoError(where + ": wrong field count");
    for (auto field : f) log.data.push_back(parse_double(field, where));
    const double t = log.data[(r - 1) * log.columns.size()];
    if (!(t > t_prev)) throw IoError(where + ": time column is not strictly increasing");
    t_prev = t;
  }
  if (fs::exists(dir / kCheckpointFile)) {
    log.checkpoints = read_weights_csv(dir / kCheckpointFile, log.n, log.agents, log.neurons);
  }
  if (fs::exists(dir / kMeanWeightFile)) {
    auto m = read_weights_csv(dir / kMeanWeightFile, log.n, log.agents, log.neurons);
    if (!m.empty()) log.mean_weights = std::move(m.front());
  }
  return log;
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string series_csv(const std::vector<double>& t, const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& cols) {
  std::string s = "t";
  for (const auto& n : names) s += "," + n;
  s += '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    s += format_double(t[r]);
    for (const auto* c : cols) {
      s += ',';
      s += format_double((*c)[r]);
    }
    s += '\n';
  }
  return s;
}

Json approx_json(const std::vector<ApproximationEntry>& entries) {
  Json a = Json::array();
  for (const auto& e : entries) {
    a.push_back({{"agent", e.agent + 1},
                 {"k", e.channel + 1},
                 {"rms_error", e.rms_error},
                 {"rms_true", e.rms_true},
                 {"relative", e.relative},
                 {"value", number_or_null(e.value())}});
  }
  return a;
}

} // namespace

Json report_json(const MetricReport& rep) {
  Json j;
  j["schema_version"] = kLogSchemaVersion;
  j["code_version"] = code_version();
  Json verdicts = Json::array();
  for (const auto& v : rep.verdicts) {
    verdicts.push_back({{"criterion", v.criterion},
                        {"name", v.name},
                        {"applicable", v.applicable},
                        {"pass", v.pass},
                        {"value", number_or_null(v.value)},
                        {"threshold", number_or_null(v.threshold)},
                        {"detail", v.detail}});
  }
  j["verdicts"] = verdicts;
  Json tr;
  for (std::size_t i = 0; i < rep.tracking.steady.size(); ++i) {
    tr.push_back({{"agent", i + 1},
                  {"steady", number_or_null(rep.tracking.steady[i])},
                  {"decay_rate", number_or_null(rep.tracking.decay_rate[i])}});
  }
  j["tracking"] = tr;
  j["estimation"] = {{"settle_time", number_or_null(rep.estimation.settle_time)}};
  j["formation_deviation"] = number_or_null(rep.formation_dev);
  j["approximation_mean_weights"] = approx_json(rep.approx_mean);
  j["approximation_final_weights"] = approx_json(rep.approx_final);
  j["beta_dot_fd_discrepancy"] = number_or_null(rep.beta_dot_discrepancy);
  Json cons = Json::array();
  for (std::size_t c = 0; c < rep.consensus.t.size(); ++c) {
    cons.push_back({{"t", rep.consensus.t[c]},
                    {"max_pairwise", std::vector<double>(rep.consensus.pairwise[c].data(),
                                                         rep.consensus.pairwise[c].data() +
                                                             rep.consensus.pairwise[c].size())}});
  }
  j["consensus"] = cons;
  j["consensus_ripple"] =
      std::vector<double>(rep.consensus_ripple.data(), rep.consensus_ripple.data() + rep.consensus_ripple.size());
  j["pe"] = {{"min_eta", number_or_null(rep.pe.min_eta)},
             {"all_positive", rep.pe.all_positive},
             {"windows", rep.pe.windows},
             {"min_zeta", rep.pe.min_zeta},
             {"worst_agent", rep.pe.worst_agent + 1},
             {"worst_t0", rep.pe.worst_t0}};
  j["far_neurons"] = {{"applicable", rep.far.applicable},
                      {"near_count", rep.far.near_count},
                      {"far_count", rep.far.far_count},
                      {"worst_ratio", number_or_null(rep.far.worst_ratio())}};
  if (rep.ideal_error) j["ideal_weight_error"] = *rep.ideal_error;
  j["bounds"] = {{"finite", rep.bounds.finite},
                 {"z1_sup", rep.bounds.z1_sup},
                 {"z2_sup", rep.bounds.z2_sup},
                 {"w_inf_sup", rep.bounds.w_inf_sup}};
  j["notes"] = rep.notes;
  return j;
}

void write_report(const fs::path& dir, const MetricReport& rep, const RunLog& log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", report_json(rep).dump(2) + "\n");

  std::vector<std::string> names;
  std::vector<const std::vector<double>*> cols;
  for (std::size_t i = 0; i < rep.tracking.error.size(); ++i) {
    names.push_back("e" + std::to_string(i + 1));
    cols.push_back(&rep.tracking.error[i]);
  }
  if (!rep.tracking.t.empty()) write_text(dir / "tracking.csv", series_csv(rep.tracking.t, names, cols));

  names.clear();
  cols.clear();
  for (std::size_t i = 0; i < rep.estimation.state_error.size(); ++i) {
    names.push_back("est" + std::to_string(i + 1));
    cols.push_back(&rep.estimation.state_error[i]);
  }
  names.push_back("max_position_error");
  cols.push_back(&rep.estimation.max_position_error);
  write_text(dir / "estimation.csv", series_csv(rep.estimation.t, names, cols));

  // consensus norms per agent and channel along the log (Fig. 5 style)
  std::vector<std::vector<double>> store;
  names.clear();
  std::vector<double> t;
  for (std::size_t r = 0; r < log.rows(); ++r) t.push_back(log.at(r, 0));
  for (int k = 1; k <= log.n; ++k) {
    names.push_back("cons_" + std::to_string(k));
    store.push_back(log.rows() ? log.series("cons_" + std::to_string(k)) : std::vector<double>{});
    for (int i = 1; i <= log.agents; ++i) {
      const std::string c = "a" + std::to_string(i) + "_wnorm" + std::to_string(k);
      names.push_back(c);
      store.push_back(log.rows() ? log.series(c) : std::vector<double>{});
    }
  }
  cols.clear();
  for (const auto& s : store) cols.push_back(&s);
  write_text(dir / "consensus.csv", series_csv(t, names, cols));

  std::string a = "weights,agent,k,rms_error,rms_true,relative,value\n";
  auto emit = [&a](const char* which, const std::vector<ApproximationEntry>& es) {
    for (const auto& e : es) {
      a += std::string(which) + "," + std::to_string(e.agent + 1) + "," + std::to_string(e.channel + 1) + "," +
           format_double(e.rms_error) + "," + format_double(e.rms_true) + "," + (e.relative ? "1" : "0") + "," +
           format_double(e.value()) + "\n";
    }
  };
  emit("mean", rep.approx_mean);
  emit("final", rep.approx_final);
  write_text(dir / "approximation.csv", a);
}

} // namespace fdl
