#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fdl/config.hpp"
#include "fdl/io.hpp"
#include "test_support.hpp"

using fdl::Json;

namespace {

bool has_error(const std::vector<fdl::ConfigError>& errors, const std::string& path) {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& e) { return e.path == path; });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace

TEST_CASE("shipped scenarios validate") {
  CHECK(fdl::validate_config(fdl::test::siv_json()).empty());
  CHECK(fdl::validate_config(fdl::test::synthetic_json()).empty());
}

TEST_CASE("shipped siv scenario carries the reference values") {
  const auto cfg = fdl::test::load_with(fdl::test::siv_json());
  const auto& sc = cfg.scenario;
  CHECK(sc.agents() == 4);
  CHECK(sc.grid->size() == 4096);
  CHECK(sc.grid->width(0) == 90.0);
  CHECK(sc.gains.gamma1 == 40.0);
  CHECK(sc.gains.gamma2 == 1.0);
  CHECK(sc.gains.sigma == 1e-4);
  CHECK(sc.gains.H1[0](0, 0) == doctest::Approx(720.0));
  CHECK(sc.gains.H1[0](2, 2) == doctest::Approx(1350.0));
  CHECK(sc.gains.H2[0](1, 1) == doctest::Approx(1200.0));
  CHECK(sc.observer.alpha1 == 1.0);
  CHECK(sc.observer.alpha2 == 200.0);
  CHECK(sc.initial.positions[1] == Eigen::Vector3d(50, 40, 0));
  CHECK(sc.formation.offsets[3] == Eigen::Vector3d(7, 7, 0));
  CHECK(sc.leader.input(0.0)(0) == doctest::Approx(-80.0));
  CHECK(sc.plant->name() == "example_vessel");
}

TEST_CASE("validation reports every problem with its path") {
  Json j = fdl::test::siv_json();
  j["controller"]["H1"] = {{1, 0, 0}, {0, -2, 0}, {0, 0, 1}};
  j["topology"]["edges"] = {{1, 2}, {3, 4}};
  j["run"]["dt"] = -1;
  j["observer"].erase("alpha2");
  j["grid"]["per_dim"] = 1;
  const auto errors = fdl::validate_config(j);
  CHECK(has_error(errors, "controller.H1"));
  CHECK(has_error(errors, "topology"));
  CHECK(has_error(errors, "grid.per_dim"));
  CHECK(errors.size() >= 4);
  for (const auto& e : errors) {
    if (e.path == "controller.H1") CHECK(e.message.find("-2") != std::string::npos);
    if (e.path == "topology") CHECK(e.message.find("3") != std::string::npos);
  }
  CHECK_THROWS_AS(fdl::load_config(j), fdl::ConfigInvalid);
}

TEST_CASE("missing required sections and bad types") {
  Json j = fdl::test::siv_json();
  j.erase("leader");
  j["initial"]["positions"] = "nowhere";
  const auto errors = fdl::validate_config(j);
  CHECK(has_error(errors, "leader"));
  CHECK(has_error(errors, "initial.positions"));

  Json k = fdl::test::siv_json();
  k["plant"]["kind"] = "submarine";
  k["grid"]["width"] = "wide";
  const auto more = fdl::validate_config(k);
  CHECK(has_error(more, "plant.kind"));
  CHECK(has_error(more, "grid.width"));
}

TEST_CASE("leader bound must cover the input") {
  Json j = fdl::test::siv_json();
  j["leader"]["r_star"] = 10;
  CHECK(has_error(fdl::validate_config(j), "leader.r_star"));
  j["leader"]["input"] = {{"kind", "zero"}};
  j["leader"].erase("r_star");
  CHECK(has_error(fdl::validate_config(j), "leader.r_star"));
}

TEST_CASE("overrides") {
  Json j = Json::object();
  fdl::apply_override(j, "run.dt=0.002");
  fdl::apply_override(j, "name=hello");
  fdl::apply_override(j, "a.b.c=[1,2]");
  CHECK(j["run"]["dt"].get<double>() == 0.002);
  CHECK(j["name"].get<std::string>() == "hello");
  CHECK(j["a"]["b"]["c"][1].get<int>() == 2);
  CHECK_THROWS_AS(fdl::apply_override(j, "novalue"), std::invalid_argument);
  CHECK_THROWS_AS(fdl::apply_override(j, "run..dt=1"), std::invalid_argument);
  CHECK_THROWS_AS(fdl::apply_override(j, "name.x=1"), std::invalid_argument);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 1.0, -0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 123456.789}) {
    CHECK(std::strtod(fdl::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(fdl::format_double(0.5) == "0.5");
}

TEST_CASE("run directory round trip") {
  const auto cfg = fdl::test::load_with(fdl::test::siv_json(), {"run.t_end=0.05"});
  const auto log = fdl::run_scenario(cfg.scenario, cfg.run);
  const auto dir = fdl::test::scratch_dir("roundtrip");
  fdl::write_run(dir, cfg, log);
  for (const char* f : {fdl::kLogFile, fdl::kCheckpointFile, fdl::kMetadataFile}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto back = fdl::read_run(dir);
  CHECK(back.columns == log.columns);
  CHECK(back.data == log.data);
  REQUIRE(back.checkpoints.size() == log.checkpoints.size());
  for (std::size_t c = 0; c < log.checkpoints.size(); ++c) {
    CHECK(back.checkpoints[c].t == log.checkpoints[c].t);
    for (std::size_t i = 0; i < log.checkpoints[c].weights.size(); ++i) {
      CHECK(back.checkpoints[c].weights[i] == log.checkpoints[c].weights[i]);
    }
  }
  CHECK(fdl::read_run_config(dir) == cfg.source);

  const auto meta = fdl::read_json_file(dir / fdl::kMetadataFile);
  CHECK(meta["schema_version"].get<int>() == fdl::kLogSchemaVersion);
  CHECK(meta["code_version"].get<std::string>() == fdl::code_version());

  const auto dir2 = fdl::test::scratch_dir("roundtrip2");
  fdl::write_run(dir2, cfg, fdl::run_scenario(cfg.scenario, cfg.run));
  CHECK(slurp(dir / fdl::kLogFile) == slurp(dir2 / fdl::kLogFile));
  CHECK(slurp(dir / fdl::kCheckpointFile) == slurp(dir2 / fdl::kCheckpointFile));
}

TEST_CASE("tampered logs are rejected") {
  const auto cfg = fdl::test::load_with(fdl::test::siv_json(), {"run.t_end=0.05"});
  const auto log = fdl::run_scenario(cfg.scenario, cfg.run);
  const auto dir = fdl::test::scratch_dir("tampered");
  fdl::write_run(dir, cfg, log);
  const std::string text = slurp(dir / fdl::kLogFile);

  SUBCASE("time goes backwards") {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() >= 4);
    std::swap(lines[2], lines[3]);
    std::ofstream out(dir / fdl::kLogFile, std::ios::binary | std::ios::trunc);
    for (const auto& l : lines) out << l << "\n";
    out.close();
    CHECK_THROWS_AS(fdl::read_run(dir), fdl::IoError);
  }
  SUBCASE("unknown schema version") {
    auto meta = fdl::read_json_file(dir / fdl::kMetadataFile);
    meta["schema_version"] = 99;
    std::ofstream(dir / fdl::kMetadataFile, std::ios::trunc) << meta.dump();
    CHECK_THROWS_AS(fdl::read_run(dir), fdl::IoError);
  }
  SUBCASE("renamed column") {
    std::string bad = text;
    bad.replace(bad.find("a1_p1"), 5, "a1_q1");
    std::ofstream(dir / fdl::kLogFile, std::ios::binary | std::ios::trunc) << bad;
    CHECK_THROWS_AS(fdl::read_run(dir), fdl::IoError);
  }
  SUBCASE("missing directory") { CHECK_THROWS_AS(fdl::read_run(dir / "nope"), fdl::IoError); }
}

TEST_CASE("report files") {
  const auto cfg = fdl::test::load_with(fdl::test::siv_json(), {"run.t_end=0.05"});
  const auto log = fdl::run_scenario(cfg.scenario, cfg.run);
  const auto rep = fdl::analyze_run(log, cfg.scenario, cfg.analysis);
  const auto dir = fdl::test::scratch_dir("report");
  fdl::write_report(dir, rep, log);
  for (const char* f : {"report.json", "tracking.csv", "estimation.csv", "consensus.csv", "approximation.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto j = fdl::read_json_file(dir / "report.json");
  CHECK(j["verdicts"].size() == 9);
}
