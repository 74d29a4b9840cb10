#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "expect_error.hpp"
#include "generators.hpp"
#include "homodyne/io.hpp"

using namespace homodyne;
using Catch::Approx;
namespace fs = std::filesystem;

TEST_CASE("format_double round-trips exactly", "[io]") {
  testing::Gen gen(101);
  for (int i = 0; i < 2000; ++i) {
    const double v = gen.normal() * std::pow(10.0, gen.integer(-300, 300));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("property: YAML config round-trip", "[io][property]") {
  testing::Gen gen(102);
  for (int i = 0; i < 300; ++i) {
    RunConfig cfg{gen.model(), LOSweep{}};
    cfg.sweep.n_steps = gen.integer(1, 20);
    cfg.sweep.power_start_dbm = gen.uniform(-30.0, 20.0);
    cfg.sweep.rbw = gen.log_uniform(1e3, 1e7);
    cfg.sweep.balance = gen.coin();
    cfg.sweep.mode = gen.coin() ? TraceMode::analytic : TraceMode::monte_carlo;
    cfg.sweep.cable_loss_db_per_ghz = gen.uniform(0.0, 1.0);
    const auto back = parse_config(config_to_yaml(cfg));
    INFO(config_to_yaml(cfg));
    CHECK(back.model == cfg.model);
    CHECK(back.sweep == cfg.sweep);
  }
}

TEST_CASE("property: JSON model round-trip", "[io][property]") {
  testing::Gen gen(103);
  for (int i = 0; i < 300; ++i) {
    const auto m = gen.model();
    CHECK(model_from_json(model_to_json(m)) == m);
    CHECK(model_from_json(nlohmann::json::parse(model_to_json(m).dump())) == m);
  }
  LOSweep s;
  s.mode = TraceMode::monte_carlo;
  s.n_points = 77;
  CHECK(sweep_from_json(sweep_to_json(s)) == s);
}

TEST_CASE("config parsing", "[io]") {
  const auto empty = parse_config("");
  CHECK(empty.model.tia == paper_device().tia);
  CHECK(empty.model.name == "custom");

  const auto cfg = parse_config(R"(
name: my_device
tia:
  r_f_ohm: 800
frontend:
  top_arm: reflection
  rin_dbc_hz: -140
sweep:
  n_steps: 5
  mode: monte_carlo
  balance: false
)");
  CHECK(cfg.model.name == "my_device");
  CHECK(cfg.model.tia.R_F == 800.0);
  CHECK(cfg.model.tia.R_C == 250.0);
  CHECK(cfg.model.frontend.top_arm == TopArm::reflection);
  CHECK(cfg.model.frontend.rin_dbc_hz == -140.0);
  CHECK(cfg.sweep.n_steps == 5);
  CHECK(cfg.sweep.mode == TraceMode::monte_carlo);
  CHECK_FALSE(cfg.sweep.balance);

  CHECK(testing::thrown_code([] { parse_config("tia: {r_x_ohm: 3}"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("bogus: 1"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("tia: {r_f_ohm: abc}"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("sweep: {n_steps: 2.5}"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("frontend: {top_arm: sideways}"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("[1, 2"); }) == "ParseError");
  CHECK(testing::thrown_code([] { parse_config("- 1\n- 2\n"); }) == "ParseError");
}

TEST_CASE("missing config names the path", "[io]") {
  try {
    load_config("/nonexistent/dir/config.yaml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("/nonexistent/dir/config.yaml") != std::string::npos);
  }
}

TEST_CASE("shipped preset files equal the built-in presets", "[io]") {
  for (const auto& name : builtin_preset_names()) {
    const fs::path p = fs::path(HOMODYNE_SOURCE_PRESETS) / (name + ".yaml");
    REQUIRE(fs::exists(p));
    const auto cfg = load_config(p);
    CHECK(cfg.model == *builtin_preset(name));
    CHECK(cfg.sweep == LOSweep{});
  }
}

TEST_CASE("trace CSV round-trip", "[io]") {
  testing::Gen gen(104);
  SpectrumTrace t;
  double f = 0.0;
  for (int i = 0; i < 100; ++i) {
    f += gen.uniform(1e3, 1e8);
    t.freqs.push_back(f);
    t.values.push_back(gen.uniform(-180.0, -100.0));
  }
  t.rbw = 100e3;
  t.stage = TraceStage::danl_subtracted;
  std::stringstream ss;
  write_trace_csv(ss, t);
  const std::string text = ss.str();
  CHECK(text.find("freq_hz,value,unit\n") != std::string::npos);
  CHECK(text.find("# rbw_hz=1e+05\n") != std::string::npos);
  CHECK(text.find("# stage=danl_subtracted\n") != std::string::npos);
  std::istringstream in(text);
  CHECK(read_trace_csv(in) == t);

  std::istringstream bad_header("f,v,u\n1,2,dBm/Hz\n");
  CHECK(testing::thrown_code([&] { read_trace_csv(bad_header); }) == "ParseError");
  std::istringstream bad_row("freq_hz,value,unit\n1,2\n2,3,dBm/Hz\n");
  CHECK(testing::thrown_code([&] { read_trace_csv(bad_row); }) == "ParseError");
  std::istringstream mixed("freq_hz,value,unit\n1,2,dBm/Hz\n2,3,ratio\n");
  CHECK(testing::thrown_code([&] { read_trace_csv(mixed); }) == "ParseError");
  std::istringstream decreasing("freq_hz,value,unit\n2,2,ratio\n1,3,ratio\n");
  CHECK(testing::thrown_code([&] { read_trace_csv(decreasing); }) == "ParseError");
  std::istringstream crlf("freq_hz,value,unit\r\n1,2,ratio\r\n2,3,ratio\r\n");
  CHECK(read_trace_csv(crlf).values == std::vector<double>{2.0, 3.0});
}

TEST_CASE("S21, complex and noise budget CSV", "[io]") {
  const S21Trace s{{1e9, 2e9, 3e9}, {-0.1, -0.2, -0.35}};
  std::stringstream ss;
  write_s21_csv(ss, s);
  CHECK(ss.str().rfind("freq_hz,s21_db\n", 0) == 0);
  const auto back = read_s21_csv(ss);
  CHECK(back.freqs == s.freqs);
  CHECK(back.s21_db == s.s21_db);

  ComplexSpectrum z;
  z.freqs = {1.0, 2.0};
  z.values = {{1.5, -2.0}, {0.25, 0.0}};
  std::stringstream zs;
  write_complex_csv(zs, z);
  CHECK(zs.str() == "freq_hz,re_ohm,im_ohm\n1,1.5,-2\n2,0.25,0\n");

  const std::vector<NoiseTermRow> rows{{0.0, "johnson_feedback", 2.5e-23}};
  std::stringstream ns;
  write_noise_budget_csv(ns, rows);
  CHECK(ns.str() == "freq_hz,term,value_a2_per_hz\n0,johnson_feedback,2.5e-23\n");
}

TEST_CASE("hashes", "[io]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto m = paper_device();
  CHECK(model_hash(m) == model_hash(paper_device()));
  auto other = m;
  other.tia.R_F = 601.0;
  CHECK(model_hash(other) != model_hash(m));
  CHECK(model_hash(m).size() == 64);
}

TEST_CASE("file helpers", "[io]") {
  const auto dir = fs::temp_directory_path() / "homodyne_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "a.txt", "hello\n");
  CHECK(read_file(dir / "a.txt") == "hello\n");
  CHECK(testing::thrown_code([&] { read_file(dir / "missing.txt"); }) == "IoError");
  CHECK(testing::thrown_code([&] { write_file(dir / "no" / "such" / "b.txt", "x"); }) == "IoError");
  fs::remove_all(dir);
}
