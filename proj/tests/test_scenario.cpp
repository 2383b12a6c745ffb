#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "shockstab/io.hpp"
#include "shockstab/scenario.hpp"

using namespace shockstab;

namespace {

const char* kSmallStability = R"(
seed = 5
[states]
intermediate = { rho = 1.0, u1 = 0.0, theta = 1.0 }
delta1 = 0.05
delta3 = 0.05
[transport]
mu_ref = 0.1
theta_ref = 1.0
prandtl = 0.6666666666666666
nu_ref = 6.666666666666667
[grid]
cells = 512
half_width = 300.0
[perturbation]
amplitude = 1.0e-3
count = 2
width = 8.0
region = [-20.0, 20.0]
excess = [0.005, 0.01, -0.005]
center = 0.0
mass_width = 5.0
[run]
fidelity = "ns"
t_end = 1.0
output_times = [0.0, 0.5, 1.0]
snapshot_times = [1.0]
[diagnostics]
energy = false
)";

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("shockstab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(scenario, sha256_known_vectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(scenario, set_path_creates_tables) {
  json j = {{"a", 1}};
  set_path(j, "b.c.d", 2.5);
  set_path(j, "a", "x");
  EXPECT_EQ(j["b"]["c"]["d"], 2.5);
  EXPECT_EQ(j["a"], "x");
}

TEST(scenario, decay_exponent_of_power_law) {
  std::vector<double> t, y;
  for (double s = 0.0; s <= 100.0; s += 5.0) {
    t.push_back(s);
    y.push_back(3.0 * std::pow(1.0 + s, -0.5));
  }
  EXPECT_NEAR(fit_decay_exponent(t, y), -0.5, 1e-12);
}

TEST(scenario, riemann_manufactured_run) {
  const json cfg = parse_config_text(
      "seed = 3\n[riemann]\nmode = \"manufactured\"\ncount = 5\nrho_range = [0.5, 2.0]\nu_range = [-1.0, 1.0]\n"
      "theta_range = [0.5, 2.0]\nstrength_range = [0.01, 0.5]\n");
  auto report = [&](const RunOverrides& o) {
    json r = run_riemann(cfg, o).report;
    r.erase("runtime_s");
    return r.dump();
  };
  EXPECT_EQ(report({}), report({}));
  RunOverrides o;
  o.seed = 99;
  EXPECT_NE(report(o), report({}));
}

TEST(scenario, unknown_kind_is_config_error) {
  try {
    run_scenario("nope", json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(scenario, small_stability_run_is_deterministic_and_hashed) {
  const json cfg = parse_config_text(kSmallStability);
  const RunOutput a = run_stability(cfg), b = run_stability(cfg);
  ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
  for (std::size_t k = 0; k < a.artifacts.size(); ++k) EXPECT_EQ(a.artifacts[k].content, b.artifacts[k].content);
  EXPECT_LT(std::abs(a.report["initial_mass_defect"].get<double>()), 1e-12);
  for (const auto& s : a.report["series"]) EXPECT_LT(s["audit"].get<double>(), 1e-10);

  const auto dir = temp_dir("run");
  const json m = write_run(dir, "stability", kSmallStability, cfg, {}, a, 0.0);
  EXPECT_TRUE(verify_run(dir)["all_hashes_ok"].get<bool>());
  EXPECT_EQ(m["files"].size(), a.artifacts.size() + 1);
  write_text_file(dir / a.artifacts.front().name, "tampered");
  EXPECT_FALSE(verify_run(dir)["all_hashes_ok"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST(scenario, sweep_runs_each_value) {
  json cfg = parse_config_text(
      "[states]\nintermediate = { rho = 1.0, u1 = 0.0, theta = 1.0 }\ndelta1 = 0.05\ndelta3 = 0.05\n"
      "[sweep]\nkind = \"riemann\"\nparameter = \"states.delta1\"\nvalues = [0.02, 0.04]\n"
      "[riemann]\nmode = \"solve\"\n");
  const RunOutput r = run_sweep(cfg);
  ASSERT_EQ(r.report["runs"].size(), 2u);
  EXPECT_EQ(r.report["runs"][1]["value"], 0.04);
  cfg["sweep"]["values"] = json::array();
  EXPECT_THROW(run_sweep(cfg), Error);
}
