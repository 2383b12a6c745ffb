// Runs the shipped configs and checks the ten acceptance criteria, one
// PASS/FAIL line each. Exit status is the number of failed criteria (capped).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "shockstab/io.hpp"
#include "shockstab/scenario.hpp"

namespace {

using namespace shockstab;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Timed {
  RunOutput out;
  double seconds = 0.0;
};

Timed timed_run(const std::string& kind, const json& cfg, const RunOverrides& o = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.out = run_scenario(kind, cfg, o);
  t.seconds = elapsed_seconds(t0);
  return t;
}

bool in_window(double x, double lo, double hi) { return x >= lo && x <= hi; }

Verdict riemann_criterion(const json& cfg) {
  const Timed r = timed_run("riemann", cfg);
  const json& j = r.out.report;
  const bool ok = j["count"] == 50 && j["max_rel_error"] < 1e-8 && j["max_rh_residual"] < 1e-10 &&
                  j["all_lax_strict"].get<bool>() && r.seconds < 5.0;
  return {ok, "cases=" + j["count"].dump() + " rel_err=" + g(j["max_rel_error"]) + " rh=" + g(j["max_rh_residual"]) +
                  " lax=" + j["all_lax_strict"].dump() + " t=" + g(r.seconds) + "s"};
}

Verdict kinetic_structure_criterion(const json& cfg) {
  const Timed r = timed_run("kinetic", cfg);
  const json& j = r.out.report;
  const bool grid_ok = j["n_per_axis"] == 32 && j["v_max"] == 8.0;
  const bool ok = grid_ok && j["gram_defect"] < 1e-6 && j["idempotence_defect"] < 1e-6 &&
                  j["orthogonality_defect"] < 1e-6 && j["collision_moment_drift"] < 1e-12 && r.seconds < 10.0;
  return {ok, "gram=" + g(j["gram_defect"]) + " idem=" + g(j["idempotence_defect"]) + " orth=" +
                  g(j["orthogonality_defect"]) + " drift=" + g(j["collision_moment_drift"]) + " t=" + g(r.seconds) + "s"};
}

Verdict profile_criterion(const json& cfg) {
  const Timed r = timed_run("profile", cfg);
  const json& j = r.out.report;
  std::vector<double> ds;
  for (const auto& p : j["profiles"]) ds.push_back(p["delta"]);
  std::sort(ds.begin(), ds.end());
  bool ok = ds == std::vector<double>{0.02, 0.04, 0.08};
  std::string ratios;
  for (const auto& s : j["scaling"])
    for (const char* f : {"s1", "s3"}) {
      const double q = s[f];
      ok = ok && in_window(q, 3.4, 4.6);
      ratios += g(q) + " ";
    }
  ok = ok && j["all_monotone"].get<bool>() && j["all_compressive"].get<bool>() && j["max_endpoint_mismatch"] < 1e-6 &&
       r.seconds < 30.0;
  return {ok, "monotone=" + j["all_monotone"].dump() + " compressive=" + j["all_compressive"].dump() + " ratios=" + ratios +
                  "mismatch=" + g(j["max_endpoint_mismatch"]) + " t=" + g(r.seconds) + "s"};
}

/// Endpoint persistence: |endpoint_k(t)| <= 10 max(|endpoint_k(0)|, 1e-8 |excess|) for t <= horizon,
/// with endpoint_k(0) taken from `reference` (default: the run itself).
bool endpoints_persist(const json& report, double horizon, double* worst, const json* reference = nullptr) {
  const json& ref = reference ? *reference : report;
  const json& s = report["series"];
  const json& s0 = ref["series"][0];
  const double floor = 1e-8 * ref["excess_norm"].get<double>();
  bool ok = true;
  *worst = 0.0;
  for (const auto& e : s) {
    if (e["t"].get<double>() > horizon + 1e-9) break;
    for (int k = 0; k < 3; ++k) {
      const double bound = 10.0 * std::max(std::abs(s0["endpoint"][k].get<double>()), floor);
      const double v = std::abs(e["endpoint"][k].get<double>());
      *worst = std::max(*worst, v / bound);
      ok = ok && v <= bound;
    }
  }
  return ok;
}

Verdict zero_mass_criterion(const json& cfg, const Timed& r) {
  const json& j = r.out.report;
  const ConfigView c(cfg);
  const auto ex = c.numbers("perturbation.excess");
  const double mass_ok = j["initial_mass_defect"].get<double>() < 1e-8 * j["excess_norm"].get<double>();
  double worst = 0.0;
  const bool persist = endpoints_persist(j, c.number("acceptance.endpoint_horizon"), &worst);
  const bool shape = ex == std::vector<double>{0.01, 0.02, -0.01} && j["grid"]["cells"] == 4096 &&
                     j["diffusion_wave"].get<bool>();
  const bool ok = shape && mass_ok && persist && r.seconds < 300.0;
  return {ok, "mass_defect=" + g(j["initial_mass_defect"]) + " excess=" + g(j["excess_norm"]) +
                  " endpoint/bound=" + g(worst) + " t=" + g(r.seconds) + "s"};
}

Verdict diffusion_wave_criterion(const json& cfg, const Timed& r) {
  const json& j = r.out.report;
  const ConfigView c(cfg);
  const auto win = c.numbers("acceptance.fit_window");
  std::vector<double> ts, ys;
  for (const auto& s : j["series"]) {
    const double t = s["t"];
    if (t >= win[0] - 1e-9 && t <= win[1] + 1e-9) {
      ts.push_back(t);
      ys.push_back(s["r2_sup"]);
    }
  }
  const double slope = ts.size() >= 3 ? fit_decay_exponent(ts, ys) : 0.0;
  // PDE residual of the analytic wave with an independent time derivative.
  const double a = j["wave_coefficient"], alpha2 = j["alpha"][1], u = j["composite"]["u_sharp"];
  const DiffusionWave w{alpha2, a, u};
  double res = 0.0, scale = 0.0;
  for (double t : {0.0, 1.0, 10.0, 100.0})
    for (int i = -400; i <= 400; ++i) {
      const double x = u * t + 0.05 * i * std::sqrt(1.0 + t);
      const auto d = w.derivatives(x, t);
      const double tau = 1.0 + t, y = x - u * t;
      const double th_t = d[0] * (-0.5 / tau + y * y / (4.0 * a * tau * tau)) + d[0] * u * y / (2.0 * a * tau);
      res = std::max(res, std::abs(th_t + u * d[1] - a * d[2]));
      scale = std::max({scale, std::abs(th_t), std::abs(a * d[2])});
    }
  const double rel = res / scale;
  const bool ok = ts.size() >= 3 && std::abs(slope + 0.5) <= 0.07 && rel < 1e-12;
  return {ok, "exponent=" + g(slope) + " pde_residual=" + g(rel)};
}

/// The ablated run is held to the bound of the corrected zero-mass run: its own
/// t = 0 endpoint is the unabsorbed mass, so measuring it against itself is vacuous.
Verdict stability_criterion(const json& cfg, const Timed& r, const Timed& ablated, const Timed& corrected,
                            const json& zm_cfg) {
  const json& j = r.out.report;
  const ConfigView c(cfg);
  const json& s = j["series"];
  const double delta = j["composite"]["delta"];
  const double sup_ratio = s.back()["sup_norm"].get<double>() / s[0]["sup_norm"].get<double>();
  const bool horizon = std::abs(s.back()["t"].get<double>() - 100.0) < 1e-9;
  const double transient = c.number("acceptance.transient");
  const double C = c.number("acceptance.energy_budget_C");
  const double E0 = s[0]["E"];
  bool monotone = true, budget = true;
  for (std::size_t k = 0; k < s.size(); ++k) {
    budget = budget && s[k]["E"].get<double>() <= E0 + C * std::sqrt(delta);
    if (k > 0 && s[k - 1]["t"].get<double>() >= transient) monotone = monotone && s[k]["E"] <= s[k - 1]["E"];
  }
  const bool setup = std::abs(delta - 0.05) < 1e-9 && c.number("perturbation.amplitude") == 1e-3 &&
                     !c.has("perturbation.excess");
  double worst = 0.0;
  const bool control_fails = !endpoints_persist(ablated.out.report, ConfigView(zm_cfg).number("acceptance.endpoint_horizon"),
                                                &worst, &corrected.out.report);
  const bool ok = setup && horizon && sup_ratio < 0.5 && monotone && budget && control_fails;
  return {ok, "sup(100)/sup(0)=" + g(sup_ratio) + " E_nonincreasing=" + (monotone ? "true" : "false") +
                  " budget=" + (budget ? "true" : "false") + " ablation_endpoint/bound=" + g(worst) +
                  " (control " + (control_fails ? "fails" : "passes") + ")"};
}

Verdict frame_criterion(const Timed& r) {
  const json& j = r.out.report;
  const double gap_bound = j["composite"]["delta"].get<double>() / j["composite"]["rho_sharp"].get<double>();
  double lr = 0.0, lar = 0.0, gmin = 1e300, gmax = 0.0, emin = 1e300, emax = 0.0, nmin = 1e300;
  bool weights = true;
  for (const auto& s : j["series"]) {
    lr = std::max(lr, s["lr_defect"].get<double>());
    lar = std::max(lar, s["lar_defect"].get<double>());
    for (const char* k : {"alpha_gap", "beta_gap"}) {
      gmin = std::min(gmin, s[k][0].get<double>());
      gmax = std::max(gmax, s[k][1].get<double>());
    }
    weights = weights && s["weights_in_range"].get<bool>();
    emin = std::min(emin, s["eta1_range"][0].get<double>());
    emax = std::max(emax, s["eta1_range"][1].get<double>());
    nmin = std::min(nmin, s["n_sup"].get<double>());
  }
  const bool ok = lr < 1e-12 && lar < 1e-10 && weights && gmin > 0.0 && gmax < gap_bound && emin >= 1.0 &&
                  emax <= std::exp(1.0) && nmin >= 1.0 - 1e-6 && nmin <= 1.0;
  return {ok, "LR-I=" + g(lr) + " LAR-Lambda=" + g(lar) + " 1-weight in [" + g(gmin) + ", " + g(gmax) + "] < " +
                  g(gap_bound) + " eta1 in [" + g(emin) + ", " + g(emax) + "] min|n|=" + g(nmin)};
}

Verdict mode_criterion(const json& cfg, std::uint64_t seed) {
  // Random band-limited fields: trigonometric polynomials with |k| < n/2.
  Rng rng(seed);
  double split = 0.0, ratio = 0.0;
  const double bound = 1.0 / (2.0 * kPi) + 1e-10;
  const int fields = static_cast<int>(ConfigView(cfg).positive_integer("acceptance.random_fields"));
  for (int f = 0; f < fields; ++f) {
    const int n2 = 4 + 2 * static_cast<int>(rng.uniform() * 4), n3 = 4 + 2 * static_cast<int>(rng.uniform() * 4);
    TorusField h{n2, n3, std::vector<double>(static_cast<std::size_t>(n2) * n3, 0.0)};
    const double mean = rng.uniform(-1.0, 1.0);
    for (int k2 = -(n2 / 2 - 1); k2 <= n2 / 2 - 1; ++k2)
      for (int k3 = -(n3 / 2 - 1); k3 <= n3 / 2 - 1; ++k3) {
        if (k2 == 0 && k3 == 0) continue;
        const double cs = rng.uniform(-1.0, 1.0), sn = rng.uniform(-1.0, 1.0);
        for (int j = 0; j < n2; ++j)
          for (int k = 0; k < n3; ++k) {
            const double ph = 2.0 * kPi * (k2 * static_cast<double>(j) / n2 + k3 * static_cast<double>(k) / n3);
            h.v[j * n3 + k] += cs * std::cos(ph) + sn * std::sin(ph);
          }
      }
    for (double& v : h.v) v += mean;
    const ModeSplit m = mode_decompose(h);
    const double total = torus_norm2(h);
    split = std::max(split, std::abs(total - m.zero * m.zero - torus_norm2(m.nonzero)) / total);
    ratio = std::max(ratio, poincare_ratio(h));
  }
  const Timed r = timed_run("stability", cfg);
  const json& s = r.out.report["series"];
  const double transient = ConfigView(cfg).number("acceptance.transient");
  bool monotone = true;
  double first = 0.0, last = 0.0, splitting = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    splitting = std::max(splitting, s[k]["splitting_defect"].get<double>());
    if (s[k]["t"].get<double>() < transient) continue;
    if (first == 0.0) first = s[k]["nonzero_mode"];
    last = s[k]["nonzero_mode"];
    if (k > 0 && s[k - 1]["t"].get<double>() >= transient) monotone = monotone && s[k]["nonzero_mode"] < s[k - 1]["nonzero_mode"];
  }
  const json& grid = r.out.report["grid"];
  const bool ok = split < 1e-12 && ratio <= bound && grid["n2"] == 8 && grid["n3"] == 8 && monotone && last < first &&
                  splitting < 1e-12;
  return {ok, "parseval=" + g(split) + " poincare=" + g(ratio) + " (bound " + g(bound) + ") |D U| " + g(first) + " -> " +
                  g(last) + " monotone=" + (monotone ? "true" : "false") + " t=" + g(r.seconds) + "s"};
}

Verdict kinetic_consistency_criterion(const json& cfg) {
  const Timed r = timed_run("kinetic", cfg);
  const json& j = r.out.report;
  const ConfigView c(cfg);
  bool ok = c.positive_integer("kinetic.cells") == 512 && c.positive_integer("kinetic.n_per_axis") == 24 &&
            c.numbers("kinetic.nu_values") == std::vector<double>{50.0, 100.0, 200.0} && r.seconds < 600.0;
  std::string errs, ratios;
  for (const auto& run : j["runs"]) errs += g(run["err_euler"]) + " ";
  for (const auto& q : j["halving_ratios"]) {
    ok = ok && in_window(q.get<double>(), 1.4, 2.6);
    ratios += g(q) + " ";
  }
  return {ok, "errors=" + errs + "ratios=" + ratios + "t=" + g(r.seconds) + "s"};
}

Verdict determinism_criterion(const json& cfg, const Timed& first) {
  const Timed second = timed_run("stability", cfg);
  std::map<std::string, std::string> a, b;
  for (const auto& x : first.out.artifacts) a[x.name] = sha256_hex(x.content);
  for (const auto& x : second.out.artifacts) b[x.name] = sha256_hex(x.content);
  const bool ok = !a.empty() && a == b;
  return {ok, std::to_string(a.size()) + " CSV files, " + (ok ? "hashes identical" : "hashes differ") +
                  " timeseries=" + a["timeseries.csv"].substr(0, 16)};
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = "configs";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--configs") dir = argv[i + 1];
  auto load = [&](const char* name) { return load_config_file((dir / name).string()); };
  int failed = 0;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& f) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << v.detail << std::endl;
  };
  try {
    const json riemann = load("riemann.toml"), kstruct = load("kinetic_structure.toml"), profile = load("profile.toml"),
               zm = load("zero_mass.toml"), stab = load("stability.toml"), trans = load("transverse.toml"),
               kcons = load("kinetic_consistency.toml");
    report(1, "riemann", [&] { return riemann_criterion(riemann); });
    report(2, "kinetic structure", [&] { return kinetic_structure_criterion(kstruct); });
    report(3, "profile structure", [&] { return profile_criterion(profile); });
    const Timed zm_run = timed_run("stability", zm);
    report(4, "zero-mass ansatz", [&] { return zero_mass_criterion(zm, zm_run); });
    report(5, "diffusion wave", [&] { return diffusion_wave_criterion(zm, zm_run); });
    RunOverrides ablate;
    ablate.ablate_diffusion_wave = true;
    const Timed zm_ablated = timed_run("stability", zm, ablate);
    const Timed stab_run = timed_run("stability", stab);
    report(6, "stability", [&] { return stability_criterion(stab, stab_run, zm_ablated, zm_run, zm); });
    report(7, "frame identities", [&] { return frame_criterion(stab_run); });
    report(8, "mode decomposition", [&] { return mode_criterion(trans, config_seed(ConfigView(trans), {})); });
    report(9, "kinetic-fluid consistency", [&] { return kinetic_consistency_criterion(kcons); });
    report(10, "determinism", [&] { return determinism_criterion(stab, stab_run); });
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
