// Command-line driver: riemann, profile, stability, kinetic, sweep, report.

#include <chrono>
#include <iostream>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "shockstab/io.hpp"
#include "shockstab/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << shockstab::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

struct Options {
  std::string config;
  std::string out;
  long long seed = -1;
  bool ablate = false;
  std::string fidelity;
  std::string transverse;
};

shockstab::RunOverrides overrides_from(const Options& opt) {
  shockstab::RunOverrides o;
  if (opt.seed >= 0) o.seed = static_cast<std::uint64_t>(opt.seed);
  o.ablate_diffusion_wave = opt.ablate;
  if (!opt.fidelity.empty()) o.fidelity = opt.fidelity;
  if (!opt.transverse.empty()) {
    static const std::regex re(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(opt.transverse, m, re))
      throw shockstab::Error(shockstab::ErrorKind::ConfigError, "--transverse expects N2xN3, e.g. 8x8");
    const int n2 = std::stoi(m[1]), n3 = std::stoi(m[2]);
    if (n2 < 1 || n3 < 1) throw shockstab::Error(shockstab::ErrorKind::ConfigError, "--transverse sizes must be >= 1");
    o.transverse = std::make_pair(n2, n3);
  }
  return o;
}

int run_command(const std::string& cmd, const Options& opt) {
  using namespace shockstab;
  if (cmd == "report") {
    if (opt.out.empty()) return report_error("ConfigError", "report needs --out DIR of a finished run", kExitConfig);
    const std::filesystem::path dir(opt.out);
    if (!std::filesystem::exists(dir / "manifest.json"))
      return report_error("ConfigError", "no manifest.json in '" + opt.out + "'", kExitConfig);
    json summary = verify_run(dir);
    if (std::filesystem::exists(dir / "report.json")) summary["report"] = json::parse(read_text_file(dir / "report.json"));
    std::cout << summary.dump(2) << '\n';
    return summary["all_hashes_ok"].get<bool>() ? kExitOk : kExitNumerical;
  }
  if (opt.config.empty()) return report_error("ConfigError", "--config PATH is required", kExitConfig);
  const std::string text = read_text_file(opt.config);
  const json cfg = parse_config_text(text);
  const RunOverrides o = overrides_from(opt);
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutput r = run_scenario(cmd, cfg, o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!opt.out.empty()) write_run(opt.out, cmd, text, cfg, o, r, secs);
  std::cout << r.report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscous two-shock stability toolkit"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"riemann", "profile", "stability", "kinetic", "sweep", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "scenario config (TOML or JSON)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "RNG seed override")->check(CLI::NonNegativeNumber);
    sub->add_flag("--ablate-diffusion-wave", opt.ablate, "drop the diffusion-wave correction");
    sub->add_option("--fidelity", opt.fidelity, "solver fidelity")->check(CLI::IsMember({"ns", "bgk"}));
    sub->add_option("--transverse", opt.transverse, "transverse grid N2xN3");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ConfigError", e.what(), kExitConfig);
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run_command(cmd, opt);
  } catch (const shockstab::Error& e) {
    const int code = e.kind() == shockstab::ErrorKind::ConfigError ? kExitConfig : kExitNumerical;
    return report_error(shockstab::to_string(e.kind()), e.what(), code);
  } catch (const shockstab::json::exception& e) {
    return report_error("ConfigError", e.what(), kExitConfig);
  } catch (const std::exception& e) {
    return report_error("IOError", e.what(), 1);
  }
}
