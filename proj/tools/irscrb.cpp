#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

#include <irscrb/checks.hpp>
#include <irscrb/harness.hpp>

using namespace irscrb;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kConfig = 3, kNumerical = 4 };

struct Overrides {
  std::string config;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string sc;
  std::string scheme;
};

SweepSpec load(const Overrides& o) {
  SweepSpec s;
  if (!o.config.empty()) s = load_sweep(o.config);
  if (o.has_seed) s.seed = s.base.seed = o.seed;
  if (!o.sc.empty()) s.cases = {parse_case(o.sc)};
  if (!o.scheme.empty()) s.schemes = {parse_scheme(o.scheme)};
  s.validate();
  return s;
}

int cmd_sweep(const Overrides& o, const std::string& out) {
  const SweepSpec s = load(o);
  const auto rows = run_sweep_to(s, out);
  int failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  std::cout << "wrote " << rows.size() << " rows to " << out;
  if (failed) std::cout << " (" << failed << " failed)";
  std::cout << "\n";
  return kOk;
}

int cmd_crb(const Overrides& o, int draw, bool all_schemes) {
  SweepSpec s = load(o);
  if (all_schemes && o.scheme.empty())
    s.schemes = {Scheme::Proposed, Scheme::TransmitOnly, Scheme::ReflectiveOnly, Scheme::PassiveIrs};
  ScenarioConfig cfg = s.base;
  cfg.seed = s.seed;
  const ChannelSet cs = make_channel_set(cfg, static_cast<std::uint64_t>(draw));
  std::cout << std::setprecision(6);
  for (int l = 0; l < cfg.L(); ++l) {
    const auto& t = cs.truth[static_cast<std::size_t>(l)];
    std::cout << "irs " << l << ": theta " << t.doa.theta * 180 / kPi << " deg, phi " << t.doa.phi * 180 / kPi
              << " deg, |beta|^2 " << std::norm(t.beta) << "\n";
  }
  std::cout << std::setprecision(10);
  int numerical = 0;
  for (SensingCase sc : s.cases)
    for (Scheme sch : s.schemes) {
      std::cout << std::left << std::setw(4) << to_string(sc) << std::setw(17) << to_string(sch);
      try {
        const Problem pr = make_problem(cfg, cs, sc);
        AoOptions ao = s.ao;
        ao.seed = ao_seed(s.seed, draw);
        const AoTrace tr = run_benchmark(sch, pr, ao);
        std::cout << "max-crb " << tr.final_max_crb() << "  per-irs";
        for (double v : tr.irs_crb.back()) std::cout << ' ' << v;
        std::cout << "  iters " << tr.outer_iters << "\n";
      } catch (const NumericalError& e) {
        std::cout << "failed: " << e.what() << "\n";
        ++numerical;
      }
    }
  return numerical ? kNumerical : kOk;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& r : checks::core_suite()) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.pass;
  }
  return ok ? kOk : kFailed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRB evaluation and min-max CRB design for multi-IRS sensing"};
  app.require_subcommand(1);
  Overrides ov;
  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", ov.config, "key = value config file")->check(CLI::ExistingFile);
    if (need_config) c->required();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { ov.seed = v, ov.has_seed = true; }, "override the config seed");
    sub->add_option("--case", ov.sc, "sensing case")->check(CLI::IsMember({"bs", "irs"}));
    sub->add_option("--scheme", ov.scheme, "proposed, transmit-only, reflective-only or passive-irs");
  };

  std::string out;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write a CSV");
  add_common(sweep, true);
  sweep->add_option("--out", out, "CSV output path")->required();

  int draw = 0;
  auto* crb_cmd = app.add_subcommand("crb", "optimize one channel draw with every scheme and print the CRBs");
  add_common(crb_cmd, false);
  crb_cmd->add_option("--draw", draw, "channel draw index")->check(CLI::NonNegativeNumber);

  app.add_subcommand("selftest", "run the oracle and invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*sweep) return cmd_sweep(ov, out);
    if (*crb_cmd) return cmd_crb(ov, draw, true);
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const SingularFimError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const InvariantError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
