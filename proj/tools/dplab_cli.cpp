#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dplab/error.hpp"
#include "dplab/field_io.hpp"
#include "dplab/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

dplab::ExperimentConfig default_config(const std::string& experiment) {
  nlohmann::json j = {{"experiment", experiment}};
  if (experiment == "embedding") {
    j["ladder"] = {17, 33, 65};
    j["sample_count"] = 20;
    j["problem"] = {{"t0", 0.0}, {"time_length", 1.0}};
  } else if (experiment == "convergence") {
    j["ladder"] = {21, 41, 81};
  } else {
    j["ladder"] = {17, 33};
    j["params"] = {{"coefficient", {{"kind", "smooth_bump"}, {"a_sup", 1.0}}}};
    j["sigma_list"] = {0.2, 0.35, 0.5, 0.65, 0.8};
    j["solver"] = {{"dt_rule", "intrinsic"}, {"dt_value", 1.0}};
  }
  return dplab::ExperimentConfig::from_json(j);
}

int run(const std::string& experiment, const Options& opt) {
  try {
    auto cfg = opt.config.empty() ? default_config(experiment) : dplab::ExperimentConfig::load(opt.config);
    if (cfg.experiment != experiment) {
      std::cerr << "dplab: config describes experiment '" << cfg.experiment << "', expected '" << experiment << "'\n";
      return 2;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    const std::string out = !opt.out.empty() ? opt.out : (!cfg.output_dir.empty() ? cfg.output_dir : "dplab-out");
    cfg.validate();
    const auto sols = (experiment == "embedding" || experiment == "convergence")
                          ? std::vector<dplab::LevelSolution>{}
                          : dplab::solve_ladder(cfg);
    dplab::ExperimentResult res;
    if (experiment == "embedding") res = dplab::run_embedding(cfg);
    else if (experiment == "convergence") res = dplab::run_convergence(cfg);
    else if (experiment == "solve") res = dplab::run_solve(cfg, sols);
    else if (experiment == "caccioppoli") res = dplab::run_caccioppoli(cfg, sols);
    else if (experiment == "supbound") res = dplab::run_supbound(cfg, sols);
    else res = dplab::run_degiorgi(cfg, sols);
    dplab::write_outputs(res, cfg, out);
    if (experiment == "solve" && !sols.empty())
      dplab::save_field(out + "/solution.field", sols.back().result.u, dplab::FieldFormat::binary);

    const auto failures = res.failures();
    if (!opt.quiet) {
      std::size_t passed = 0;
      for (const auto& c : res.checks) passed += c.passed;
      std::cout << experiment << ": " << res.rows.size() << " rows, " << passed << "/" << res.checks.size()
                << " checks passed, output in " << out << "\n";
      for (const auto& c : res.checks)
        if (!c.passed && !c.hard) std::cout << "  advisory: " << c.name << " " << c.detail << "\n";
      if (res.summary.contains("predicted_blowup_exponent"))
        std::cout << "  predicted blow-up exponent q/(q - p~) = " << res.summary["predicted_blowup_exponent"] << "\n";
    }
    for (const auto& f : failures) std::cerr << "FAILED " << f << "\n";
    return failures.empty() ? 0 : 1;
  } catch (const dplab::Error& e) {
    std::cerr << "dplab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dplab: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degenerate double phase equation lab"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "solve"},
      {"verify-embedding", "embedding"},
      {"verify-caccioppoli", "caccioppoli"},
      {"verify-supbound", "supbound"},
      {"degiorgi-trace", "degiorgi"},
      {"convergence", "convergence"},
  };
  std::string chosen;
  for (const auto& [name, experiment] : commands) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + experiment + " experiment");
    sub->add_option("--config", opt.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_flag("--quiet", opt.quiet, "print failures only");
    sub->callback([&chosen, e = std::string(experiment)] { chosen = e; });
  }
  CLI11_PARSE(app, argc, argv);
  return run(chosen, opt);
}
