// stairclear: scenario batch runner.
//
//   stairclear run <scenario> [--seed N] [--trials N] [--mode feedback|baseline] [--out DIR] [--trace]
//   stairclear compare <scenario> [--seed N] [--trials N] [--out DIR]
//   stairclear validate <scenario>...

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "stairclear/batch.hpp"

namespace sc = stairclear;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string mode;
};

sc::ScenarioConfig load(const std::string& path, const Overrides& o) {
  std::vector<sc::Diagnostic> warnings;
  sc::ScenarioConfig cfg = sc::load_scenario(path, &warnings);
  for (const auto& w : warnings) std::cerr << path << ":" << w.str() << "\n";
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) {
    if (*o.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    cfg.trials = *o.trials;
  }
  if (o.mode == "feedback")
    cfg.mode = sc::PredictionMode::Feedback;
  else if (o.mode == "baseline")
    cfg.mode = sc::PredictionMode::OpenLoopBaseline;
  return cfg;
}

int cmd_run(const std::string& path, const Overrides& o, const std::string& out, bool trace) {
  const sc::ScenarioConfig cfg = load(path, o);
  std::filesystem::create_directories(out);
  std::ofstream ticks;
  sc::TickSink sink;
  if (trace) {
    ticks.open(std::filesystem::path(out) / "ticks.csv");
    sc::write_ticks_header(ticks);
    sink = [&](int trial, const sc::TickRecord& t) { sc::write_tick(ticks, trial, t); };
  }
  const sc::BatchResult r = sc::run_batch(cfg, std::nullopt, sink);
  const std::string title = cfg.name + " (" + sc::to_string(cfg.mode) + ", " +
                            std::to_string(cfg.trials) + " trials, seed " +
                            std::to_string(cfg.seed) + ")";
  sc::write_batch(out, title, r);
  sc::write_summary_txt(std::cout, title, r.summary);
  return 0;
}

int cmd_compare(const std::string& path, const Overrides& o, const std::string& out) {
  const sc::ScenarioConfig cfg = load(path, o);
  const sc::CompareResult r = sc::compare_modes(cfg);
  const std::string title = cfg.name + " (" + std::to_string(cfg.trials) + " paired trials, seed " +
                            std::to_string(cfg.seed) + ")";
  sc::write_batch(out, title + " feedback", r.feedback, "feedback");
  sc::write_batch(out, title + " baseline", r.baseline, "baseline");
  std::ofstream f(std::filesystem::path(out) / "compare.txt");
  sc::write_compare_txt(f, title, r);
  sc::write_compare_txt(std::cout, title, r);
  return 0;
}

int cmd_validate(const std::vector<std::string>& paths) {
  int bad = 0;
  for (const auto& p : paths) {
    const auto diags = sc::validate_config(p);
    bool err = false;
    for (const auto& d : diags) {
      std::cerr << p << ":" << d.str() << "\n";
      err = err || d.severity == sc::Diagnostic::Severity::Error;
    }
    std::cout << p << ": " << (err ? "invalid" : "ok") << "\n";
    bad += err;
  }
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stairclear: staircase clutter clearing simulator"};
  app.require_subcommand(1);

  Overrides o;
  std::string scenario;
  std::string out = "out";
  bool trace = false;
  std::vector<std::string> paths;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (overrides the file)");
    sub->add_option("--trials", o.trials, "number of trials (overrides the file)");
    sub->add_option("--out", out, "output directory")->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "run a batch of trials");
  add_common(run);
  run->add_option("--mode", o.mode, "prediction mode")
      ->check(CLI::IsMember({"feedback", "baseline"}));
  run->add_flag("--trace", trace, "also write per-tick records to ticks.csv");

  CLI::App* compare = app.add_subcommand("compare", "run the same seeds in both modes");
  add_common(compare);

  CLI::App* validate = app.add_subcommand("validate", "check scenario files");
  validate->add_option("scenarios", paths, "scenario files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, o, out, trace);
    if (*compare) return cmd_compare(scenario, o, out);
    if (*validate) return cmd_validate(paths);
  } catch (const sc::ScenarioError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << scenario << ":" << d.str() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
