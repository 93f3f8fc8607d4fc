// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "stairclear/batch.hpp"
#include "stairclear/contact.hpp"
#include "stairclear/perception.hpp"
#include "stairclear/planning.hpp"
#include "stairclear/primitives.hpp"
#include "stairclear/scenario.hpp"
#include "stairclear/sim.hpp"
#include "stairclear/tracking.hpp"

#include "oracles.hpp"
#include "scenes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace stairclear;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario(const std::string& name) {
  return std::string(STAIRCLEAR_SCENARIO_DIR) + "/" + name;
}

const ClassSummary* find_class(const BatchResult& r, const std::string& category) {
  for (const auto& s : r.summary)
    if (s.category == category) return &s;
  return nullptr;
}

struct ClassRun {
  std::string file;
  std::string category;
  double slip_probability = 0.0;
  CompareResult result;
  double seconds = 0.0;
};

// Class compares are shared by criteria 1, 2 and 10.
std::map<std::string, ClassRun>& class_runs() {
  static std::map<std::string, ClassRun> runs = [] {
    std::map<std::string, ClassRun> out;
    for (const char* file : {"crate.scn", "box.scn", "paint_can.scn", "frame.scn"}) {
      const ScenarioConfig cfg = load_scenario(scenario(file));
      ClassRun run;
      run.file = file;
      run.category = cfg.objects.at(0).category;
      run.slip_probability = cfg.objects.at(0).slip_probability;
      const auto t0 = std::chrono::steady_clock::now();
      run.result = compare_modes(cfg);
      run.seconds = seconds_since(t0);
      out[run.category] = std::move(run);
    }
    return out;
  }();
  return runs;
}

Verdict prediction_ratio() {
  const ClassRun& crate = class_runs().at("crate");
  const ClassSummary* fb = find_class(crate.result.feedback, "crate");
  const ClassSummary* bl = find_class(crate.result.baseline, "crate");
  if (!fb || !bl) return {false, "crate class missing from summary"};
  const int trials = static_cast<int>(crate.result.feedback.trials.size());
  const bool ok = trials == 40 && fb->prediction_error_mean <= 0.2 * bl->prediction_error_mean &&
                  crate.seconds < 60.0;
  return {ok, fmt("trials=%d feedback=%.4f baseline=%.4f ratio=%.3f (<= 0.2) runtime=%.1fs", trials,
                  fb->prediction_error_mean, bl->prediction_error_mean,
                  fb->prediction_error_mean / bl->prediction_error_mean, crate.seconds)};
}

Verdict success_ordering() {
  bool ok = true;
  double total = 0.0;
  std::string detail;
  for (const auto& [category, run] : class_runs()) {
    const ClassSummary* fb = find_class(run.result.feedback, category);
    const ClassSummary* bl = find_class(run.result.baseline, category);
    if (!fb || !bl || fb->tasks != 40 || bl->tasks != 40) return {false, category + ": missing or short run"};
    // Integer comparison of counts; tasks are equal in both modes.
    const int gap = fb->successes - bl->successes;
    const bool needs_gap = run.slip_probability >= 0.5;
    const bool class_ok = gap >= 0 && (!needs_gap || 100 * gap >= 20 * fb->tasks);
    ok = ok && class_ok;
    total += run.seconds;
    detail += fmt("%s %d/%d vs %d/%d%s; ", category.c_str(), fb->successes, fb->tasks,
                  bl->successes, bl->tasks, class_ok ? "" : " (FAIL)");
  }
  ok = ok && total < 300.0;
  return {ok, detail + fmt("runtime=%.1fs", total)};
}

Verdict immovable_reclassification() {
  const ScenarioConfig cfg = load_scenario(scenario("multi_object.scn"));
  if (cfg.trials != 20 || cfg.tasks.size() != 2) return {false, "multi_object must have 20 trials and 2 tasks"};
  int good = 0;
  double min_stall = 1e9;
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialResult r = run_trial(cfg, t, PredictionMode::Feedback);
    if (r.tasks.size() != 2) continue;
    const auto& a = r.tasks[0].outcome;
    const auto& b = r.tasks[1].outcome;
    if (a.kind == OutcomeKind::ReclassifiedStatic) min_stall = std::min(min_stall, a.stall_time);
    if (a.kind == OutcomeKind::ReclassifiedStatic && b.kind == OutcomeKind::Completed &&
        a.stall_time >= 5.0)
      ++good;
  }
  return {good == cfg.trials, fmt("%d/%d trials [ReclassifiedStatic, Completed], min stall %.3fs",
                                  good, cfg.trials, min_stall)};
}

Verdict dynamics_oracles() {
  SimParams p;
  p.torque_noise = 0.0;
  Sim sim({Staircase{}}, GroundPlane{}, {}, p, 1);
  const LegModel& m = sim.params().leg;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), rate(-3, 3),
      force(-80, 80);
  double worst_res = 0.0, worst_lag = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q(ang(rng), ang(rng), ang(rng)), qd(rate(rng), rate(rng), rate(rng));
    const Vec3 qdd = 5.0 * Vec3(rate(rng), rate(rng), rate(rng));
    const Vec2 f(force(rng), force(rng));
    const Vec3 r = residual(sim.measured_torques(q, qd, qdd, f), m, q, qd, qdd);
    worst_res = std::max(worst_res, (r - foot_jacobian(m, q).transpose() * f).cwiseAbs().maxCoeff());
    const Vec3 lag = oracle::lagrangian_torques(m, q, qd, qdd);
    worst_lag = std::max(worst_lag, (inverse_dynamics(m, q, qd, qdd) - lag).cwiseAbs().maxCoeff());
  }
  return {worst_res <= 1e-9 && worst_lag <= 1e-6,
          fmt("1000 states: max |r - J^T F| = %.2e, max |ID - Lagrangian| = %.2e", worst_res,
              worst_lag)};
}

Verdict astar_optimality() {
  std::mt19937_64 rng(15);
  std::bernoulli_distribution fill(0.2);
  std::uniform_int_distribution<int> pick(0, 14);
  int equal = 0, reachable = 0;
  for (int t = 0; t < 500; ++t) {
    VoxelGrid g(Vec3::Zero(), 0.025, {15, 15, 15});
    for (std::size_t i = 0; i < g.size(); ++i) g.set(g.from_linear(i), fill(rng));
    const Voxel s{pick(rng), pick(rng), pick(rng)}, e{pick(rng), pick(rng), pick(rng)};
    g.set(s, false);
    g.set(e, false);
    const double want = oracle::dijkstra_cost(g, s, e);
    double got = std::numeric_limits<double>::infinity();
    try {
      got = astar(g, s, e).cost;
    } catch (const PlanningError&) {
    }
    if (std::isfinite(want)) ++reachable;
    if (got == want) ++equal;
  }
  return {equal == 500, fmt("%d/500 grids with identical cost (%d reachable)", equal, reachable)};
}

Verdict primitive_maximality() {
  std::mt19937_64 rng(6);
  const PrimitiveParams pp;
  int prims = 0, bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto sc = scenes::random_scene(rng, 4, 0.02);
    WorldModel w = scenes::exact_world(sc);
    for (const auto& obj : w.objects()) {
      auto ok = [&](const Obb& b) {
        return oracle::collision_free(b, w, obj.id, pp.collision_tol) &&
               oracle::supported(b, w, pp.support_height_tol);
      };
      for (const auto& p : generate_primitives(obj, w, pp)) {
        ++prims;
        const double len = p.length();
        bool good = true;
        for (double s = 0.0; s <= len; s += 1e-3) good = good && ok(obj.obb.translated(p.axis * s));
        good = good && ok(obj.obb.translated(p.axis * len));
        good = good && !ok(obj.obb.translated(p.axis * (len + 1e-3)));
        bad += !good;
      }
    }
  }
  return {bad == 0 && prims > 0, fmt("%d primitives on 200 scenes, %d violations", prims, bad)};
}

Verdict iou_oracle() {
  const Obb a{Vec3::Zero(), Vec3::Constant(0.5), 0.4};
  const double third = obb_iou(a, a.translated(rotate_yaw(Vec3(0.5, 0, 0), 0.4)));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double yaw = 2 * std::numbers::pi * u(rng);
    const Obb x{Vec3(0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng)),
                Vec3(0.1, 0.1, 0.1) + 0.3 * Vec3(u(rng), u(rng), u(rng)), yaw};
    const Obb y{Vec3(0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng)),
                Vec3(0.1, 0.1, 0.1) + 0.3 * Vec3(u(rng), u(rng), u(rng)), yaw};
    worst = std::max(worst, std::abs(obb_iou(x, y) - oracle::monte_carlo_iou(x, y, 1000000, rng)));
  }
  return {worst <= 0.005 && std::abs(third - 1.0 / 3.0) <= 1e-15,
          fmt("100 pairs: max |exact - MC| = %.4f; offset case %.17g", worst, third)};
}

Verdict perception_closure() {
  std::mt19937_64 rng(8);
  int good = 0, objects = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto sc = scenes::random_scene(rng, 4, 0.1);
    SimParams p;
    p.sensor.noise_sigma = 0.0;
    Sim sim({sc.stair}, sc.ground, sc.objects, p, 1);
    const WorldModel w = sim.empty_world();
    const auto clusters = perceive(sim.render(sim.survey_pose()), w);
    objects += static_cast<int>(sc.objects.size());
    // Every object claims its nearest cluster; a bijection means no merge or split.
    std::vector<int> owner(clusters.size(), -1);
    bool ok = clusters.size() == sc.objects.size();
    for (std::size_t k = 0; ok && k < sc.objects.size(); ++k) {
      std::size_t best = 0;
      double d = 1e9;
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        const double e = (clusters[c].obb.center - sc.objects[k].center).norm();
        if (e < d) d = e, best = c;
      }
      worst = std::max(worst, d);
      ok = owner[best] < 0 && d <= 0.02;
      owner[best] = static_cast<int>(k);
    }
    good += ok;
  }
  return {good == 50, fmt("%d/50 scenes exact (%d objects), max center error %.4f m", good, objects, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "stairclear_acceptance_determinism";
  fs::remove_all(root);
  ScenarioConfig cfg = load_scenario(scenario("multi_object.scn"));
  cfg.trials = 4;
  for (const char* run : {"a", "b"}) {
    fs::create_directories(root / run);
    write_batch(root / run, cfg.name, run_batch(cfg));
  }
  int files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    same += fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  fs::remove_all(root);
  return {files >= 5 && same == files, fmt("%d/%d record files bitwise identical", same, files)};
}

Verdict lightweight_failure() {
  const ClassRun& frame = class_runs().at("frame");
  const ClassRun& crate = class_runs().at("crate");
  const ClassSummary* f = find_class(frame.result.feedback, "frame");
  const ClassSummary* c = find_class(crate.result.feedback, "crate");
  if (!f || !c) return {false, "missing class summary"};
  const bool ok = f->contact_recall < 1.0 &&
                  f->prediction_error_mean > c->prediction_error_mean;
  return {ok, fmt("frame recall=%.3f (< 1), feedback error frame=%.4f > crate=%.4f",
                  f->contact_recall, f->prediction_error_mean, c->prediction_error_mean)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"prediction error ratio", prediction_ratio},
      {"success rate ordering", success_ordering},
      {"immovable reclassification", immovable_reclassification},
      {"residual and dynamics oracles", dynamics_oracles},
      {"A* optimality", astar_optimality},
      {"primitive maximality", primitive_maximality},
      {"IoU oracle", iou_oracle},
      {"perception loop closure", perception_closure},
      {"batch determinism", determinism},
      {"lightweight object failure mode", lightweight_failure},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s C%zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
