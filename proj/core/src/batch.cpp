#include "stairclear/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace stairclear {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int prec) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, int trial, PredictionMode mode,
                      const TickSink& ticks) {
  const TrialSetup setup = instantiate(cfg, trial);
  const std::uint64_t seed = trial_seed(cfg.seed, trial);
  Sim sim({setup.staircase}, cfg.ground, setup.objects, cfg.sim, seed);
  WorldModel world = sim.empty_world(cfg.size_limits);
  ExecutorConfig ec = cfg.executor;
  ec.mode = mode;
  Executor exec(ec, sim, world);

  TrialResult result;
  result.trial.trial = trial;
  result.trial.seed = seed;
  result.trial.mode = to_string(mode);
  result.trial.variant = setup.variant;

  exec.survey();

  // Ground truth to tracked id, by best overlap.
  std::vector<int> id_of(setup.objects.size(), -1);
  for (std::size_t i = 0; i < setup.objects.size(); ++i) {
    double best = 0.1;
    for (const TrackedObject& o : world.objects()) {
      if (std::find(id_of.begin(), id_of.end(), o.id) != id_of.end()) continue;
      const double iou = obb_iou(sim.objects()[i].obb, o.obb);
      if (iou > best) {
        best = iou;
        id_of[i] = o.id;
      }
    }
  }
  auto truth_of_id = [&](int id) -> int {
    for (std::size_t i = 0; i < id_of.size(); ++i)
      if (id_of[i] == id && id >= 0) return static_cast<int>(i);
    return -1;
  };

  std::vector<ManipulationTask> plan;
  std::vector<int> task_truth;
  for (const TaskSpec& t : cfg.tasks) {
    int idx = -1;
    for (std::size_t i = 0; i < setup.objects.size(); ++i)
      if (setup.objects[i].name == t.object) idx = static_cast<int>(i);
    task_truth.push_back(idx);
    plan.push_back({idx >= 0 ? id_of[idx] : -1, t.direction, 0});
  }

  exec.on_attempt = [&](const AttemptRecord& a) {
    PushRecord p;
    p.trial = trial;
    p.mode = to_string(mode);
    p.task = a.task_index;
    const int ti = truth_of_id(a.object_id);
    if (ti >= 0) {
      p.object = setup.objects[ti].name;
      p.category = setup.objects[ti].category;
      p.truth = sim.objects()[ti].obb.center;
    } else {
      p.truth = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    p.attempt = a.attempt;
    p.stalled = a.stalled;
    p.prediction_active = a.prediction_active;
    p.predicted = a.predicted.center;
    p.expected_end = a.expected_end;
    p.matched = a.status == FinalizeStatus::Matched;
    if (a.corrected) p.corrected = a.corrected->center;
    p.iou = a.iou;
    p.prediction_error = (p.predicted - p.truth).norm();
    p.contact_truth = a.contact_truth;
    p.contact_detected = a.contact_detected;
    p.ticks_in_contact = a.ticks_in_contact;
    p.ticks_detected_in_contact = a.ticks_detected_in_contact;
    result.pushes.push_back(std::move(p));
  };
  if (ticks) exec.on_tick = [&](const TickRecord& r) { ticks(trial, r); };

  const std::vector<PushOutcome> outcomes = exec.run_task_plan(plan);

  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    TaskRecord tr;
    tr.trial = trial;
    tr.mode = to_string(mode);
    tr.task = static_cast<int>(k);
    tr.object = cfg.tasks[k].object;
    const int ti = task_truth[k];
    if (ti >= 0) {
      tr.category = setup.objects[ti].category;
      tr.movable_truth = sim.objects()[ti].movable;
    }
    tr.outcome = outcomes[k];
    const int id = plan[k].object_id;
    if (ti >= 0 && id >= 0 && world.contains(id))
      tr.tracking_error = (world.get(id).obb.center - sim.objects()[ti].obb.center).norm();
    else
      tr.tracking_error = std::numeric_limits<double>::quiet_NaN();
    const bool tracked = tr.tracking_error <= ec.partial_push_thresh;
    tr.success = (tr.outcome.kind == OutcomeKind::Completed && tracked && tr.movable_truth) ||
                 (tr.outcome.kind == OutcomeKind::ReclassifiedStatic && !tr.movable_truth);
    result.tasks.push_back(std::move(tr));
  }

  result.trial.tasks = static_cast<int>(result.tasks.size());
  for (const auto& t : result.tasks) result.trial.tasks_succeeded += t.success;
  result.trial.success = result.trial.tasks_succeeded == result.trial.tasks;
  result.trial.sim_time = sim.time();
  return result;
}

std::vector<ClassSummary> summarize(const std::vector<TaskRecord>& tasks,
                                    const std::vector<PushRecord>& pushes) {
  std::vector<ClassSummary> out;
  auto slot = [&](const std::string& cat, const std::string& mode) -> ClassSummary& {
    for (auto& s : out)
      if (s.category == cat && s.mode == mode) return s;
    ClassSummary s;
    s.category = cat;
    s.mode = mode;
    out.push_back(s);
    return out.back();
  };
  for (const auto& t : tasks) {
    ClassSummary& s = slot(t.category, t.mode);
    ++s.tasks;
    s.successes += t.success;
  }
  std::map<std::pair<std::string, std::string>, std::vector<double>> errors;
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> ticks;
  for (const auto& p : pushes) {
    ClassSummary& s = slot(p.category, p.mode);
    if (!p.stalled && std::isfinite(p.prediction_error))
      errors[{p.category, p.mode}].push_back(p.prediction_error);
    if (p.contact_truth) {
      ++s.contact_pushes;
      s.detected_pushes += p.contact_detected;
    }
    auto& tk = ticks[{p.category, p.mode}];
    tk.first += p.ticks_in_contact;
    tk.second += p.ticks_detected_in_contact;
  }
  for (auto& s : out) {
    s.success_rate = s.tasks ? static_cast<double>(s.successes) / s.tasks : 0.0;
    const auto& e = errors[{s.category, s.mode}];
    s.pushes = static_cast<int>(e.size());
    if (!e.empty()) {
      double sum = 0.0;
      for (double v : e) sum += v;
      s.prediction_error_mean = sum / e.size();
      double ss = 0.0;
      for (double v : e) ss += (v - s.prediction_error_mean) * (v - s.prediction_error_mean);
      s.prediction_error_std = e.size() > 1 ? std::sqrt(ss / (e.size() - 1)) : 0.0;
    }
    s.contact_recall =
        s.contact_pushes ? static_cast<double>(s.detected_pushes) / s.contact_pushes : 1.0;
    const auto& tk = ticks[{s.category, s.mode}];
    s.tick_recall = tk.first ? static_cast<double>(tk.second) / tk.first : 1.0;
  }
  return out;
}

BatchResult run_batch(const ScenarioConfig& cfg, std::optional<PredictionMode> mode,
                      const TickSink& ticks) {
  const PredictionMode m = mode.value_or(cfg.mode);
  BatchResult out;
  for (int i = 0; i < cfg.trials; ++i) {
    TrialResult r;
    try {
      r = run_trial(cfg, i, m, ticks);
    } catch (const std::exception&) {
      // Keep the batch going; the trial counts as a failure.
      r.trial.trial = i;
      r.trial.seed = trial_seed(cfg.seed, i);
      r.trial.mode = to_string(m);
      r.trial.success = false;
    }
    out.trials.push_back(r.trial);
    out.tasks.insert(out.tasks.end(), r.tasks.begin(), r.tasks.end());
    out.pushes.insert(out.pushes.end(), r.pushes.begin(), r.pushes.end());
  }
  out.summary = summarize(out.tasks, out.pushes);
  return out;
}

CompareResult compare_modes(const ScenarioConfig& cfg) {
  CompareResult r;
  r.feedback = run_batch(cfg, PredictionMode::Feedback);
  r.baseline = run_batch(cfg, PredictionMode::OpenLoopBaseline);
  return r;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials) {
  os << "trial,seed,mode,variant,success,tasks,tasks_succeeded,sim_time\n";
  for (const auto& t : trials)
    os << t.trial << ',' << t.seed << ',' << t.mode << ',' << t.variant << ',' << t.success << ','
       << t.tasks << ',' << t.tasks_succeeded << ',' << num(t.sim_time) << '\n';
}

void write_tasks_csv(std::ostream& os, const std::vector<TaskRecord>& tasks) {
  os << "trial,mode,task,object,class,movable_truth,outcome,retries,stall_time,tracking_error,"
        "success,message\n";
  for (const auto& t : tasks) {
    std::string msg = t.outcome.message;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    os << t.trial << ',' << t.mode << ',' << t.task << ',' << t.object << ',' << t.category << ','
       << t.movable_truth << ',' << to_string(t.outcome.kind) << ',' << t.outcome.retries << ','
       << num(t.outcome.stall_time) << ',' << num(t.tracking_error) << ',' << t.success << ','
       << msg << '\n';
  }
}

void write_pushes_csv(std::ostream& os, const std::vector<PushRecord>& pushes) {
  os << "trial,mode,task,object,class,attempt,stalled,prediction_active,pred_x,pred_y,pred_z,"
        "truth_x,truth_y,truth_z,end_x,end_y,end_z,matched,corr_x,corr_y,corr_z,iou,"
        "prediction_error,contact_truth,contact_detected,ticks_in_contact,ticks_detected\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : pushes) {
    const Vec3 c = p.corrected.value_or(Vec3::Constant(nan));
    os << p.trial << ',' << p.mode << ',' << p.task << ',' << p.object << ',' << p.category << ','
       << p.attempt << ',' << p.stalled << ',' << p.prediction_active << ',' << num(p.predicted.x())
       << ',' << num(p.predicted.y()) << ',' << num(p.predicted.z()) << ',' << num(p.truth.x())
       << ',' << num(p.truth.y()) << ',' << num(p.truth.z()) << ',' << num(p.expected_end.x())
       << ',' << num(p.expected_end.y()) << ',' << num(p.expected_end.z()) << ',' << p.matched
       << ',' << num(c.x()) << ',' << num(c.y()) << ',' << num(c.z()) << ',' << num(p.iou) << ','
       << num(p.prediction_error) << ',' << p.contact_truth << ',' << p.contact_detected << ','
       << p.ticks_in_contact << ',' << p.ticks_detected_in_contact << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<ClassSummary>& summary) {
  os << "class,mode,tasks,successes,success_rate,pushes,prediction_error_mean,"
        "prediction_error_std,contact_pushes,detected_pushes,contact_recall,tick_recall\n";
  for (const auto& s : summary)
    os << s.category << ',' << s.mode << ',' << s.tasks << ',' << s.successes << ','
       << num(s.success_rate) << ',' << s.pushes << ',' << num(s.prediction_error_mean) << ','
       << num(s.prediction_error_std) << ',' << s.contact_pushes << ',' << s.detected_pushes << ','
       << num(s.contact_recall) << ',' << num(s.tick_recall) << '\n';
}

namespace {

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

}  // namespace

void write_summary_txt(std::ostream& os, const std::string& title,
                       const std::vector<ClassSummary>& summary) {
  os << title << '\n';
  os << pad("class", 16) << pad("mode", 10) << lpad("tasks", 6) << lpad("success", 9)
     << lpad("pushes", 8) << lpad("pred err (m)", 18) << lpad("recall", 8) << '\n';
  for (const auto& s : summary)
    os << pad(s.category, 16) << pad(s.mode, 10) << lpad(std::to_string(s.tasks), 6)
       << lpad(fixed(100.0 * s.success_rate, 1) + "%", 9) << lpad(std::to_string(s.pushes), 8)
       << lpad(fixed(s.prediction_error_mean, 3) + " +- " + fixed(s.prediction_error_std, 3), 18)
       << lpad(fixed(s.contact_recall, 2), 8) << '\n';
}

void write_compare_txt(std::ostream& os, const std::string& title, const CompareResult& r) {
  os << title << '\n';
  os << pad("class", 16) << lpad("feedback err", 18) << lpad("baseline err", 18)
     << lpad("fb success", 12) << lpad("bl success", 12) << '\n';
  for (const auto& f : r.feedback.summary) {
    const ClassSummary* b = nullptr;
    for (const auto& s : r.baseline.summary)
      if (s.category == f.category) b = &s;
    auto err = [](const ClassSummary& s) {
      return fixed(s.prediction_error_mean, 3) + " +- " + fixed(s.prediction_error_std, 3);
    };
    os << pad(f.category, 16) << lpad(err(f), 18) << lpad(b ? err(*b) : "-", 18)
       << lpad(fixed(100.0 * f.success_rate, 1) + "%", 12)
       << lpad(b ? fixed(100.0 * b->success_rate, 1) + "%" : "-", 12) << '\n';
  }
}

void write_ticks_header(std::ostream& os) {
  os << "trial,time,foot_x,foot_y,foot_z,phase,residual_norm,contact_detected,contact_truth\n";
}

void write_tick(std::ostream& os, int trial, const TickRecord& t) {
  os << trial << ',' << num(t.time) << ',' << num(t.foot.x()) << ',' << num(t.foot.y()) << ','
     << num(t.foot.z()) << ',' << to_string(t.phase) << ',' << num(t.residual_norm) << ','
     << t.contact_detected << ',' << t.contact_truth << '\n';
}

void write_batch(const std::filesystem::path& dir, const std::string& title,
                 const BatchResult& result, const std::string& suffix) {
  std::filesystem::create_directories(dir);
  const std::string sfx = suffix.empty() ? "" : "_" + suffix;
  auto open = [&](const std::string& stem, const std::string& ext) {
    std::ofstream f(dir / (stem + sfx + ext));
    if (!f) throw std::runtime_error("cannot write " + (dir / (stem + sfx + ext)).string());
    return f;
  };
  {
    auto f = open("trials", ".csv");
    write_trials_csv(f, result.trials);
  }
  {
    auto f = open("tasks", ".csv");
    write_tasks_csv(f, result.tasks);
  }
  {
    auto f = open("pushes", ".csv");
    write_pushes_csv(f, result.pushes);
  }
  {
    auto f = open("summary", ".csv");
    write_summary_csv(f, result.summary);
  }
  {
    auto f = open("summary", ".txt");
    write_summary_txt(f, title, result.summary);
  }
}

}  // namespace stairclear
