#pragma once

#include "stairclear/executor.hpp"
#include "stairclear/scenario.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stairclear {

/// One push attempt with ground truth attached.
struct PushRecord {
  int trial = 0;
  std::string mode;
  int task = 0;
  std::string object;
  std::string category;
  int attempt = 0;
  bool stalled = false;
  bool prediction_active = false;
  Vec3 predicted = Vec3::Zero();
  Vec3 truth = Vec3::Zero();
  Vec3 expected_end = Vec3::Zero();
  bool matched = false;
  std::optional<Vec3> corrected;
  double iou = 0.0;
  /// |predicted - truth|.
  double prediction_error = 0.0;
  bool contact_truth = false;
  bool contact_detected = false;
  std::size_t ticks_in_contact = 0;
  std::size_t ticks_detected_in_contact = 0;
};

struct TaskRecord {
  int trial = 0;
  std::string mode;
  int task = 0;
  std::string object;
  std::string category;
  bool movable_truth = true;
  PushOutcome outcome;
  /// |tracked center - true center| after the task; NaN if never detected.
  double tracking_error = 0.0;
  bool success = false;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string mode;
  int variant = 0;
  bool success = false;
  int tasks = 0;
  int tasks_succeeded = 0;
  double sim_time = 0.0;
};

struct TrialResult {
  TrialRecord trial;
  std::vector<TaskRecord> tasks;
  std::vector<PushRecord> pushes;
};

struct ClassSummary {
  std::string category;
  std::string mode;
  int tasks = 0;
  int successes = 0;
  double success_rate = 0.0;
  /// Over non-stalled pushes.
  int pushes = 0;
  double prediction_error_mean = 0.0;
  double prediction_error_std = 0.0;
  /// Pushes with detected contact over pushes with physical contact.
  int contact_pushes = 0;
  int detected_pushes = 0;
  double contact_recall = 1.0;
  double tick_recall = 1.0;
};

struct BatchResult {
  std::vector<TrialRecord> trials;
  std::vector<TaskRecord> tasks;
  std::vector<PushRecord> pushes;
  std::vector<ClassSummary> summary;
};

using TickSink = std::function<void(int trial, const TickRecord&)>;

/// Runs one trial: survey, map ground truth to tracked ids, execute the task plan.
TrialResult run_trial(const ScenarioConfig& cfg, int trial, PredictionMode mode,
                      const TickSink& ticks = {});

/// Per-class aggregates, ordered by first appearance in `tasks`.
std::vector<ClassSummary> summarize(const std::vector<TaskRecord>& tasks,
                                    const std::vector<PushRecord>& pushes);

/// Runs `cfg.trials` trials in `mode` (defaults to the scenario's mode).
BatchResult run_batch(const ScenarioConfig& cfg, std::optional<PredictionMode> mode = std::nullopt,
                      const TickSink& ticks = {});

struct CompareResult {
  BatchResult feedback;
  BatchResult baseline;
};

/// Same seed set in both modes.
CompareResult compare_modes(const ScenarioConfig& cfg);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials);
void write_tasks_csv(std::ostream& os, const std::vector<TaskRecord>& tasks);
void write_pushes_csv(std::ostream& os, const std::vector<PushRecord>& pushes);
void write_summary_csv(std::ostream& os, const std::vector<ClassSummary>& summary);
void write_summary_txt(std::ostream& os, const std::string& title,
                       const std::vector<ClassSummary>& summary);
void write_compare_txt(std::ostream& os, const std::string& title, const CompareResult& result);
void write_ticks_header(std::ostream& os);
void write_tick(std::ostream& os, int trial, const TickRecord& t);

/// Writes trials.csv, tasks.csv, pushes.csv, summary.csv and summary.txt.
/// With `suffix`, file names become trials_<suffix>.csv and so on.
void write_batch(const std::filesystem::path& dir, const std::string& title,
                 const BatchResult& result, const std::string& suffix = "");

}  // namespace stairclear
