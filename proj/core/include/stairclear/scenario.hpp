#pragma once

#include "stairclear/executor.hpp"
#include "stairclear/sim.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stairclear {

/// Closed interval; lo == hi is a fixed value.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  Range() = default;
  Range(double v) : lo(v), hi(v) {}  // NOLINT: a plain number is a degenerate range
  Range(double a, double b) : lo(a), hi(b) {}

  bool fixed() const { return lo == hi; }
  double mid() const { return 0.5 * (lo + hi); }
  /// Always consumes one draw so streams stay aligned across configs.
  double sample(std::mt19937_64& rng) const;
};

struct StaircaseSpec {
  int line = 0;
  int num_steps = 5;
  Range tread_depth = 0.30;
  Range riser_height = 0.17;
  Range width = 1.2;
  Vec3 origin = Vec3::Zero();
  double yaw = 0.0;
  bool wall_left = false;
  bool wall_right = false;
};

struct ObjectSpec {
  int line = 0;
  std::string name;
  std::string category;
  Shape shape = Shape::Box;
  Range dims[3] = {0.3, 0.3, 0.3};
  Range mass = 2.0;
  /// -1 auto (capability mass), 0 immovable, 1 movable.
  int movable = -1;
  /// Tread index; 0 is the ground in front of the first step.
  int step = 1;
  /// Position across the tread as a fraction of the width.
  Range lateral = 0.5;
  /// Position along the tread as a fraction of its depth.
  Range depth = 0.5;
  double slip_probability = 0.0;
  Range slip_fraction = 1.0;
  std::vector<double> slip_schedule;
  Range friction = 0.5;
  double force_scale = 1.0;
};

struct TaskSpec {
  int line = 0;
  std::string object;
  PushDirection direction = PushDirection::Right;
};

struct ScenarioConfig {
  std::string name = "scenario";
  int trials = 1;
  std::uint64_t seed = 0;
  PredictionMode mode = PredictionMode::Feedback;
  Vec3 size_limits = kDefaultSizeLimits;
  /// Geometry variants; trial i uses variant i mod count.
  std::vector<StaircaseSpec> staircases;
  GroundPlane ground;
  SimParams sim;
  ExecutorConfig executor;
  std::vector<ObjectSpec> objects;
  std::vector<TaskSpec> tasks;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  int line = 0;
  std::string message;

  std::string str() const;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// Parses the scenario text format. Syntax and invariant errors are collected;
/// unknown keys produce warnings. Does not throw; check for Error severities.
ScenarioConfig parse_scenario(std::istream& in, std::vector<Diagnostic>& diags);
/// Throws ScenarioError if any error was found.
ScenarioConfig load_scenario(const std::string& path, std::vector<Diagnostic>* warnings = nullptr);
/// Diagnostics only, without building anything.
std::vector<Diagnostic> validate_config(const std::string& path);

std::size_t levenshtein(const std::string& a, const std::string& b);

/// Concrete world for one trial.
struct TrialSetup {
  int variant = 0;
  Staircase staircase;
  std::vector<ObjectTruth> objects;
};

/// Per-trial seed derived from the master seed; shared by both prediction modes.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Samples ranges and places objects. Throws std::invalid_argument when
/// objects overlap or leave their tread.
TrialSetup instantiate(const ScenarioConfig& cfg, int trial);

}  // namespace stairclear
