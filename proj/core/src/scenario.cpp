#include "stairclear/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stairclear {

double Range::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  return fixed() ? lo : lo + (hi - lo) * r;
}

std::string Diagnostic::str() const {
  std::string s = severity == Severity::Error ? "error" : "warning";
  if (line > 0) s += ": line " + std::to_string(line);
  return s + ": " + message;
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags) {
    if (!s.empty()) s += '\n';
    s += d.str();
  }
  return s;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_messages(diags)), diags_(std::move(diags)) {}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_values(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_number(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

Range to_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) return Range(to_number(s));
  Range r(to_number(s.substr(0, dots)), to_number(s.substr(dots + 2)));
  if (r.lo > r.hi) throw std::invalid_argument("range '" + s + "' has lower bound above upper");
  return r;
}

Range single_range(const std::string& v) {
  const auto parts = split_values(v);
  if (parts.size() != 1) throw std::invalid_argument("expected one value or range");
  return to_range(parts[0]);
}

double single_number(const std::string& v) {
  const auto parts = split_values(v);
  if (parts.size() != 1) throw std::invalid_argument("expected one number");
  return to_number(parts[0]);
}

long long single_int(const std::string& v) {
  const double d = single_number(v);
  if (d != std::floor(d)) throw std::invalid_argument("expected an integer, got '" + trim(v) + "'");
  return static_cast<long long>(d);
}

bool to_bool(const std::string& v) {
  std::string s = trim(v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<double> numbers(const std::string& v, std::size_t n) {
  const auto parts = split_values(v);
  if (n && parts.size() != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " numbers, got " +
                                std::to_string(parts.size()));
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(to_number(p));
  return out;
}

void positive(double v, const char* what) {
  if (!(v > 0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

void positive(const Range& r, const char* what) {
  if (!(r.lo > 0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

void unit_interval(const Range& r, const char* what) {
  if (r.lo < 0 || r.hi > 1) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

using Handler = std::function<void(const std::string&)>;
using Section = std::map<std::string, Handler>;

}  // namespace

ScenarioConfig parse_scenario(std::istream& in, std::vector<Diagnostic>& diags) {
  ScenarioConfig cfg;
  int line_no = 0;
  auto error = [&](int line, const std::string& m) {
    diags.push_back({Diagnostic::Severity::Error, line, m});
  };
  auto warning = [&](int line, const std::string& m) {
    diags.push_back({Diagnostic::Severity::Warning, line, m});
  };

  std::string section;
  Section handlers;
  bool ground_seen = false;

  auto run_section = [&]() -> Section {
    return {
        {"name", [&](const std::string& v) { cfg.name = trim(v); }},
        {"trials",
         [&](const std::string& v) {
           const auto n = single_int(v);
           if (n < 1) throw std::invalid_argument("run.trials must be >= 1");
           cfg.trials = static_cast<int>(n);
         }},
        {"seed",
         [&](const std::string& v) {
           const auto n = single_int(v);
           if (n < 0) throw std::invalid_argument("run.seed must be >= 0");
           cfg.seed = static_cast<std::uint64_t>(n);
         }},
        {"mode",
         [&](const std::string& v) {
           const std::string m = trim(v);
           if (m == "feedback") cfg.mode = PredictionMode::Feedback;
           else if (m == "baseline") cfg.mode = PredictionMode::OpenLoopBaseline;
           else throw std::invalid_argument("run.mode must be feedback or baseline");
         }},
        {"size_limits",
         [&](const std::string& v) {
           const auto n = numbers(v, 3);
           for (double x : n) positive(x, "run.size_limits");
           cfg.size_limits = Vec3(n[0], n[1], n[2]);
         }},
    };
  };
  auto staircase_section = [&](StaircaseSpec& s) -> Section {
    return {
        {"steps",
         [&s](const std::string& v) {
           const auto n = single_int(v);
           if (n < 1) throw std::invalid_argument("staircase.steps must be >= 1");
           s.num_steps = static_cast<int>(n);
         }},
        {"tread_depth", [&s](const std::string& v) { s.tread_depth = single_range(v); positive(s.tread_depth, "staircase.tread_depth"); }},
        {"riser_height", [&s](const std::string& v) { s.riser_height = single_range(v); positive(s.riser_height, "staircase.riser_height"); }},
        {"width", [&s](const std::string& v) { s.width = single_range(v); positive(s.width, "staircase.width"); }},
        {"origin", [&s](const std::string& v) { const auto n = numbers(v, 3); s.origin = Vec3(n[0], n[1], n[2]); }},
        {"yaw", [&s](const std::string& v) { s.yaw = single_number(v); }},
        {"wall_left", [&s](const std::string& v) { s.wall_left = to_bool(v); }},
        {"wall_right", [&s](const std::string& v) { s.wall_right = to_bool(v); }},
    };
  };
  auto ground_section = [&]() -> Section {
    return {
        {"height", [&](const std::string& v) { cfg.ground.height = single_number(v); }},
        {"min", [&](const std::string& v) { const auto n = numbers(v, 2); cfg.ground.min = Vec2(n[0], n[1]); }},
        {"max", [&](const std::string& v) { const auto n = numbers(v, 2); cfg.ground.max = Vec2(n[0], n[1]); }},
    };
  };
  auto sensor_section = [&]() -> Section {
    SensorModel& s = cfg.sim.sensor;
    return {
        {"hfov_deg",
         [&s](const std::string& v) {
           const double d = single_number(v);
           if (!(d > 0 && d < 180)) throw std::invalid_argument("sensor.hfov_deg must be in (0, 180)");
           s.hfov = d * 3.14159265358979323846 / 180.0;
         }},
        {"range", [&s](const std::string& v) { s.range = single_number(v); positive(s.range, "sensor.range"); }},
        {"noise",
         [&s](const std::string& v) {
           s.noise_sigma = single_number(v);
           if (s.noise_sigma < 0) throw std::invalid_argument("sensor.noise must be >= 0");
         }},
        {"object_spacing", [&s](const std::string& v) { s.object_spacing = single_number(v); positive(s.object_spacing, "sensor.object_spacing"); }},
        {"surface_spacing", [&s](const std::string& v) { s.surface_spacing = single_number(v); positive(s.surface_spacing, "sensor.surface_spacing"); }},
        {"camera_height", [&s](const std::string& v) { s.camera_height = single_number(v); positive(s.camera_height, "sensor.camera_height"); }},
        {"survey_height", [&s](const std::string& v) { s.survey_height = single_number(v); positive(s.survey_height, "sensor.survey_height"); }},
        {"survey_distance", [&s](const std::string& v) { s.survey_distance = single_number(v); }},
        {"hide_target_when_pushing", [&s](const std::string& v) { s.hide_target_when_pushing = to_bool(v); }},
    };
  };
  auto executor_section = [&]() -> Section {
    ExecutorConfig& e = cfg.executor;
    auto pos = [](double& field, const char* name) {
      return [&field, name](const std::string& v) {
        field = single_number(v);
        positive(field, name);
      };
    };
    return {
        {"partial_push_thresh", pos(e.partial_push_thresh, "executor.partial_push_thresh")},
        {"stall_window", pos(e.stall_window, "executor.stall_window")},
        {"stall_motion_eps", pos(e.stall_motion_eps, "executor.stall_motion_eps")},
        {"foot_speed", pos(e.foot_speed, "executor.foot_speed")},
        {"standoff", pos(e.standoff, "executor.standoff")},
        {"lift_height", pos(e.lift_height, "executor.lift_height")},
        {"resolution", pos(e.planning.resolution, "executor.resolution")},
        {"inflate",
         [&e](const std::string& v) {
           e.planning.inflate = single_number(v);
           if (e.planning.inflate < 0) throw std::invalid_argument("executor.inflate must be >= 0");
         }},
        {"iou_min",
         [&e](const std::string& v) {
           e.tracking.iou_min = single_number(v);
           if (!(e.tracking.iou_min > 0 && e.tracking.iou_min <= 1))
             throw std::invalid_argument("executor.iou_min must be in (0, 1]");
         }},
        {"max_retries",
         [&e](const std::string& v) {
           const auto n = single_int(v);
           if (n < 0) throw std::invalid_argument("executor.max_retries must be >= 0");
           e.max_retries = static_cast<int>(n);
         }},
        {"dt", pos(cfg.sim.dt, "executor.dt")},
        {"capability_mass", pos(cfg.sim.capability_mass, "executor.capability_mass")},
        {"force_cap", pos(cfg.sim.force_cap, "executor.force_cap")},
        {"push_preload",
         [&](const std::string& v) {
           cfg.sim.push_preload = single_number(v);
           if (cfg.sim.push_preload < 0) throw std::invalid_argument("executor.push_preload must be >= 0");
         }},
        {"drift_xy",
         [&](const std::string& v) {
           cfg.sim.drift.sigma_xy = single_number(v);
           if (cfg.sim.drift.sigma_xy < 0) throw std::invalid_argument("executor.drift_xy must be >= 0");
         }},
        {"drift_yaw",
         [&](const std::string& v) {
           cfg.sim.drift.sigma_yaw = single_number(v);
           if (cfg.sim.drift.sigma_yaw < 0) throw std::invalid_argument("executor.drift_yaw must be >= 0");
         }},
    };
  };
  auto contact_section = [&]() -> Section {
    return {
        {"threshold", [&](const std::string& v) { cfg.executor.contact_threshold = single_number(v); positive(cfg.executor.contact_threshold, "contact.threshold"); }},
        {"sustain", [&](const std::string& v) { cfg.executor.contact_sustain = single_number(v); positive(cfg.executor.contact_sustain, "contact.sustain"); }},
        {"torque_noise",
         [&](const std::string& v) {
           cfg.sim.torque_noise = single_number(v);
           if (cfg.sim.torque_noise < 0) throw std::invalid_argument("contact.torque_noise must be >= 0");
         }},
        {"link_lengths",
         [&](const std::string& v) {
           const auto n = numbers(v, 3);
           for (double x : n) positive(x, "contact.link_lengths");
           cfg.sim.leg.link_lengths = Vec3(n[0], n[1], n[2]);
           cfg.sim.leg.com_offsets = 0.5 * cfg.sim.leg.link_lengths;
         }},
        {"link_masses",
         [&](const std::string& v) {
           const auto n = numbers(v, 3);
           for (double x : n) positive(x, "contact.link_masses");
           cfg.sim.leg.link_masses = Vec3(n[0], n[1], n[2]);
         }},
    };
  };
  auto object_section = [&](ObjectSpec& o) -> Section {
    return {
        {"name", [&o](const std::string& v) { o.name = trim(v); }},
        {"class", [&o](const std::string& v) { o.category = trim(v); }},
        {"shape",
         [&o](const std::string& v) {
           const std::string s = trim(v);
           if (s == "box") o.shape = Shape::Box;
           else if (s == "cylinder") o.shape = Shape::Cylinder;
           else throw std::invalid_argument("object.shape must be box or cylinder");
         }},
        {"dims",
         [&o](const std::string& v) {
           const auto parts = split_values(v);
           if (parts.size() != 3) throw std::invalid_argument("object.dims expects 3 values");
           for (int i = 0; i < 3; ++i) {
             o.dims[i] = to_range(parts[i]);
             positive(o.dims[i], "object.dims");
           }
         }},
        {"mass", [&o](const std::string& v) { o.mass = single_range(v); positive(o.mass, "object.mass"); }},
        {"movable",
         [&o](const std::string& v) {
           if (trim(v) == "auto") o.movable = -1;
           else o.movable = to_bool(v) ? 1 : 0;
         }},
        {"step",
         [&o](const std::string& v) {
           const auto n = single_int(v);
           if (n < 0) throw std::invalid_argument("object.step must be >= 0");
           o.step = static_cast<int>(n);
         }},
        {"lateral", [&o](const std::string& v) { o.lateral = single_range(v); unit_interval(o.lateral, "object.lateral"); }},
        {"depth", [&o](const std::string& v) { o.depth = single_range(v); unit_interval(o.depth, "object.depth"); }},
        {"slip_probability",
         [&o](const std::string& v) {
           o.slip_probability = single_number(v);
           unit_interval(Range(o.slip_probability), "object.slip_probability");
         }},
        {"slip_fraction", [&o](const std::string& v) { o.slip_fraction = single_range(v); unit_interval(o.slip_fraction, "object.slip_fraction"); }},
        {"slip_schedule",
         [&o](const std::string& v) {
           o.slip_schedule = numbers(v, 0);
           for (double f : o.slip_schedule) unit_interval(Range(f), "object.slip_schedule");
         }},
        {"friction", [&o](const std::string& v) { o.friction = single_range(v); positive(o.friction, "object.friction"); }},
        {"force_scale", [&o](const std::string& v) { o.force_scale = single_number(v); positive(o.force_scale, "object.force_scale"); }},
    };
  };
  auto task_section = [&](TaskSpec& t) -> Section {
    return {
        {"object", [&t](const std::string& v) { t.object = trim(v); }},
        {"direction",
         [&t](const std::string& v) {
           const std::string d = trim(v);
           if (d == "left") t.direction = PushDirection::Left;
           else if (d == "right") t.direction = PushDirection::Right;
           else throw std::invalid_argument("task.direction must be left or right");
         }},
    };
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        error(line_no, "malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section == "run") handlers = run_section();
      else if (section == "staircase") {
        cfg.staircases.emplace_back();
        cfg.staircases.back().line = line_no;
        handlers = staircase_section(cfg.staircases.back());
      } else if (section == "ground") {
        ground_seen = true;
        handlers = ground_section();
      } else if (section == "sensor") handlers = sensor_section();
      else if (section == "executor") handlers = executor_section();
      else if (section == "contact") handlers = contact_section();
      else if (section == "object") {
        cfg.objects.emplace_back();
        cfg.objects.back().line = line_no;
        handlers = object_section(cfg.objects.back());
      } else if (section == "task") {
        cfg.tasks.emplace_back();
        cfg.tasks.back().line = line_no;
        handlers = task_section(cfg.tasks.back());
      } else {
        error(line_no, "unknown section [" + section + "]");
        handlers.clear();
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      error(line_no, "expected 'key = value', got '" + line + "'");
      continue;
    }
    if (section.empty()) {
      error(line_no, "key outside of any section");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto h = handlers.find(key);
    if (h == handlers.end()) {
      std::string best;
      std::size_t best_d = 3;
      for (const auto& [k, _] : handlers) {
        const std::size_t d = levenshtein(key, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      std::string msg = "unknown key '" + key + "' in [" + section + "]";
      if (!best.empty()) msg += "; did you mean '" + best + "'?";
      warning(line_no, msg);
      continue;
    }
    if (value.empty()) {
      error(line_no, section + "." + key + ": missing value");
      continue;
    }
    try {
      h->second(value);
    } catch (const std::invalid_argument& e) {
      std::string m = e.what();
      if (m.find(section + ".") != 0) m = section + "." + key + ": " + m;
      error(line_no, m);
    }
  }

  // Cross-section checks.
  if (cfg.staircases.empty()) error(0, "at least one [staircase] section is required");
  if (ground_seen && !(cfg.ground.max.x() > cfg.ground.min.x() && cfg.ground.max.y() > cfg.ground.min.y()))
    error(0, "ground.min must be below ground.max on both axes");
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    const ObjectSpec& o = cfg.objects[i];
    if (o.name.empty()) error(o.line, "object.name is required");
    for (std::size_t j = 0; j < i; ++j)
      if (!o.name.empty() && cfg.objects[j].name == o.name)
        error(o.line, "duplicate object name '" + o.name + "'");
    if (o.shape == Shape::Cylinder && (o.dims[0].lo != o.dims[1].lo || o.dims[0].hi != o.dims[1].hi))
      error(o.line, "object.dims: a cylinder needs equal x and y diameters");
    for (const StaircaseSpec& s : cfg.staircases)
      if (o.step > s.num_steps)
        error(o.line, "object.step " + std::to_string(o.step) + " exceeds staircase.steps " +
                          std::to_string(s.num_steps) + " (line " + std::to_string(s.line) + ")");
    if (o.category.empty()) cfg.objects[i].category = o.name;
  }
  if (cfg.tasks.empty() && !cfg.objects.empty()) warning(0, "no [task] sections; trials will only survey");
  for (const TaskSpec& t : cfg.tasks) {
    const bool known = std::any_of(cfg.objects.begin(), cfg.objects.end(),
                                   [&](const ObjectSpec& o) { return o.name == t.object; });
    if (!known) error(t.line, "task.object '" + t.object + "' does not name an [object]");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path, std::vector<Diagnostic>* warnings) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({{Diagnostic::Severity::Error, 0, "cannot open " + path}});
  std::vector<Diagnostic> diags;
  ScenarioConfig cfg = parse_scenario(in, diags);
  std::vector<Diagnostic> errors;
  for (const auto& d : diags) {
    if (d.severity == Diagnostic::Severity::Error) errors.push_back(d);
    else if (warnings) warnings->push_back(d);
  }
  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return cfg;
}

std::vector<Diagnostic> validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {{Diagnostic::Severity::Error, 0, "cannot open " + path}};
  std::vector<Diagnostic> diags;
  const ScenarioConfig cfg = parse_scenario(in, diags);
  const bool has_error = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
  if (!has_error) {
    // Nominal placement must be physically consistent.
    for (int v = 0; v < static_cast<int>(cfg.staircases.size()); ++v) {
      try {
        instantiate(cfg, v);
      } catch (const std::invalid_argument& e) {
        diags.push_back({Diagnostic::Severity::Error, cfg.staircases[v].line, e.what()});
      }
    }
  }
  return diags;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  // splitmix64 of the pair.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrialSetup instantiate(const ScenarioConfig& cfg, int trial) {
  if (cfg.staircases.empty()) throw std::invalid_argument("scenario has no staircase");
  std::seed_seq seq{static_cast<std::uint32_t>(trial_seed(cfg.seed, trial)),
                    static_cast<std::uint32_t>(trial_seed(cfg.seed, trial) >> 32), 5u};
  std::mt19937_64 rng(seq);

  TrialSetup setup;
  setup.variant = trial % static_cast<int>(cfg.staircases.size());
  const StaircaseSpec& spec = cfg.staircases[setup.variant];
  Staircase& s = setup.staircase;
  s.id = 0;
  s.num_steps = spec.num_steps;
  s.tread_depth = spec.tread_depth.sample(rng);
  s.riser_height = spec.riser_height.sample(rng);
  s.width = spec.width.sample(rng);
  s.origin = spec.origin;
  s.yaw = spec.yaw;
  s.wall_left = spec.wall_left;
  s.wall_right = spec.wall_right;
  s.validate();

  for (const ObjectSpec& o : cfg.objects) {
    ObjectTruth t;
    t.name = o.name;
    t.category = o.category.empty() ? o.name : o.category;
    t.shape = o.shape;
    for (int i = 0; i < 3; ++i) t.dims[i] = o.dims[i].sample(rng);
    if (t.shape == Shape::Cylinder) t.dims[1] = t.dims[0];
    t.mass = o.mass.sample(rng);
    if (o.movable >= 0) t.movable = o.movable == 1;
    const double lateral = o.lateral.sample(rng);
    const double depth = o.depth.sample(rng);
    t.friction_min = o.friction.lo;
    t.friction_max = o.friction.hi;
    t.slip.probability = o.slip_probability;
    t.slip.fraction_min = o.slip_fraction.lo;
    t.slip.fraction_max = o.slip_fraction.hi;
    t.slip.schedule = o.slip_schedule;
    t.force_scale = o.force_scale;
    t.yaw = s.yaw;

    const double hx = 0.5 * t.dims.x(), hy = 0.5 * t.dims.y();
    const double s_coord = hx + lateral * (s.width - 2.0 * hx);
    // On the ground, depth is the gap to the first riser as a fraction of 0.5 m.
    const double d_coord = o.step == 0 ? -(hy + 0.05 + 0.5 * depth)
                                       : (o.step - 1) * s.tread_depth + hy +
                                             depth * (s.tread_depth - 2.0 * hy);
    const double base = o.step == 0 ? cfg.ground.height - s.origin.z() : o.step * s.riser_height;
    t.center = s.to_world(Vec3(s_coord, d_coord, base + 0.5 * t.dims.z()));
    if (o.step > 0 && 2.0 * hy > s.tread_depth)
      throw std::invalid_argument("object '" + o.name + "' is deeper than the tread");
    if (2.0 * hx > s.width)
      throw std::invalid_argument("object '" + o.name + "' is wider than the staircase");
    t.validate();
    setup.objects.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < setup.objects.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (penetration_depth(setup.objects[i].box(), setup.objects[j].box()) > 0.01)
        throw std::invalid_argument("objects '" + setup.objects[j].name + "' and '" +
                                    setup.objects[i].name + "' overlap");
  return setup;
}

}  // namespace stairclear
