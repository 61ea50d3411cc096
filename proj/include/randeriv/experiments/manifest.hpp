#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "randeriv/operator.hpp"
#include "randeriv/sampling.hpp"
#include "randeriv/types.hpp"

namespace randeriv::experiments {

/// Square lattice of bump centres on [-half_width, half_width]^2, one bump per radius.
struct BumpLattice {
  double step = 0.5;
  double half_width = 2.0;
  std::vector<double> radii{0.5, 1.0};
};

// Metric names accepted under "metrics".
inline const std::set<std::string>& known_metrics() {
  static const std::set<std::string> names{"bump_reference", "bump_initial", "sliced_w1_initial",
                                           "sliced_w1_reference", "modulus"};
  return names;
}

struct ExperimentManifest {
  MeasureSpec measure = UniformCircle{};
  std::vector<std::size_t> n_grid;
  double beta = 2.0;
  ScheduleSpec schedule = ConstantSchedule{1};
  Variant variant = Variant::Flat;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::string> metrics{"bump_reference", "bump_initial", "sliced_w1_initial", "sliced_w1_reference",
                                   "modulus"};
  BumpLattice bump_family;
  std::filesystem::path output_dir = "out";
  std::optional<double> tail_exponent;
  std::optional<double> modulus_moment_B;
  std::size_t sliced_directions = 64;
  // Largest tolerated fraction of (n, trial) tasks whose root solve fails.
  double failure_budget = 0.05;

  bool wants(const std::string& metric) const {
    for (const auto& m : metrics)
      if (m == metric) return true;
    return false;
  }
};

namespace detail {

[[noreturn]] inline void bad_manifest(const std::string& what) { throw Error(ErrorKind::BadManifest, what); }

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) bad_manifest("unknown key '" + key + "' in " + where);
  }
}

inline Complex parse_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  bad_manifest("complex values are numbers or [re, im] pairs");
}

inline MeasureSpec parse_measure(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) bad_manifest("measure needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  MeasureSpec spec;
  if (kind == "uniform_circle") {
    reject_unknown_keys(j, {"kind", "radius"}, "measure");
    spec = UniformCircle{j.value("radius", 1.0)};
  } else if (kind == "uniform_disk") {
    reject_unknown_keys(j, {"kind", "radius"}, "measure");
    spec = UniformDisk{j.value("radius", 1.0)};
  } else if (kind == "gaussian_plane") {
    reject_unknown_keys(j, {"kind", "sigma"}, "measure");
    spec = GaussianPlane{j.value("sigma", 1.0)};
  } else if (kind == "uniform_annulus") {
    reject_unknown_keys(j, {"kind", "r_in", "r_out"}, "measure");
    spec = UniformAnnulus{j.at("r_in").get<double>(), j.at("r_out").get<double>()};
  } else if (kind == "atom_mixture") {
    reject_unknown_keys(j, {"kind", "atoms", "probs"}, "measure");
    AtomMixture mix;
    for (const auto& a : j.at("atoms")) mix.atoms.push_back(parse_complex(a));
    mix.probs = j.at("probs").get<std::vector<double>>();
    spec = std::move(mix);
  } else if (kind == "heavy_tail_radial") {
    reject_unknown_keys(j, {"kind", "c"}, "measure");
    spec = HeavyTailRadial{j.at("c").get<double>()};
  } else {
    bad_manifest("unknown measure kind '" + kind + "'");
  }
  try {
    validate(spec);
  } catch (const Error& e) {
    bad_manifest("measure: " + e.message());
  }
  return spec;
}

inline ScheduleSpec parse_schedule(const nlohmann::json& j) {
  if (j.is_number_integer()) return ConstantSchedule{j.get<int>()};
  if (!j.is_object() || !j.contains("kind")) bad_manifest("schedule needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "k"}, "schedule");
    return ConstantSchedule{j.at("k").get<int>()};
  }
  if (kind == "log_fraction") {
    reject_unknown_keys(j, {"kind", "a"}, "schedule");
    const double a = j.at("a").get<double>();
    if (!(a > 0.0) || !std::isfinite(a)) bad_manifest("log_fraction schedule needs a > 0");
    return LogFractionSchedule{a};
  }
  bad_manifest("unknown schedule kind '" + kind + "'");
}

}  // namespace detail

/**
 * @brief Checks the cross-field invariants of a manifest.
 *
 * n_grid strictly increasing with n >= 2, trials >= 1, the schedule valid at
 * every n, and for log-fraction schedules m(n) log n / n strictly decreasing
 * along the grid.
 */
inline void validate(const ExperimentManifest& m) {
  using detail::bad_manifest;
  if (m.n_grid.empty()) bad_manifest("n_grid must not be empty");
  for (std::size_t i = 0; i < m.n_grid.size(); ++i) {
    if (m.n_grid[i] < 2) bad_manifest("every n in n_grid must be at least 2");
    if (i > 0 && m.n_grid[i] <= m.n_grid[i - 1]) bad_manifest("n_grid must be strictly increasing");
  }
  if (m.trials < 1) bad_manifest("trials must be at least 1");
  if (!(m.beta > 0.0) || !std::isfinite(m.beta)) bad_manifest("beta must be positive and finite");
  if (m.sliced_directions < 1) bad_manifest("sliced_directions must be at least 1");
  if (!(m.failure_budget >= 0.0 && m.failure_budget <= 1.0)) bad_manifest("failure_budget must lie in [0, 1]");
  if (m.bump_family.radii.empty() || !(m.bump_family.step > 0.0) || !(m.bump_family.half_width >= 0.0)) {
    bad_manifest("bump_family needs step > 0, half_width >= 0 and at least one radius");
  }
  for (double r : m.bump_family.radii)
    if (!(r > 0.0)) bad_manifest("bump radii must be positive");
  for (const auto& name : m.metrics)
    if (!known_metrics().contains(name)) bad_manifest("unknown metric '" + name + "'");
  if (m.tail_exponent && !(*m.tail_exponent > 0.0)) bad_manifest("tail_exponent must be positive");
  if (m.modulus_moment_B && !(*m.modulus_moment_B > 0.0)) bad_manifest("modulus_moment_B must be positive");
  for (std::size_t n : m.n_grid) {
    try {
      validate_schedule(m.schedule, n, m.variant);
    } catch (const Error& e) {
      bad_manifest(e.message());
    }
  }
  if (std::holds_alternative<LogFractionSchedule>(m.schedule)) {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n : m.n_grid) {
      const double ratio = schedule_iterations(m.schedule, n) * std::log(static_cast<double>(n)) / static_cast<double>(n);
      if (!(ratio < previous)) bad_manifest("m(n) log n / n must decrease along n_grid");
      previous = ratio;
    }
  }
}

/// Builds and validates a manifest from parsed JSON; all failures are BadManifest.
inline ExperimentManifest parse_manifest(const nlohmann::json& j) {
  ExperimentManifest m;
  try {
    if (!j.is_object()) detail::bad_manifest("manifest must be a JSON object");
    detail::reject_unknown_keys(j,
                                {"measure", "n_grid", "beta", "schedule", "variant", "trials", "master_seed", "metrics",
                                 "bump_family", "output_dir", "tail_exponent", "modulus_moment_B",
                                 "sliced_directions", "failure_budget"},
                                "manifest");
    for (const char* key : {"measure", "n_grid", "master_seed"})
      if (!j.contains(key)) detail::bad_manifest(std::string("missing required key '") + key + "'");
    m.measure = detail::parse_measure(j.at("measure"));
    m.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("beta")) m.beta = j.at("beta").get<double>();
    if (j.contains("schedule")) m.schedule = detail::parse_schedule(j.at("schedule"));
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      if (v == "flat") m.variant = Variant::Flat;
      else if (v == "circular") m.variant = Variant::Circular;
      else detail::bad_manifest("variant must be 'flat' or 'circular'");
    }
    if (j.contains("trials")) m.trials = j.at("trials").get<int>();
    if (j.contains("metrics")) m.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("bump_family")) {
      const auto& b = j.at("bump_family");
      detail::reject_unknown_keys(b, {"step", "half_width", "radii"}, "bump_family");
      m.bump_family.step = b.value("step", m.bump_family.step);
      m.bump_family.half_width = b.value("half_width", m.bump_family.half_width);
      if (b.contains("radii")) m.bump_family.radii = b.at("radii").get<std::vector<double>>();
    }
    if (j.contains("output_dir")) m.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("tail_exponent")) m.tail_exponent = j.at("tail_exponent").get<double>();
    if (j.contains("modulus_moment_B")) m.modulus_moment_B = j.at("modulus_moment_B").get<double>();
    if (j.contains("sliced_directions")) m.sliced_directions = j.at("sliced_directions").get<std::size_t>();
    if (j.contains("failure_budget")) m.failure_budget = j.at("failure_budget").get<double>();
  } catch (const nlohmann::json::exception& e) {
    detail::bad_manifest(std::string("malformed manifest: ") + e.what());
  }
  validate(m);
  return m;
}

inline ExperimentManifest parse_manifest(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::bad_manifest(std::string("manifest is not valid JSON: ") + e.what());
  }
  return parse_manifest(j);
}

inline ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadManifest, "cannot read manifest " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_manifest(buffer.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::BadManifest, path.string() + ": " + e.message());
  }
}

}  // namespace randeriv::experiments
