#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "randeriv/experiments/manifest.hpp"
#include "randeriv/experiments/output.hpp"
#include "randeriv/experiments/thread_pool.hpp"
#include "randeriv/metrics.hpp"
#include "randeriv/operator.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/sampling.hpp"

namespace randeriv::experiments {

struct TrialFailure {
  std::size_t n = 0;
  int trial = 0;
  std::size_t stage = 0;
  std::string message;
};

/// A broken monotonicity diagnostic: max modulus grew from one stage to the next.
struct InvariantViolation {
  std::size_t n = 0;
  int trial = 0;
  int stage = 0;
  std::string what;
};

struct ConvergenceResult {
  MetricSeries series;
  std::vector<TrialFailure> failures;
  std::vector<InvariantViolation> violations;
  std::size_t tasks = 0;
  double failure_budget = 0.0;

  bool budget_exceeded() const {
    return static_cast<double>(failures.size()) > failure_budget * static_cast<double>(tasks);
  }
};

/// Stream layout: one key per (trial, purpose), refined by n.
inline RngStream task_stream(std::uint64_t master_seed, std::size_t n, int trial, StreamPurpose purpose,
                             int stage = 0) {
  return RngStream(master_seed, stream_id(static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(stage), purpose))
      .child(n);
}

/// Hill estimator of the radial tail index from the top sqrt(n) moduli.
inline MetricReport hill_tail_index(const PointSet& points) {
  std::vector<double> r;
  r.reserve(points.size());
  for (const auto& z : points) r.push_back(std::abs(z));
  std::sort(r.begin(), r.end(), std::greater<>());
  const std::size_t k = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(static_cast<double>(r.size()))));
  if (k >= r.size() || !(r[k] > 0.0)) return {"tail_index", std::numeric_limits<double>::quiet_NaN(), 0.0};
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(r[i] / r[k]);
  const double c = static_cast<double>(k) / acc;
  return {"tail_index", c, c / std::sqrt(static_cast<double>(k))};
}

namespace detail {

// Integrals of each bump against a large reference sample, with their standard errors.
struct ReferenceIntegrals {
  std::vector<double> mean;
  std::vector<double> std_error;
};

inline ReferenceIntegrals reference_integrals(const PointSet& reference, std::span<const TestFunction> family) {
  ReferenceIntegrals out;
  const double count = static_cast<double>(reference.size());
  for (const auto& phi : family) {
    double s = 0.0, s2 = 0.0;
    for (const auto& z : reference) {
      const double v = phi(z);
      s += v;
      s2 += v * v;
    }
    const double mean = s / count;
    const double var = std::max(0.0, s2 / count - mean * mean);
    out.mean.push_back(mean);
    out.std_error.push_back(std::sqrt(var / count));
  }
  return out;
}

struct TaskOutcome {
  std::vector<MetricRow> rows;
  std::vector<InvariantViolation> violations;
  bool failed = false;
  TrialFailure failure;
};

struct RunContext {
  const ExperimentManifest& manifest;
  std::vector<TestFunction> family;
  PointSet reference;
  ReferenceIntegrals reference_bumps;
  double reference_bump_error = 0.0;
  ToleranceConfig tol;
};

inline RunContext make_context(const ExperimentManifest& manifest, const ToleranceConfig& tol) {
  const auto& b = manifest.bump_family;
  auto family = bump_family(b.step, b.half_width, b.radii);
  const std::size_t ref_size = 4 * manifest.n_grid.back();
  RngStream ref_rng(manifest.master_seed, stream_id(0, 0, StreamPurpose::Reference));
  PointSet reference = sample_points(manifest.measure, ref_size, ref_rng);
  ReferenceIntegrals integrals = reference_integrals(reference, family);
  const double worst = *std::max_element(integrals.std_error.begin(), integrals.std_error.end());
  return RunContext{manifest, std::move(family), std::move(reference), std::move(integrals), worst, tol};
}

inline double max_deviation_from(const EmpiricalMeasure& mu, std::span<const TestFunction> family,
                                 std::span<const double> target) {
  double worst = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i)
    worst = std::max(worst, std::abs(test_function_integral(mu, family[i]) - target[i]));
  return worst;
}

inline TaskOutcome run_task(const RunContext& ctx, std::size_t n, int trial) {
  const ExperimentManifest& mf = ctx.manifest;
  TaskOutcome out;
  auto row = [&](int stage, std::string metric, double value, double err = 0.0) {
    out.rows.push_back({n, trial, stage, std::move(metric), value, err});
  };

  RngStream point_rng = task_stream(mf.master_seed, n, trial, StreamPurpose::Points);
  const PointSet initial = sample_points(mf.measure, n, point_rng);
  const int m = schedule_iterations(mf.schedule, n);
  IterationTrace trace;
  try {
    trace = iterate(initial, m, mf.beta, mf.variant, task_stream(mf.master_seed, n, trial, StreamPurpose::Weights),
                    ctx.tol);
  } catch (const StageFailure& e) {
    out.failed = true;
    out.failure = {n, trial, e.stage(), e.message()};
    return out;
  } catch (const Error& e) {
    out.failed = true;
    out.failure = {n, trial, 0, e.message()};
    return out;
  }

  const EmpiricalMeasure mu0(trace.initial());
  std::vector<double> initial_bumps;
  if (mf.wants("bump_initial")) {
    for (const auto& phi : ctx.family) initial_bumps.push_back(test_function_integral(mu0, phi));
  }

  if (mf.tail_exponent) {
    const auto h = hill_tail_index(trace.initial());
    row(0, "tail_index", h.value, h.estimator_error);
  }

  double largest_min_modulus = 0.0;
  for (std::size_t j = 0; j < trace.stages.size(); ++j) {
    const int stage = static_cast<int>(j);
    const auto& s = trace.stages[j];
    const EmpiricalMeasure mu(s.points);
    if (mf.wants("bump_reference")) {
      row(stage, "bump_reference", max_deviation_from(mu, ctx.family, ctx.reference_bumps.mean),
          ctx.reference_bump_error);
    }
    if (mf.wants("bump_initial") && j > 0) {
      row(stage, "bump_initial", max_deviation_from(mu, ctx.family, initial_bumps));
    }
    if (mf.wants("modulus")) {
      row(stage, "max_modulus", s.diagnostics.max_modulus);
      row(stage, "min_modulus", s.diagnostics.min_modulus);
    }
    largest_min_modulus = std::max(largest_min_modulus, s.diagnostics.min_modulus);
    if (j > 0) {
      const double prev = trace.stages[j - 1].diagnostics.max_modulus;
      const double now = s.diagnostics.max_modulus;
      if (now > prev * (1.0 + 1e-9) + 1e-12) {
        out.violations.push_back({n, trial, stage,
                                  "max modulus increased from " + format_double(prev) + " to " + format_double(now)});
      }
    }
  }

  const EmpiricalMeasure final_mu(trace.final());
  if (mf.wants("sliced_w1_initial")) {
    const auto r = sliced_w1(final_mu, mu0, mf.sliced_directions,
                             task_stream(mf.master_seed, n, trial, StreamPurpose::Directions, m));
    row(m, "sliced_w1_initial", r.value, r.estimator_error);
  }
  if (mf.wants("sliced_w1_reference")) {
    const auto r = sliced_w1(final_mu, EmpiricalMeasure(ctx.reference), mf.sliced_directions,
                             task_stream(mf.master_seed, n, trial, StreamPurpose::Directions, m + 1));
    row(m, "sliced_w1_reference", r.value, r.estimator_error);
  }
  if (mf.modulus_moment_B) {
    row(m, "moment_ratio", std::pow(static_cast<double>(n), -*mf.modulus_moment_B) * largest_min_modulus);
  }
  return out;
}

}  // namespace detail

/**
 * @brief Runs every (n, trial) task of the manifest on the worker pool.
 *
 * Each task samples its own points and weights from streams keyed by
 * (master_seed, trial, purpose, n), and rows are merged in (n, trial) order,
 * so the series does not depend on the number of workers.
 */
inline ConvergenceResult run_convergence(const ExperimentManifest& manifest, std::size_t workers = worker_count(),
                                         const ToleranceConfig& tol = {}) {
  validate(manifest);
  const detail::RunContext ctx = detail::make_context(manifest, tol);
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t n : manifest.n_grid)
    for (int t = 0; t < manifest.trials; ++t) tasks.emplace_back(n, t);

  std::vector<detail::TaskOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), workers,
               [&](std::size_t i) { outcomes[i] = detail::run_task(ctx, tasks[i].first, tasks[i].second); });

  ConvergenceResult result;
  result.tasks = tasks.size();
  result.failure_budget = manifest.failure_budget;
  for (auto& o : outcomes) {
    if (o.failed) {
      result.failures.push_back(std::move(o.failure));
      continue;
    }
    result.series.append(o.rows);
    for (auto& v : o.violations) result.violations.push_back(std::move(v));
  }
  return result;
}

struct SummaryRow {
  std::size_t n = 0;
  int stage = 0;
  std::string metric;
  double median = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Medians over trials per (n, stage, metric); failed trials are excluded and counted.
inline std::vector<SummaryRow> summarize(const ConvergenceResult& result) {
  std::map<std::tuple<std::size_t, int, std::string>, std::vector<double>> groups;
  for (const auto& r : result.series.rows())
    if (std::isfinite(r.value)) groups[{r.n, r.stage, r.metric}].push_back(r.value);
  std::map<std::size_t, std::size_t> failures_at;
  for (const auto& f : result.failures) ++failures_at[f.n];
  std::vector<SummaryRow> out;
  for (auto& [key, values] : groups) {
    const auto& [n, stage, metric] = key;
    out.push_back({n, stage, metric, median_of(values), values.size(), failures_at[n]});
  }
  return out;
}

/// Median of one metric at (n, stage) across trials; NaN when absent.
inline double summary_median(std::span<const SummaryRow> summary, std::size_t n, int stage, const std::string& metric) {
  for (const auto& s : summary)
    if (s.n == n && s.stage == stage && s.metric == metric) return s.median;
  return std::numeric_limits<double>::quiet_NaN();
}

struct WrittenFiles {
  std::vector<std::filesystem::path> paths;
};

/// Writes series.csv, summary.csv and failures.csv under the manifest's output directory.
inline WrittenFiles write_convergence_outputs(const ConvergenceResult& result, const std::filesystem::path& dir) {
  WrittenFiles files;
  {
    const auto path = dir / "series.csv";
    auto out = open_output(path);
    write_series_csv(out, result.series);
    finish_output(out, path);
    files.paths.push_back(path);
  }
  {
    const auto path = dir / "summary.csv";
    auto out = open_output(path);
    out << "n,stage,metric,median,trials,failures\n";
    for (const auto& s : summarize(result)) {
      out << s.n << ',' << s.stage << ',' << s.metric << ',' << format_double(s.median) << ',' << s.count << ','
          << s.failures << '\n';
    }
    finish_output(out, path);
    files.paths.push_back(path);
  }
  {
    const auto path = dir / "failures.csv";
    auto out = open_output(path);
    out << "n,trial,stage,message\n";
    for (const auto& f : result.failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << f.n << ',' << f.trial << ',' << f.stage << ',' << msg << '\n';
    }
    finish_output(out, path);
    files.paths.push_back(path);
  }
  return files;
}

/**
 * @brief Scatter figures: for each n and trial, the initial cloud against the
 * stage-m(n) cloud, plus the point lists behind them.
 *
 * Files are named points_n<n>_t<trial>.csv and scatter_n<n>_t<trial>.svg.
 */
inline WrittenFiles run_figures(const ExperimentManifest& manifest, const ToleranceConfig& tol = {}) {
  validate(manifest);
  WrittenFiles files;
  for (std::size_t n : manifest.n_grid) {
    for (int trial = 0; trial < manifest.trials; ++trial) {
      RngStream point_rng = task_stream(manifest.master_seed, n, trial, StreamPurpose::Points);
      const PointSet initial = sample_points(manifest.measure, n, point_rng);
      const int m = schedule_iterations(manifest.schedule, n);
      const IterationTrace trace = iterate(initial, m, manifest.beta, manifest.variant,
                                           task_stream(manifest.master_seed, n, trial, StreamPurpose::Weights), tol);
      const std::string stem = "n" + std::to_string(n) + "_t" + std::to_string(trial);

      const auto csv_path = manifest.output_dir / ("points_" + stem + ".csv");
      auto csv = open_output(csv_path);
      csv << "n,trial,stage,index,re,im,modulus,arg\n";
      for (std::size_t j = 0; j < trace.stages.size(); ++j) {
        const auto& pts = trace.stages[j].points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          csv << n << ',' << trial << ',' << j << ',' << i << ',' << format_double(pts[i].real()) << ','
              << format_double(pts[i].imag()) << ',' << format_double(std::abs(pts[i])) << ','
              << format_double(std::arg(pts[i])) << '\n';
        }
      }
      finish_output(csv, csv_path);
      files.paths.push_back(csv_path);

      std::vector<ScatterLayer> layers;
      layers.push_back({trace.initial().values(), "initial points (n = " + std::to_string(n) + ")", "#1f5fa8",
                        ScatterLayer::Glyph::Dot});
      if (m > 0) {
        layers.push_back({trace.final().values(), "stage " + std::to_string(m) + " zeros", "#c0392b",
                          ScatterLayer::Glyph::Cross});
      }
      const auto svg_path = manifest.output_dir / ("scatter_" + stem + ".svg");
      auto svg = open_output(svg_path);
      write_scatter_svg(svg, layers,
                        std::string(to_string(manifest.variant)) + " iteration, beta = " + format_double(manifest.beta) +
                            ", m = " + std::to_string(m));
      finish_output(svg, svg_path);
      files.paths.push_back(svg_path);
    }
  }
  return files;
}

}  // namespace randeriv::experiments
