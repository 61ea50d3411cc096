#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "randeriv/experiments/manifest.hpp"
#include "randeriv/experiments/output.hpp"
#include "randeriv/experiments/runner.hpp"
#include "randeriv/experiments/selftest.hpp"
#include "randeriv/experiments/thread_pool.hpp"

using namespace randeriv;
using namespace randeriv::experiments;

namespace {

const char* kSmall = R"({
  "measure": {"kind": "uniform_circle"},
  "n_grid": [10, 16],
  "beta": 2,
  "schedule": {"kind": "constant", "k": 3},
  "trials": 3,
  "master_seed": 99,
  "sliced_directions": 8,
  "output_dir": "unused"
})";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_manifest(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // sentinel: no error
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("randeriv_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("manifest parsing", "[experiments][manifest]") {
  const auto m = parse_manifest(std::string(kSmall));
  CHECK(m.n_grid == std::vector<std::size_t>{10, 16});
  CHECK(m.trials == 3);
  CHECK(m.master_seed == 99);
  CHECK(std::get<ConstantSchedule>(m.schedule).k == 3);
  CHECK(std::holds_alternative<UniformCircle>(m.measure));
  CHECK(m.variant == Variant::Flat);

  const auto lf = parse_manifest(std::string(R"({"measure": {"kind": "atom_mixture", "atoms": [[0, 1], 2], "probs": [0.5, 0.5]},
    "n_grid": [100, 400], "schedule": {"kind": "log_fraction", "a": 3.6}, "variant": "circular", "master_seed": 1,
    "tail_exponent": 2.0, "modulus_moment_B": 1.0})"));
  CHECK(std::get<AtomMixture>(lf.measure).atoms[0] == Complex{0, 1});
  CHECK(lf.variant == Variant::Circular);
  CHECK(lf.tail_exponent.value() == 2.0);
}

TEST_CASE("bad manifests are rejected as BadManifest", "[experiments][manifest]") {
  const std::string base = R"("measure": {"kind": "uniform_disk"}, "master_seed": 1)";
  CHECK(kind_of("{ not json") == ErrorKind::BadManifest);
  CHECK(kind_of("[1, 2]") == ErrorKind::BadManifest);
  CHECK(kind_of(R"({"n_grid": [10], "master_seed": 1})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [20, 10]})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10, 10]})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [1]})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10], "trials": 0})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10], "schedule": {"kind": "constant", "k": 10}})") ==
        ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10], "bogus": 1})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10], "metrics": ["nope"]})") == ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": [10], "beta": -1})") == ErrorKind::BadManifest);
  CHECK(kind_of(R"({"measure": {"kind": "uniform_annulus", "r_in": 2, "r_out": 1}, "master_seed": 1, "n_grid": [10]})") ==
        ErrorKind::BadManifest);
  CHECK(kind_of(R"({"measure": {"kind": "atom_mixture", "atoms": [0, 1], "probs": [0.5, 0.6]}, "master_seed": 1, "n_grid": [10]})") ==
        ErrorKind::BadManifest);
  CHECK(kind_of("{" + base + R"(, "n_grid": "ten"})") == ErrorKind::BadManifest);
  CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.json"), Error);
}

TEST_CASE("log-fraction schedules must satisfy the growth hypothesis along the grid", "[experiments][manifest]") {
  // m(n) log n / n is roughly a / log n, so it falls with n unless flooring interferes.
  CHECK_NOTHROW(parse_manifest(std::string(
      R"({"measure": {"kind": "uniform_circle"}, "master_seed": 1, "n_grid": [50, 100, 400], "schedule": {"kind": "log_fraction", "a": 3.6}})")));
  CHECK(kind_of(R"({"measure": {"kind": "uniform_circle"}, "master_seed": 1, "n_grid": [100, 101], "schedule": {"kind": "log_fraction", "a": 3.6}})") ==
        ErrorKind::BadManifest);
}

TEST_CASE("csv formatting", "[experiments][output]") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-310, 123456.789})
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);

  MetricSeries s;
  s.append({10, 0, 1, "max_modulus", 0.5, 0.0});
  std::ostringstream os;
  write_series_csv(os, s);
  CHECK(os.str() == "n,trial,stage,metric,value,stderr\n10,0,1,max_modulus,0.5,0\n");
}

TEST_CASE("svg scatter", "[experiments][output]") {
  std::vector<ScatterLayer> layers{{{Complex{1, 0}, Complex{0, -0.5}}, "a", "#000000", ScatterLayer::Glyph::Dot},
                                   {{Complex{0.2, 0.2}}, "b", "#ff0000", ScatterLayer::Glyph::Cross}};
  std::ostringstream os;
  write_scatter_svg(os, layers, "t");
  const std::string svg = os.str();
  CHECK(svg.find("viewBox=\"0 0 800 800\"") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // unit circle drawn
  CHECK(svg.find("<path") != std::string::npos);

  layers[0].points.push_back({5, 5});
  std::ostringstream wide;
  write_scatter_svg(wide, layers, "t");
  CHECK(wide.str().find("stroke-dasharray") == std::string::npos);
}

TEST_CASE("worker pool", "[experiments][threads]") {
  std::vector<int> out(1000, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == static_cast<int>(i) * 2);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  CHECK(worker_count() >= 1);
}

TEST_CASE("run_convergence is deterministic and thread-count independent", "[experiments][runner]") {
  const auto m = parse_manifest(std::string(kSmall));
  const auto one = run_convergence(m, 1);
  const auto four = run_convergence(m, 4);
  std::ostringstream a, b;
  write_series_csv(a, one.series);
  write_series_csv(b, four.series);
  CHECK(a.str() == b.str());
  CHECK(one.failures.empty());
  CHECK(one.violations.empty());
  CHECK(one.tasks == 6);

  // Rows come in (n, trial, stage) order.
  const auto rows = one.series.rows();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& p = rows[i - 1];
    const auto& q = rows[i];
    CHECK(std::tie(p.n, p.trial, p.stage) <= std::tie(q.n, q.trial, q.stage));
  }
}

TEST_CASE("run_convergence metrics and modulus monotonicity", "[experiments][runner]") {
  auto m = parse_manifest(std::string(kSmall));
  m.modulus_moment_B = 1.0;
  m.tail_exponent = 1.0;
  const auto r = run_convergence(m, 2);
  std::map<std::string, int> count;
  for (const auto& row : r.series.rows()) {
    ++count[row.metric];
    CHECK(row.std_error >= 0.0);
  }
  // 2 sizes x 3 trials; stages 0..3.
  CHECK(count["max_modulus"] == 6 * 4);
  CHECK(count["bump_reference"] == 6 * 4);
  CHECK(count["bump_initial"] == 6 * 3);
  CHECK(count["sliced_w1_initial"] == 6);
  CHECK(count["sliced_w1_reference"] == 6);
  CHECK(count["moment_ratio"] == 6);
  CHECK(count["tail_index"] == 6);

  const auto summary = summarize(r);
  CHECK(std::isfinite(summary_median(summary, 16, 3, "sliced_w1_initial")));
  CHECK(std::isnan(summary_median(summary, 16, 3, "missing")));
}

TEST_CASE("solver failures are counted against the budget", "[experiments][runner]") {
  auto m = parse_manifest(std::string(kSmall));
  ToleranceConfig impossible;
  impossible.residual_tol = 1e-300;
  const auto r = run_convergence(m, 2, impossible);
  CHECK(r.failures.size() == r.tasks);
  CHECK(r.series.empty());
  CHECK(r.budget_exceeded());
  const auto summary = summarize(r);
  CHECK(summary.empty());
}

TEST_CASE("convergence outputs and figures are written", "[experiments][runner]") {
  auto m = parse_manifest(std::string(kSmall));
  const auto dir = scratch_dir("outputs");
  const auto files = write_convergence_outputs(run_convergence(m, 2), dir);
  CHECK(files.paths.size() == 3);
  CHECK(slurp(dir / "series.csv").rfind("n,trial,stage,metric,value,stderr\n", 0) == 0);
  CHECK(slurp(dir / "summary.csv").rfind("n,stage,metric,median,trials,failures\n", 0) == 0);

  m.output_dir = dir / "fig";
  m.trials = 1;
  const auto figs = run_figures(m);
  CHECK(figs.paths.size() == 4);
  CHECK(std::filesystem::exists(dir / "fig" / "scatter_n16_t0.svg"));
  const std::string csv = slurp(dir / "fig" / "points_n16_t0.csv");
  CHECK(csv.rfind("n,trial,stage,index,re,im,modulus,arg\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("output errors carry the path", "[experiments][output]") {
  try {
    open_output("/proc/definitely/not/writable.csv");
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("/proc/definitely") != std::string::npos);
  }
}

TEST_CASE("hill estimator on a Pareto sample", "[experiments]") {
  RngStream rng(3, 1);
  const auto pts = sample_points(HeavyTailRadial{1.5}, 40000, rng);
  const auto h = hill_tail_index(pts);
  CHECK(std::abs(h.value - 1.5) <= 4 * h.estimator_error);
}

TEST_CASE("selftest passes at default tolerances", "[experiments][selftest]") {
  for (const auto& r : run_selftest()) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
  }
}
