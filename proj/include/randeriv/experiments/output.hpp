#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "randeriv/types.hpp"

namespace randeriv::experiments {

/// One record of the series CSV.
struct MetricRow {
  std::size_t n = 0;
  int trial = 0;
  int stage = 0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
};

/// Append-only table of metric rows.
class MetricSeries {
public:
  void append(MetricRow row) { rows_.push_back(std::move(row)); }
  void append(std::span<const MetricRow> rows) { rows_.insert(rows_.end(), rows.begin(), rows.end()); }

  std::span<const MetricRow> rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

private:
  std::vector<MetricRow> rows_;
};

inline constexpr const char* kSeriesHeader = "n,trial,stage,metric,value,stderr";

/// 17 significant digits: enough for an exact double round-trip.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << x;
  return os.str();
}

inline void write_series_csv(std::ostream& out, const MetricSeries& series) {
  out << kSeriesHeader << '\n';
  for (const auto& r : series.rows()) {
    out << r.n << ',' << r.trial << ',' << r.stage << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.std_error) << '\n';
  }
}

/// Opens `path` for writing, creating parent directories; throws Io with the path on failure.
inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

struct ScatterLayer {
  std::vector<Complex> points;
  std::string label;
  std::string color;
  enum class Glyph { Dot, Cross } glyph = Glyph::Dot;
};

/**
 * @brief Hand-written SVG scatter plot on a fixed 800x800 canvas.
 *
 * Both axes share one scale so circles stay round. The unit circle is drawn
 * as a reference when every point lies in |z| <= 2.
 */
inline void write_scatter_svg(std::ostream& out, std::span<const ScatterLayer> layers, const std::string& title) {
  constexpr double size = 800.0, margin = 50.0;
  double extent = 0.0;
  bool small = true;
  for (const auto& layer : layers)
    for (const auto& z : layer.points) {
      extent = std::max({extent, std::abs(z.real()), std::abs(z.imag())});
      if (std::abs(z) > 2.0) small = false;
    }
  if (small) extent = std::max(extent, 1.0);
  if (extent == 0.0) extent = 1.0;
  extent *= 1.05;
  const double scale = (size / 2.0 - margin) / extent;
  auto sx = [&](double x) { return size / 2.0 + scale * x; };
  auto sy = [&](double y) { return size / 2.0 - scale * y; };
  auto num = [](double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  out << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  out << "<line x1=\"" << num(margin) << "\" y1=\"400.00\" x2=\"" << num(size - margin)
      << "\" y2=\"400.00\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"400.00\" y1=\"" << num(margin) << "\" x2=\"400.00\" y2=\"" << num(size - margin)
      << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  if (small) {
    out << "<circle cx=\"400.00\" cy=\"400.00\" r=\"" << num(scale)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"4 4\"/>\n";
  }
  for (const auto& layer : layers) {
    out << "<g fill=\"" << layer.color << "\" stroke=\"" << layer.color << "\">\n";
    for (const auto& z : layer.points) {
      const double x = sx(z.real()), y = sy(z.imag());
      if (layer.glyph == ScatterLayer::Glyph::Dot) {
        out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" stroke=\"none\"/>\n";
      } else {
        out << "<path d=\"M" << num(x - 4) << ' ' << num(y - 4) << "L" << num(x + 4) << ' ' << num(y + 4) << "M"
            << num(x - 4) << ' ' << num(y + 4) << "L" << num(x + 4) << ' ' << num(y - 4)
            << "\" fill=\"none\" stroke-width=\"1.5\"/>\n";
      }
    }
    out << "</g>\n";
  }
  out << "<text x=\"20\" y=\"30\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  double legend_y = 760.0;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it, legend_y -= 22.0) {
    out << "<text x=\"20\" y=\"" << num(legend_y) << "\" font-family=\"sans-serif\" font-size=\"14\" fill=\""
        << it->color << "\">" << (it->glyph == ScatterLayer::Glyph::Dot ? "&#9679; " : "&#215; ") << it->label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace randeriv::experiments
