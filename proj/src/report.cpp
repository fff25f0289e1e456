#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "minddreamer/errors.hpp"
#include "minddreamer/harness.hpp"

namespace md {

namespace fs = std::filesystem;

namespace {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

constexpr const char* kPalette[] = {"#c8a02c", "#3d7a4f", "#4668a8", "#a84646",
                                    "#7a4fa0", "#4fa0a0"};

// Tiny deterministic SVG line chart: fixed canvas, optional log x-axis.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label, bool log_x)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
        log_x_(log_x) {}

  void add_series(const std::string& name, std::vector<std::pair<double, double>> points) {
    std::sort(points.begin(), points.end());
    series_.emplace_back(name, std::move(points));
  }

  std::string render() const {
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& [name, pts] : series_)
      for (const auto& [x, y] : pts) {
        const double xv = log_x_ ? std::log10(x) : x;
        x_min = std::min(x_min, xv);
        x_max = std::max(x_max, xv);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    if (x_min > x_max) {
      x_min = 0.0;
      x_max = 1.0;
    }
    if (x_max - x_min < 1e-12) {
      x_min -= 0.5;
      x_max += 0.5;
    }
    if (y_min > y_max) {
      y_min = 0.0;
      y_max = 1.0;
    }
    if (y_max - y_min < 1e-12) {
      y_min -= 0.5;
      y_max += 0.5;
    }
    const double pad_y = 0.08 * (y_max - y_min);
    y_min -= pad_y;
    y_max += pad_y;

    const double left = 70, right = 620, top = 40, bottom = 360;
    auto px = [&](double x) {
      const double xv = log_x_ ? std::log10(x) : x;
      return left + (xv - x_min) / (x_max - x_min) * (right - left);
    };
    auto py = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\" "
           "font-family=\"monospace\" font-size=\"11\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title_
        << "</text>\n";
    svg << "<line x1=\"" << format_double(left) << "\" y1=\"" << format_double(bottom)
        << "\" x2=\"" << format_double(right) << "\" y2=\"" << format_double(bottom)
        << "\" stroke=\"#000000\"/>\n";
    svg << "<line x1=\"" << format_double(left) << "\" y1=\"" << format_double(top)
        << "\" x2=\"" << format_double(left) << "\" y2=\"" << format_double(bottom)
        << "\" stroke=\"#000000\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
      const double fx = x_min + (x_max - x_min) * tick / 4.0;
      const double raw = log_x_ ? std::pow(10.0, fx) : fx;
      const double x = left + (right - left) * tick / 4.0;
      svg << "<text x=\"" << format_double(x) << "\" y=\"378\" text-anchor=\"middle\">"
          << format_double(raw) << "</text>\n";
      const double fy = y_min + (y_max - y_min) * tick / 4.0;
      const double y = bottom - (bottom - top) * tick / 4.0;
      svg << "<text x=\"" << format_double(left - 6) << "\" y=\"" << format_double(y + 4)
          << "\" text-anchor=\"end\">" << format_double(fy) << "</text>\n";
    }
    svg << "<text x=\"345\" y=\"396\" text-anchor=\"middle\">" << x_label_ << "</text>\n";
    svg << "<text x=\"16\" y=\"200\" text-anchor=\"middle\" transform=\"rotate(-90 16 200)\">"
        << y_label_ << "</text>\n";

    std::size_t idx = 0;
    for (const auto& [name, pts] : series_) {
      const char* color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
      if (pts.size() > 1) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts)
          svg << format_double(px(x)) << "," << format_double(py(y)) << " ";
        svg << "\"/>\n";
      }
      for (const auto& [x, y] : pts)
        svg << "<circle cx=\"" << format_double(px(x)) << "\" cy=\"" << format_double(py(y))
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      svg << "<text x=\"" << format_double(right - 160)
          << "\" y=\"" << format_double(top + 14 * static_cast<double>(idx + 1))
          << "\" fill=\"" << color << "\">" << name << "</text>\n";
      ++idx;
    }
    svg << "</svg>\n";
    return svg.str();
  }

 private:
  std::string title_, x_label_, y_label_;
  bool log_x_;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series_;
};

bool use_log_axis(const std::vector<double>& xs) {
  double lo = 1e300, hi = -1e300;
  for (double x : xs) {
    if (x <= 0.0) return false;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi / lo >= 8.0;
}

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("report: cannot write " + path.string());
  out << content;
  return path.string();
}

// Groups: sweep label -> mode -> runs.
using Grouped = std::map<std::string, std::map<std::string, std::vector<const StoredRun*>>>;

Grouped group_runs(const ResultStore& store) {
  Grouped grouped;
  for (const auto& run : store.runs)
    grouped[sweep_label(run.sweep_point)][run.mode].push_back(&run);
  return grouped;
}

// The x coordinate for a sweep point: the single numeric axis when there is
// exactly one, otherwise the group index.
double group_x(const StoredRun& run, int fallback_index) {
  if (run.sweep_point.size() == 1) return run.sweep_point.begin()->second;
  return static_cast<double>(fallback_index);
}

std::vector<std::string> emit_hitting(const ResultStore& store) {
  const Grouped grouped = group_runs(store);
  std::ostringstream csv;
  csv << "sweep,mode,seeds,median_first_hit,iqr_first_hit,censored_runs\r\n";
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<double> xs;
  int index = 0;
  for (const auto& [label, by_mode] : grouped) {
    for (const auto& [mode, runs] : by_mode) {
      std::vector<double> hits;
      int censored = 0;
      for (const StoredRun* run : runs) {
        hits.push_back(static_cast<double>(run->result.first_hit_step));
        if (run->result.hit_censored) ++censored;
      }
      const double median = quantile(hits, 0.5);
      const double iqr = quantile(hits, 0.75) - quantile(hits, 0.25);
      csv << csv_field(label) << "," << mode << "," << hits.size() << ","
          << format_double(median) << "," << format_double(iqr) << "," << censored << "\r\n";
      const double x = group_x(*runs.front(), index);
      series[mode].emplace_back(x, median);
      xs.push_back(x);
    }
    ++index;
  }
  SvgChart log_chart(store.experiment_name + ": first hitting step", "sweep value",
                     "median first hit (steps)", use_log_axis(xs));
  for (const auto& [mode, pts] : series) log_chart.add_series(mode, pts);
  return {write_file(store.dir, "report_hitting.csv", csv.str()),
          write_file(store.dir, "report_hitting.svg", log_chart.render())};
}

std::vector<std::string> emit_returns(const ResultStore& store) {
  const Grouped grouped = group_runs(store);
  std::ostringstream csv;
  csv << "sweep,mode,episode,median_return,q25,q75\r\n";
  SvgChart chart(store.experiment_name + ": episode returns", "episode", "median return", false);
  for (const auto& [label, by_mode] : grouped) {
    for (const auto& [mode, runs] : by_mode) {
      std::size_t episodes = 0;
      for (const StoredRun* run : runs)
        episodes = std::max(episodes, run->result.return_curve.size());
      std::vector<std::pair<double, double>> line;
      for (std::size_t ep = 0; ep < episodes; ++ep) {
        std::vector<double> values;
        for (const StoredRun* run : runs)
          if (ep < run->result.return_curve.size())
            values.push_back(run->result.return_curve[ep]);
        const double median = quantile(values, 0.5);
        csv << csv_field(label) << "," << mode << "," << ep << "," << format_double(median)
            << "," << format_double(quantile(values, 0.25)) << ","
            << format_double(quantile(values, 0.75)) << "\r\n";
        line.emplace_back(static_cast<double>(ep), median);
      }
      chart.add_series(label == "base" ? mode : label + " " + mode, line);
    }
  }
  return {write_file(store.dir, "report_returns.csv", csv.str()),
          write_file(store.dir, "report_returns.svg", chart.render())};
}

std::vector<std::string> emit_speedup(const ResultStore& store) {
  const Grouped grouped = group_runs(store);
  std::ostringstream csv;
  csv << "sweep,baseline_median,md_median,speedup\r\n";
  std::vector<std::pair<double, double>> points;
  std::vector<double> xs;
  int index = 0;
  bool any = false;
  for (const auto& [label, by_mode] : grouped) {
    const auto md_it = by_mode.find("MD");
    const auto base_it = by_mode.find("Baseline");
    ++index;
    if (md_it == by_mode.end() || base_it == by_mode.end()) continue;
    std::vector<double> md_hits, base_hits;
    for (const StoredRun* run : md_it->second)
      md_hits.push_back(static_cast<double>(run->result.first_hit_step));
    for (const StoredRun* run : base_it->second)
      base_hits.push_back(static_cast<double>(run->result.first_hit_step));
    const double md_median = quantile(md_hits, 0.5);
    const double base_median = quantile(base_hits, 0.5);
    const double ratio = md_median > 0.0 ? base_median / md_median
                                         : std::numeric_limits<double>::infinity();
    csv << csv_field(label) << "," << format_double(base_median) << ","
        << format_double(md_median) << "," << format_double(ratio) << "\r\n";
    const double x = group_x(*md_it->second.front(), index - 1);
    points.emplace_back(x, ratio);
    xs.push_back(x);
    any = true;
  }
  if (!any)
    throw ValidationError("report: no data — speedup needs both MD and Baseline runs");
  SvgChart chart(store.experiment_name + ": first-hit speedup (baseline / MD)", "sweep value",
                 "speedup", use_log_axis(xs));
  chart.add_series("speedup", points);
  return {write_file(store.dir, "report_speedup.csv", csv.str()),
          write_file(store.dir, "report_speedup.svg", chart.render())};
}

}  // namespace

std::vector<std::string> emit_report(const ResultStore& store, ReportKind kind) {
  if (store.runs.empty()) throw ValidationError("report: no data in store " + store.dir);
  switch (kind) {
    case ReportKind::hitting:
      return emit_hitting(store);
    case ReportKind::returns:
      return emit_returns(store);
    case ReportKind::speedup:
      return emit_speedup(store);
  }
  throw ValidationError("report: unknown kind");
}

}  // namespace md
