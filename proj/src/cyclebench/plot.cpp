#include "cyclebench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cyclebench/error.hpp"

namespace cyclebench {

namespace fs = std::filesystem;

namespace {

constexpr double width = 720.0;
constexpr double height = 420.0;
constexpr double left = 70.0;
constexpr double right = 190.0;
constexpr double top = 40.0;
constexpr double bottom = 55.0;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v, const char* format = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

class Canvas {
 public:
  Canvas(const std::string& title, const std::string& fingerprint, AxisRange x, AxisRange y, const std::string& x_label,
         const std::string& y_label)
      : x_(x), y_(y) {
    if (!(x_.hi > x_.lo)) x_.hi = x_.lo + 1.0;
    if (!(y_.hi > y_.lo)) y_.hi = y_.lo + 1.0;
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, "%.0f") + "\" height=\"" +
            num(height, "%.0f") + "\" viewBox=\"0 0 " + num(width, "%.0f") + " " + num(height, "%.0f") + "\">\n";
    out_ += "<metadata>fingerprint=" + escape(fingerprint) + "</metadata>\n";
    out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ += text(width / 2 - right / 2 + left / 2, 22, title, "middle", 15);
    const double x0 = left, x1 = width - right, y0 = height - bottom, y1 = top;
    out_ += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out_ += line(x0, y0, x1, y0) + line(x0, y0, x0, y1) + "</g>\n";
    out_ += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    for (int i = 0; i <= 5; ++i) {
      const double xv = x_.lo + (x_.hi - x_.lo) * i / 5.0;
      const double yv = y_.lo + (y_.hi - y_.lo) * i / 5.0;
      out_ += "<line x1=\"" + num(px(xv), "%.2f") + "\" y1=\"" + num(y0, "%.2f") + "\" x2=\"" + num(px(xv), "%.2f") +
              "\" y2=\"" + num(y0 + 5, "%.2f") + "\" stroke=\"black\"/>\n";
      out_ += text(px(xv), y0 + 18, num(xv, std::fabs(x_.hi) >= 100 ? "%.0f" : "%.3g"), "middle", 11);
      out_ += "<line x1=\"" + num(x0 - 5, "%.2f") + "\" y1=\"" + num(py(yv), "%.2f") + "\" x2=\"" + num(x0, "%.2f") +
              "\" y2=\"" + num(py(yv), "%.2f") + "\" stroke=\"black\"/>\n";
      out_ += text(x0 - 8, py(yv) + 4, num(yv), "end", 11);
    }
    out_ += "</g>\n";
    out_ += text((x0 + x1) / 2, height - 15, x_label, "middle", 12);
    out_ += "<text x=\"16\" y=\"" + num((y0 + y1) / 2, "%.2f") +
            "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
            num((y0 + y1) / 2, "%.2f") + ")\">" + escape(y_label) + "</text>\n";
  }

  double px(double x) const { return left + (x - x_.lo) / (x_.hi - x_.lo) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y_.lo) / (y_.hi - y_.lo) * (height - top - bottom); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color, bool dashed,
                const std::string& css_class) {
    std::string attr;
    for (std::size_t i = 0; i < pts.size(); ++i)
      attr += (i ? " " : "") + num(px(pts[i].first), "%.2f") + "," + num(py(pts[i].second), "%.2f");
    out_ += "<polyline class=\"" + css_class + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
            (dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + attr + "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& color) {
    out_ += "<rect x=\"" + num(x, "%.2f") + "\" y=\"" + num(y, "%.2f") + "\" width=\"" + num(w, "%.2f") +
            "\" height=\"" + num(h, "%.2f") + "\" fill=\"" + color + "\"/>\n";
  }

  void hline(double y, const std::string& color) {
    out_ += "<line x1=\"" + num(px(x_.lo), "%.2f") + "\" y1=\"" + num(py(y), "%.2f") + "\" x2=\"" +
            num(px(x_.hi), "%.2f") + "\" y2=\"" + num(py(y), "%.2f") + "\" stroke=\"" + color +
            "\" stroke-width=\"0.8\"/>\n";
  }

  void label(double x, double y, const std::string& s, const char* anchor = "middle") {
    out_ += text(x, y, s, anchor, 11);
  }

  void legend(std::size_t row, const std::string& s, const std::string& color, bool dashed) {
    const double x = width - right + 15, y = top + 10 + 18.0 * static_cast<double>(row);
    out_ += "<line x1=\"" + num(x, "%.2f") + "\" y1=\"" + num(y, "%.2f") + "\" x2=\"" + num(x + 24, "%.2f") +
            "\" y2=\"" + num(y, "%.2f") + "\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
            (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    out_ += text(x + 30, y + 4, s, "start", 11);
  }

  std::string finish() { return out_ + "</svg>\n"; }

 private:
  static std::string line(double x1, double y1, double x2, double y2) {
    return "<line x1=\"" + num(x1, "%.2f") + "\" y1=\"" + num(y1, "%.2f") + "\" x2=\"" + num(x2, "%.2f") +
           "\" y2=\"" + num(y2, "%.2f") + "\"/>\n";
  }
  static std::string text(double x, double y, const std::string& s, const char* anchor, int size) {
    return "<text x=\"" + num(x, "%.2f") + "\" y=\"" + num(y, "%.2f") + "\" font-family=\"sans-serif\" font-size=\"" +
           std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
  }

  AxisRange x_, y_;
  std::string out_;
};

const char* color(std::size_t i) { return palette[i % std::size(palette)]; }

AxisRange padded(double lo, double hi) {
  const double span = hi - lo;
  const double pad = span > 0.0 ? 0.1 * span : 0.01;
  return {lo - pad, hi + pad};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace

AxisRange accuracy_range(std::span<const PlotSeries> series) {
  double lo = 1.0, hi = 0.0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& p : s.curve.points) {
      lo = any ? std::min(lo, p.acc_mean) : p.acc_mean;
      hi = any ? std::max(hi, p.acc_mean) : p.acc_mean;
      any = true;
    }
  if (!any) throw Error(ErrorKind::empty_input, "no curve points to plot");
  return padded(lo, hi);
}

std::string tradeoff_svg(std::span<const PlotSeries> series, XAxis x, const std::string& title,
                         const std::string& fingerprint) {
  if (series.empty()) throw Error(ErrorKind::empty_input, "no curves to plot");
  double x_max = 0.0;
  for (const auto& s : series) {
    if (s.curve.points.empty()) throw Error(ErrorKind::empty_input, "curve '" + s.label + "' has no points");
    for (const auto& p : s.curve.points) x_max = std::max(x_max, x == XAxis::wall_clock ? p.wall_clock_s : p.epochs);
  }
  Canvas canvas(title, fingerprint, {0.0, x_max > 0.0 ? x_max : 1.0}, accuracy_range(series),
                x == XAxis::wall_clock ? "wall clock (s)" : "epochs", "validation accuracy");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& curve = series[i].curve;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve.points) pts.emplace_back(x == XAxis::wall_clock ? p.wall_clock_s : p.epochs, p.acc_mean);
    const bool dashed = curve.kind == CurveKind::cyclic;
    canvas.polyline(pts, color(i), dashed, to_string(curve.kind));
    canvas.legend(i, series[i].label, color(i), dashed);
  }
  return canvas.finish();
}

std::string schedule_svg(std::span<const TraceSeries> traces, const std::string& title, const std::string& fingerprint) {
  if (traces.empty()) throw Error(ErrorKind::empty_input, "no schedule traces to plot");
  double x_max = 0.0, y_max = 0.0;
  for (const auto& t : traces) {
    if (t.lr.empty()) throw Error(ErrorKind::empty_input, "schedule trace '" + t.label + "' is empty");
    x_max = std::max(x_max, static_cast<double>(t.lr.size()) / static_cast<double>(std::max<Step>(t.steps_per_epoch, 1)));
    for (double v : t.lr) y_max = std::max(y_max, v);
  }
  Canvas canvas(title, fingerprint, {0.0, x_max}, {0.0, y_max > 0.0 ? y_max * 1.05 : 1.0}, "epochs", "learning rate");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    const double spe = static_cast<double>(std::max<Step>(t.steps_per_epoch, 1));
    // thin long traces to about 2000 vertices
    const std::size_t stride = std::max<std::size_t>(1, t.lr.size() / 2000);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t s = 0; s < t.lr.size(); s += stride) pts.emplace_back(static_cast<double>(s + 1) / spe, t.lr[s]);
    if ((t.lr.size() - 1) % stride != 0) pts.emplace_back(static_cast<double>(t.lr.size()) / spe, t.lr.back());
    canvas.polyline(pts, color(i), false, "schedule");
    canvas.legend(i, t.label, color(i), false);
  }
  return canvas.finish();
}

std::string relative_svg(std::span<const RelativeCurve> curves, const std::string& title,
                         const std::string& fingerprint) {
  if (curves.empty()) throw Error(ErrorKind::empty_input, "no relative curves to plot");
  double x_max = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& c : curves) {
    if (c.points.empty()) throw Error(ErrorKind::empty_input, "relative curve '" + c.method_set + "' has no points");
    for (const auto& p : c.points) {
      x_max = std::max(x_max, p.epochs);
      lo = std::min(lo, p.delta);
      hi = std::max(hi, p.delta);
    }
  }
  Canvas canvas(title, fingerprint, {0.0, x_max}, padded(lo, hi), "epochs", "accuracy delta vs baseline");
  canvas.hline(0.0, "#999999");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curves[i].points) pts.emplace_back(p.epochs, p.delta);
    const bool dashed = curves[i].kind == CurveKind::cyclic;
    canvas.polyline(pts, color(i / 2), dashed, to_string(curves[i].kind));
    canvas.legend(i, curves[i].method_set + " (" + to_string(curves[i].kind) + ")", color(i / 2), dashed);
  }
  return canvas.finish();
}

std::string wallclock_svg(std::span<const Bar> bars, const std::string& title, const std::string& fingerprint) {
  if (bars.empty()) throw Error(ErrorKind::empty_input, "no wall-clock totals to plot");
  double y_max = 0.0;
  for (const auto& b : bars) y_max = std::max(y_max, b.value);
  const double n = static_cast<double>(bars.size());
  Canvas canvas(title, fingerprint, {0.0, n}, {0.0, y_max > 0.0 ? y_max * 1.1 : 1.0}, "", "wall clock (s)");
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x0 = canvas.px(static_cast<double>(i) + 0.2), x1 = canvas.px(static_cast<double>(i) + 0.8);
    const double y = canvas.py(bars[i].value), base = canvas.py(0.0);
    canvas.rect(x0, y, x1 - x0, base - y, color(i));
    canvas.label((x0 + x1) / 2, y - 5, num(bars[i].value, "%.2f"));
    canvas.label((x0 + x1) / 2, base + 32, bars[i].label);
  }
  return canvas.finish();
}

std::vector<fs::path> plot_bundle(const ResultsBundle& b, const fs::path& dir, XAxis x) {
  std::vector<PlotSeries> series;
  if (b.standard) series.push_back({b.label + " standard", *b.standard});
  if (b.cyclic) series.push_back({b.label + " cyclic", *b.cyclic});
  if (series.empty()) throw Error(ErrorKind::empty_input, "bundle '" + b.label + "' has no curves");
  ensure_dir(dir);
  std::vector<fs::path> written;
  auto emit = [&](const char* name, const std::string& svg) {
    write_text(dir / name, svg);
    written.push_back(dir / name);
  };
  emit("tradeoff.svg", tradeoff_svg(series, x, b.label + " tradeoff", b.fingerprint));

  std::vector<TraceSeries> traces;
  const RunRecord* longest = nullptr;
  const RunRecord* cyclic = nullptr;
  for (const auto& r : b.runs) {
    if (!r.ok || r.log.lr.empty()) continue;
    if (r.mode == Mode::sweep && (!longest || r.duration > longest->duration)) longest = &r;
    if (r.mode == Mode::cyclic && !cyclic) cyclic = &r;
  }
  if (cyclic) traces.push_back({"cyclic seed " + std::to_string(cyclic->seed), cyclic->log.lr, cyclic->log.steps_per_epoch});
  if (longest)
    traces.push_back({"cosine " + std::to_string(longest->duration) + " epochs", longest->log.lr,
                      longest->log.steps_per_epoch});
  if (!traces.empty()) emit("schedule.svg", schedule_svg(traces, b.label + " learning rate", b.fingerprint));

  if (b.wall_clock) {
    const std::vector<Bar> bars{{"sweep", b.wall_clock->sweep_total_s}, {"cyclic", b.wall_clock->cyclic_total_s}};
    emit("wallclock.svg", wallclock_svg(bars, b.label + " total wall clock", b.fingerprint));
  }
  return written;
}

std::vector<fs::path> plot_report(const ComparisonReport& report, std::span<const ResultsBundle> bundles,
                                  const fs::path& dir, XAxis x) {
  std::string fp;
  for (const auto& f : report.fingerprints) fp += (fp.empty() ? "" : ",") + f;
  std::vector<PlotSeries> series;
  std::vector<Bar> bars;
  for (const auto& label : report.labels)
    for (const auto& b : bundles) {
      if (b.label != label) continue;
      if (b.standard) series.push_back({b.label + " standard", *b.standard});
      if (b.cyclic) series.push_back({b.label + " cyclic", *b.cyclic});
      if (b.wall_clock) {
        bars.push_back({b.label + " sweep", b.wall_clock->sweep_total_s});
        bars.push_back({b.label + " cyclic", b.wall_clock->cyclic_total_s});
      }
      break;
    }
  ensure_dir(dir);
  std::vector<fs::path> written;
  auto emit = [&](const char* name, const std::string& svg) {
    write_text(dir / name, svg);
    written.push_back(dir / name);
  };
  emit("tradeoff.svg", tradeoff_svg(series, x, "tradeoff curves", fp));
  if (!report.relative.empty())
    emit("relative.svg", relative_svg(report.relative, "improvement over " + report.baseline, fp));
  if (!bars.empty()) emit("wallclock.svg", wallclock_svg(bars, "total wall clock", fp));
  return written;
}

}  // namespace cyclebench
