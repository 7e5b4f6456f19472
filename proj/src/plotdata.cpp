#include "nestdiag/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "nestdiag/error.hpp"
#include "nestdiag/report.hpp"
#include "nestdiag/resampling.hpp"
#include "nestdiag/rng.hpp"

namespace nestdiag {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::string run_label(const NSRun& run, std::size_t fallback) {
  auto it = run.meta.find("id");
  return it != run.meta.end() ? it->second : "run" + std::to_string(fallback);
}

std::vector<double> function_values(const NSRun& run, const ParamFunction& f) {
  f.check_dimension(run.dim());
  std::vector<double> out(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) out[i] = f(run.points[i].params);
  return out;
}

// Sorted distinct labels -> positions, matching decompose_threads' ordering.
std::vector<std::vector<std::size_t>> thread_members(const NSRun& run) {
  const auto labels = run.thread_labels.size() == run.size() ? run.thread_labels : chain_threads(run.points);
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < run.size(); ++i) by_label[labels[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(by_label.size());
  for (auto& [label, members] : by_label) out.push_back(std::move(members));
  return out;
}

}  // namespace

std::vector<double> default_grid(const NSRun& run, const ParamFunction& f, std::size_t points) {
  if (points < 2) throw Error("grid needs at least 2 points");
  const auto w = importance_weights(run, logx_expected(run));
  const auto values = function_values(run, f);
  const double wmax = *std::max_element(w.begin(), w.end());
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (w[i] < 1e-10 * wmax) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  double h = scott_bandwidth(values, w);
  if (!(h > 0.0)) h = 1.0;
  lo -= 4.0 * h;
  hi += 4.0 * h;
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  return grid;
}

ContourBand posterior_uncertainty_band(const NSRun& run, const ParamFunction& f, std::span<const double> grid,
                                       std::size_t replications, std::uint64_t seed) {
  if (replications < 10) throw Error("posterior_uncertainty_band: need at least 10 replications");
  const auto values = function_values(run, f);
  ThreadResampler resampler(run);
  Matrix pdf(replications, grid.size());

  parallel_for(replications, [&](std::size_t b) {
    const auto draw = resampler.draw(derive_seed(seed, b));
    const auto n = draw.source.size();
    std::vector<double> loglike(n), fv(n);
    for (std::size_t j = 0; j < n; ++j) {
      loglike[j] = run.points[draw.source[j]].loglike;
      fv[j] = values[draw.source[j]];
    }
    auto lw = log_weights(loglike, logx_expected(draw.nlive));
    const double logz = log_sum_exp(lw);
    for (double& w : lw) w = std::exp(w - logz);
    const auto curve = weighted_kde(fv, lw, grid);
    std::copy(curve.pdf.begin(), curve.pdf.end(), pdf.values.begin() + static_cast<std::ptrdiff_t>(b * grid.size()));
  });

  ContourBand band;
  band.run_id = run_label(run, 0);
  band.function = f.name();
  band.grid.assign(grid.begin(), grid.end());
  band.median.resize(grid.size());
  for (auto& v : band.lower) v.resize(grid.size());
  for (auto& v : band.upper) v.resize(grid.size());
  std::vector<double> column(replications);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t b = 0; b < replications; ++b) column[b] = pdf(b, g);
    std::sort(column.begin(), column.end());
    band.median[g] = quantile(column, 0.5);
    for (std::size_t k = 0; k < kBandMasses.size(); ++k) {
      band.lower[k][g] = quantile(column, 0.5 * (1.0 - kBandMasses[k]));
      band.upper[k][g] = quantile(column, 0.5 * (1.0 + kBandMasses[k]));
    }
  }
  return band;
}

MassCurve posterior_mass_curve(const NSRun& run, std::size_t n_grid) {
  if (n_grid < 2) throw Error("posterior_mass_curve: need at least 2 grid points");
  const auto logx = logx_expected(run);
  const auto n = run.size();
  if (n == 0) throw Error("posterior_mass_curve: empty run");
  std::vector<double> logm(n);
  for (std::size_t i = 0; i < n; ++i) logm[i] = run.points[i].loglike + logx[i];
  MassCurve curve;
  curve.log_norm = *std::max_element(logm.begin(), logm.end());
  curve.logx.resize(n_grid);
  curve.mass.resize(n_grid);
  const double lo = logx.back(), hi = logx.front();
  // logx is decreasing in the point index.
  std::size_t seg = n - 1;
  for (std::size_t k = 0; k < n_grid; ++k) {
    const double x = n == 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_grid - 1);
    curve.logx[k] = x;
    if (n == 1) {
      curve.mass[k] = std::exp(logm[0] - curve.log_norm);
      continue;
    }
    while (seg > 1 && logx[seg - 1] < x) --seg;
    // x lies between logx[seg] (lower) and logx[seg - 1] (upper).
    const double x0 = logx[seg], x1 = logx[seg - 1];
    const double t = x1 > x0 ? std::clamp((x - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
    const double lm = logm[seg] + t * (logm[seg - 1] - logm[seg]);
    curve.mass[k] = std::exp(lm - curve.log_norm);
  }
  return curve;
}

ThreadTrace thread_trace(const NSRun& run, std::size_t thread_index, const ParamFunction& f) {
  const auto members = thread_members(run);
  if (thread_index >= members.size())
    throw Error("thread index " + std::to_string(thread_index) + " out of range (run has " +
                std::to_string(members.size()) + " threads)");
  f.check_dimension(run.dim());
  const auto logx = logx_expected(run);
  ThreadTrace trace;
  trace.thread = thread_index;
  trace.function = f.name();
  for (auto i : members[thread_index]) {
    trace.logx.push_back(logx[i]);
    trace.value.push_back(f(run.points[i].params));
  }
  return trace;
}

LogXDiagram logx_diagram(std::span<const NSRun> runs, std::span<const ParamFunction> functions, std::size_t n_sim,
                         std::size_t traces_per_run, std::uint64_t seed, std::size_t mass_grid) {
  if (n_sim > 0 && n_sim < 100) throw Error("logx_diagram: n_sim must be 0 or at least 100");
  LogXDiagram out;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    const auto logx = logx_expected(run);
    const auto w = importance_weights(run, logx);
    out.mass_curves.push_back(posterior_mass_curve(run, mass_grid));

    for (const auto& f : functions) {
      const auto values = function_values(run, f);
      for (std::size_t i = 0; i < run.size(); ++i) out.scatter.push_back({k, f.name(), logx[i], values[i], w[i]});
    }

    if (n_sim > 0) {
      const auto sims = simulate_logx(run, n_sim, derive_seed(seed, 2 * k));
      std::vector<double> column(n_sim);
      for (std::size_t i = 0; i < run.size(); ++i) {
        for (std::size_t r = 0; r < n_sim; ++r) column[r] = sims(r, i);
        std::sort(column.begin(), column.end());
        out.logx_intervals.push_back({k, i, logx[i], quantile(column, 0.5), quantile(column, 0.5 * (1 - 0.6827)),
                                      quantile(column, 0.5 * (1 + 0.6827)), quantile(column, 0.025),
                                      quantile(column, 0.975)});
      }
    }

    const auto n_threads = thread_members(run).size();
    Rng rng(derive_seed(seed, 2 * k + 1));
    std::vector<std::size_t> pool(n_threads);
    std::iota(pool.begin(), pool.end(), 0);
    const auto picks = std::min(traces_per_run, n_threads);
    for (std::size_t p = 0; p < picks; ++p) {
      std::swap(pool[p], pool[p + rng.index(n_threads - p)]);
      for (const auto& f : functions) {
        auto trace = thread_trace(run, pool[p], f);
        trace.run = k;
        out.traces.push_back(std::move(trace));
      }
    }
  }
  return out;
}

std::string band_csv(const ContourBand& band) {
  std::ostringstream out;
  out << "x,median,lower_1sigma,upper_1sigma,lower_2sigma,upper_2sigma,lower_3sigma,upper_3sigma\n";
  for (std::size_t g = 0; g < band.grid.size(); ++g) {
    out << format_double(band.grid[g]) << ',' << format_double(band.median[g]);
    for (std::size_t k = 0; k < 3; ++k)
      out << ',' << format_double(band.lower[k][g]) << ',' << format_double(band.upper[k][g]);
    out << '\n';
  }
  return out.str();
}

std::string mass_curve_csv(const LogXDiagram& diagram) {
  std::ostringstream out;
  out << "run,logx,relative_mass\n";
  for (std::size_t k = 0; k < diagram.mass_curves.size(); ++k) {
    const auto& c = diagram.mass_curves[k];
    for (std::size_t i = 0; i < c.logx.size(); ++i)
      out << k << ',' << format_double(c.logx[i]) << ',' << format_double(c.mass[i]) << '\n';
  }
  return out.str();
}

std::string scatter_csv(const LogXDiagram& diagram) {
  std::ostringstream out;
  out << "run,function,logx,value,weight\n";
  for (const auto& s : diagram.scatter)
    out << s.run << ',' << s.function << ',' << format_double(s.logx) << ',' << format_double(s.value) << ','
        << format_double(s.weight) << '\n';
  return out.str();
}

std::string logx_intervals_csv(const LogXDiagram& diagram) {
  std::ostringstream out;
  out << "run,index,expected,median,lower68,upper68,lower95,upper95\n";
  for (const auto& v : diagram.logx_intervals)
    out << v.run << ',' << v.index << ',' << format_double(v.expected) << ',' << format_double(v.median) << ','
        << format_double(v.lower68) << ',' << format_double(v.upper68) << ',' << format_double(v.lower95) << ','
        << format_double(v.upper95) << '\n';
  return out.str();
}

std::string traces_csv(const LogXDiagram& diagram) {
  std::ostringstream out;
  out << "run,thread,function,logx,value\n";
  for (const auto& t : diagram.traces) {
    for (std::size_t i = 0; i < t.logx.size(); ++i)
      out << t.run << ',' << t.thread << ',' << t.function << ',' << format_double(t.logx[i]) << ','
          << format_double(t.value[i]) << '\n';
  }
  return out.str();
}

namespace {

constexpr const char* kColours[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Panel {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return x0 + (xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5) * w; }
  double py(double y) const { return y0 + h - (ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5) * h; }
};

void frame(std::ostringstream& out, const Panel& p, const std::string& xlabel, const std::string& ylabel) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"9\">%.3g</text>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"9\" text-anchor=\"end\">%.3g</text>\n",
                p.x0, p.y0, p.w, p.h, p.x0 + p.w / 2, p.y0 + p.h + 24, xlabel.c_str(), p.x0 - 6, p.y0 + p.h / 2,
                ylabel.c_str(), p.x0, p.y0 + p.h + 12, p.xmin, p.x0 + p.w, p.y0 + p.h + 12, p.xmax);
  out << buf;
}

void polyline(std::ostringstream& out, const Panel& p, std::span<const double> xs, std::span<const double> ys,
              const char* colour, double width = 1.0) {
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width << "\" points=\"";
  char buf[64];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p.px(xs[i]), p.py(ys[i]));
    out << buf;
  }
  out << "\"/>\n";
}

}  // namespace

std::string band_svg(std::span<const ContourBand> bands) {
  std::ostringstream out;
  const double width = 640, height = 400;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  if (bands.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  Panel p{70, 20, width - 100, height - 70, INFINITY, -INFINITY, 0.0, 0.0};
  for (const auto& b : bands) {
    p.xmin = std::min(p.xmin, b.grid.front());
    p.xmax = std::max(p.xmax, b.grid.back());
    for (double v : b.upper[2]) p.ymax = std::max(p.ymax, v);
  }
  char buf[64];
  for (std::size_t r = 0; r < bands.size(); ++r) {
    const auto& b = bands[r];
    const char* colour = kColours[r % std::size(kColours)];
    for (int k = 2; k >= 0; --k) {
      out << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t g = 0; g < b.grid.size(); ++g) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p.px(b.grid[g]), p.py(b.upper[k][g]));
        out << buf;
      }
      for (std::size_t g = b.grid.size(); g-- > 0;) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p.px(b.grid[g]), p.py(b.lower[k][g]));
        out << buf;
      }
      out << "\"/>\n";
    }
    polyline(out, p, b.grid, b.median, colour, 1.5);
  }
  frame(out, p, bands.front().function, "posterior");
  out << "</svg>\n";
  return out.str();
}

std::string logx_diagram_svg(const LogXDiagram& diagram) {
  std::vector<std::string> functions;
  for (const auto& s : diagram.scatter) {
    if (std::find(functions.begin(), functions.end(), s.function) == functions.end()) functions.push_back(s.function);
  }
  const double width = 640, panel_h = 160, gap = 50;
  const double height = gap + (panel_h + gap) * static_cast<double>(1 + functions.size());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";

  double xmin = 0.0;
  for (const auto& c : diagram.mass_curves) {
    if (!c.logx.empty()) xmin = std::min(xmin, c.logx.front());
  }
  Panel top{70, 20, width - 100, panel_h, xmin, 0.0, 0.0, 1.05};
  for (std::size_t k = 0; k < diagram.mass_curves.size(); ++k)
    polyline(out, top, diagram.mass_curves[k].logx, diagram.mass_curves[k].mass, kColours[k % std::size(kColours)]);
  frame(out, top, "log X", "relative mass");

  for (std::size_t fi = 0; fi < functions.size(); ++fi) {
    Panel p{70, 20 + (panel_h + gap) * static_cast<double>(fi + 1), width - 100, panel_h, xmin, 0.0, INFINITY,
            -INFINITY};
    for (const auto& s : diagram.scatter) {
      if (s.function != functions[fi]) continue;
      p.ymin = std::min(p.ymin, s.value);
      p.ymax = std::max(p.ymax, s.value);
    }
    char buf[160];
    for (const auto& s : diagram.scatter) {
      if (s.function != functions[fi]) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"0.8\" fill=\"%s\"/>\n", p.px(s.logx),
                    p.py(s.value), kColours[s.run % std::size(kColours)]);
      out << buf;
    }
    for (const auto& t : diagram.traces) {
      if (t.function == functions[fi]) polyline(out, p, t.logx, t.value, "black");
    }
    frame(out, p, "log X", functions[fi]);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace nestdiag
