#include "lqts/plot.hpp"

#include "lqts/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lqts {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double cell_number(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw ValidationError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Round step for about `target` ticks over [lo, hi].
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

PlotKind parse_plot_kind(const std::string& text) {
  if (text == "stabilization") return PlotKind::kStabilization;
  if (text == "regret") return PlotKind::kRegret;
  if (text == "estimation") return PlotKind::kEstimation;
  throw ConfigError("unknown plot kind '" + text + "' (expected stabilization, regret or estimation)");
}

Figure figure_from_csv(const std::string& csv_text, PlotKind kind) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty");
  const std::vector<std::string> header = split(line);

  Figure fig;
  if (kind == PlotKind::kStabilization) {
    if (header != std::vector<std::string>{"tau", "reps", "successes", "success_rate", "seed"}) {
      throw ValidationError("CSV header does not match the stabilization schema");
    }
    fig.title = "Stabilization success rate";
    fig.x_label = "tau (s)";
    fig.y_label = "success rate (%)";
    Series s{"success rate", {}, {}};
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != header.size()) {
        throw ValidationError("line " + std::to_string(line_no) + " has the wrong field count");
      }
      s.x.push_back(cell_number(cells[0], line_no));
      s.y.push_back(100.0 * cell_number(cells[3], line_no));
    }
    if (s.x.empty()) throw ValidationError("CSV has no data rows");
    fig.series.push_back(std::move(s));
    return fig;
  }

  if (header != std::vector<std::string>{"policy", "T", "rep", "regret", "norm_regret",
                                         "est_err_sq", "norm_est_err"}) {
    throw ValidationError("CSV header does not match the regret schema");
  }
  const bool regret = kind == PlotKind::kRegret;
  fig.title = regret ? "Normalized regret" : "Normalized squared estimation error";
  fig.x_label = "time (s)";
  fig.y_label = regret ? "R(T) / (p(p+q) sqrt(T) log T)" : "err^2 / (p(p+q) T^-1/2 log T)";
  const std::size_t column = regret ? 4 : 6;

  // Keeps first-seen order of policy/aggregate pairs.
  std::vector<std::string> order;
  std::map<std::string, Series> by_label;
  std::size_t line_no = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + " has the wrong field count");
    }
    ++data_rows;
    const double t = cell_number(cells[1], line_no);
    const double v = cell_number(cells[column], line_no);
    if (cells[2] != "mean" && cells[2] != "worst") continue;
    const std::string label = cells[0] + " " + cells[2];
    auto [it, fresh] = by_label.try_emplace(label, Series{label, {}, {}});
    if (fresh) order.push_back(label);
    it->second.x.push_back(t);
    it->second.y.push_back(v);
  }
  if (data_rows == 0) throw ValidationError("CSV has no data rows");
  if (order.empty()) throw ValidationError("CSV has no mean/worst aggregate rows");
  for (const auto& label : order) fig.series.push_back(std::move(by_label.at(label)));
  return fig;
}

std::string render_svg(const Figure& fig) {
  const double width = 720, height = 460;
  const double left = 80, right = 190, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : fig.series) {
    for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) throw ValidationError("figure has no points");
  ymin = std::min(ymin, 0.0);
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ystep = tick_step(ymin, ymax, 5);
  ymax = std::ceil(ymax / ystep) * ystep;
  const double xstep = tick_step(xmin, xmax, 6);

  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  static const char* colors[] = {"#1f4e9c", "#6f9fe0", "#b22222", "#e58a8a", "#2e7d32", "#81c784"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(fig.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep) {
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(y) << "\" y2=\""
       << sy(y) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
       << fmt(y) << "</text>\n";
  }
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
    os << "<line x1=\"" << sx(x) << "\" x2=\"" << sx(x) << "\" y1=\"" << top + ph << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << sx(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << fmt(x) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\">" << escape(fig.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(fig.y_label) << "</text>\n";

  for (std::size_t i = 0; i < fig.series.size(); ++i) {
    const Series& s = fig.series[i];
    const char* color = colors[i % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      os << (k ? " " : "") << sx(s.x[k]) << ',' << sy(s.y[k]);
    }
    os << "\"/>\n";
    const double ly = top + 14 + 20.0 * static_cast<double>(i);
    os << "<line x1=\"" << left + pw + 15 << "\" x2=\"" << left + pw + 40 << "\" y1=\"" << ly
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::string& csv_path, PlotKind kind, const std::string& out_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + csv_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string svg = render_svg(figure_from_csv(buf.str(), kind));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << svg;
  if (!out) throw std::runtime_error("failed writing '" + out_path + "'");
}

}  // namespace lqts
