#include "qwalk/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qwalk/error.hpp"

namespace qwalk {

std::string csv_version_line() { return "# qwalk-trees v" + std::string(kVersion); }

void write_transmission_csv(std::ostream& os, const std::vector<ScatteringResult>& rows) {
  os << csv_version_line() << '\n';
  os << "E,theta,ReT,ImT,absT,ReR,ImR,unitarity_residual,pole_flag\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.E << ',' << r.theta << ',' << r.T.real() << ',' << r.T.imag() << ',' << std::abs(r.T)
       << ',' << r.R.real() << ',' << r.R.imag() << ',' << r.unitarity_residual << ','
       << (r.pole_flag ? 1 : 0) << '\n';
  }
}

void write_probe_csv(std::ostream& os, const PenetrabilityReport& rep) {
  os << csv_version_line() << '\n';
  os << "t,prob_target,norm_residual\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
    os << rep.t_grid[i] << ',' << rep.prob_target[i] << ',' << rep.norm_residual[i] << '\n';
  }
}

namespace {

double parse_number(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? colon : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin")) {
    throw InvalidArgument("grid must look like log:a:b:N or lin:a:b:N, got '" +
                          std::string(spec) + "'");
  }
  const double a = parse_number(parts[1]);
  const double b = parse_number(parts[2]);
  const double count = parse_number(parts[3]);
  if (!(count >= 1.0) || count != std::floor(count) || count > 1e7) {
    throw InvalidArgument("grid point count must be a positive integer");
  }
  const int n = static_cast<int>(count);
  if (!(b >= a)) throw InvalidArgument("grid end must not precede its start");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (parts[0] == "log") {
    if (!(a > 0.0)) throw InvalidArgument("log grids need a positive start");
    const double la = std::log(a);
    const double lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : std::exp(la + (lb - la) * i / (n - 1));
    out.front() = a;
    if (n > 1) out.back() = b;
  } else {
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  const double left = 70, right = 20, top = 36, bottom = 50;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;
  auto tx = [&](double x) { return opt.log_x ? std::log10(x) : x; };

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (opt.log_x && !(s.x[i] > 0.0))) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (opt.y_min < opt.y_max) {
    ymin = opt.y_min;
    ymax = opt.y_max;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double x) { return left + (tx(x) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    y = std::clamp(y, ymin, ymax);
    return top + (ymax - y) / (ymax - ymin) * ph;
  };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
     << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(opt.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // x ticks: decades on log axes, five intervals otherwise.
  std::vector<double> xticks;
  if (opt.log_x) {
    const double step = std::max(1.0, std::ceil((xmax - xmin) / 10.0));
    for (double d = std::ceil(xmin); d <= xmax + 1e-9; d += step) xticks.push_back(d);
  } else {
    for (int i = 0; i <= 5; ++i) xticks.push_back(xmin + (xmax - xmin) * i / 5.0);
  }
  for (double t : xticks) {
    const double x = left + (t - xmin) / (xmax - xmin) * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << (opt.log_x ? "1e" + fmt(t) : fmt(t)) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = ymin + (ymax - ymin) * i / 5.0;
    const double y = py(v);
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fmt(v)
       << "</text>\n";
  }
  if (ymin < 0 && ymax > 0) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left + pw << "\" y2=\""
       << py(0) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << opt.height - 10
     << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(opt.y_label) << "</text>\n";

  static const char* colors[] = {"#1f4e9c", "#c0392b", "#27864a", "#7d3c98"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    std::ostringstream d;
    d << std::setprecision(6);
    bool pen_down = false;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.y[i]) || (opt.log_x && !(ser.x[i] > 0.0))) {
        pen_down = false;
        continue;
      }
      d << (pen_down ? " L" : " M") << px(ser.x[i]) << ' ' << py(ser.y[i]);
      pen_down = true;
    }
    os << "<path d=\"" << d.str() << "\" fill=\"none\" stroke=\"" << colors[s % 4]
       << "\" stroke-width=\"1.3\"/>\n";
    if (!ser.label.empty()) {
      os << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 16 + 14 * s
         << "\" text-anchor=\"end\" fill=\"" << colors[s % 4] << "\">" << escape(ser.label)
         << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qwalk
