#include "postsel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace postsel {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void write_meta(std::ostream& out, const CsvMetadata& meta) {
  for (const auto& [key, value] : meta) out << "# " << key << '=' << value << '\n';
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
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

// Round step for about `target` ticks across [lo, hi].
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_size_curve_csv(std::ostream& out, const SizeCurve& curve, const CsvMetadata& meta) {
  write_meta(out, meta);
  out << "# rule=" << curve.rule << '\n';
  out << "gamma,rejection,stderr,method,reps,seed\n";
  for (std::size_t i = 0; i < curve.gammas.size(); ++i) {
    out << format_number(curve.gammas[i]) << ',' << format_number(curve.rejection[i]) << ','
        << format_number(curve.std_error[i]) << ',' << to_string(curve.method) << ','
        << curve.reps << ',' << curve.seed << '\n';
  }
}

SizeCurve read_size_curve_csv(std::istream& in, CsvMetadata* meta) {
  SizeCurve curve;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "rule") {
        curve.rule = value;
      } else if (meta) {
        meta->emplace_back(key, value);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "gamma,rejection,stderr,method,reps,seed") {
        throw std::runtime_error("unexpected size curve header: " + line);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 6) throw std::runtime_error("malformed size curve row: " + line);
    curve.gammas.push_back(std::stod(fields[0]));
    curve.rejection.push_back(std::stod(fields[1]));
    curve.std_error.push_back(std::stod(fields[2]));
    if (fields[3] == "semi-analytic") {
      curve.method = SizeMethod::SemiAnalytic;
    } else if (fields[3] == "monte-carlo") {
      curve.method = SizeMethod::MonteCarlo;
    } else {
      throw std::runtime_error("unknown size method: " + fields[3]);
    }
    curve.reps = std::stoull(fields[4]);
    curve.seed = std::stoull(fields[5]);
  }
  if (!header_seen) throw std::runtime_error("size curve CSV has no header");
  return curve;
}

void write_size_reports_csv(std::ostream& out, const std::vector<SizeReport>& reports,
                            const CsvMetadata& meta) {
  write_meta(out, meta);
  out << "rule,delta,max_size,argmax_gamma,verdict,margin,error_budget,floor_size,floor_gamma\n";
  for (const auto& r : reports) {
    out << r.rule << ',' << format_number(r.delta) << ',' << format_number(r.max_size) << ','
        << format_number(r.argmax_gamma) << ',' << to_string(r.verdict) << ','
        << format_number(r.margin) << ',' << format_number(r.error_budget) << ','
        << (r.floor_size ? format_number(*r.floor_size) : "") << ','
        << (r.floor_gamma ? format_number(*r.floor_gamma) : "") << '\n';
  }
}

void write_table_csv(std::ostream& out, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const CsvMetadata& meta) {
  write_meta(out, meta);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

SvgLineChart::SvgLineChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgLineChart::add_series(SvgSeries series) {
  if (series.x.size() != series.y.size()) throw std::invalid_argument("series x/y length mismatch");
  series_.push_back(std::move(series));
}

void SvgLineChart::add_reference(SvgReferenceLine line) { references_.push_back(std::move(line)); }

std::string SvgLineChart::render(int width, int height) const {
  constexpr double left = 80.0;
  constexpr double right = 30.0;
  constexpr double top = 50.0;
  constexpr double bottom = 60.0;
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  for (const auto& r : references_) {
    y_lo = std::min(y_lo, r.y);
    y_hi = std::max(y_hi, r.y);
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!std::isfinite(y_lo)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_lo -= 0.5 * std::max(1e-3, std::abs(y_lo));
    y_hi += 0.5 * std::max(1e-3, std::abs(y_hi));
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(title_) << "</text>\n";

  svg << "<g class=\"axes\" stroke=\"black\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\"/>\n</g>\n";

  svg << "<g class=\"ticks\" font-size=\"11\">\n";
  const double xs = tick_step(x_lo, x_hi, 8);
  for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(t)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>"
        << "<text x=\"" << px(t) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << short_number(std::abs(t) < 1e-12 * xs ? 0.0 : t)
        << "</text>\n";
  }
  const double ys = tick_step(y_lo, y_hi, 6);
  for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\""
        << py(t) << "\" stroke=\"black\"/>"
        << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
        << short_number(std::abs(t) < 1e-12 * ys ? 0.0 : t) << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(x_label_) << "</text>\n"
      << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"13\""
      << " transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">" << xml_escape(y_label_)
      << "</text>\n";

  for (const auto& r : references_) {
    svg << "<g class=\"reference\"><line x1=\"" << left << "\" y1=\"" << py(r.y) << "\" x2=\""
        << left + plot_w << "\" y2=\"" << py(r.y)
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>"
        << "<text x=\"" << left + plot_w - 4 << "\" y=\"" << py(r.y) - 4
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"gray\">" << xml_escape(r.label)
        << "</text></g>\n";
  }

  for (std::size_t k = 0; k < series_.size(); ++k) {
    const auto& s = series_[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 16 * static_cast<double>(k)
        << "\" font-size=\"12\" fill=\"" << color << "\">" << xml_escape(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace postsel
