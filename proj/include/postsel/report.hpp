#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "postsel/size_analysis.hpp"

namespace postsel {

// "# key=value" lines written above every CSV table.
using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

// 10 significant digits.
std::string format_number(double x);

// gamma,rejection,stderr,method,reps,seed
void write_size_curve_csv(std::ostream& out, const SizeCurve& curve, const CsvMetadata& meta);
SizeCurve read_size_curve_csv(std::istream& in, CsvMetadata* meta = nullptr);

// rule,delta,max_size,argmax_gamma,verdict,margin,error_budget,floor_size,floor_gamma
void write_size_reports_csv(std::ostream& out, const std::vector<SizeReport>& reports,
                            const CsvMetadata& meta);

// Plain table: header row plus numeric rows.
void write_table_csv(std::ostream& out, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const CsvMetadata& meta);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgReferenceLine {
  double y;
  std::string label;
};

// Static line chart with axes, tick labels, a legend and horizontal
// reference lines.
class SvgLineChart {
 public:
  SvgLineChart(std::string title, std::string x_label, std::string y_label);

  void add_series(SvgSeries series);
  void add_reference(SvgReferenceLine line);
  std::string render(int width = 800, int height = 500) const;

 private:
  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<SvgSeries> series_;
  std::vector<SvgReferenceLine> references_;
};

}  // namespace postsel
