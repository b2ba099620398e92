#include "vsss/stats.hpp"

#include <cmath>
#include <iomanip>
#include <locale>
#include <sstream>
#include <vector>

namespace vsss {

StatSummary summarize(std::span<const double> values) {
  StatSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(acc / static_cast<double>(values.size()));
  return s;
}

StatSummary summarize_steps(std::span<const int> values) {
  std::vector<double> d(values.begin(), values.end());
  return summarize(d);
}

std::string format_mean_std(double mean, double stddev) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::fixed << std::setprecision(1) << mean << " ± " << stddev;
  return out.str();
}

std::string format_stat(const StatSummary& s) {
  if (s.empty()) return "n/a";
  return format_mean_std(s.mean, s.stddev);
}

}  // namespace vsss
