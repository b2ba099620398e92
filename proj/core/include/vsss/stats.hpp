#pragma once

#include <optional>
#include <span>
#include <string>

namespace vsss {

// Mean +- population standard deviation over scoring episodes.
struct StatSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;

  bool empty() const { return count == 0; }
};

StatSummary summarize(std::span<const double> values);
StatSummary summarize_steps(std::span<const int> values);

// "547.2 ± 233.6" style, one decimal, locale-independent '.' separator.
std::string format_mean_std(double mean, double stddev);
// Empty statistics render as "n/a" rather than a fake zero.
std::string format_stat(const StatSummary& s);

}  // namespace vsss
