#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace dpre {

struct SampleSummary {
  double mean = 0;
  double std_error = 0;  // standard error of the mean
  std::size_t count = 0;
};

/// Mean and standard error, accumulated in index order.
inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return s;
}

}  // namespace dpre
