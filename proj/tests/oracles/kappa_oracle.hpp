#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace forge::oracle {

// Textbook weighted kappa: explicit observed and expected joint
// distributions with quadratic weights.
inline std::optional<double> weighted_kappa(const std::vector<int>& a, const std::vector<int>& b,
                                            int min, int max) {
  const int k = max - min + 1;
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) o[a[i] - min][b[i] - min] += 1.0 / n;
  std::vector<double> pa(k, 0.0), pb(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      pa[i] += o[i][j];
      pb[j] += o[i][j];
    }
  }
  double num = 0.0, den = 0.0;
  const double range = max == min ? 1.0 : static_cast<double>(max - min);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double w = (i - j) * (i - j) / (range * range);
      num += w * o[i][j];
      den += w * pa[i] * pb[j];
    }
  }
  if (den == 0.0) return std::nullopt;
  return 1.0 - num / den;
}

}  // namespace forge::oracle
