#include "opsynth/combinatorics.hpp"

#include <array>
#include <cmath>
#include <cstdint>

#include "opsynth/errors.hpp"

namespace opsynth {

namespace {

constexpr std::array<std::uint64_t, kExactFactorialLimit + 1> kFactorials = [] {
  std::array<std::uint64_t, kExactFactorialLimit + 1> table{};
  table[0] = 1;
  for (int n = 1; n <= kExactFactorialLimit; ++n) table[n] = table[n - 1] * static_cast<std::uint64_t>(n);
  return table;
}();

}  // namespace

double log_factorial(int n) {
  require(n >= 0, ErrorKind::kValidation, "log_factorial: negative argument");
  if (n <= kExactFactorialLimit) return std::log(static_cast<double>(kFactorials[n]));
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double factorial(int n) {
  require(n >= 0, ErrorKind::kValidation, "factorial: negative argument");
  if (n <= kExactFactorialLimit) return static_cast<double>(kFactorials[n]);
  return std::exp(log_factorial(n));
}

double sqrt_factorial(int n) {
  if (n <= kExactFactorialLimit) return std::sqrt(factorial(n));
  return std::exp(0.5 * log_factorial(n));
}

double log_binomial(int n, int k) {
  require(k >= 0 && k <= n, ErrorKind::kValidation, "binomial: k outside [0, n]");
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n <= kExactFactorialLimit) {
    return static_cast<double>(kFactorials[n] / (kFactorials[k] * kFactorials[n - k]));
  }
  // Multiplicative form is exact while the running value stays below 2^53.
  if (k > n - k) k = n - k;
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value = value * static_cast<double>(n - k + i) / static_cast<double>(i);
  if (value < 9.0e15) return std::round(value);
  return std::exp(log_binomial(n, k));
}

}  // namespace opsynth
