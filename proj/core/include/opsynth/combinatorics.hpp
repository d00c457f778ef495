#pragma once

// Factorials and binomials. Exact table lookups up to n = 20, log-space above
// so that cutoffs of a few tens of photons stay representable.

namespace opsynth {

inline constexpr int kExactFactorialLimit = 20;

double log_factorial(int n);
double factorial(int n);
double sqrt_factorial(int n);
double binomial(int n, int k);
double log_binomial(int n, int k);

}  // namespace opsynth
