#pragma once

// Correlated binomial distribution CB(n, p, rho): a two-component mixture
// with weight 1 - rho on Binomial(n, p) and weight rho on a two-point law
// putting mass 1 - p at 0 and p at n.
//
//   P(y) = (1 - rho) C(n,y) p^y (1-p)^(n-y) + rho p^(y/n) (1-p)^((n-y)/n) [y in {0,n}]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cbem/errors.hpp"
#include "cbem/random.hpp"

namespace cbem {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct CBParams {
  int n = 1;
  double p = 0.5;
  double rho = 0.0;

  void validate() const {
    if (n < 1)
      throw DomainError("CB trial count n must be >= 1, got " +
                        std::to_string(n));
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("CB success probability p must lie in [0,1]");
    if (!(rho >= 0.0 && rho <= 1.0))
      throw DomainError("CB mixture weight rho must lie in [0,1]");
  }

  bool operator==(const CBParams &) const = default;
};

/// k observed counts sharing one trial count n.
class Dataset {
public:
  Dataset(int n, std::vector<int> observations)
      : n_(n), obs_(std::move(observations)) {
    if (n_ < 1)
      throw DomainError("dataset trial count n must be >= 1");
    if (obs_.empty())
      throw DomainError("dataset must contain at least one observation");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      if (obs_[i] < 0 || obs_[i] > n_) {
        std::ostringstream os;
        os << "observation " << i << " = " << obs_[i] << " outside [0, " << n_
           << "]";
        throw DomainError(os.str());
      }
    }
  }

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return obs_.size(); }
  std::span<const int> observations() const noexcept { return obs_; }
  int operator[](std::size_t i) const { return obs_[i]; }

  /// counts[y] = number of observations equal to y, for y = 0..n.
  std::vector<std::size_t> histogram() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_) + 1, 0);
    for (int y : obs_)
      ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  double mean() const {
    double s = 0.0;
    for (int y : obs_)
      s += y;
    return s / static_cast<double>(obs_.size());
  }

  bool operator==(const Dataset &) const = default;

private:
  int n_;
  std::vector<int> obs_;
};

namespace detail {

inline void check_count(int y, int n) {
  if (n < 1)
    throw DomainError("trial count n must be >= 1");
  if (y < 0 || y > n)
    throw DomainError("count y = " + std::to_string(y) + " outside [0, " +
                      std::to_string(n) + "]");
}

inline void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("probability must lie in [0,1]");
}

/// a * log(b) with 0 * log(0) = 0.
inline double xlogy(double a, double b) {
  if (a == 0.0)
    return 0.0;
  return a * std::log(b);
}

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
  if (a == kNegInf)
    return b;
  if (b == kNegInf)
    return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

} // namespace detail

inline double log_choose(int n, int y) {
  detail::check_count(y, n);
  if (y == 0 || y == n)
    return 0.0;
  return std::lgamma(n + 1.0) - std::lgamma(y + 1.0) -
         std::lgamma(n - y + 1.0);
}

inline double log_binomial_pmf(int y, int n, double p) {
  detail::check_count(y, n);
  detail::check_probability(p);
  return log_choose(n, y) + detail::xlogy(y, p) + detail::xlogy(n - y, 1.0 - p);
}

/// C(n,y) p^y (1-p)^(n-y), evaluated in log space.
inline double binomial_pmf(int y, int n, double p) {
  return std::exp(log_binomial_pmf(y, n, p));
}

/// log of p^(y/n) (1-p)^((n-y)/n) on {0, n}; -inf elsewhere.
inline double log_boundary_kernel(int y, int n, double p) {
  detail::check_count(y, n);
  detail::check_probability(p);
  if (y != 0 && y != n)
    return kNegInf;
  const double frac = static_cast<double>(y) / n;
  return detail::xlogy(frac, p) +
         detail::xlogy(static_cast<double>(n - y) / n, 1.0 - p);
}

inline double log_cb_pmf(int y, const CBParams &params) {
  params.validate();
  detail::check_count(y, params.n);
  const double binom =
      std::log(1.0 - params.rho) + log_binomial_pmf(y, params.n, params.p);
  const double boundary =
      params.rho == 0.0
          ? kNegInf
          : std::log(params.rho) + log_boundary_kernel(y, params.n, params.p);
  return detail::log_add(binom, boundary);
}

inline double cb_pmf(int y, const CBParams &params) {
  return std::exp(log_cb_pmf(y, params));
}

enum class LikelihoodMode {
  exact,   ///< -inf when some observation has zero probability
  clamped, ///< per-observation probabilities floored at 1e-300
};

inline constexpr double kProbabilityFloor = 1e-300;

inline double log_likelihood(const Dataset &data, const CBParams &params,
                             LikelihoodMode mode = LikelihoodMode::exact) {
  if (params.n != data.n())
    throw DomainError("params.n does not match dataset n");
  const double log_floor = std::log(kProbabilityFloor);
  double total = 0.0;
  for (int y : data.observations()) {
    double term = log_cb_pmf(y, params);
    if (mode == LikelihoodMode::clamped)
      term = std::max(term, log_floor);
    total += term;
  }
  return total;
}

/// Draws k independent CB observations.
///
/// Generator: Rng(seed), i.e. std::mt19937_64 with 53-bit uniforms. Each
/// observation consumes exactly two uniforms u1, u2: u1 < rho selects the
/// boundary component, which returns n if u2 < p and 0 otherwise; otherwise y
/// is the smallest value with u2 < F(y), F the Binomial(n, p) CDF (n when
/// rounding leaves F(n) <= u2).
inline Dataset sample(const CBParams &params, std::size_t k,
                      std::uint64_t seed) {
  params.validate();
  if (k < 1)
    throw DomainError("sample size k must be >= 1");
  std::vector<double> cdf(static_cast<std::size_t>(params.n) + 1);
  double acc = 0.0;
  for (int y = 0; y <= params.n; ++y) {
    acc += binomial_pmf(y, params.n, params.p);
    cdf[static_cast<std::size_t>(y)] = acc;
  }
  Rng rng(seed);
  std::vector<int> obs;
  obs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    if (u1 < params.rho) {
      obs.push_back(u2 < params.p ? params.n : 0);
      continue;
    }
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u2);
    obs.push_back(it == cdf.end() ? params.n
                                  : static_cast<int>(it - cdf.begin()));
  }
  return Dataset(params.n, std::move(obs));
}

} // namespace cbem
