#pragma once

// Brute-force maximum-likelihood search over (p, rho) in [0,1]^2, used to
// check EM fits. Evaluates the observed-data log-likelihood on a square grid,
// then repeatedly re-centres a shrunken window on the best point.
//
// The log-likelihood here is evaluated from the count histogram with its own
// arithmetic, not through cb_model's log_likelihood, so the two stay
// independent.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

#include "cbem/cb_model.hpp"
#include "cbem/errors.hpp"

namespace cbem {

struct GridSpec {
  std::size_t coarse_resolution = 2001;
  std::size_t refine_rounds = 3;
  double refine_shrink = 0.05;

  void validate() const {
    if (coarse_resolution < 11)
      throw ConfigError("coarse_resolution must be >= 11");
    if (!(refine_shrink > 0.0 && refine_shrink < 1.0))
      throw ConfigError("refine_shrink must lie in (0,1)");
  }
};

struct GridPoint {
  double p = 0.0;
  double rho = 0.0;
  double log_likelihood = kNegInf;
};

struct GridResult {
  double p = 0.0;
  double rho = 0.0;
  double log_likelihood = kNegInf;
  /// Best log-likelihood after the coarse pass and after each refinement.
  std::vector<double> round_best;
};

namespace detail {

/// Total order used for the argmax: higher log-likelihood, then smaller p,
/// then smaller rho. NaN ranks as -inf.
inline bool grid_better(const GridPoint &a, const GridPoint &b) {
  const double la = std::isnan(a.log_likelihood) ? kNegInf : a.log_likelihood;
  const double lb = std::isnan(b.log_likelihood) ? kNegInf : b.log_likelihood;
  if (la != lb)
    return la > lb;
  if (a.p != b.p)
    return a.p < b.p;
  return a.rho < b.rho;
}

class HistogramLikelihood {
public:
  explicit HistogramLikelihood(const Dataset &data)
      : n_(data.n()), counts_(data.histogram()) {
    for (int y = 1; y < n_; ++y)
      interior_count_ += static_cast<double>(counts_[static_cast<std::size_t>(y)]);
    lchoose_.resize(counts_.size());
    for (int y = 0; y <= n_; ++y)
      lchoose_[static_cast<std::size_t>(y)] = std::lgamma(n_ + 1.0) -
                                               std::lgamma(y + 1.0) -
                                               std::lgamma(n_ - y + 1.0);
    zero_count_ = static_cast<double>(counts_.front());
    n_count_ = static_cast<double>(counts_.back());
  }

  struct Row {
    double p;
    double interior_sum; // sum over interior y of count * log Binomial(y; n, p)
    double pmf_zero;     // Binomial(0; n, p)
    double pmf_n;        // Binomial(n; n, p)
  };

  Row row(double p) const {
    Row r{p, 0.0, std::pow(1.0 - p, n_), std::pow(p, n_)};
    for (int y = 1; y < n_; ++y) {
      const std::size_t c = counts_[static_cast<std::size_t>(y)];
      if (c == 0)
        continue;
      const double lchoose = lchoose_[static_cast<std::size_t>(y)];
      const double lp = p == 0.0 ? kNegInf : y * std::log(p);
      const double lq = p == 1.0 ? kNegInf : (n_ - y) * std::log1p(-p);
      r.interior_sum += static_cast<double>(c) * (lchoose + lp + lq);
    }
    return r;
  }

  double eval(const Row &r, double rho, double log_one_minus_rho) const {
    double ll = 0.0;
    if (interior_count_ > 0.0)
      ll += interior_count_ * log_one_minus_rho + r.interior_sum;
    if (zero_count_ > 0.0)
      ll += zero_count_ * std::log((1.0 - rho) * r.pmf_zero + rho * (1.0 - r.p));
    if (n_count_ > 0.0)
      ll += n_count_ * std::log((1.0 - rho) * r.pmf_n + rho * r.p);
    return ll;
  }

private:
  int n_;
  std::vector<std::size_t> counts_;
  std::vector<double> lchoose_;
  double interior_count_ = 0.0;
  double zero_count_ = 0.0;
  double n_count_ = 0.0;
};

inline std::vector<double> grid_axis(double lo, double width, std::size_t m) {
  std::vector<double> axis(m);
  for (std::size_t i = 0; i < m; ++i)
    axis[i] = std::clamp(lo + width * static_cast<double>(i) /
                                  static_cast<double>(m - 1),
                         0.0, 1.0);
  axis.back() = std::min(1.0, lo + width);
  return axis;
}

inline GridPoint grid_pass(const HistogramLikelihood &lik,
                           const std::vector<double> &p_axis,
                           const std::vector<double> &rho_axis,
                           unsigned threads) {
  std::vector<double> log1m(rho_axis.size());
  for (std::size_t j = 0; j < rho_axis.size(); ++j)
    log1m[j] = std::log1p(-rho_axis[j]);

  auto scan = [&](std::size_t row_begin, std::size_t row_end) {
    GridPoint best;
    best.p = 2.0; // worse than any real point under grid_better ties
    best.rho = 2.0;
    for (std::size_t i = row_begin; i < row_end; ++i) {
      const auto row = lik.row(p_axis[i]);
      for (std::size_t j = 0; j < rho_axis.size(); ++j) {
        const GridPoint cand{p_axis[i], rho_axis[j],
                             lik.eval(row, rho_axis[j], log1m[j])};
        if (grid_better(cand, best))
          best = cand;
      }
    }
    return best;
  };

  const std::size_t rows = p_axis.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows)));
  if (threads == 1)
    return scan(0, rows);

  std::vector<GridPoint> partial(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = rows * t / threads;
    const std::size_t e = rows * (t + 1) / threads;
    pool.emplace_back([&, t, b, e] { partial[t] = scan(b, e); });
  }
  for (auto &th : pool)
    th.join();
  GridPoint best = partial.front();
  for (const auto &g : partial)
    if (grid_better(g, best))
      best = g;
  return best;
}

} // namespace detail

/// threads = 0 uses std::thread::hardware_concurrency(). The result does not
/// depend on the thread count.
inline GridResult grid_mle(const Dataset &data, const GridSpec &spec = {},
                           unsigned threads = 1) {
  spec.validate();
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  const detail::HistogramLikelihood lik(data);
  const std::size_t m = spec.coarse_resolution;

  double p_lo = 0.0, rho_lo = 0.0, width = 1.0;
  GridResult result;
  GridPoint best = detail::grid_pass(lik, detail::grid_axis(p_lo, width, m),
                                     detail::grid_axis(rho_lo, width, m),
                                     threads);
  result.round_best.push_back(best.log_likelihood);

  for (std::size_t round = 0; round < spec.refine_rounds; ++round) {
    width *= spec.refine_shrink;
    p_lo = std::clamp(best.p - width / 2, 0.0, 1.0 - width);
    rho_lo = std::clamp(best.rho - width / 2, 0.0, 1.0 - width);
    const GridPoint cand = detail::grid_pass(
        lik, detail::grid_axis(p_lo, width, m),
        detail::grid_axis(rho_lo, width, m), threads);
    if (detail::grid_better(cand, best))
      best = cand;
    result.round_best.push_back(best.log_likelihood);
  }

  result.p = best.p;
  result.rho = best.rho;
  result.log_likelihood = best.log_likelihood;
  return result;
}

} // namespace cbem
