#pragma once

// Monte-Carlo study engine: replicated sample-and-fit runs of EM under known
// CB parameters, summarized by bias, RMSE and empirical percentile intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "cbem/cb_model.hpp"
#include "cbem/em_estimator.hpp"
#include "cbem/errors.hpp"
#include "cbem/random.hpp"

namespace cbem {

inline double bias(std::span<const double> estimates, double truth) {
  if (estimates.empty())
    throw DomainError("bias of an empty estimate list");
  double s = 0.0;
  for (double e : estimates)
    s += e - truth;
  return s / static_cast<double>(estimates.size());
}

inline double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty())
    throw DomainError("rmse of an empty estimate list");
  double s = 0.0;
  for (double e : estimates)
    s += (e - truth) * (e - truth);
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

/// Unbiased (N - 1 denominator) sample variance; 0 for a single value.
inline double sample_variance(std::span<const double> values) {
  if (values.empty())
    throw DomainError("variance of an empty list");
  if (values.size() == 1)
    return 0.0;
  double mean = 0.0;
  for (double v : values)
    mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

/// Quantile of already-sorted data by inclusive linear interpolation
/// (Hyndman-Fan type 7, R's default): h = (N - 1) q, interpolate between
/// x[floor(h)] and x[floor(h) + 1].
inline double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty())
    throw DomainError("quantile of an empty list");
  if (!(level >= 0.0 && level <= 1.0))
    throw DomainError("quantile level must lie in [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size())
    return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::span<const double> values, double level) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, level);
}

/// Central interval holding `level` of the empirical distribution: the
/// (1 - level)/2 and 1 - (1 - level)/2 quantiles.
inline std::pair<double, double>
percentile_interval(std::span<const double> estimates, double level = 0.95) {
  if (estimates.empty())
    throw DomainError("percentile interval of an empty list");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("interval level must lie in (0,1)");
  std::vector<double> sorted(estimates.begin(), estimates.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {sorted_quantile(sorted, tail), sorted_quantile(sorted, 1.0 - tail)};
}

struct Scenario {
  CBParams params;
  std::size_t sample_size = 30;
  std::size_t replications = 1000;
  EMConfig em_config;
  std::uint64_t seed = 0;

  void validate() const {
    params.validate();
    em_config.validate();
    if (sample_size < 1)
      throw ConfigError("sample_size must be >= 1");
    if (replications < 1)
      throw ConfigError("replications must be >= 1");
  }
};

/// The six (n, p, rho) settings used by the reference simulation study.
inline std::array<CBParams, 6> study_settings() {
  return {{{10, 0.5, 0.8},
           {20, 0.5, 0.8},
           {10, 0.2, 0.9},
           {20, 0.2, 0.9},
           {10, 0.5, 0.5},
           {20, 0.5, 0.5}}};
}

struct ParameterSummary {
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  /// Fitted values in replication order (failed replications omitted).
  std::vector<double> estimates;

  bool operator==(const ParameterSummary &) const = default;
};

struct ScenarioReport {
  ParameterSummary p;
  ParameterSummary rho;
  /// Replications that stopped at max_iterations. They stay in the aggregates.
  std::size_t degenerate_count = 0;
  /// Replications whose fit threw FitDegeneracyError. Excluded from aggregates.
  std::size_t failed_count = 0;

  bool operator==(const ScenarioReport &) const = default;
};

inline ParameterSummary summarize(std::vector<double> estimates, double truth,
                                  double level = 0.95) {
  ParameterSummary s;
  s.truth = truth;
  s.bias = bias(estimates, truth);
  s.rmse = rmse(estimates, truth);
  std::tie(s.interval_low, s.interval_high) =
      percentile_interval(estimates, level);
  s.estimates = std::move(estimates);
  return s;
}

/// Dataset used by replication r: sample(params, k, derive_seed(seed, r)).
inline Dataset replication_dataset(const Scenario &scenario, std::size_t r) {
  return sample(scenario.params, scenario.sample_size,
                derive_seed(scenario.seed, r));
}

/// Runs every replication and aggregates. Replication r always uses
/// derive_seed(seed, r), so the report is identical for any thread count
/// (threads = 0 uses hardware_concurrency).
inline ScenarioReport run_scenario(const Scenario &scenario,
                                   unsigned threads = 1) {
  scenario.validate();
  const std::size_t reps = scenario.replications;

  struct Outcome {
    std::optional<EMResult> fit;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(reps);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      try {
        outcomes[r].fit = em_fit(replication_dataset(scenario, r),
                                 scenario.em_config);
      } catch (const FitDegeneracyError &) {
        outcomes[r].error = std::current_exception();
      }
    }
  };

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
  if (threads <= 1) {
    work(0, reps);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(work, reps * t / threads, reps * (t + 1) / threads);
    for (auto &th : pool)
      th.join();
  }

  ScenarioReport report;
  std::vector<double> p_hat, rho_hat;
  std::exception_ptr last_error;
  for (const auto &o : outcomes) {
    if (!o.fit) {
      ++report.failed_count;
      last_error = o.error;
      continue;
    }
    p_hat.push_back(o.fit->p_hat);
    rho_hat.push_back(o.fit->rho_hat);
    if (!o.fit->converged())
      ++report.degenerate_count;
  }
  if (p_hat.empty())
    std::rethrow_exception(last_error);

  report.p = summarize(std::move(p_hat), scenario.params.p);
  report.rho = summarize(std::move(rho_hat), scenario.params.rho);
  return report;
}

} // namespace cbem
