#pragma once

// EM estimation of (p, rho) for CB(n, p, rho) with n known.
//
// Latent Z_i = 1 when y_i came from the two-point boundary component. The
// E-step gives tau_i = E[Z_i | y_i, theta]; the M-step maximizes the expected
// complete-data log-likelihood in closed form:
//
//   rho' = sum(tau_i) / k
//   p'   = sum(tau_i y_i / n + (1 - tau_i) y_i) / sum(tau_i + (1 - tau_i) n)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cbem/cb_model.hpp"
#include "cbem/errors.hpp"

namespace cbem {

/// When the iteration loop stops.
enum class StopRule {
  /// Stop as soon as either |dp| < eps or |drho| < eps. This is the loop
  /// guard `(!converged1) && (!converged2)` of the reference R routine and
  /// reproduces its iteration counts.
  any_component,
  /// Keep iterating until both |dp| < eps and |drho| < eps.
  all_components,
};

struct EMConfig {
  double start_p = 0.5;
  double start_rho = 0.5;
  std::size_t max_iterations = 1000;
  double epsilon = 1e-15;
  StopRule stop_rule = StopRule::any_component;
  bool keep_trace = false;

  void validate() const {
    if (!(start_p > 0.0 && start_p < 1.0))
      throw ConfigError("start_p must lie strictly inside (0,1)");
    // rho = 0 is an absorbing fixed point of the update; starting there
    // silently returns the binomial MLE.
    if (!(start_rho > 0.0 && start_rho < 1.0))
      throw ConfigError("start_rho must lie strictly inside (0,1)");
    if (!(epsilon > 0.0))
      throw ConfigError("epsilon must be > 0");
    if (max_iterations < 1)
      throw ConfigError("max_iterations must be >= 1");
  }
};

struct EMIterate {
  std::size_t iteration;
  double p;
  double rho;
  double log_likelihood;
};

struct EMResult {
  double p_hat = 0.0;
  double rho_hat = 0.0;
  std::size_t iterations = 0;
  bool converged_p = false;
  bool converged_rho = false;
  StopRule stop_rule = StopRule::any_component;
  double log_likelihood = 0.0;
  std::vector<double> responsibilities;
  /// Start value followed by every update; filled when EMConfig::keep_trace.
  std::vector<EMIterate> trace;

  /// True when the loop ended on its stop rule rather than max_iterations.
  bool converged() const noexcept {
    return stop_rule == StopRule::any_component ? (converged_p || converged_rho)
                                                : (converged_p && converged_rho);
  }
};

namespace detail {

inline void e_step_into(const Dataset &data, const CBParams &params,
                        std::span<const std::size_t> boundary_index,
                        std::vector<double> &tau, std::size_t iteration) {
  const int n = data.n();
  const double p = params.p;
  const double rho = params.rho;

  // Interior counts only lose all mass at these parameter values.
  if (rho == 1.0 || p == 0.0 || p == 1.0) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int y = data[i];
      if (y != 0 && y != n && cb_pmf(y, params) == 0.0)
        throw FitDegeneracyError(
            "observation " + std::to_string(i) + " (y = " + std::to_string(y) +
                ") has zero probability at p = " + std::to_string(p) +
                ", rho = " + std::to_string(rho),
            i, iteration);
    }
  }

  for (std::size_t i : boundary_index) {
    const int y = data[i];
    const double yn = static_cast<double>(y) / n;
    const double p1 =
        rho * std::pow(p, yn) * std::pow(1.0 - p, static_cast<double>(n - y) / n);
    const double p2 = (1.0 - rho) * binomial_pmf(y, n, p);
    const double total = p1 + p2;
    if (!(total > 0.0))
      throw FitDegeneracyError(
          "observation " + std::to_string(i) + " (y = " + std::to_string(y) +
              ") has zero probability at p = " + std::to_string(p) +
              ", rho = " + std::to_string(rho),
          i, iteration);
    tau[i] = p1 / total;
  }
}

inline std::vector<std::size_t> boundary_indices(const Dataset &data) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i] == 0 || data[i] == data.n())
      idx.push_back(i);
  return idx;
}

} // namespace detail

/// Posterior probability that each observation came from the boundary
/// component. Zero for every y strictly between 0 and n.
inline std::vector<double> e_step(const Dataset &data, const CBParams &params) {
  params.validate();
  if (params.n != data.n())
    throw DomainError("params.n does not match dataset n");
  std::vector<double> tau(data.size(), 0.0);
  detail::e_step_into(data, params, detail::boundary_indices(data), tau, 0);
  return tau;
}

/// Closed-form maximizer of q_function for fixed responsibilities.
/// Returns (p, rho).
inline std::pair<double, double> m_step(const Dataset &data,
                                        std::span<const double> tau) {
  if (tau.size() != data.size())
    throw DomainError("responsibility count does not match dataset size");
  const double n = data.n();
  double num = 0.0;
  double den = 0.0;
  double tau_sum = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double z = tau[i];
    if (!(z >= 0.0 && z <= 1.0))
      throw DomainError("responsibility " + std::to_string(i) +
                        " outside [0,1]");
    const double y = data[i];
    num += z * y / n + (1.0 - z) * y;
    den += z + (1.0 - z) * n;
    tau_sum += z;
  }
  const double p = std::min(1.0, num / den);
  const double rho = std::min(1.0, tau_sum / static_cast<double>(tau.size()));
  return {p, rho};
}

/// Expected complete-data log-likelihood Q(theta | tau), with 0 log 0 = 0.
/// With 0/1 indicators in place of tau this is the complete-data
/// log-likelihood itself.
inline double q_function(const Dataset &data, std::span<const double> tau,
                         const CBParams &params) {
  params.validate();
  if (tau.size() != data.size())
    throw DomainError("responsibility count does not match dataset size");
  if (params.n != data.n())
    throw DomainError("params.n does not match dataset n");
  const double n = data.n();
  double w_rho = 0.0, w_not_rho = 0.0, w_p = 0.0, w_not_p = 0.0, w_choose = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double z = tau[i];
    const double y = data[i];
    w_rho += z;
    w_not_rho += 1.0 - z;
    w_p += z * y / n + (1.0 - z) * y;
    w_not_p += z * (n - y) / n + (1.0 - z) * (n - y);
    w_choose += (1.0 - z) * log_choose(data.n(), data[i]);
  }
  return detail::xlogy(w_rho, params.rho) +
         detail::xlogy(w_not_rho, 1.0 - params.rho) +
         detail::xlogy(w_p, params.p) + detail::xlogy(w_not_p, 1.0 - params.p) +
         w_choose;
}

/// Runs EM from (start_p, start_rho).
///
/// Iteration accounting follows the reference R routine: one update is made
/// before the loop and the counter starts at 1; each loop pass performs one
/// more update and increments the counter. The loop stops on
/// config.stop_rule or when the counter reaches max_iterations.
inline EMResult em_fit(const Dataset &data, const EMConfig &config = {}) {
  config.validate();
  const auto boundary = detail::boundary_indices(data);
  std::vector<double> tau(data.size(), 0.0);
  CBParams theta{data.n(), config.start_p, config.start_rho};

  EMResult result;
  result.stop_rule = config.stop_rule;
  auto record = [&](std::size_t iter) {
    if (config.keep_trace)
      result.trace.push_back(
          {iter, theta.p, theta.rho, log_likelihood(data, theta)});
  };
  record(0);

  detail::e_step_into(data, theta, boundary, tau, 0);
  std::tie(theta.p, theta.rho) = m_step(data, tau);
  std::size_t iter = 1;
  record(iter);

  bool conv_p = false;
  bool conv_rho = false;
  auto keep_going = [&] {
    return config.stop_rule == StopRule::any_component ? (!conv_p && !conv_rho)
                                                       : !(conv_p && conv_rho);
  };
  while (iter < config.max_iterations && keep_going()) {
    detail::e_step_into(data, theta, boundary, tau, iter);
    const auto [p_new, rho_new] = m_step(data, tau);
    conv_p = std::abs(p_new - theta.p) < config.epsilon;
    conv_rho = std::abs(rho_new - theta.rho) < config.epsilon;
    ++iter;
    theta.p = p_new;
    theta.rho = rho_new;
    record(iter);
  }

  result.p_hat = theta.p;
  result.rho_hat = theta.rho;
  result.iterations = iter;
  result.converged_p = conv_p;
  result.converged_rho = conv_rho;
  result.log_likelihood = log_likelihood(data, theta);
  if (!std::isfinite(result.log_likelihood)) {
    std::size_t bad = 0;
    while (bad + 1 < data.size() && std::isfinite(log_cb_pmf(data[bad], theta)))
      ++bad;
    throw FitDegeneracyError("non-finite log-likelihood at iteration " +
                                 std::to_string(iter) + " (observation " +
                                 std::to_string(bad) + ")",
                             bad, iter);
  }
  result.responsibilities = std::move(tau);
  return result;
}

} // namespace cbem
