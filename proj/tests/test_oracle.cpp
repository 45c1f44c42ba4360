#include <cmath>

#include <gtest/gtest.h>

#include "cbem/em_estimator.hpp"
#include "cbem/oracle.hpp"
#include "cbem/sim_harness.hpp"
#include "test_support.hpp"

namespace cbem {
namespace {

TEST(GridSpecTest, Validation) {
  EXPECT_THROW(grid_mle(testing::soybean(), {10, 3, 0.05}), ConfigError);
  EXPECT_THROW(grid_mle(testing::soybean(), {11, 3, 0.0}), ConfigError);
  EXPECT_THROW(grid_mle(testing::soybean(), {11, 3, 1.0}), ConfigError);
  EXPECT_NO_THROW(grid_mle(testing::soybean(), {11, 0, 0.5}));
}

TEST(GridMle, HistogramLikelihoodAgreesWithModel) {
  const auto d = testing::soybean();
  const detail::HistogramLikelihood lik(d);
  for (double p : {0.0, 0.3, 0.58, 1.0})
    for (double rho : {0.0, 0.2, 0.9, 1.0}) {
      const double grid = lik.eval(lik.row(p), rho, std::log1p(-rho));
      const double model = log_likelihood(d, {6, p, rho});
      if (std::isinf(model))
        EXPECT_EQ(grid, model);
      else
        EXPECT_NEAR(grid, model, 1e-11) << p << ' ' << rho;
    }
}

TEST(GridMle, NoBoundaryObservations) {
  const Dataset d(8, {3, 5, 4, 2, 6, 4, 1});
  const GridSpec coarse{101, 0, 0.5};
  const auto g = grid_mle(d, coarse);
  EXPECT_LE(g.rho, 0.01);
  EXPECT_NEAR(g.p, d.mean() / 8, 0.01);
}

TEST(GridMle, SoybeanDefaultSpec) {
  const auto g = grid_mle(testing::soybean());
  EXPECT_NEAR(g.p, 0.5869412, 1e-4);
  EXPECT_NEAR(g.rho, 0.0863572, 1e-4);
  EXPECT_NEAR(g.log_likelihood, -36.44153, 1e-3);
}

TEST(GridMle, MonotoneRefinement) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = sample({10, 0.3, 0.6}, 30, s);
    const auto g = grid_mle(d, {201, 4, 0.1});
    ASSERT_EQ(g.round_best.size(), 5u);
    for (std::size_t r = 1; r < g.round_best.size(); ++r)
      EXPECT_GE(g.round_best[r], g.round_best[r - 1]);
  }
}

TEST(GridMle, TieBreakOrder) {
  using detail::grid_better;
  EXPECT_TRUE(grid_better({0.2, 0.9, -1.0}, {0.1, 0.1, -2.0}));
  EXPECT_TRUE(grid_better({0.1, 0.9, -1.0}, {0.2, 0.1, -1.0}));
  EXPECT_TRUE(grid_better({0.1, 0.1, -1.0}, {0.1, 0.2, -1.0}));
  EXPECT_FALSE(grid_better({0.1, 0.1, -1.0}, {0.1, 0.1, -1.0}));
  EXPECT_TRUE(grid_better({0.5, 0.5, kNegInf}, {0.6, 0.5, std::nan("")}));
}

TEST(GridMle, FlatInRhoWhenSingleTrial) {
  // With n = 1 both components are Bernoulli(p): rho is not identified.
  const auto g = grid_mle(Dataset(1, {0, 1, 1}), {101, 2, 0.1});
  EXPECT_NEAR(g.p, 2.0 / 3.0, 1e-4);
  EXPECT_NEAR(g.log_likelihood, std::log(4.0 / 27.0), 1e-7);
}

TEST(GridMle, ThreadCountDoesNotChangeResult) {
  const auto d = sample({20, 0.2, 0.9}, 30, 5);
  const GridSpec spec{301, 2, 0.05};
  const auto a = grid_mle(d, spec, 1);
  const auto b = grid_mle(d, spec, 3);
  const auto c = grid_mle(d, spec, 7);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_EQ(a.p, c.p);
  EXPECT_EQ(a.rho, c.rho);
}

TEST(GridMle, BoundaryMaximum) {
  // only boundary values: the likelihood increases to rho = 1
  const auto g = grid_mle(Dataset(5, {0, 5, 5, 0, 5}), {101, 2, 0.1});
  EXPECT_EQ(g.rho, 1.0);
  EXPECT_NEAR(g.p, 0.6, 1e-3);
}

// 200 seeded datasets across the simulation-table settings: the EM
// log-likelihood matches the refined grid maximum and is never beaten by it.
TEST(GridMle, AgreesWithEmOnRandomDatasets) {
  const GridSpec spec{401, 5, 0.05};
  std::size_t i = 0;
  for (const auto &pr : study_settings()) {
    for (int r = 0; r < 34 && i < 200; ++r, ++i) {
      const auto d = sample(pr, 30, derive_seed(2024, i));
      const auto fit = em_fit(d);
      const auto g = grid_mle(d, spec);
      EXPECT_NEAR(fit.log_likelihood, g.log_likelihood, 1e-6)
          << "dataset " << i << " n=" << pr.n << " p=" << pr.p;
      EXPECT_LE(g.log_likelihood, fit.log_likelihood + 1e-6);
    }
  }
  EXPECT_EQ(i, 200u);
}

} // namespace
} // namespace cbem
