#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cbem/plot_emitter.hpp"
#include "cbem/sim_harness.hpp"

namespace cbem {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count(const std::string &s, const std::string &needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos;
       pos = s.find(needle, pos + 1))
    ++n;
  return n;
}

TEST(QuantilePolygonTest, ConstantInput) {
  const auto poly = build_quantile_polygon(std::vector<double>(9, 0.42), 11);
  for (double v : poly.quantile_values)
    EXPECT_EQ(v, 0.42);
  EXPECT_EQ(poly.median, 0.42);
}

TEST(QuantilePolygonTest, FivePoints) {
  const auto poly = build_quantile_polygon(std::vector<double>{5, 3, 1, 4, 2}, 5);
  EXPECT_EQ(poly.quantile_levels, (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_EQ(poly.quantile_values, (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_EQ(poly.median, 3.0);
  EXPECT_EQ(poly.widths(), (std::vector<double>{0, 0.25, 0.5, 0.25, 0}));
}

TEST(QuantilePolygonTest, EvenResolutionGetsMedianLevel) {
  const auto poly = build_quantile_polygon(std::vector<double>{1, 2, 3, 4}, 4);
  ASSERT_EQ(poly.quantile_levels.size(), 5u);
  EXPECT_EQ(poly.quantile_levels[2], 0.5);
  EXPECT_EQ(poly.quantile_values[2], poly.median);
  EXPECT_DOUBLE_EQ(poly.median, 2.5);
}

TEST(QuantilePolygonTest, Errors) {
  EXPECT_THROW(build_quantile_polygon(std::vector<double>{}, 5), DomainError);
  EXPECT_THROW(build_quantile_polygon(std::vector<double>{1.0}, 2), DomainError);
}

TEST(QuantilePolygonTest, MonotoneAndMatchesPercentileInterval) {
  const auto rep = run_scenario([] {
    Scenario s;
    s.params = {10, 0.5, 0.8};
    s.replications = 1000;
    s.seed = 20240101;
    return s;
  }());
  const auto poly = build_quantile_polygon(rep.rho.estimates, 41, "rho");
  for (std::size_t i = 1; i < poly.quantile_values.size(); ++i)
    EXPECT_LE(poly.quantile_values[i - 1], poly.quantile_values[i]);
  EXPECT_EQ(poly.quantile_levels[1], 0.025);
  EXPECT_EQ(poly.quantile_values[1], rep.rho.interval_low);
  EXPECT_EQ(poly.quantile_values[39], rep.rho.interval_high);
  // Spread of the rho estimates resembles the reference [0.633, 0.933].
  // rho-hat is nearly (boundary draws)/30 and the 2.5% point of
  // Binomial(30, 0.8) sits on the 19/20 edge (P(X <= 19) = 0.0256), so the
  // lower endpoint is allowed one extra 1/k step.
  EXPECT_NEAR(poly.quantile_values[1], 0.6325764, 0.03 + 1.0 / 30);
  EXPECT_NEAR(poly.quantile_values[39], 0.9331690, 0.03);
}

TEST(GlyphOutline, Symmetric) {
  const auto poly =
      build_quantile_polygon(std::vector<double>{0.1, 0.4, 0.2, 0.9, 0.35, 0.5}, 21);
  const SvgLayout layout;
  const auto pts = glyph_outline(poly, 200.0, 80.0, layout);
  const std::size_t m = poly.quantile_levels.size();
  ASSERT_EQ(pts.size(), 2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double width_i = pts[2 * m - 1 - i].first - pts[i].first;
    const std::size_t mirror = m - 1 - i;
    const double width_mirror =
        pts[2 * m - 1 - mirror].first - pts[mirror].first;
    EXPECT_NEAR(width_i, width_mirror, 1.0);
  }
}

TEST(RenderSvg, ConstantPolygonIsSingleLine) {
  const auto poly = build_quantile_polygon(std::vector<double>(4, 0.5), 5, "c");
  const auto doc = svg_document(std::vector<QuantilePolygon>{poly});
  EXPECT_EQ(count(doc, "class=\"glyph\""), 1u);
  EXPECT_EQ(count(doc, "<line class=\"glyph\""), 1u);
  EXPECT_EQ(count(doc, "<polygon"), 0u);
}

TEST(RenderSvg, TwoGlyphsSharedAxis) {
  const std::vector<QuantilePolygon> polys = {
      build_quantile_polygon(std::vector<double>{0.4, 0.5, 0.6}, 11, "p"),
      build_quantile_polygon(std::vector<double>{0.7, 0.8, 0.95}, 11, "rho")};
  const auto doc = svg_document(polys);
  EXPECT_EQ(count(doc, "<polygon class=\"glyph\""), 2u);
  EXPECT_EQ(count(doc, "class=\"axis\""), 1u);
  EXPECT_NE(doc.find(">p</text>"), std::string::npos);
  EXPECT_NE(doc.find(">rho</text>"), std::string::npos);
  EXPECT_EQ(doc.rfind("</svg>\n"), doc.size() - 7);
}

TEST(RenderSvg, DeterministicFiles) {
  const auto dir = fs::temp_directory_path() / "cbem_plot_test";
  fs::create_directories(dir);
  const std::vector<QuantilePolygon> polys = {
      build_quantile_polygon(std::vector<double>{0.2, 0.3, 0.25, 0.6}, 9, "x")};
  render_svg(polys, dir / "a.svg");
  render_svg(polys, dir / "b.svg");
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
  EXPECT_FALSE(slurp(dir / "a.svg").empty());
  fs::remove_all(dir);
}

TEST(RenderSvg, Errors) {
  EXPECT_THROW(svg_document(std::vector<QuantilePolygon>{}), DomainError);
  const std::vector<QuantilePolygon> polys = {
      build_quantile_polygon(std::vector<double>{0.2}, 3, "x")};
  EXPECT_THROW(render_svg(polys, "/nonexistent-dir/x/y.svg"),
               std::ios_base::failure);
}

TEST(PolygonCsv, Format) {
  const auto poly = build_quantile_polygon(std::vector<double>{1, 2, 3}, 3);
  EXPECT_EQ(polygon_csv(poly), "level,value\n0,1\n0.5,2\n1,3\n");
}

} // namespace
} // namespace cbem
