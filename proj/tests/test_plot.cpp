#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "saa4pde/plot.hpp"

using namespace saa4pde;

namespace {

PlotSeries three_points() {
  PlotSeries s;
  s.label = "synthetic";
  s.x = {4, 16, 64};
  s.values = {{0.5, 0.6, 0.4}, {0.25, 0.3, 0.2}, {0.125, 0.15, 0.1}};
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(SvgPlot, GoldenThreePointSeries) {
  AxesConfig axes;
  axes.title = "rate";
  const auto svg = render_svg({three_points()}, {PlotFit{-0.5, 1.0, "fit"}}, axes);
  EXPECT_EQ(svg, slurp(std::string(SAA4PDE_TEST_DIR) + "/golden/three_points.svg"));
}

TEST(SvgPlot, SlopeAnnotationMatchesFit) {
  std::vector<std::pair<double, double>> pts{{4, 0.5}, {16, 0.26}, {64, 0.124}};
  const RateFit f = fit_rate(pts, 0);
  const auto svg = render_svg({three_points()}, {plot_fit(f)}, AxesConfig{});
  char expect[32];
  std::snprintf(expect, sizeof expect, "slope %.3f", f.slope);
  EXPECT_NE(svg.find(expect), std::string::npos);
  EXPECT_NE(svg.find("slope -0.503"), std::string::npos);
}

TEST(SvgPlot, BaseTenConversionKeepsTheLine) {
  const RateFit f{-0.5, std::log2(3.0), 0.0, 3, 0};
  const PlotFit p = plot_fit(f, 10);
  // log10 y = log10 3 - 0.5 log10 x
  EXPECT_NEAR(p.intercept, std::log10(3.0), 1e-15);
  EXPECT_EQ(p.slope, -0.5);
  AxesConfig axes;
  axes.log_base = 10;
  EXPECT_NE(render_svg({three_points()}, {p}, axes).find("10^"), std::string::npos);
  axes.log_base = 3;
  EXPECT_THROW(render_svg({three_points()}, {}, axes), std::invalid_argument);
}

TEST(SvgPlot, EmptySeriesIsAnError) {
  EXPECT_THROW(render_svg({}, {}, AxesConfig{}), std::invalid_argument);
  PlotSeries empty;
  empty.x = {2.0};
  empty.values = {{}};
  EXPECT_THROW(render_svg({empty}, {}, AxesConfig{}), std::invalid_argument);
  PlotSeries bad = three_points();
  bad.values.pop_back();
  EXPECT_THROW(render_svg({bad}, {}, AxesConfig{}), std::invalid_argument);
}

TEST(SvgPlot, SeriesFromRowsSkipsFailures) {
  std::vector<ResultRow> rows(3);
  rows[0] = {0, 4, 1e-3, 8, 0.5, SolverStatus::converged, 3, 0.0, 1};
  rows[1] = {1, 4, 1e-3, 8, NAN, SolverStatus::failed, 0, 0.0, 2};
  rows[2] = {0, 8, 1e-3, 8, 0.25, SolverStatus::converged, 3, 0.0, 3};
  const auto s = series_from_rows(rows, ExperimentKind::rate, "chi");
  EXPECT_EQ(s.x, (std::vector<double>{4, 8}));
  EXPECT_EQ(s.values[0], std::vector<double>{0.5});
  EXPECT_EQ(s.values[1], std::vector<double>{0.25});
}

TEST(SvgPlot, EmitWritesFile) {
  const std::string path = ::testing::TempDir() + "saa4pde_plot.svg";
  emit_svg_plot({three_points()}, {}, AxesConfig{}, path);
  const auto text = slurp(path);
  EXPECT_EQ(text.rfind("<svg", 0), 0u);
  EXPECT_THROW(emit_svg_plot({three_points()}, {}, AxesConfig{}, "/nonexistent/dir/x.svg"),
               std::runtime_error);
}
