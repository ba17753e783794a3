#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bpgmf/svg_plot.hpp"
#include "bpgmf/trace_io.hpp"

using namespace bpgmf;

namespace {

Trace sample_trace(double base, bool with_rmse) {
  Trace t;
  for (std::size_t i = 1; i <= 5; ++i) {
    TraceRecord r;
    r.iter = i;
    r.objective = base + 1.0 / static_cast<double>(i) + 1e-17;
    r.step = 0.99;
    r.inertia = i > 1 ? 0.3 : 0.0;
    r.lbar = 0.125 * static_cast<double>(i);
    r.lunder = 1e-300;
    if (with_rmse) r.test_rmse = 0.1 * static_cast<double>(i);
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST(TraceCsv, HeaderAndEmptyColumns) {
  const std::string csv = trace_csv(sample_trace(1.0, false));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,elapsed_sec,objective,step,inertia,lbar,lunder,test_rmse");
  std::istringstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(first.substr(0, 3), "1,,");
  EXPECT_EQ(first.back(), ',');
}

TEST(TraceCsv, RoundTripIsBitExact) {
  for (bool rmse : {false, true}) {
    const Trace t = sample_trace(3.14159, rmse);
    std::istringstream in(trace_csv(t));
    EXPECT_EQ(read_trace_csv(in), t.records);
  }
}

TEST(TraceCsv, RejectsBadInput) {
  std::istringstream bad_header("iter,objective\n1,2\n");
  EXPECT_THROW(read_trace_csv(bad_header), std::runtime_error);
  std::istringstream short_row(std::string(kTraceHeader) + "\n1,,2\n");
  try {
    read_trace_csv(short_row, "t.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:2"), std::string::npos);
  }
  std::istringstream empty("");
  EXPECT_THROW(read_trace_csv(empty), std::runtime_error);
}

TEST(TraceCsv, AtomicWriteReplacesTarget) {
  const auto dir = std::filesystem::temp_directory_path() / "bpgmf_trace_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "sub" / "t.csv").string();
  atomic_write(path, "old");
  atomic_write(path, trace_csv(sample_trace(0.0, false)));
  EXPECT_EQ(read_trace_csv(path), sample_trace(0.0, false).records);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Plot, GapFloorsAtOffsetForBestTrace) {
  const std::vector<std::vector<TraceRecord>> traces{sample_trace(2.0, false).records, sample_trace(1.0, false).records};
  const auto series = build_series(traces, {"a", "b"}, PlotX::iter, PlotY::gap);
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[1].y.back(), kGapOffset);
  for (const auto& s : series)
    for (double y : s.y) EXPECT_GE(y, kGapOffset);
  EXPECT_NEAR(series[0].y.back(), 1.0 + kGapOffset, 1e-12);
  EXPECT_EQ(series[0].x, (std::vector<double>{1, 2, 3, 4, 5}));
}

TEST(Plot, MissingColumnsAreErrors) {
  const std::vector<std::vector<TraceRecord>> traces{sample_trace(1.0, false).records};
  EXPECT_THROW(build_series(traces, {"a"}, PlotX::time, PlotY::objective), std::runtime_error);
  EXPECT_THROW(build_series(traces, {"a"}, PlotX::iter, PlotY::test_rmse), std::runtime_error);
  EXPECT_THROW(build_series(traces, {}, PlotX::iter, PlotY::objective), std::invalid_argument);
  EXPECT_THROW(build_series({}, {}, PlotX::iter, PlotY::objective), std::invalid_argument);
  EXPECT_THROW(parse_plot_x("wall"), std::invalid_argument);
  EXPECT_THROW(parse_plot_y("loss"), std::invalid_argument);
}

TEST(Plot, RendersWellFormedSvg) {
  const std::vector<std::vector<TraceRecord>> traces{sample_trace(2.0, true).records, sample_trace(1.0, true).records};
  const std::string svg =
      render_svg(build_series(traces, {"BPG <a&b>", "CoCaIn"}, PlotX::iter, PlotY::gap), true, "iteration", "gap");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("BPG &lt;a&amp;b&gt;"), std::string::npos);
  std::size_t lines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  // deterministic
  EXPECT_EQ(svg, render_svg(build_series(traces, {"BPG <a&b>", "CoCaIn"}, PlotX::iter, PlotY::gap), true,
                            "iteration", "gap"));
}

TEST(Plot, RmseAxis) {
  const std::vector<std::vector<TraceRecord>> traces{sample_trace(1.0, true).records};
  const auto s = build_series(traces, {"a"}, PlotX::iter, PlotY::test_rmse);
  EXPECT_DOUBLE_EQ(s[0].y[2], 0.3);
}
