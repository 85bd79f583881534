#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "strongreg/error.hpp"
#include "strongreg/experiment.hpp"

using namespace strongreg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no strongreg::Error thrown";
  return ErrorCode::InvalidArgument;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("strongreg_exp_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepSpec small_spec(RegKind kind) {
  SweepSpec spec;
  spec.cfg.d = 40;
  spec.cfg.n = 30;
  spec.cfg.k = 3;
  spec.cfg.r = 0.5;
  spec.cfg.c = 0.1;
  spec.kind = kind;
  spec.lambdas = {0.5, 5.0, 50.0};
  spec.trials = 3;
  spec.test_size = 500;
  spec.qk_samples = 20000;
  return spec;
}

int count_polylines(const boost::property_tree::ptree& node) {
  int n = 0;
  for (const auto& [name, child] : node) n += (name == "polyline") + count_polylines(child);
  return n;
}

boost::property_tree::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

}  // namespace

TEST(Settings, ParsesKeyValueLines) {
  const Settings s = parse_settings("# comment\n  D = 100 \n\nreg=l1  # trailing\nlambdas = 1, 2,3\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], std::make_pair(std::string("d"), std::string("100")));
  EXPECT_EQ(s[1], std::make_pair(std::string("reg"), std::string("l1")));
  EXPECT_EQ(s[2].second, "1, 2,3");
}

TEST(Settings, Errors) {
  EXPECT_EQ(code_of([] { parse_settings("d 100"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_settings(" = 3"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { read_settings_file(temp_path("nope.cfg")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("colour = red")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("d = ten")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("n = -4")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("reg = l3")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("c = 0.9")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("lambdas = 3, 2")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("lambdas = 0, 2")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_sweep_spec(parse_settings("trials = 0")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { make_config(parse_settings("reg = l1")); }), ErrorCode::ConfigError);
}

TEST(SweepSpec, Defaults) {
  const SweepSpec spec = make_sweep_spec({});
  EXPECT_EQ(spec.cfg.d, 750);
  EXPECT_EQ(spec.cfg.n, 500);
  EXPECT_EQ(spec.cfg.k, 5);
  EXPECT_EQ(spec.cfg.r, 0.8);
  EXPECT_EQ(spec.cfg.c, 0.3);
  EXPECT_EQ(spec.cfg.sigma, 1.0);
  EXPECT_EQ(spec.kind, RegKind::L2Squared);
  EXPECT_EQ(spec.trials, 20);
  ASSERT_EQ(spec.lambdas.size(), 40u);
  EXPECT_EQ(spec.lambdas.front(), 1.0);
  EXPECT_EQ(spec.lambdas.back(), 1e5);
}

TEST(SweepSpec, GridPerRegularizer) {
  EXPECT_EQ(make_sweep_spec(parse_settings("reg = l1")).lambdas.back(), 1e3);
  EXPECT_EQ(make_sweep_spec(parse_settings("reg = linf")).lambdas.back(), 1e5);
  const SweepSpec custom = make_sweep_spec(parse_settings("lambda_min = 10\nlambda_max = 1000\nlambda_count = 3"));
  ASSERT_EQ(custom.lambdas.size(), 3u);
  EXPECT_NEAR(custom.lambdas[1], 100.0, 1e-12);
  const SweepSpec expl = make_sweep_spec(parse_settings("lambdas = 0.5,7,9\nlambda_count = 10"));
  EXPECT_EQ(expl.lambdas, (std::vector<double>{0.5, 7.0, 9.0}));
}

TEST(SweepSpec, LaterKeysOverrideEarlier) {
  const SweepSpec spec = make_sweep_spec(parse_settings("d = 10\nd = 20\nseed = 99\nworkers = 2"));
  EXPECT_EQ(spec.cfg.d, 20);
  EXPECT_EQ(spec.cfg.seed, 99u);
  EXPECT_EQ(spec.workers, 2);
}

TEST(LogGrid, Properties) {
  const auto g = log_grid(1.0, 1e5, 40);
  ASSERT_EQ(g.size(), 40u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 1e5);
  const double ratio = g[1] / g[0];
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_GT(g[i], g[i - 1]);
    EXPECT_NEAR(g[i] / g[i - 1], ratio, 1e-9);
  }
  EXPECT_EQ(log_grid(3.0, 3.0, 1), std::vector<double>{3.0});
  EXPECT_EQ(code_of([] { log_grid(0.0, 1.0, 5); }), ErrorCode::ConfigError);
}

TEST(Csv, SingleRowHasTwoLines) {
  SweepRow r;
  r.lambda = 2.5;
  const std::string text = format_csv({r});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), "lambda,empirical_error_mean,empirical_error_stderr,predicted_error,"
                                              "predicted_error_stderr,margin_arg,margin_arg_raw,compressed_error_mean,"
                                              "compressed_error_stderr,fraction_pred,fraction_measured,gamma1,gamma2,"
                                              "gamma3,gamma4,delta_opt,xi,omega,big_delta,big_r,trials_ok,status");
}

TEST(Csv, StatusIsSanitized) {
  SweepRow r;
  r.status = "failed: a,b\nc";
  const std::string text = format_csv({r});
  EXPECT_NE(text.find("failed: a;b;c\n"), std::string::npos);
}

TEST(Csv, RoundTripThroughFile) {
  const auto rows = run_sweep(small_spec(RegKind::L1));
  const std::string path = temp_path("round.csv");
  emit_csv(rows, path);
  const auto back = read_sweep_csv(path);
  EXPECT_EQ(slurp(path), format_csv(rows));
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(format_csv(back), format_csv(rows));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].lambda, rows[i].lambda);
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].trials_ok, rows[i].trials_ok);
    EXPECT_NEAR(back[i].empirical_error_mean, rows[i].empirical_error_mean, 1e-9);
  }
}

TEST(Csv, ReadErrors) {
  EXPECT_EQ(code_of([] { read_sweep_csv(temp_path("missing.csv")); }), ErrorCode::IoError);
  const std::string path = temp_path("bad.csv");
  std::ofstream(path) << "a,b\n1,2\n";
  EXPECT_EQ(code_of([&] { read_sweep_csv(path); }), ErrorCode::ConfigError);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([] { emit_csv({}, temp_path("empty.csv")); }), ErrorCode::InvalidArgument);
}

TEST(Sweep, RowsSortedAndWellFormed) {
  for (RegKind kind : {RegKind::L2Squared, RegKind::L1, RegKind::LInf}) {
    const SweepSpec spec = small_spec(kind);
    const auto rows = run_sweep(spec);
    ASSERT_EQ(rows.size(), spec.lambdas.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const SweepRow& r = rows[j];
      EXPECT_EQ(r.lambda, spec.lambdas[j]);
      EXPECT_TRUE(r.ok()) << r.status;
      EXPECT_EQ(r.trials_ok, spec.trials);
      ASSERT_EQ(r.trial_errors.size(), static_cast<std::size_t>(spec.trials));
      for (double e : r.trial_errors) {
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.0);
      }
      EXPECT_GE(r.predicted_error, 0.0);
      EXPECT_LE(r.predicted_error, 1.0);
      if (kind == RegKind::L2Squared) {
        EXPECT_TRUE(std::isnan(r.compressed_error_mean));
        EXPECT_TRUE(std::isnan(r.fraction_pred));
      } else {
        EXPECT_GE(r.compressed_error_mean, 0.0);
        EXPECT_LE(r.compressed_error_mean, 1.0);
        EXPECT_GE(r.fraction_measured, 0.0);
        EXPECT_LE(r.fraction_measured, 1.0);
      }
    }
  }
}

TEST(Sweep, StderrRecomputedFromTrials) {
  const auto rows = run_sweep(small_spec(RegKind::L2Squared));
  for (const SweepRow& r : rows) {
    const double n = static_cast<double>(r.trial_errors.size());
    double m = 0.0, ss = 0.0;
    for (double e : r.trial_errors) m += e / n;
    for (double e : r.trial_errors) ss += (e - m) * (e - m);
    EXPECT_NEAR(r.empirical_error_mean, m, 1e-15);
    EXPECT_NEAR(r.empirical_error_stderr, std::sqrt(ss / (n - 1.0) / n), 1e-15);
  }
}

TEST(Sweep, BitwiseDeterministic) {
  SweepSpec spec = small_spec(RegKind::LInf);
  const std::string first = format_csv(run_sweep(spec));
  EXPECT_EQ(format_csv(run_sweep(spec)), first);
  spec.workers = 3;
  EXPECT_EQ(format_csv(run_sweep(spec)), first);
  spec.cfg.seed += 1;
  EXPECT_NE(format_csv(run_sweep(spec)), first);
}

TEST(Sweep, InvalidSpecThrowsConfigError) {
  SweepSpec spec = small_spec(RegKind::L1);
  spec.lambdas = {};
  EXPECT_EQ(code_of([&] { run_sweep(spec); }), ErrorCode::ConfigError);
}

TEST(Svg, WellFormedWithOnePolylinePerSeries) {
  const auto rows = run_sweep(small_spec(RegKind::L1));
  const std::string svg =
      render_svg_plot(rows, {Series::Empirical, Series::Predicted, Series::Compressed}, "a <b> & c", "error");
  const auto tree = parse_xml(svg);
  EXPECT_EQ(count_polylines(tree.get_child("svg")), 3);
  EXPECT_NE(svg.find("a &lt;b&gt; &amp; c"), std::string::npos);
}

TEST(Svg, MissingValuesSplitPolylines) {
  std::vector<SweepRow> rows(5);
  for (int i = 0; i < 5; ++i) {
    rows[i].lambda = std::pow(10.0, i);
    rows[i].empirical_error_mean = 0.1 * i;
    rows[i].predicted_error = i == 2 ? NAN : 0.05 * i;
  }
  const auto tree = parse_xml(render_svg_plot(rows, {Series::Empirical, Series::Predicted}, "", "error"));
  EXPECT_EQ(count_polylines(tree.get_child("svg")), 3);
  EXPECT_EQ(code_of([] { render_svg_plot({}, {Series::Empirical}, "", ""); }), ErrorCode::InvalidArgument);
}

TEST(Svg, SweepPlotsWriteBothFiles) {
  const auto rows = run_sweep(small_spec(RegKind::LInf));
  const std::string err = temp_path("err.svg"), frac = temp_path("frac.svg");
  emit_sweep_plots(rows, RegKind::LInf, err, frac);
  EXPECT_EQ(count_polylines(parse_xml(slurp(err)).get_child("svg")), 3);
  EXPECT_EQ(count_polylines(parse_xml(slurp(frac)).get_child("svg")), 2);
  std::filesystem::remove(err);
  std::filesystem::remove(frac);

  emit_sweep_plots(rows, RegKind::L2Squared, err, frac);
  EXPECT_TRUE(std::filesystem::exists(err));
  EXPECT_FALSE(std::filesystem::exists(frac));
  std::filesystem::remove(err);
}

TEST(Svg, SeriesLabels) {
  EXPECT_EQ(series_label(Series::Empirical), "true error");
  EXPECT_EQ(series_label(Series::Predicted), "prediction");
  EXPECT_EQ(series_label(Series::Compressed), "compressed error");
}
