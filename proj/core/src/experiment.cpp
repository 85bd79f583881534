#include "strongreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "strongreg/compress.hpp"
#include "strongreg/error.hpp"
#include "strongreg/evaluation.hpp"

namespace strongreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    config_error("'" + key + "' expects a number, got '" + value + "'");
  }
  return x;
}

long long parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    config_error("'" + key + "' expects an integer, got '" + value + "'");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) {
    config_error("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return x;
}

int parse_count(const std::string& key, const std::string& value) {
  const long long x = parse_int(key, value);
  if (x < 0 || x > std::numeric_limits<int>::max()) config_error("'" + key + "' out of range");
  return static_cast<int>(x);
}

bool apply_config_key(GmmConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "d") cfg.d = parse_count(key, value);
  else if (key == "n") cfg.n = parse_count(key, value);
  else if (key == "k") cfg.k = parse_count(key, value);
  else if (key == "r") cfg.r = parse_double(key, value);
  else if (key == "c") cfg.c = parse_double(key, value);
  else if (key == "sigma") cfg.sigma = parse_double(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else return false;
  return true;
}

template <class F>
void parallel_for(int count, int workers, F&& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

// standard error of the mean across trials
double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? kNaN : 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  return s;
}

struct TrialCell {
  double error = kNaN;
  double compressed = kNaN;
  double fraction = kNaN;
  bool ok = false;
  std::string message;
};

double measured_fraction(RegKind kind, const WeightMatrix& W) {
  if (kind == RegKind::L1) return mean_of(nonzero_fraction(W));
  if (kind == RegKind::LInf) {
    std::vector<double> fr;
    for (Eigen::Index l = 0; l < W.cols(); ++l) {
      if (W.col(l).lpNorm<Eigen::Infinity>() == 0.0) continue;
      fr.push_back(boundary_fraction(W.col(l))[0]);
    }
    return mean_of(fr);
  }
  return kNaN;
}

}  // namespace

void SweepSpec::validate() const {
  try {
    cfg.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (lambdas.empty()) config_error("lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) config_error("lambdas must be positive and finite");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) config_error("lambdas must be strictly increasing");
  }
  if (trials < 1) config_error("trials must be at least 1");
  if (test_size < 1) config_error("test_size must be at least 1");
  if (workers < 1) config_error("workers must be at least 1");
  if (qk_samples < 1) config_error("qk_samples must be at least 1");
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) config_error("invalid lambda range");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_lambda_grid(RegKind kind) {
  return log_grid(1.0, kind == RegKind::L1 ? 1e3 : 1e5, 40);
}

Settings parse_settings(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (key.empty()) config_error("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_settings(buf.str());
}

GmmConfig make_config(const Settings& settings) {
  GmmConfig cfg;
  for (const auto& [key, value] : settings) {
    if (!apply_config_key(cfg, key, value)) config_error("unknown config key '" + key + "'");
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return cfg;
}

SweepSpec make_sweep_spec(const Settings& settings) {
  SweepSpec spec;
  std::vector<double> explicit_grid;
  double lo = kNaN, hi = kNaN;
  int count = 40;
  for (const auto& [key, value] : settings) {
    if (apply_config_key(spec.cfg, key, value)) continue;
    if (key == "reg") {
      try {
        spec.kind = parse_reg_kind(trim(value));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (key == "lambdas") {
      explicit_grid.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) explicit_grid.push_back(parse_double(key, item));
    } else if (key == "lambda_min") {
      lo = parse_double(key, value);
    } else if (key == "lambda_max") {
      hi = parse_double(key, value);
    } else if (key == "lambda_count") {
      count = parse_count(key, value);
    } else if (key == "trials") {
      spec.trials = parse_count(key, value);
    } else if (key == "test_size") {
      spec.test_size = parse_count(key, value);
    } else if (key == "workers") {
      spec.workers = parse_count(key, value);
    } else if (key == "qk_samples") {
      spec.qk_samples = parse_int(key, value);
    } else if (key == "csv") {
      spec.csv_path = value;
    } else if (key == "svg") {
      spec.svg_path = value;
    } else if (key == "fraction_svg") {
      spec.fraction_svg_path = value;
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  if (!explicit_grid.empty()) {
    spec.lambdas = explicit_grid;
  } else {
    const auto def = default_lambda_grid(spec.kind);
    spec.lambdas = log_grid(std::isnan(lo) ? def.front() : lo, std::isnan(hi) ? def.back() : hi, count);
  }
  spec.validate();
  return spec;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const GmmConfig& cfg = spec.cfg;
  const int L = static_cast<int>(spec.lambdas.size());

  std::unique_ptr<QkEstimator> own_qk;
  const QkEstimator* qk = nullptr;
  if (spec.qk_samples == 200000) {
    qk = &default_qk(cfg.k);
  } else {
    RngStream rng(mix_seed(cfg.seed, 0x71c), static_cast<std::uint64_t>(cfg.k));
    own_qk = std::make_unique<QkEstimator>(cfg.k, spec.qk_samples, rng);
    qk = own_qk.get();
  }

  std::vector<SweepRow> rows(static_cast<std::size_t>(L));
  std::vector<TheoryPrediction> theory(static_cast<std::size_t>(L));
  std::vector<std::string> theory_failure(static_cast<std::size_t>(L));
  parallel_for(L, spec.workers, [&](int j) {
    try {
      theory[j] = predict(cfg, {spec.kind, spec.lambdas[j]}, *qk);
    } catch (const std::exception& e) {
      theory_failure[j] = e.what();
    }
  });

  // one dataset per trial, shared by every lambda and solved from the largest lambda down
  std::vector<std::vector<TrialCell>> cells(static_cast<std::size_t>(spec.trials),
                                            std::vector<TrialCell>(static_cast<std::size_t>(L)));
  parallel_for(spec.trials, spec.workers, [&](int t) {
    auto& row = cells[t];
    try {
      GmmConfig tc = cfg;
      tc.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(t), 0x7471);
      const Dataset train = generate_dataset(tc);
      const Dataset test = generate_test_set(tc, train.M, spec.test_size);
      const Design design(train.X);
      const Eigen::MatrixXd Y = one_hot(train.labels, cfg.k);
      WeightMatrix prev;
      for (int j = L - 1; j >= 0; --j) {
        TrialCell& cell = row[j];
        try {
          TrainOptions opts;
          if (prev.size() > 0) opts.warm_start = &prev;
          TrainResult res = train_all(design, Y, {spec.kind, spec.lambdas[j]}, opts);
          cell.error = empirical_error(res.W, test).value;
          if (spec.kind == RegKind::LInf) {
            cell.compressed = empirical_error(one_bit(res.W), test).value;
          } else if (spec.kind == RegKind::L1 && theory_failure[j].empty()) {
            cell.compressed = empirical_error(sparsify(res.W, theory[j].sparsity_fraction), test).value;
          }
          cell.fraction = measured_fraction(spec.kind, res.W);
          cell.ok = true;
          prev = std::move(res.W);
        } catch (const std::exception& e) {
          cell.message = e.what();
          prev.resize(0, 0);
        }
      }
    } catch (const std::exception& e) {
      for (auto& cell : row) cell.message = e.what();
    }
  });

  for (int j = 0; j < L; ++j) {
    SweepRow& r = rows[j];
    r.lambda = spec.lambdas[j];
    std::vector<double> errs, comp, frac;
    std::string failure;
    for (int t = 0; t < spec.trials; ++t) {
      const TrialCell& cell = cells[t][j];
      if (!cell.ok) {
        if (failure.empty()) failure = "trial " + std::to_string(t) + ": " + cell.message;
        continue;
      }
      errs.push_back(cell.error);
      if (!std::isnan(cell.compressed)) comp.push_back(cell.compressed);
      if (!std::isnan(cell.fraction)) frac.push_back(cell.fraction);
    }
    r.trials_ok = static_cast<int>(errs.size());
    r.trial_errors = errs;
    r.empirical_error_mean = mean_of(errs);
    r.empirical_error_stderr = stderr_of(errs);
    r.compressed_error_mean = mean_of(comp);
    r.compressed_error_stderr = stderr_of(comp);
    r.fraction_measured = mean_of(frac);

    if (theory_failure[j].empty()) {
      const TheoryPrediction& p = theory[j];
      r.predicted_error = p.error;
      r.predicted_error_stderr = p.error_stderr;
      r.margin_arg = p.margin_arg;
      r.margin_arg_raw = p.margin_arg_raw;
      if (spec.kind == RegKind::L2Squared) {
        r.fraction_pred = kNaN;
        r.gamma = {kNaN, kNaN, kNaN, kNaN};
        r.delta_opt = r.xi = r.omega = r.big_delta = r.big_r = kNaN;
      } else {
        r.fraction_pred = spec.kind == RegKind::L1 ? p.sparsity_fraction : p.boundary_fraction;
        r.gamma = p.saddle.gamma;
        r.delta_opt = spec.kind == RegKind::LInf ? p.saddle.delta_opt : kNaN;
        r.xi = p.saddle.xi;
        r.omega = p.saddle.omega;
        r.big_delta = p.saddle.big_delta;
        r.big_r = p.saddle.big_r;
      }
    } else {
      r.predicted_error = r.predicted_error_stderr = r.margin_arg = r.margin_arg_raw = kNaN;
      r.fraction_pred = kNaN;
      r.gamma = {kNaN, kNaN, kNaN, kNaN};
      r.delta_opt = r.xi = r.omega = r.big_delta = r.big_r = kNaN;
      failure = "theory: " + theory_failure[j] + (failure.empty() ? "" : "; " + failure);
    }
    r.status = failure.empty() ? "ok" : "failed: " + sanitize(failure);
  }
  return rows;
}

std::vector<std::string> sweep_csv_header() {
  return {"lambda", "empirical_error_mean", "empirical_error_stderr", "predicted_error",
          "predicted_error_stderr", "margin_arg", "margin_arg_raw", "compressed_error_mean",
          "compressed_error_stderr", "fraction_pred", "fraction_measured", "gamma1", "gamma2",
          "gamma3", "gamma4", "delta_opt", "xi", "omega", "big_delta", "big_r", "trials_ok", "status"};
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  const auto header = sweep_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  char buf[64];
  for (const SweepRow& r : rows) {
    const double vals[] = {r.lambda, r.empirical_error_mean, r.empirical_error_stderr, r.predicted_error,
                           r.predicted_error_stderr, r.margin_arg, r.margin_arg_raw, r.compressed_error_mean,
                           r.compressed_error_stderr, r.fraction_pred, r.fraction_measured, r.gamma[0],
                           r.gamma[1], r.gamma[2], r.gamma[3], r.delta_opt, r.xi, r.omega, r.big_delta,
                           r.big_r};
    for (double v : vals) {
      std::snprintf(buf, sizeof buf, "%.10g,", v);
      out += buf;
    }
    out += std::to_string(r.trials_ok) + "," + sanitize(r.status) + "\n";
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows to write");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  const std::string text = format_csv(rows);
  std::fwrite(text.data(), 1, text.size(), f);
  const bool bad = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || bad) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  std::string line;
  if (!std::getline(in, line) || split(trim(line)) != sweep_csv_header()) {
    throw Error(ErrorCode::ConfigError, "'" + path + "' is not a sweep CSV");
  }
  std::vector<SweepRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != sweep_csv_header().size()) {
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": wrong field count");
    }
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(f[i].c_str(), &end);
      if (f[i].empty() || end != f[i].c_str() + f[i].size()) {
        throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(lineno) + ": bad number");
      }
      return v;
    };
    SweepRow r;
    double* targets[] = {&r.lambda, &r.empirical_error_mean, &r.empirical_error_stderr, &r.predicted_error,
                         &r.predicted_error_stderr, &r.margin_arg, &r.margin_arg_raw, &r.compressed_error_mean,
                         &r.compressed_error_stderr, &r.fraction_pred, &r.fraction_measured, &r.gamma[0],
                         &r.gamma[1], &r.gamma[2], &r.gamma[3], &r.delta_opt, &r.xi, &r.omega, &r.big_delta,
                         &r.big_r};
    for (std::size_t i = 0; i < std::size(targets); ++i) *targets[i] = num(i);
    r.trials_ok = static_cast<int>(num(20));
    r.status = f[21];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string series_label(Series s) {
  switch (s) {
    case Series::Empirical: return "true error";
    case Series::Predicted: return "prediction";
    case Series::Compressed: return "compressed error";
    case Series::FractionPred: return "predicted fraction";
    case Series::FractionMeasured: return "measured fraction";
  }
  return "";
}

namespace {

double series_value(const SweepRow& r, Series s) {
  switch (s) {
    case Series::Empirical: return r.empirical_error_mean;
    case Series::Predicted: return r.predicted_error;
    case Series::Compressed: return r.compressed_error_mean;
    case Series::FractionPred: return r.fraction_pred;
    case Series::FractionMeasured: return r.fraction_measured;
  }
  return kNaN;
}

const char* series_color(Series s) {
  switch (s) {
    case Series::Empirical: return "#1f77b4";
    case Series::Predicted: return "#d62728";
    case Series::Compressed: return "#2ca02c";
    case Series::FractionPred: return "#d62728";
    case Series::FractionMeasured: return "#1f77b4";
  }
  return "#000000";
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string render_svg_plot(const std::vector<SweepRow>& rows, const std::vector<Series>& series,
                            const std::string& title, const std::string& y_label) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows to plot");
  const double width = 640, height = 400, left = 70, right = 170, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;

  double lmin = kNaN, lmax = kNaN, ymax = 0.0;
  for (const auto& r : rows) {
    if (!(r.lambda > 0.0)) continue;
    lmin = std::isnan(lmin) ? r.lambda : std::min(lmin, r.lambda);
    lmax = std::isnan(lmax) ? r.lambda : std::max(lmax, r.lambda);
    for (Series s : series) {
      const double v = series_value(r, s);
      if (std::isfinite(v)) ymax = std::max(ymax, v);
    }
  }
  if (std::isnan(lmin)) throw Error(ErrorCode::InvalidArgument, "no positive lambda to plot");
  double x0 = std::floor(std::log10(lmin)), x1 = std::ceil(std::log10(lmax));
  if (x1 <= x0) x1 = x0 + 1.0;
  ymax = std::max(0.1, std::ceil(ymax * 1.05 * 10.0) / 10.0);

  auto px = [&](double lambda) { return left + (std::log10(lambda) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - v / ymax) * ph; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(title) << "</text>\n";
  }
  out << "<g stroke=\"#cccccc\" stroke-width=\"0.5\">\n";
  for (int e = static_cast<int>(x0); e <= static_cast<int>(x1); ++e) {
    const double x = px(std::pow(10.0, e));
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(x) << "\" y2=\""
        << fmt(top + ph) << "\"/>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double y = py(ymax * i / 5.0);
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
        << fmt(y) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(x0); e <= static_cast<int>(x1); ++e) {
    out << "<text x=\"" << fmt(px(std::pow(10.0, e))) << "\" y=\"" << fmt(top + ph + 18)
        << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(v) + 4) << "\" text-anchor=\"end\">"
        << tick_label(v) << "</text>\n";
  }
  out << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(height - 12)
      << "\" text-anchor=\"middle\">lambda (log scale)</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt(top + ph / 2) << ")\">" << escape_xml(y_label) << "</text>\n";

  int legend_row = 0;
  for (Series s : series) {
    const std::string label = escape_xml(series_label(s));
    out << "<g class=\"series\" stroke=\"" << series_color(s) << "\" fill=\"none\" stroke-width=\"1.5\""
        << (s == Series::Predicted || s == Series::FractionPred ? " stroke-dasharray=\"6 3\"" : "") << ">\n";
    std::string points;
    auto flush = [&] {
      if (!points.empty()) out << "<polyline points=\"" << points << "\"><title>" << label << "</title></polyline>\n";
      points.clear();
    };
    for (const auto& r : rows) {
      const double v = series_value(r, s);
      if (!(r.lambda > 0.0) || !std::isfinite(v)) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fmt(px(r.lambda)) + "," + fmt(py(v));
    }
    flush();
    out << "</g>\n";
    const double ly = top + 10 + 18 * legend_row++;
    out << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(left + pw + 36)
        << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << series_color(s) << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << fmt(left + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_svg_plot(const std::vector<SweepRow>& rows, const std::vector<Series>& series,
                   const std::string& path, const std::string& title, const std::string& y_label) {
  const std::string svg = render_svg_plot(rows, series, title, y_label);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << svg;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

void emit_sweep_plots(const std::vector<SweepRow>& rows, RegKind kind, const std::string& error_path,
                      const std::string& fraction_path) {
  std::vector<Series> errors{Series::Empirical, Series::Predicted};
  if (kind != RegKind::L2Squared) errors.push_back(Series::Compressed);
  const std::string name = to_string(kind);
  if (!error_path.empty()) emit_svg_plot(rows, errors, error_path, name + " regularization");
  if (!fraction_path.empty() && kind != RegKind::L2Squared) {
    emit_svg_plot(rows, {Series::FractionPred, Series::FractionMeasured}, fraction_path,
                  name + (kind == RegKind::L1 ? " nonzero fraction" : " boundary fraction"), "fraction");
  }
}

}  // namespace strongreg
