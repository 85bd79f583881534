#include "strongreg/gmm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Cholesky>

#include "strongreg/error.hpp"

namespace strongreg {

void GmmConfig::validate() const {
  if (d < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "d and n must be positive");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be finite and non-negative");
  }
  if (!(r > -1.0 / (k - 1)) || !(r <= 1.0)) {
    throw Error(ErrorCode::InvalidCorrelation, "r must lie in (-1/(k-1), 1]");
  }
  // the correct label must stay the most likely one: 1 - c > c / (k - 1)
  if (!(c >= 0.0) || !(c < (k - 1.0) / k)) {
    throw Error(ErrorCode::InvalidCorruption, "c must lie in [0, (k-1)/k)");
  }
}

RngStream make_stream(std::uint64_t seed, StreamPurpose purpose) {
  return RngStream(seed, static_cast<std::uint64_t>(purpose));
}

Eigen::MatrixXd sample_means(int k, int d, double r, RngStream& rng) {
  if (k < 2 || d < 1) throw Error(ErrorCode::InvalidArgument, "sample_means: bad shape");
  if (!(r > -1.0 / (k - 1)) || !(r <= 1.0)) {
    throw Error(ErrorCode::InvalidCorrelation, "equicorrelation matrix is not PSD");
  }
  Eigen::MatrixXd Z(k, d);
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < k; ++l) Z(l, j) = rng.normal();

  if (r == 1.0) {
    // rank one: every class shares the first draw
    return Z.row(0).replicate(k, 1);
  }
  const Eigen::MatrixXd sigma =
      (1.0 - r) * Eigen::MatrixXd::Identity(k, k) + r * Eigen::MatrixXd::Ones(k, k);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidCorrelation, "equicorrelation Cholesky failed");
  }
  return llt.matrixL() * Z;
}

Labels corrupt_labels(const Labels& true_labels, double c, int k, RngStream& rng) {
  Labels out(true_labels.size());
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int y = true_labels[i];
    if (rng.uniform() < c) {
      const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k - 1)));
      out[i] = j < y ? j : j + 1;
    } else {
      out[i] = y;
    }
  }
  return out;
}

namespace {

void fill_rows(Eigen::MatrixXd& X, const Labels& labels, const Eigen::MatrixXd& M, double sigma,
               RngStream& noise) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X.row(i) = M.row(labels[i]);
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) += sigma * noise.normal();
  }
}

Labels uniform_labels(int n, int k, RngStream& rng) {
  Labels out(n);
  for (auto& y : out) y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

Dataset generate_dataset(const GmmConfig& cfg) {
  cfg.validate();
  Dataset ds;
  auto means_rng = make_stream(cfg.seed, StreamPurpose::Means);
  ds.M = sample_means(cfg.k, cfg.d, cfg.r, means_rng);

  auto label_rng = make_stream(cfg.seed, StreamPurpose::TrainLabels);
  ds.true_labels = uniform_labels(cfg.n, cfg.k, label_rng);

  auto noise_rng = make_stream(cfg.seed, StreamPurpose::TrainNoise);
  ds.X.resize(cfg.n, cfg.d);
  fill_rows(ds.X, ds.true_labels, ds.M, cfg.sigma, noise_rng);

  auto corrupt_rng = make_stream(cfg.seed, StreamPurpose::Corruption);
  ds.labels = corrupt_labels(ds.true_labels, cfg.c, cfg.k, corrupt_rng);
  return ds;
}

Dataset generate_test_set(const GmmConfig& cfg, const Eigen::MatrixXd& M, int size) {
  if (size < 0) throw Error(ErrorCode::InvalidArgument, "negative test size");
  if (M.rows() != cfg.k || M.cols() != cfg.d) {
    throw Error(ErrorCode::DimensionMismatch, "means do not match config");
  }
  Dataset ds;
  ds.M = M;
  auto label_rng = make_stream(cfg.seed, StreamPurpose::TestLabels);
  ds.true_labels = uniform_labels(size, cfg.k, label_rng);
  auto noise_rng = make_stream(cfg.seed, StreamPurpose::TestNoise);
  ds.X.resize(size, cfg.d);
  fill_rows(ds.X, ds.true_labels, ds.M, cfg.sigma, noise_rng);
  ds.labels = ds.true_labels;
  return ds;
}

Eigen::MatrixXd one_hot(const Labels& labels, int k) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]) +
                                                  " outside [0, " + std::to_string(k) + ")");
    }
    Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return Y;
}

namespace {

constexpr char kBinaryMagic[4] = {'S', 'R', 'G', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

bool is_binary_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::IoError, "truncated dataset file");
  return v;
}

void check_shapes(const Dataset& ds) {
  if (ds.true_labels.size() != static_cast<std::size_t>(ds.X.rows()) ||
      ds.labels.size() != static_cast<std::size_t>(ds.X.rows()) || ds.M.cols() != ds.X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset fields have inconsistent shapes");
  }
}

void write_binary(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  out.write(kBinaryMagic, 4);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(ds.n()));
  put(out, static_cast<std::uint64_t>(ds.d()));
  put(out, static_cast<std::uint64_t>(ds.k()));
  for (int i = 0; i < ds.n(); ++i)
    for (int j = 0; j < ds.d(); ++j) put(out, ds.X(i, j));
  for (int y : ds.true_labels) put(out, static_cast<std::int32_t>(y));
  for (int y : ds.labels) put(out, static_cast<std::int32_t>(y));
  for (int l = 0; l < ds.k(); ++l)
    for (int j = 0; j < ds.d(); ++j) put(out, ds.M(l, j));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

Dataset read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw Error(ErrorCode::IoError, path + " is not a dataset bundle");
  }
  if (get<std::uint32_t>(in) != kFormatVersion) {
    throw Error(ErrorCode::IoError, "unsupported dataset version");
  }
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto d = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto k = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  Dataset ds;
  ds.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = get<double>(in);
  ds.true_labels.resize(n);
  ds.labels.resize(n);
  for (auto& y : ds.true_labels) y = get<std::int32_t>(in);
  for (auto& y : ds.labels) y = get<std::int32_t>(in);
  ds.M.resize(k, d);
  for (Eigen::Index l = 0; l < k; ++l)
    for (Eigen::Index j = 0; j < d; ++j) ds.M(l, j) = get<double>(in);
  return ds;
}

void write_row(std::ostream& out, const Eigen::MatrixXd& A, Eigen::Index i) {
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (j) out << ',';
    out << A(i, j);
  }
  out << '\n';
}

void write_text(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  out << std::setprecision(17);
  out << "strongreg-dataset," << kFormatVersion << '\n';
  out << ds.n() << ',' << ds.d() << ',' << ds.k() << '\n';
  for (int i = 0; i < ds.n(); ++i) write_row(out, ds.X, i);
  for (int i = 0; i < ds.n(); ++i) out << ds.true_labels[i] << ',' << ds.labels[i] << '\n';
  for (int l = 0; l < ds.k(); ++l) write_row(out, ds.M, l);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<std::string> split_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "unexpected end of dataset file");
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "malformed number '" + s + "'");
  }
}

void read_matrix_rows(std::istream& in, Eigen::MatrixXd& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const auto fields = split_line(in);
    if (static_cast<Eigen::Index>(fields.size()) != A.cols()) {
      throw Error(ErrorCode::IoError, "wrong field count in matrix row");
    }
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = to_double(fields[j]);
  }
}

Dataset read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  const auto magic = split_line(in);
  if (magic.size() != 2 || magic[0] != "strongreg-dataset") {
    throw Error(ErrorCode::IoError, path + " is not a dataset bundle");
  }
  const auto dims = split_line(in);
  if (dims.size() != 3) throw Error(ErrorCode::IoError, "bad dimension line");
  const auto n = static_cast<Eigen::Index>(to_double(dims[0]));
  const auto d = static_cast<Eigen::Index>(to_double(dims[1]));
  const auto k = static_cast<Eigen::Index>(to_double(dims[2]));
  Dataset ds;
  ds.X.resize(n, d);
  read_matrix_rows(in, ds.X);
  ds.true_labels.resize(n);
  ds.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto f = split_line(in);
    if (f.size() != 2) throw Error(ErrorCode::IoError, "bad label line");
    ds.true_labels[i] = static_cast<int>(to_double(f[0]));
    ds.labels[i] = static_cast<int>(to_double(f[1]));
  }
  ds.M.resize(k, d);
  read_matrix_rows(in, ds.M);
  return ds;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  check_shapes(ds);
  if (is_binary_path(path)) {
    write_binary(ds, path);
  } else {
    write_text(ds, path);
  }
}

Dataset read_dataset(const std::string& path) {
  Dataset ds = is_binary_path(path) ? read_binary(path) : read_text(path);
  check_shapes(ds);
  return ds;
}

}  // namespace strongreg
