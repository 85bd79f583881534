#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "strongreg/rng.hpp"

namespace strongreg {

struct GmmConfig {
  int d = 750;
  int n = 500;
  int k = 5;
  double r = 0.8;
  double c = 0.3;
  double sigma = 1.0;
  std::uint64_t seed = 1;

  // throws InvalidArgument, InvalidCorrelation or InvalidCorruption
  void validate() const;
};

using Labels = std::vector<int>;

struct Dataset {
  Eigen::MatrixXd X;   // n x d
  Labels true_labels;  // labels before corruption
  Labels labels;       // labels seen by the learner
  Eigen::MatrixXd M;   // k x d class means

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int k() const { return static_cast<int>(M.rows()); }
};

// Independent stream ids under one seed.
enum class StreamPurpose : std::uint64_t {
  Means = 1,
  TrainLabels = 2,
  TrainNoise = 3,
  Corruption = 4,
  TestLabels = 5,
  TestNoise = 6,
};

RngStream make_stream(std::uint64_t seed, StreamPurpose purpose);

Eigen::MatrixXd sample_means(int k, int d, double r, RngStream& rng);
Labels corrupt_labels(const Labels& true_labels, double c, int k, RngStream& rng);

Dataset generate_dataset(const GmmConfig& cfg);
// Fresh uncorrupted sample from the same mixture (same means).
Dataset generate_test_set(const GmmConfig& cfg, const Eigen::MatrixXd& M, int size);

Eigen::MatrixXd one_hot(const Labels& labels, int k);

// Plain-text bundle unless the path ends in ".bin".
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace strongreg
