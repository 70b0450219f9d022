#pragma once

// Data ingestion, synthetic benchmark generation and evaluation helpers.
//
// Files use 1-based indices; everything in memory is 0-based. All random
// operations draw from std::mt19937_64 seeded explicitly by the caller.

#include "rankprox/problems.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankprox {

using Rng = std::mt19937_64;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class TripletFormat { MatrixMarket, Csv };

/// Picks MatrixMarket for *.mtx / *.mm, CSV otherwise.
TripletFormat guess_format(const std::string& path);

struct Dims {
  Index rows = 0;
  Index cols = 0;
};

/// Parses "MxN" (also "M,N").
Dims parse_dims(const std::string& text);

/// MatrixMarket "coordinate real general" or "row,col,value" CSV lines.
/// For CSV without explicit dims the shape is the largest index seen.
/// Blank lines and lines starting with '#' or '%' are skipped in CSV files.
Observations load_triplets(const std::string& path, TripletFormat format,
                           const std::optional<Dims>& dims = std::nullopt);
void write_triplets(const std::string& path, const Observations& obs, TripletFormat format);

struct Dataset {
  Observations train;
  std::optional<Observations> test;
  std::map<std::string, std::string> provenance;

  Index rows() const { return train.rows(); }
  Index cols() const { return train.cols(); }
};

/// Uniform random partition: round(fraction * size) samples go to train.
/// Sample order is preserved on both sides.
Dataset split(const Observations& obs, double fraction, std::uint64_t seed);

struct SyntheticParams {
  Index m = 300;
  Index n = 0;  // 0 means square
  Index r = 5;
  double omega = 3.0;
  double noise_scale = 0.0;       // Gaussian noise with ||noise|| = scale * ||d||
  double outlier_fraction = 0.0;  // share of training samples receiving an outlier
  double outlier_range = 0.0;     // outliers are Uniform[-range, range] additions
  double test_fraction = 0.25;    // test size relative to the training size
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset dataset;
  FixedRankMatrix truth;
  /// ||noise||_2 / sqrt(l): root-mean-square of the added training noise.
  double noise_level = 0.0;
  /// Positions in dataset.train.samples() that carry an outlier.
  std::vector<Index> outliers;
};

/// l = round(omega r (m + n - r)) training samples drawn without replacement
/// from a rank-r matrix U diag(sigma) V^T with sigma ~ Uniform[0, 1000]; a
/// disjoint test set receives noise of the same per-entry deviation but no
/// outliers.
SyntheticData gen_synthetic(const SyntheticParams& params);

/// sqrt(mean over samples of (X_ij - value)^2).
double rmse(const FixedRankMatrix& x, const Observations& obs);

DenseMatrix read_dense_csv(const std::string& path);
void write_dense_csv(const std::string& path, const DenseMatrix& a);

/// U.csv, sigma.csv (one value per line) and V.csv inside `dir`.
void write_factors(const std::string& dir, const FixedRankMatrix& x);
FixedRankMatrix read_factors(const std::string& dir);

struct SubspaceParams {
  Index ambient = 20;
  Index dim = 3;
  Index per_subspace = 40;
  Index subspaces = 2;
  double corrupt_fraction = 0.05;
  /// A corrupted column x gets Gaussian noise of standard deviation scale * ||x||.
  double corrupt_scale = 0.3;
  std::uint64_t seed = 1;
};

struct SubspaceData {
  DenseMatrix d;                // ambient x (subspaces * per_subspace)
  std::vector<int> labels;      // subspace of each column
  std::vector<Index> corrupted; // corrupted column indices
};

SubspaceData gen_subspaces(const SubspaceParams& params);

/// Orthonormal m x k basis from the QR factor of a Gaussian matrix.
DenseMatrix random_orthonormal(Index m, Index k, Rng& rng);

}  // namespace rankprox
