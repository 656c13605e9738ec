#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "complaintscale/corpus.hpp"

namespace cscale {

struct FeatureConfig {
  std::vector<int> ngram_orders = {2, 3, 4};
  std::size_t hash_dim = std::size_t{1} << 18;  // power of two, >= 2^10
  bool binary_counts = false;

  // Throws std::invalid_argument on an order < 1 or a bad hash_dim.
  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

// Sorted by index, no explicit zeros.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double squared_norm() const;
  bool empty() const { return indices.empty(); }
};

// 64-bit FNV-1a over the bytes.
std::uint64_t fnv1a64(std::string_view bytes);

// Character n-grams (code points, UTF-8 bytes hashed with FNV-1a and masked
// to hash_dim), counted then L2-normalised. Empty text gives a zero vector.
SparseVector extract_features(std::string_view text, const FeatureConfig& config);

double dot(const SparseVector& a, const SparseVector& b);

// exp(-gamma * ||a - b||^2).
double rbf_kernel(const SparseVector& a, const SparseVector& b, double gamma);

// Row-major n x n kernel matrix.
std::vector<double> kernel_matrix(std::span<const SparseVector> xs, double gamma);

struct KrrModel {
  FeatureConfig config;
  double lambda = 1.0;
  double gamma = 1.0;
  std::vector<SparseVector> train;
  std::vector<double> alpha;  // one dual coefficient per training row

  // Unclipped kernel expansion sum_i alpha_i k(x_i, x).
  double decision(const SparseVector& x) const;
};

// Solves (K + lambda I) alpha = y by Cholesky. Requires lambda > 0,
// gamma >= 0, at least two rows, targets in [-1, 1]. Throws SingularSystem
// when the system is numerically singular.
KrrModel train_krr(std::vector<SparseVector> features, std::span<const double> targets,
                   double lambda, double gamma, const FeatureConfig& config);

// Predictions clipped to [-1, 1].
std::vector<double> predict(const KrrModel& model, std::span<const SparseVector> xs);
std::vector<double> predict_texts(const KrrModel& model,
                                  std::span<const std::string> texts);

// 1 / (mean number of non-zero buckets per row).
double default_gamma(std::span<const SparseVector> xs);

// Header line of JSON (config, lambda, gamma, sizes) followed by
// little-endian arrays: alpha (f64), row offsets (u64), indices (u32),
// values (f64).
void save_model(const KrrModel& model, const std::string& path);
KrrModel load_model(const std::string& path);

enum class EvalMode { kMixHashtag, kCrossHashtag };

struct EvalProtocol {
  EvalMode mode = EvalMode::kMixHashtag;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  // Cross mode: evaluate only this hashtag; otherwise every hashtag in turn.
  std::optional<std::string> held_out_hashtag;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid = {0.01, 0.1, 1.0, 10.0};
  std::vector<double> gamma_grid = {0.01, 0.1, 1.0};
};

struct EvalMetrics {
  double pearson = 0.0;
  double mse = 0.0;
  std::size_t n_test = 0;
};

// Throws ZeroVariance when the predictions (or targets) are constant.
EvalMetrics evaluate(const KrrModel& model, std::span<const SparseVector> xs,
                     std::span<const double> targets);

struct FoldResult {
  std::string hashtag;  // held-out hashtag; empty in mix mode
  double lambda = 0.0;
  double gamma = 0.0;
  EvalMetrics metrics;
};

struct EvalReport {
  EvalMode mode = EvalMode::kMixHashtag;
  std::vector<FoldResult> folds;
  double mean_pearson = 0.0;
  double mean_mse = 0.0;
};

struct HyperChoice {
  double lambda = 1.0;
  double gamma = 1.0;
  double dev_mse = 0.0;
};

// Grid search by dev-set MSE.
HyperChoice tune_hyperparameters(std::span<const SparseVector> train,
                                 std::span<const double> train_y,
                                 std::span<const SparseVector> dev,
                                 std::span<const double> dev_y,
                                 std::span<const double> lambda_grid,
                                 std::span<const double> gamma_grid);

// Mix: one seeded 80/10/10 split of all scored posts. Cross: each held-out
// hashtag is the test set; the remaining posts are split train/dev in the
// protocol's train:dev ratio. Posts without a score are skipped. Throws
// UnknownHashtag when held_out_hashtag is absent from the corpus.
EvalReport evaluate_baseline(std::span<const Post> posts,
                             const std::map<std::size_t, double>& scores,
                             const EvalProtocol& protocol,
                             const FeatureConfig& config = {});

}  // namespace cscale
