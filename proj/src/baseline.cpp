#include "complaintscale/baseline.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/utf8.hpp"

namespace cscale {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host order, which must be little-endian");

namespace {

constexpr double kMinRcond = 1e-15;

Eigen::MatrixXd dot_matrix(std::span<const SparseVector> rows,
                           std::span<const SparseVector> cols) {
  Eigen::MatrixXd d(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) d(i, j) = dot(rows[i], cols[j]);
  }
  return d;
}

Eigen::VectorXd norms(std::span<const SparseVector> xs) {
  Eigen::VectorXd n(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) n[i] = xs[i].squared_norm();
  return n;
}

// exp(-gamma * (|a|^2 + |b|^2 - 2 a.b)) elementwise from a dot matrix.
Eigen::MatrixXd rbf_from_dots(const Eigen::MatrixXd& dots, const Eigen::VectorXd& rn,
                              const Eigen::VectorXd& cn, double gamma) {
  Eigen::MatrixXd k(dots.rows(), dots.cols());
  for (Eigen::Index i = 0; i < dots.rows(); ++i) {
    for (Eigen::Index j = 0; j < dots.cols(); ++j) {
      const double d2 = std::max(0.0, rn[i] + cn[j] - 2.0 * dots(i, j));
      k(i, j) = std::exp(-gamma * d2);
    }
  }
  return k;
}

void check_targets(std::span<const double> y) {
  for (double v : y) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw RangeError("training target " + std::to_string(v) + " outside [-1, 1]");
    }
  }
}

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_array(std::ifstream& in, std::size_t n) {
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw ParseError("model file truncated");
  return v;
}

}  // namespace

void FeatureConfig::validate() const {
  if (ngram_orders.empty()) throw std::invalid_argument("no n-gram orders configured");
  for (int k : ngram_orders) {
    if (k < 1) throw std::invalid_argument("n-gram order must be >= 1");
  }
  if (hash_dim < (std::size_t{1} << 10) || !std::has_single_bit(hash_dim) ||
      hash_dim > (std::size_t{1} << 32)) {
    throw std::invalid_argument("hash_dim must be a power of two in [2^10, 2^32]");
  }
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseVector extract_features(std::string_view text, const FeatureConfig& config) {
  config.validate();
  const std::vector<std::size_t> bounds = utf8::boundaries(text);
  const std::size_t n_cps = bounds.size() - 1;
  const std::uint64_t mask = config.hash_dim - 1;
  std::map<std::uint32_t, double> counts;
  for (int k : config.ngram_orders) {
    const auto order = static_cast<std::size_t>(k);
    if (order > n_cps) continue;
    for (std::size_t i = 0; i + order <= n_cps; ++i) {
      const std::string_view gram = text.substr(bounds[i], bounds[i + order] - bounds[i]);
      const auto bucket = static_cast<std::uint32_t>(fnv1a64(gram) & mask);
      if (config.binary_counts) {
        counts[bucket] = 1.0;
      } else {
        counts[bucket] += 1.0;
      }
    }
  }
  SparseVector v;
  v.indices.reserve(counts.size());
  v.values.reserve(counts.size());
  double norm2 = 0.0;
  for (const auto& [idx, c] : counts) norm2 += c * c;
  const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (const auto& [idx, c] : counts) {
    v.indices.push_back(idx);
    v.values.push_back(c * inv);
  }
  return v;
}

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (b.indices[j] < a.indices[i]) {
      ++j;
    } else {
      s += a.values[i++] * b.values[j++];
    }
  }
  return s;
}

double rbf_kernel(const SparseVector& a, const SparseVector& b, double gamma) {
  const double d2 = std::max(0.0, a.squared_norm() + b.squared_norm() - 2.0 * dot(a, b));
  return std::exp(-gamma * d2);
}

std::vector<double> kernel_matrix(std::span<const SparseVector> xs, double gamma) {
  const std::size_t n = xs.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      k[i * n + j] = k[j * n + i] = rbf_kernel(xs[i], xs[j], gamma);
    }
  }
  return k;
}

double KrrModel::decision(const SparseVector& x) const {
  const double xn = x.squared_norm();
  double s = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double d2 = std::max(0.0, train[i].squared_norm() + xn - 2.0 * dot(train[i], x));
    s += alpha[i] * std::exp(-gamma * d2);
  }
  return s;
}

KrrModel train_krr(std::vector<SparseVector> features, std::span<const double> targets,
                   double lambda, double gamma, const FeatureConfig& config) {
  if (features.size() != targets.size()) {
    throw std::invalid_argument("feature and target counts differ");
  }
  if (features.size() < 2) throw InsufficientData("need at least 2 training rows");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  check_targets(targets);

  const auto n = static_cast<Eigen::Index>(features.size());
  const Eigen::VectorXd nn = norms(features);
  Eigen::MatrixXd k = rbf_from_dots(dot_matrix(features, features), nn, nn, gamma);
  k.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
    throw SingularSystem("kernel system is numerically singular (lambda = " +
                         std::to_string(lambda) + "); increase lambda");
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  const Eigen::VectorXd a = llt.solve(y);

  KrrModel model;
  model.config = config;
  model.lambda = lambda;
  model.gamma = gamma;
  model.train = std::move(features);
  model.alpha.assign(a.data(), a.data() + a.size());
  return model;
}

std::vector<double> predict(const KrrModel& model, std::span<const SparseVector> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(std::clamp(model.decision(x), -1.0, 1.0));
  return out;
}

std::vector<double> predict_texts(const KrrModel& model, std::span<const std::string> texts) {
  std::vector<SparseVector> xs;
  xs.reserve(texts.size());
  for (const auto& t : texts) xs.push_back(extract_features(t, model.config));
  return predict(model, xs);
}

double default_gamma(std::span<const SparseVector> xs) {
  if (xs.empty()) return 1.0;
  double nnz = 0.0;
  for (const auto& x : xs) nnz += static_cast<double>(x.indices.size());
  nnz /= static_cast<double>(xs.size());
  return nnz > 0.0 ? 1.0 / nnz : 1.0;
}

void save_model(const KrrModel& model, const std::string& path) {
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  for (const auto& row : model.train) {
    indices.insert(indices.end(), row.indices.begin(), row.indices.end());
    values.insert(values.end(), row.values.begin(), row.values.end());
    offsets.push_back(indices.size());
  }
  nlohmann::json header = {
      {"format", "cscale-krr"},
      {"version", 1},
      {"lambda", model.lambda},
      {"gamma", model.gamma},
      {"feature_config",
       {{"ngram_orders", model.config.ngram_orders},
        {"hash_dim", model.config.hash_dim},
        {"binary_counts", model.config.binary_counts}}},
      {"n_train", model.train.size()},
      {"nnz", indices.size()},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model '" + path + "'");
  out << header.dump() << '\n';
  write_array(out, model.alpha);
  write_array(out, offsets);
  write_array(out, indices);
  write_array(out, values);
  if (!out) throw std::runtime_error("failed writing model '" + path + "'");
}

KrrModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model '" + path + "'");
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model header: ") + e.what(), 1);
  }
  if (header.value("format", "") != "cscale-krr" || header.value("version", 0) != 1) {
    throw ParseError("not a cscale-krr v1 model file", 1);
  }
  KrrModel model;
  model.lambda = header.at("lambda").get<double>();
  model.gamma = header.at("gamma").get<double>();
  const auto& fc = header.at("feature_config");
  model.config.ngram_orders = fc.at("ngram_orders").get<std::vector<int>>();
  model.config.hash_dim = fc.at("hash_dim").get<std::size_t>();
  model.config.binary_counts = fc.at("binary_counts").get<bool>();
  model.config.validate();
  const auto n = header.at("n_train").get<std::size_t>();
  const auto nnz = header.at("nnz").get<std::size_t>();
  model.alpha = read_array<double>(in, n);
  const auto offsets = read_array<std::uint64_t>(in, n + 1);
  const auto indices = read_array<std::uint32_t>(in, nnz);
  const auto values = read_array<double>(in, nnz);
  if (offsets.front() != 0 || offsets.back() != nnz) throw ParseError("bad row offsets");
  model.train.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets[i] > offsets[i + 1]) throw ParseError("bad row offsets");
    model.train[i].indices.assign(indices.begin() + static_cast<long>(offsets[i]),
                                  indices.begin() + static_cast<long>(offsets[i + 1]));
    model.train[i].values.assign(values.begin() + static_cast<long>(offsets[i]),
                                 values.begin() + static_cast<long>(offsets[i + 1]));
  }
  return model;
}

EvalMetrics evaluate(const KrrModel& model, std::span<const SparseVector> xs,
                     std::span<const double> targets) {
  const std::vector<double> pred = predict(model, xs);
  EvalMetrics m;
  m.n_test = pred.size();
  m.mse = metrics::mse(pred, targets);
  m.pearson = metrics::pearson(pred, targets);
  return m;
}

HyperChoice tune_hyperparameters(std::span<const SparseVector> train,
                                 std::span<const double> train_y,
                                 std::span<const SparseVector> dev,
                                 std::span<const double> dev_y,
                                 std::span<const double> lambda_grid,
                                 std::span<const double> gamma_grid) {
  if (lambda_grid.empty() || gamma_grid.empty()) {
    throw std::invalid_argument("empty hyperparameter grid");
  }
  if (train.size() < 2 || dev.empty()) {
    throw InsufficientData("tuning needs >= 2 training rows and a non-empty dev set");
  }
  const Eigen::VectorXd tn = norms(train);
  const Eigen::VectorXd dn = norms(dev);
  const Eigen::MatrixXd tt = dot_matrix(train, train);
  const Eigen::MatrixXd dt = dot_matrix(dev, train);
  const auto n = static_cast<Eigen::Index>(train.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train_y.data(), n);

  HyperChoice best;
  best.dev_mse = std::numeric_limits<double>::infinity();
  for (double gamma : gamma_grid) {
    const Eigen::MatrixXd k = rbf_from_dots(tt, tn, tn, gamma);
    const Eigen::MatrixXd kd = rbf_from_dots(dt, dn, tn, gamma);
    // One eigendecomposition serves every lambda.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    const Eigen::VectorXd vty = eig.eigenvectors().transpose() * y;
    for (double lambda : lambda_grid) {
      const Eigen::VectorXd shrunk =
          vty.array() / (eig.eigenvalues().array() + lambda);
      const Eigen::VectorXd alpha = eig.eigenvectors() * shrunk;
      const Eigen::VectorXd pred = kd * alpha;
      double mse = 0.0;
      for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double d = std::clamp(pred[i], -1.0, 1.0) - dev_y[static_cast<std::size_t>(i)];
        mse += d * d;
      }
      mse /= static_cast<double>(pred.size());
      if (mse < best.dev_mse) best = {lambda, gamma, mse};
    }
  }
  return best;
}

namespace {

struct Split {
  std::vector<SparseVector> x;
  std::vector<double> y;
};

FoldResult run_fold(Split train, const Split& dev, const Split& test,
                    const EvalProtocol& protocol, const FeatureConfig& config,
                    std::string hashtag) {
  const HyperChoice h = tune_hyperparameters(train.x, train.y, dev.x, dev.y,
                                             protocol.lambda_grid, protocol.gamma_grid);
  const KrrModel model = train_krr(std::move(train.x), train.y, h.lambda, h.gamma, config);
  FoldResult r;
  r.hashtag = std::move(hashtag);
  r.lambda = h.lambda;
  r.gamma = h.gamma;
  r.metrics = evaluate(model, test.x, test.y);
  return r;
}

}  // namespace

EvalReport evaluate_baseline(std::span<const Post> posts,
                             const std::map<std::size_t, double>& scores,
                             const EvalProtocol& protocol, const FeatureConfig& config) {
  const double total = protocol.train_fraction + protocol.dev_fraction + protocol.test_fraction;
  if (std::abs(total - 1.0) > 1e-9 || protocol.train_fraction <= 0 ||
      protocol.dev_fraction <= 0 || protocol.test_fraction < 0) {
    throw std::invalid_argument("split fractions must be positive and sum to 1");
  }
  struct Row {
    const Post* post;
    double y;
    SparseVector x;
  };
  std::vector<Row> rows;
  for (const auto& p : posts) {
    auto it = scores.find(p.id);
    if (it == scores.end()) continue;
    rows.push_back({&p, it->second, extract_features(p.text, config)});
  }

  auto take = [&](const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
    Split s;
    for (std::size_t k = lo; k < hi; ++k) {
      s.x.push_back(rows[idx[k]].x);
      s.y.push_back(rows[idx[k]].y);
    }
    return s;
  };

  EvalReport report;
  report.mode = protocol.mode;
  if (protocol.mode == EvalMode::kMixHashtag) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(protocol.seed);
    rng.shuffle(std::span(idx));
    const auto n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::floor(protocol.train_fraction * n));
    const auto n_dev = static_cast<std::size_t>(std::floor(protocol.dev_fraction * n));
    report.folds.push_back(run_fold(take(idx, 0, n_train), take(idx, n_train, n_train + n_dev),
                                    take(idx, n_train + n_dev, idx.size()), protocol, config,
                                    ""));
  } else {
    std::set<std::string> hashtags;
    for (const auto& r : rows) hashtags.insert(r.post->hashtag);
    std::vector<std::string> held;
    if (protocol.held_out_hashtag) {
      if (!hashtags.contains(*protocol.held_out_hashtag)) {
        throw UnknownHashtag("hashtag '" + *protocol.held_out_hashtag + "' not in corpus");
      }
      held.push_back(*protocol.held_out_hashtag);
    } else {
      held.assign(hashtags.begin(), hashtags.end());
    }
    if (hashtags.size() < 2) {
      throw InsufficientData("cross-hashtag evaluation needs at least two hashtags");
    }
    for (std::size_t f = 0; f < held.size(); ++f) {
      std::vector<std::size_t> rest, test;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        (rows[i].post->hashtag == held[f] ? test : rest).push_back(i);
      }
      Rng rng(derive_seed(protocol.seed, f));
      rng.shuffle(std::span(rest));
      const double ratio =
          protocol.train_fraction / (protocol.train_fraction + protocol.dev_fraction);
      const auto n_train =
          static_cast<std::size_t>(std::floor(ratio * static_cast<double>(rest.size())));
      report.folds.push_back(run_fold(take(rest, 0, n_train),
                                      take(rest, n_train, rest.size()),
                                      take(test, 0, test.size()), protocol, config, held[f]));
    }
  }
  for (const auto& f : report.folds) {
    report.mean_pearson += f.metrics.pearson;
    report.mean_mse += f.metrics.mse;
  }
  report.mean_pearson /= static_cast<double>(report.folds.size());
  report.mean_mse /= static_cast<double>(report.folds.size());
  return report;
}

}  // namespace cscale
