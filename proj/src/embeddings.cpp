#include "kdm/embeddings.hpp"

#include "kdm/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace kdm {

namespace {

void check_square_pair(const Matrix& Kx, const Matrix& Ky, const char* what) {
  if (Kx.rows() != Kx.cols() || Ky.rows() != Ky.cols()) {
    throw InputError(std::string(what) + ": gram matrices must be square");
  }
  if (Kx.rows() != Ky.rows()) {
    throw InputError(std::string(what) + ": K_x is " + std::to_string(Kx.rows()) +
                     "x" + std::to_string(Kx.rows()) + " but K_y is " +
                     std::to_string(Ky.rows()) + "x" + std::to_string(Ky.rows()));
  }
  if (Kx.rows() == 0) {
    throw InputError(std::string(what) + ": empty gram matrices");
  }
}

}  // namespace

void ReweightConfig::validate() const {
  if (!(weight_min > 0.0) || !(weight_max >= weight_min)) {
    throw InputError("reweight: need 0 < weight_min <= weight_max");
  }
  if (kde_bandwidth && !(*kde_bandwidth > 0.0)) {
    throw InputError("reweight: kde bandwidth must be positive");
  }
}

EmbeddingSet conditional_embeddings(const Matrix& Kx, const Matrix& Ky, double lambda) {
  check_square_pair(Kx, Ky, "conditional_embeddings");
  EmbeddingSet set;
  set.alphas = regularized_solve(Kx, lambda, Kx, "K_x");
  set.coeffs = Ky * set.alphas;
  return set;
}

double embedding_norm_sq(const EmbeddingSet& set, const Matrix& Ky, Index i) {
  if (i < 0 || i >= set.size()) {
    throw InputError("embedding_norm_sq: index " + std::to_string(i) +
                     " out of range [0, " + std::to_string(set.size()) + ")");
  }
  if (Ky.rows() != set.alphas.rows() || Ky.cols() != set.alphas.rows()) {
    throw InputError("embedding_norm_sq: K_y size does not match the embedding set");
  }
  const auto a = set.alphas.col(i);
  const double v = a.dot(Ky * a);
  return v > 0.0 ? v : 0.0;
}

Vector importance_weights(const Matrix& x, const ReweightConfig& cfg) {
  cfg.validate();
  const Index n = x.rows();
  const Index d = x.cols();
  if (n < 2 || d == 0) {
    throw InputError("importance_weights: need at least two samples");
  }

  Vector mean = x.colwise().mean().transpose();
  Vector var(d);
  for (Index k = 0; k < d; ++k) {
    var(k) = (x.col(k).array() - mean(k)).square().mean();
    if (!(var(k) > 0.0)) {
      throw InputError("importance_weights: dimension " + std::to_string(k) +
                       " has zero variance");
    }
  }

  Vector bw(d);
  const double shrink = std::pow(static_cast<double>(n), -0.2);
  for (Index k = 0; k < d; ++k) {
    bw(k) = cfg.kde_bandwidth ? *cfg.kde_bandwidth
                              : median_heuristic(x.col(k)) * shrink;
  }

  const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double log_norm = -std::log(static_cast<double>(n));
  for (Index k = 0; k < d; ++k) log_norm -= std::log(bw(k)) + log_sqrt_2pi;

  Vector w(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    // log p_hat(x_i) via log-sum-exp over the KDE components.
    Vector terms(n);
    for (Index j = 0; j < n; ++j) {
      double e = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double z = (x(i, k) - x(j, k)) / bw(k);
        e -= 0.5 * z * z;
      }
      terms(j) = e;
    }
    const double top = terms.maxCoeff();
    const double log_p = log_norm + top + std::log((terms.array() - top).exp().sum());

    double log_u = 0.0;
    for (Index k = 0; k < d; ++k) {
      const double sd = std::sqrt(var(k));
      const double dev = x(i, k) - mean(k);
      if (cfg.reference == ReferenceDensity::Gaussian) {
        log_u += -0.5 * dev * dev / var(k) - std::log(sd) - log_sqrt_2pi;
      } else {
        const double b = sd / std::numbers::sqrt2;
        log_u += -std::abs(dev) / b - std::log(2.0 * b);
      }
    }
    w(i) = std::clamp(std::exp(log_u - log_p), cfg.weight_min, cfg.weight_max);
  }
  return w;
}

EmbeddingSet reweighted_conditional_embeddings(const Matrix& Kx, const Matrix& Ky,
                                               double lambda, const Vector& weights) {
  check_square_pair(Kx, Ky, "reweighted_conditional_embeddings");
  const Index n = Kx.rows();
  if (weights.size() != n) {
    throw InputError("reweighted_conditional_embeddings: expected " + std::to_string(n) +
                     " weights, got " + std::to_string(weights.size()));
  }
  if (!weights.allFinite() || (weights.array() <= 0.0).any()) {
    throw InputError("reweighted_conditional_embeddings: weights must be finite and positive");
  }

  const Vector s = weights.cwiseSqrt();
  // H K_x: subtract column means; H K_x H: also subtract row means.
  const Matrix HK = Kx.rowwise() - Kx.colwise().mean();
  const Matrix HKH = HK.colwise() - HK.rowwise().mean();
  const Matrix inner = s.asDiagonal() * HKH * s.asDiagonal();
  const Matrix rhs = s.asDiagonal() * HK;
  const Matrix solved = regularized_solve(inner, lambda, rhs, "R^1/2 H K_x H R^1/2");
  const Matrix Rs = s.asDiagonal() * solved;

  EmbeddingSet set;
  set.alphas = Rs.rowwise() - Rs.colwise().mean();
  set.coeffs = Ky * set.alphas;
  if (!set.alphas.allFinite()) {
    throw NumericError("reweighted_conditional_embeddings: non-finite coefficients");
  }
  return set;
}

std::array<double, 3> quadratic_featuremap_embedding(std::span<const double> samples) {
  if (samples.empty()) {
    throw InputError("quadratic_featuremap_embedding: no samples");
  }
  double m1 = 0.0;
  double m2 = 0.0;
  for (double s : samples) {
    m1 += s;
    m2 += s * s;
  }
  const double n = static_cast<double>(samples.size());
  return {1.0, m1 / n, m2 / n};
}

}  // namespace kdm
