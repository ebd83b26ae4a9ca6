#pragma once

#include "kdm/types.hpp"

#include <array>
#include <optional>
#include <span>

namespace kdm {

/// Empirical conditional mean embeddings of the effect given each training
/// input. Column i of `alphas` holds the ridge coefficients of the embedding
/// at x_i over the effect features; `coeffs` = K_y * alphas.
struct EmbeddingSet {
  Matrix coeffs;
  Matrix alphas;
  Direction direction_label = Direction::XtoY;

  Index size() const { return alphas.cols(); }
};

enum class ReferenceDensity { Gaussian, Laplace };

struct ReweightConfig {
  ReferenceDensity reference = ReferenceDensity::Gaussian;
  /// KDE bandwidth; unset means median heuristic per dimension * n^(-1/5).
  std::optional<double> kde_bandwidth;
  double weight_min = 1e-3;
  double weight_max = 1e3;

  void validate() const;
};

/// alphas = (K_x + lambda I)^{-1} K_x, coeffs = K_y alphas.
EmbeddingSet conditional_embeddings(const Matrix& Kx, const Matrix& Ky, double lambda);

/// Squared RKHS norm alpha_i^T K_y alpha_i of the embedding at x_i,
/// clamped at zero.
double embedding_norm_sq(const EmbeddingSet& set, const Matrix& Ky, Index i);

/// Importance weights u(x_i) / p_hat(x_i), clipped to
/// [weight_min, weight_max]. p_hat is a product-Gaussian KDE over the
/// samples; u is the reference density moment-matched per dimension.
Vector importance_weights(const Matrix& x, const ReweightConfig& cfg);

/// Re-weighted, input-centred embeddings:
///   alphas = H R^{1/2} (R^{1/2} H K_x H R^{1/2} + lambda I)^{-1} R^{1/2} H K_x
/// with H the centring matrix and R = diag(weights).
EmbeddingSet reweighted_conditional_embeddings(const Matrix& Kx, const Matrix& Ky,
                                               double lambda, const Vector& weights);

/// Mean of the explicit quadratic feature map [1, s, s^2] over `samples`.
/// Used as a closed-form check of how offsets act on embeddings.
std::array<double, 3> quadratic_featuremap_embedding(std::span<const double> samples);

}  // namespace kdm
