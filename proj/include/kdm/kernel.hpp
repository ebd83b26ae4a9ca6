#pragma once

#include "kdm/types.hpp"

#include <span>
#include <string_view>

namespace kdm {

enum class KernelFamily { Rbf, Rq, ProductRbfRq };

struct KernelConfig {
  KernelFamily family = KernelFamily::ProductRbfRq;
  double length_scale = 1.0;  // RBF length-scale, data units
  double amplitude = 1.0;     // RBF signal amplitude sigma_f
  double reg = 1e-3;          // ridge term lambda in (K + lambda I)

  /// Throws InputError unless length_scale > 0, amplitude > 0, reg >= 0.
  void validate() const;
};

// Single evaluations. All of them throw InputError on a dimension mismatch.
double rbf_eval(std::span<const double> x, std::span<const double> y,
                double length_scale, double amplitude);
double rq_eval(std::span<const double> x, std::span<const double> y);
double product_eval(std::span<const double> x, std::span<const double> y,
                    const KernelConfig& config);
double kernel_eval(std::span<const double> x, std::span<const double> y,
                   const KernelConfig& config);

/// Kernel value as a function of the squared Euclidean distance. Every
/// evaluation path (single, serial gram, parallel gram) funnels through this.
double kernel_from_sqdist(double sqdist, const KernelConfig& config);

/// Gram matrix over the rows of `points` (n x d). Rows are distributed over
/// OpenMP threads; each entry is computed independently, so the result is
/// bitwise identical to gram_serial for any thread count.
Matrix gram(const Matrix& points, const KernelConfig& config);

/// Single-threaded reference for gram().
Matrix gram_serial(const Matrix& points, const KernelConfig& config);

/// Median of the n(n-1)/2 pairwise Euclidean distances between rows.
/// If more than half the distances are zero (heavily tied data) the median
/// of the nonzero distances is returned instead. Throws InputError when
/// fewer than two rows are given or all rows coincide.
double median_heuristic(const Matrix& points);

/// (K + lambda I)^{-1} B through a Cholesky factorization. Throws
/// NumericError mentioning `name` if K + lambda I is not numerically
/// positive definite.
Matrix regularized_solve(const Matrix& K, double lambda, const Matrix& B,
                         std::string_view name = "K");

}  // namespace kdm
