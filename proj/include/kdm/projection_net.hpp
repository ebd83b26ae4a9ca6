#pragma once

#include "kdm/embeddings.hpp"
#include "kdm/types.hpp"

#include <cstdint>
#include <span>

namespace kdm {

struct NetShape {
  Index input_dim = 1;  // d
  Index hidden = 20;    // h
  Index rank = 100;     // r
  Index samples = 1;    // n; the output is an n x r projection matrix

  Index output_size() const { return rank * samples; }
  Index param_count() const;
  bool operator==(const NetShape&) const = default;
};

/// One-hidden-layer network x -> W(x), ReLU hidden layer, linear output
/// reshaped row-major into an n x r matrix: W(x)(k, c) = out[k * r + c].
///
/// All parameters live in one flat vector so the optimizer and the
/// finite-difference checks can treat them uniformly. Layout:
///   W1  d x h, column-major
///   b1  h
///   W2  logical h x (r n); stored as an (r h) x n column-major block with
///       element (m, k r + c) at offset c + r m + r h k
///   b2  r n, index k r + c
/// The W2 storage order turns the per-sample projections into a single
/// (r h) x n times n x n product.
class ProjectionNetwork {
 public:
  using MatMap = Eigen::Map<Matrix>;
  using ConstMatMap = Eigen::Map<const Matrix>;
  using VecMap = Eigen::Map<Vector>;
  using ConstVecMap = Eigen::Map<const Vector>;

  ProjectionNetwork() = default;
  explicit ProjectionNetwork(const NetShape& shape);

  const NetShape& shape() const { return shape_; }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  MatMap w1();
  ConstMatMap w1() const;
  VecMap b1();
  ConstVecMap b1() const;
  /// Packed W2 block, (r h) x n.
  MatMap w2_packed();
  ConstMatMap w2_packed() const;
  VecMap b2();
  ConstVecMap b2() const;

  /// Logical W2 entry (m, j), m < h, j < r n.
  double w2(Index m, Index j) const;
  double& w2(Index m, Index j);

  void set_zero() { params_.setZero(); }

 private:
  Index off_b1() const;
  Index off_w2() const;
  Index off_b2() const;

  NetShape shape_;
  Vector params_;
};

struct LossConfig {
  double lambda_reg = 1e-3;
  int iterations = 100;
  /// Scale the pair sum by 2 / (n (n - 1)).
  bool normalize_pairs = false;

  void validate() const;
};

/// Adam with bias correction. Moment vectors are shaped like the flat
/// parameter vector of the network they optimise.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vector m;
  Vector v;
  long long step = 0;

  AdamState() = default;
  explicit AdamState(Index param_count, double lr = 1e-3);
};

struct LossEval {
  double value = 0.0;      // pair term + regularizer; +inf if some W(x_i) = 0
  double pair_term = 0.0;  // unregularized (possibly normalized) pair sum
  ProjectionNetwork grad;  // zero when value is +inf
};

/// W(x) for one input (n x r).
Matrix forward(const ProjectionNetwork& net, std::span<const double> x);

/// Row-major flatten of an n x r projection matrix; inverse of the reshape
/// performed by forward().
Vector flatten_projection(const Matrix& W);

/// Sum over i > j of |W(x_i)^T beta_i - W(x_j)^T beta_j|^2 plus
/// (lambda_reg / n) sum_i 1 / |W(x_i)|_F^2, with beta_i the i-th column of
/// embeddings.coeffs and x_i the i-th row of x_samples.
double loss(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
            const LossConfig& cfg, const Matrix& x_samples);

/// Loss and its exact gradient. Hidden units are spread over OpenMP
/// threads with a fixed per-unit summation order, so the result does not
/// depend on the thread count.
LossEval loss_grad(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
                   const LossConfig& cfg, const Matrix& x_samples);

/// Straight-loop, single-threaded reference for loss_grad(). Materialises
/// every W(x_i); O(n^2 r h) memory-light loops. Kept for testing and
/// benchmarking.
LossEval loss_grad_serial(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
                          const LossConfig& cfg, const Matrix& x_samples);

/// One bias-corrected Adam update of `net` in place.
void adam_step(ProjectionNetwork& net, const ProjectionNetwork& grad, AdamState& state);

/// Every weight and bias of a layer uniform in +-1/sqrt(fan_in) (the usual
/// framework default). b2 is nonzero almost surely, so no W(x) vanishes at
/// the start. Deterministic in `seed`.
ProjectionNetwork init_network(Index input_dim, Index hidden, Index rank, Index samples,
                               std::uint64_t seed);

}  // namespace kdm
