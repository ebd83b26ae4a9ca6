#include "kdm/projection_net.hpp"

#include "kdm/random.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace kdm {

// ---------------------------------------------------------------------------
// ProjectionNetwork

Index NetShape::param_count() const {
  return input_dim * hidden + hidden + rank * hidden * samples + rank * samples;
}

ProjectionNetwork::ProjectionNetwork(const NetShape& shape) : shape_(shape) {
  if (shape.input_dim <= 0 || shape.hidden <= 0 || shape.rank <= 0 || shape.samples <= 0) {
    throw InputError("projection network: all dimensions must be positive");
  }
  params_ = Vector::Zero(shape.param_count());
}

Index ProjectionNetwork::off_b1() const { return shape_.input_dim * shape_.hidden; }
Index ProjectionNetwork::off_w2() const { return off_b1() + shape_.hidden; }
Index ProjectionNetwork::off_b2() const {
  return off_w2() + shape_.rank * shape_.hidden * shape_.samples;
}

ProjectionNetwork::MatMap ProjectionNetwork::w1() {
  return {params_.data(), shape_.input_dim, shape_.hidden};
}
ProjectionNetwork::ConstMatMap ProjectionNetwork::w1() const {
  return {params_.data(), shape_.input_dim, shape_.hidden};
}
ProjectionNetwork::VecMap ProjectionNetwork::b1() {
  return {params_.data() + off_b1(), shape_.hidden};
}
ProjectionNetwork::ConstVecMap ProjectionNetwork::b1() const {
  return {params_.data() + off_b1(), shape_.hidden};
}
ProjectionNetwork::MatMap ProjectionNetwork::w2_packed() {
  return {params_.data() + off_w2(), shape_.rank * shape_.hidden, shape_.samples};
}
ProjectionNetwork::ConstMatMap ProjectionNetwork::w2_packed() const {
  return {params_.data() + off_w2(), shape_.rank * shape_.hidden, shape_.samples};
}
ProjectionNetwork::VecMap ProjectionNetwork::b2() {
  return {params_.data() + off_b2(), shape_.output_size()};
}
ProjectionNetwork::ConstVecMap ProjectionNetwork::b2() const {
  return {params_.data() + off_b2(), shape_.output_size()};
}

double ProjectionNetwork::w2(Index m, Index j) const {
  const Index r = shape_.rank;
  return params_(off_w2() + (j % r) + r * m + r * shape_.hidden * (j / r));
}

double& ProjectionNetwork::w2(Index m, Index j) {
  const Index r = shape_.rank;
  return params_(off_w2() + (j % r) + r * m + r * shape_.hidden * (j / r));
}

void LossConfig::validate() const {
  if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg)) {
    throw InputError("loss: lambda_reg must be positive");
  }
  if (iterations < 1) {
    throw InputError("loss: iterations must be at least 1");
  }
}

AdamState::AdamState(Index param_count, double lr)
    : learning_rate(lr), m(Vector::Zero(param_count)), v(Vector::Zero(param_count)) {}

// ---------------------------------------------------------------------------
// forward

Matrix forward(const ProjectionNetwork& net, std::span<const double> x) {
  const NetShape& s = net.shape();
  if (static_cast<Index>(x.size()) != s.input_dim) {
    throw InputError("forward: input has dimension " + std::to_string(x.size()) +
                     ", network expects " + std::to_string(s.input_dim));
  }
  const Eigen::Map<const Vector> xv(x.data(), s.input_dim);
  const Vector a = (net.w1().transpose() * xv + net.b1()).cwiseMax(0.0);
  Matrix W(s.samples, s.rank);
  for (Index k = 0; k < s.samples; ++k) {
    for (Index c = 0; c < s.rank; ++c) {
      const Index j = k * s.rank + c;
      double o = net.b2()(j);
      for (Index m = 0; m < s.hidden; ++m) o += net.w2(m, j) * a(m);
      W(k, c) = o;
    }
  }
  return W;
}

Vector flatten_projection(const Matrix& W) {
  Vector out(W.size());
  for (Index k = 0; k < W.rows(); ++k) {
    for (Index c = 0; c < W.cols(); ++c) out(k * W.cols() + c) = W(k, c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// loss / gradient

namespace {

void check_loss_inputs(const ProjectionNetwork& net, const EmbeddingSet& emb,
                       const LossConfig& cfg, const Matrix& x) {
  cfg.validate();
  const NetShape& s = net.shape();
  if (emb.coeffs.rows() != s.samples || emb.coeffs.cols() != s.samples) {
    throw InputError("loss: embedding coefficients are " + std::to_string(emb.coeffs.rows()) +
                     "x" + std::to_string(emb.coeffs.cols()) + ", network expects n=" +
                     std::to_string(s.samples));
  }
  if (x.rows() != s.samples || x.cols() != s.input_dim) {
    throw InputError("loss: sample matrix is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", expected " + std::to_string(s.samples) +
                     "x" + std::to_string(s.input_dim));
  }
  if (!net.params().allFinite()) {
    throw NumericError("loss: network parameters are not finite");
  }
}

double pair_scale(const LossConfig& cfg, Index n) {
  if (!cfg.normalize_pairs || n < 2) return 1.0;
  return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Everything the backward pass reuses from the forward pass.
struct ForwardState {
  Matrix Z;     // h x n pre-activations
  Matrix A;     // h x n activations
  Matrix Y;     // (r h) x n, block m = W2_m^T B (per-unit projections)
  Matrix P;     // r x n projected embeddings p_i
  Matrix G;     // h x h, W2 W2^T
  Vector u;     // h, W2 b2
  Vector q;     // n, |W(x_i)|_F^2
  double pair = 0.0;
  double reg = 0.0;
  bool degenerate = false;
};

ForwardState run_forward(const ProjectionNetwork& net, const EmbeddingSet& emb,
                         const LossConfig& cfg, const Matrix& x) {
  const NetShape& s = net.shape();
  const Index n = s.samples;
  const Index r = s.rank;
  const Index h = s.hidden;
  const Matrix& B = emb.coeffs;
  const auto V = net.w2_packed();
  const Eigen::Map<const Matrix> B2(net.b2().data(), r, n);

  ForwardState f;
  f.Z = (net.w1().transpose() * x.transpose()).colwise() + net.b1();
  f.A = f.Z.cwiseMax(0.0);

  f.Y.resize(r * h, n);
#pragma omp parallel for schedule(static)
  for (Index m = 0; m < h; ++m) {
    f.Y.middleRows(m * r, r).noalias() = V.middleRows(m * r, r) * B;
  }

  f.P = B2 * B;
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < h; ++m) {
      const double a = f.A(m, i);
      if (a != 0.0) f.P.col(i) += a * f.Y.col(i).segment(m * r, r);
    }
  }

  // |o_i|^2 = a_i^T G a_i + 2 a_i^T u + |b2|^2, o_i = W2^T a_i + b2.
  f.G = Matrix::Zero(h, h);
  f.u = Vector::Zero(h);
  for (Index k = 0; k < n; ++k) {
    const Eigen::Map<const Matrix> Vk(V.col(k).data(), r, h);
    f.G.noalias() += Vk.transpose() * Vk;
    f.u.noalias() += Vk.transpose() * B2.col(k);
  }
  const double b2sq = net.b2().squaredNorm();
  f.q.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto a = f.A.col(i);
    f.q(i) = std::max(0.0, a.dot(f.G * a) + 2.0 * a.dot(f.u) + b2sq);
  }

  const Vector pbar = f.P.rowwise().mean();
  f.pair = pair_scale(cfg, n) * static_cast<double>(n) *
           (f.P.colwise() - pbar).squaredNorm();
  f.degenerate = (f.q.array() <= 0.0).any();
  f.reg = f.degenerate ? std::numeric_limits<double>::infinity()
                       : cfg.lambda_reg / static_cast<double>(n) * f.q.cwiseInverse().sum();
  return f;
}

}  // namespace

double loss(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
            const LossConfig& cfg, const Matrix& x_samples) {
  check_loss_inputs(net, embeddings, cfg, x_samples);
  const ForwardState f = run_forward(net, embeddings, cfg, x_samples);
  return f.pair + f.reg;
}

LossEval loss_grad(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
                   const LossConfig& cfg, const Matrix& x_samples) {
  check_loss_inputs(net, embeddings, cfg, x_samples);
  const NetShape& s = net.shape();
  const Index n = s.samples;
  const Index r = s.rank;
  const Index h = s.hidden;
  const Matrix& B = embeddings.coeffs;
  const auto V = net.w2_packed();
  const Eigen::Map<const Matrix> B2(net.b2().data(), r, n);

  const ForwardState f = run_forward(net, embeddings, cfg, x_samples);
  LossEval out{f.pair + f.reg, f.pair, ProjectionNetwork(s)};
  if (f.degenerate) return out;

  // g_i = dL/dp_i = 2 n (p_i - pbar), times the optional pair normalisation.
  const Vector pbar = f.P.rowwise().mean();
  const Matrix Gp = (2.0 * static_cast<double>(n) * pair_scale(cfg, n)) *
                    (f.P.colwise() - pbar);
  // Regularizer: dL/do_i = s_i o_i with s_i = -2 (lambda_reg / n) / q_i^2.
  const Vector sreg =
      (-2.0 * cfg.lambda_reg / static_cast<double>(n)) * f.q.array().square().inverse().matrix();
  const Matrix S2 = f.A * sreg.asDiagonal() * f.A.transpose();
  const Vector t = f.A * sreg;

  auto dV = out.grad.w2_packed();
#pragma omp parallel for schedule(static)
  for (Index m = 0; m < h; ++m) {
    const Matrix dYm = Gp * f.A.row(m).asDiagonal();
    auto block = dV.middleRows(m * r, r);
    block.noalias() = dYm * B.transpose();
    for (Index mp = 0; mp < h; ++mp) {
      block += S2(mp, m) * V.middleRows(mp * r, r);
    }
    block += t(m) * B2;
  }

  Eigen::Map<Matrix> dB2(out.grad.b2().data(), r, n);
  dB2.noalias() = Gp * B.transpose();
  for (Index m = 0; m < h; ++m) dB2 += t(m) * V.middleRows(m * r, r);
  dB2 += sreg.sum() * B2;

  Matrix dA(h, n);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < h; ++m) {
      dA(m, i) = f.Y.col(i).segment(m * r, r).dot(Gp.col(i));
    }
    dA.col(i) += sreg(i) * (f.G * f.A.col(i) + f.u);
  }
  const Matrix dZ = dA.cwiseProduct((f.Z.array() > 0.0).cast<double>().matrix());
  out.grad.w1().noalias() = x_samples.transpose() * dZ.transpose();
  out.grad.b1() = dZ.rowwise().sum();
  return out;
}

LossEval loss_grad_serial(const ProjectionNetwork& net, const EmbeddingSet& embeddings,
                          const LossConfig& cfg, const Matrix& x_samples) {
  check_loss_inputs(net, embeddings, cfg, x_samples);
  const NetShape& s = net.shape();
  const Index n = s.samples;
  const Index r = s.rank;
  const Index h = s.hidden;
  const Index d = s.input_dim;
  const Index len = s.output_size();
  const Matrix& B = embeddings.coeffs;

  Matrix Z(h, n), A(h, n), O(len, n), P(r, n);
  Vector q(n);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < h; ++m) {
      double z = net.b1()(m);
      for (Index k = 0; k < d; ++k) z += net.w1()(k, m) * x_samples(i, k);
      Z(m, i) = z;
      A(m, i) = z > 0.0 ? z : 0.0;
    }
    double norm = 0.0;
    for (Index j = 0; j < len; ++j) {
      double o = net.b2()(j);
      for (Index m = 0; m < h; ++m) o += net.w2(m, j) * A(m, i);
      O(j, i) = o;
      norm += o * o;
    }
    q(i) = norm;
    for (Index c = 0; c < r; ++c) {
      double p = 0.0;
      for (Index k = 0; k < n; ++k) p += O(k * r + c, i) * B(k, i);
      P(c, i) = p;
    }
  }

  const double scale = pair_scale(cfg, n);
  double pair = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) pair += (P.col(i) - P.col(j)).squaredNorm();
  }
  pair *= scale;

  LossEval out{0.0, pair, ProjectionNetwork(s)};
  bool degenerate = false;
  double reg = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (q(i) <= 0.0) degenerate = true;
    reg += 1.0 / q(i);
  }
  if (degenerate) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double c_reg = cfg.lambda_reg / static_cast<double>(n);
  out.value = pair + c_reg * reg;

  ProjectionNetwork& g = out.grad;
  for (Index i = 0; i < n; ++i) {
    Vector gi = Vector::Zero(r);
    for (Index j = 0; j < n; ++j) gi += P.col(i) - P.col(j);
    gi *= 2.0 * scale;
    const double si = -2.0 * c_reg / (q(i) * q(i));

    Vector dO(len);
    for (Index k = 0; k < n; ++k) {
      for (Index c = 0; c < r; ++c) dO(k * r + c) = B(k, i) * gi(c) + si * O(k * r + c, i);
    }
    for (Index j = 0; j < len; ++j) {
      g.b2()(j) += dO(j);
      for (Index m = 0; m < h; ++m) g.w2(m, j) += A(m, i) * dO(j);
    }
    for (Index m = 0; m < h; ++m) {
      if (Z(m, i) <= 0.0) continue;
      double da = 0.0;
      for (Index j = 0; j < len; ++j) da += net.w2(m, j) * dO(j);
      g.b1()(m) += da;
      for (Index k = 0; k < d; ++k) g.w1()(k, m) += x_samples(i, k) * da;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// optimisation

void adam_step(ProjectionNetwork& net, const ProjectionNetwork& grad, AdamState& state) {
  const Index p = net.params().size();
  if (grad.params().size() != p) {
    throw InputError("adam_step: gradient has " + std::to_string(grad.params().size()) +
                     " entries, network has " + std::to_string(p));
  }
  if (state.m.size() == 0 && state.v.size() == 0 && state.step == 0) {
    state.m = Vector::Zero(p);
    state.v = Vector::Zero(p);
  }
  if (state.m.size() != p || state.v.size() != p) {
    throw InputError("adam_step: optimizer state does not match the network");
  }
  state.step += 1;
  const auto& g = grad.params().array();
  state.m = state.beta1 * state.m.array() + (1.0 - state.beta1) * g;
  state.v = state.beta2 * state.v.array() + (1.0 - state.beta2) * g.square();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  net.params().array() -= state.learning_rate * (state.m.array() / c1) /
                          ((state.v.array() / c2).sqrt() + state.epsilon);
}

ProjectionNetwork init_network(Index input_dim, Index hidden, Index rank, Index samples,
                               std::uint64_t seed) {
  ProjectionNetwork net(NetShape{input_dim, hidden, rank, samples});
  Rng rng(seed);
  // Each layer is U(-1/sqrt(fan_in), 1/sqrt(fan_in)), weights and biases
  // alike. b2 must stay zero-mean: a positive offset makes the first steps
  // chase the total mass of each embedding, which flips the decision on
  // most of the synthetic mechanisms.
  const double lim1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : net.w1().reshaped()) w = rng.uniform(-lim1, lim1);
  for (double& b : net.b1()) b = rng.uniform(-lim1, lim1);
  const double lim2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : net.w2_packed().reshaped()) w = rng.uniform(-lim2, lim2);
  for (double& b : net.b2()) b = rng.uniform(-lim2, lim2);
  return net;
}

}  // namespace kdm
