#include "kdm/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace kdm {

namespace {

// Eigencomponents of K_y below this fraction of the largest one are
// treated as outside its range in the KIIM reduction.
constexpr double kKiimRangeTol = 1e-10;

bool all_rows_equal(const Matrix& m) {
  for (Index i = 1; i < m.rows(); ++i) {
    if (m.row(i) != m.row(0)) return false;
  }
  return true;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::KiimHt:
      return "KIIM-HT";
    case Method::Kcdc:
      return "KCDC";
    case Method::Kiim:
      return "KIIM";
    case Method::Igci:
      return "IGCI";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  const std::string u = upper(s);
  if (u == "KIIM-HT") return Method::KiimHt;
  if (u == "KCDC") return Method::Kcdc;
  if (u == "KIIM") return Method::Kiim;
  if (u == "IGCI") return Method::Igci;
  throw InputError("unknown method '" + std::string(s) + "'");
}

std::string ScoreConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "kernel=" << static_cast<int>(kernel.family) << ";ell=" << kernel.length_scale
     << ";median_ell=" << median_length_scale << ";amp=" << kernel.amplitude
     << ";lambda=" << kernel.reg << ";lambda_reg=" << loss.lambda_reg
     << ";iters=" << loss.iterations << ";normalize_pairs=" << loss.normalize_pairs
     << ";hidden=" << hidden << ";rank=" << rank << ";lr=" << learning_rate << ";reweight=";
  if (reweight) {
    os << (reweight->reference == ReferenceDensity::Gaussian ? "gaussian" : "laplace") << "/bw=";
    if (reweight->kde_bandwidth) {
      os << *reweight->kde_bandwidth;
    } else {
      os << "median";
    }
    os << "/clip=" << reweight->weight_min << ":" << reweight->weight_max;
  } else {
    os << "none";
  }
  os << ";kiim_rank=";
  if (kiim_rank) {
    os << *kiim_rank;
  } else {
    os << "n";
  }
  os << ";igci=" << (igci_reference == IgciReference::Uniform ? "uniform" : "gaussian")
     << ";kcdc_n_lambda=" << kcdc_n_lambda << ";seed=" << seed;
  return os.str();
}

void check_pair(const Matrix& cause, const Matrix& effect) {
  if (cause.rows() != effect.rows()) {
    throw InputError("cause has " + std::to_string(cause.rows()) + " samples but effect has " +
                     std::to_string(effect.rows()));
  }
  if (cause.rows() < 2) {
    throw InputError("need at least two samples");
  }
  if (cause.cols() == 0 || effect.cols() == 0) {
    throw InputError("zero-dimensional variable");
  }
  if (!cause.allFinite() || !effect.allFinite()) {
    throw InputError("samples contain non-finite values");
  }
  if (all_rows_equal(cause)) throw ScorerError("cause variable is constant");
  if (all_rows_equal(effect)) throw ScorerError("effect variable is constant");
}

DirectionalGrams directional_grams(const Matrix& cause, const Matrix& effect,
                                   const ScoreConfig& cfg) {
  DirectionalGrams g;
  KernelConfig kx = cfg.kernel;
  KernelConfig ky = cfg.kernel;
  if (cfg.median_length_scale) {
    kx.length_scale = median_heuristic(cause);
    ky.length_scale = median_heuristic(effect);
  }
  g.length_scale_x = kx.length_scale;
  g.length_scale_y = ky.length_scale;
  g.Kx = gram(cause, kx);
  g.Ky = gram(effect, ky);
  return g;
}

EmbeddingSet directional_embeddings(const Matrix& cause, const DirectionalGrams& grams,
                                    const ScoreConfig& cfg) {
  if (cfg.reweight) {
    const Vector w = importance_weights(cause, *cfg.reweight);
    return reweighted_conditional_embeddings(grams.Kx, grams.Ky, cfg.kernel.reg, w);
  }
  return conditional_embeddings(grams.Kx, grams.Ky, cfg.kernel.reg);
}

// ---------------------------------------------------------------------------
// KIIM-HT

ScoreResult kiim_ht_score_from_embeddings(const Matrix& cause, const EmbeddingSet& emb,
                                          const ScoreConfig& cfg) {
  cfg.loss.validate();
  if (cfg.hidden < 1 || cfg.rank < 1) {
    throw InputError("kiim-ht: hidden units and rank must be positive");
  }
  const Index n = cause.rows();
  ProjectionNetwork net = init_network(cause.cols(), cfg.hidden, cfg.rank, n, cfg.seed);
  AdamState adam(net.params().size(), cfg.learning_rate);

  ScoreResult res;
  res.value = std::numeric_limits<double>::infinity();
  res.iterations_run = cfg.loss.iterations;
  res.trace.reserve(static_cast<std::size_t>(cfg.loss.iterations) + 1);
  for (int it = 0; it <= cfg.loss.iterations; ++it) {
    LossEval ev = loss_grad(net, emb, cfg.loss, cause);
    res.trace.push_back(ev.value);
    if (std::isfinite(ev.value) && ev.value < res.value) {
      res.value = ev.value;
      res.best_iteration = it;
      res.pair_term_at_best = ev.pair_term;
    }
    if (it < cfg.loss.iterations) adam_step(net, ev.grad, adam);
  }
  if (!std::isfinite(res.value)) {
    throw NumericError("kiim-ht: projection vanished at every iteration");
  }
  return res;
}

ScoreResult kiim_ht_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg) {
  check_pair(cause, effect);
  const DirectionalGrams g = directional_grams(cause, effect, cfg);
  const EmbeddingSet emb = directional_embeddings(cause, g, cfg);
  return kiim_ht_score_from_embeddings(cause, emb, cfg);
}

// ---------------------------------------------------------------------------
// KCDC

double kcdc_from_embeddings(const EmbeddingSet& emb, const Matrix& Ky) {
  const Index n = emb.size();
  Vector norms(n);
  for (Index i = 0; i < n; ++i) norms(i) = std::sqrt(embedding_norm_sq(emb, Ky, i));
  return (norms.array() - norms.mean()).square().mean();
}

ScoreResult kcdc_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg) {
  check_pair(cause, effect);
  const DirectionalGrams g = directional_grams(cause, effect, cfg);
  const double lambda =
      cfg.kcdc_n_lambda ? static_cast<double>(cause.rows()) * cfg.kernel.reg : cfg.kernel.reg;
  const EmbeddingSet emb = conditional_embeddings(g.Kx, g.Ky, lambda);
  ScoreResult res;
  res.value = kcdc_from_embeddings(emb, g.Ky);
  return res;
}

// ---------------------------------------------------------------------------
// KIIM

double kiim_from_embeddings(const EmbeddingSet& emb, const Matrix& Ky, Index rank) {
  const Index n = emb.size();
  if (rank < 1 || rank > n) {
    throw InputError("kiim: rank " + std::to_string(rank) + " outside [1, " +
                     std::to_string(n) + "]");
  }
  if (Ky.rows() != n || Ky.cols() != n) {
    throw InputError("kiim: K_y size does not match the embedding set");
  }
  // With K_y = U L U^T and B = U_+ L_+^{-1/2} Q, the constraint B^T K_y B = I
  // becomes Q^T Q = I and the objective tr(B^T K_y C K_y B) becomes
  // tr(Q^T L_+^{1/2} U_+^T C U_+ L_+^{1/2} Q): an ordinary symmetric problem
  // on the range of K_y.
  Eigen::SelfAdjointEigenSolver<Matrix> ky_eig(Ky);
  if (ky_eig.info() != Eigen::Success) {
    throw NumericError("kiim: eigendecomposition of K_y failed");
  }
  const Vector& lam = ky_eig.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0)) throw NumericError("kiim: K_y has no positive eigenvalues");
  std::vector<Index> keep;
  for (Index j = 0; j < n; ++j) {
    if (lam(j) > kKiimRangeTol * top) keep.push_back(j);
  }
  const Index k = static_cast<Index>(keep.size());

  const Matrix centred = emb.alphas.colwise() - emb.alphas.rowwise().mean();
  Matrix M(k, n);  // L_+^{1/2} U_+^T (alpha_i - alpha_bar)
  for (Index a = 0; a < k; ++a) {
    const Index j = keep[static_cast<std::size_t>(a)];
    M.row(a) = std::sqrt(lam(j)) * (ky_eig.eigenvectors().col(j).transpose() * centred);
  }
  const Matrix S = M * M.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> s_eig(S, Eigen::EigenvaluesOnly);
  if (s_eig.info() != Eigen::Success) {
    throw NumericError("kiim: eigendecomposition of the whitened scatter failed");
  }
  const Index take = std::min(rank, k);
  const double sum = s_eig.eigenvalues().head(take).sum();
  return sum > 0.0 ? sum : 0.0;
}

ScoreResult kiim_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg) {
  check_pair(cause, effect);
  const Index n = cause.rows();
  if (cfg.kiim_rank && (*cfg.kiim_rank < 1 || *cfg.kiim_rank > n)) {
    throw InputError("kiim: rank " + std::to_string(*cfg.kiim_rank) + " exceeds n=" +
                     std::to_string(n));
  }
  const DirectionalGrams g = directional_grams(cause, effect, cfg);
  const EmbeddingSet emb = directional_embeddings(cause, g, cfg);
  ScoreResult res;
  res.value = kiim_from_embeddings(emb, g.Ky, cfg.kiim_rank.value_or(n));
  return res;
}

// ---------------------------------------------------------------------------
// IGCI

namespace {

Vector igci_normalize(const Eigen::Ref<const Vector>& v, IgciReference ref, const char* what) {
  if (ref == IgciReference::Uniform) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (!(hi > lo)) throw ScorerError(std::string("igci: ") + what + " dimension is constant");
    return (v.array() - lo) / (hi - lo);
  }
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  if (!(sd > 0.0)) throw ScorerError(std::string("igci: ") + what + " dimension is constant");
  return (v.array() - mean) / sd;
}

double igci_1d(const Vector& cause, const Vector& effect, IgciReference ref) {
  const Index n = cause.size();
  const Vector c = igci_normalize(cause, ref, "cause");
  const Vector e = igci_normalize(effect, ref, "effect");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (c(a) != c(b)) return c(a) < c(b);
    return e(a) < e(b);
  });
  double sum = 0.0;
  int distinct = 0;
  for (Index t = 0; t + 1 < n; ++t) {
    const Index a = order[static_cast<std::size_t>(t)];
    const Index b = order[static_cast<std::size_t>(t + 1)];
    const double dc = c(b) - c(a);
    const double de = e(b) - e(a);
    if (dc != 0.0) ++distinct;
    if (dc != 0.0 && de != 0.0) sum += std::log(std::abs(de / dc));
  }
  if (distinct < 1) throw ScorerError("igci: fewer than two distinct cause values");
  return sum / static_cast<double>(n - 1);
}

}  // namespace

ScoreResult igci_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg) {
  check_pair(cause, effect);
  if (cause.cols() != effect.cols()) {
    throw InputError("igci: cause and effect dimensions differ (" +
                     std::to_string(cause.cols()) + " vs " + std::to_string(effect.cols()) + ")");
  }
  ScoreResult res;
  for (Index k = 0; k < cause.cols(); ++k) {
    res.value += igci_1d(cause.col(k), effect.col(k), cfg.igci_reference);
  }
  return res;
}

// ---------------------------------------------------------------------------

ScoreResult score(Method method, const Matrix& cause, const Matrix& effect,
                  const ScoreConfig& cfg) {
  switch (method) {
    case Method::KiimHt:
      return kiim_ht_score(cause, effect, cfg);
    case Method::Kcdc:
      return kcdc_score(cause, effect, cfg);
    case Method::Kiim:
      return kiim_score(cause, effect, cfg);
    case Method::Igci:
      return igci_score(cause, effect, cfg);
  }
  throw InputError("score: unknown method");
}

}  // namespace kdm
