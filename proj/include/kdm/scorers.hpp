#pragma once

#include "kdm/embeddings.hpp"
#include "kdm/kernel.hpp"
#include "kdm/projection_net.hpp"
#include "kdm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdm {

enum class Method { KiimHt, Kcdc, Kiim, Igci };
enum class IgciReference { Uniform, Gaussian };

std::string_view to_string(Method m);
/// Accepts "KIIM-HT", "KCDC", "KIIM", "IGCI" (case-insensitive).
Method method_from_string(std::string_view s);

struct ScoreConfig {
  /// Kernel for both variables. With median_length_scale set, the
  /// length-scale is re-estimated per variable and per direction.
  KernelConfig kernel;
  bool median_length_scale = true;

  LossConfig loss;
  Index hidden = 20;
  Index rank = 100;
  double learning_rate = 1e-3;

  /// When set, KIIM and KIIM-HT use re-weighted embeddings.
  std::optional<ReweightConfig> reweight;
  /// KIIM projection rank; unset means n (full rank).
  std::optional<Index> kiim_rank;
  IgciReference igci_reference = IgciReference::Uniform;
  /// Use n * lambda as the KCDC ridge term.
  bool kcdc_n_lambda = false;

  std::uint64_t seed = 0;

  /// Stable textual form of every field; feeds the config digest.
  std::string canonical() const;
};

struct ScoreResult {
  double value = 0.0;
  int iterations_run = 0;
  int best_iteration = 0;
  std::vector<double> trace;  // KIIM-HT only: loss before each step, plus the final one
  double pair_term_at_best = 0.0;
};

/// Gram matrices of one direction (cause candidate first).
struct DirectionalGrams {
  Matrix Kx;
  Matrix Ky;
  double length_scale_x = 0.0;
  double length_scale_y = 0.0;
};

/// Validates a (cause, effect) pair: equal row counts and at least two
/// rows (InputError), finite entries (InputError), neither variable
/// constant (ScorerError).
void check_pair(const Matrix& cause, const Matrix& effect);

DirectionalGrams directional_grams(const Matrix& cause, const Matrix& effect,
                                   const ScoreConfig& cfg);

/// Plain or re-weighted embeddings depending on cfg.reweight.
EmbeddingSet directional_embeddings(const Matrix& cause, const DirectionalGrams& grams,
                                    const ScoreConfig& cfg);

/// Heterogeneous-projection score: minimum regularized pair loss seen over
/// cfg.loss.iterations Adam steps, counting the evaluation before the
/// first step.
ScoreResult kiim_ht_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg);
ScoreResult kiim_ht_score_from_embeddings(const Matrix& cause, const EmbeddingSet& emb,
                                          const ScoreConfig& cfg);

/// Variance of the conditional-embedding norms.
ScoreResult kcdc_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg);
double kcdc_from_embeddings(const EmbeddingSet& emb, const Matrix& Ky);

/// Global-projection score: sum of the kiim_rank smallest eigenvalues of
/// (K_y C K_y) v = mu K_y v, C the scatter of the embedding coefficients.
ScoreResult kiim_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg);
double kiim_from_embeddings(const EmbeddingSet& emb, const Matrix& Ky, Index rank);

/// Slope-based IGCI estimator; per-dimension sum for vector variables.
/// Unlike the kernel scores this can be negative.
ScoreResult igci_score(const Matrix& cause, const Matrix& effect, const ScoreConfig& cfg);

ScoreResult score(Method method, const Matrix& cause, const Matrix& effect,
                  const ScoreConfig& cfg);

}  // namespace kdm
