#pragma once

#include "kdm/scorers.hpp"
#include "kdm/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kdm {

struct DirectionDecision {
  Direction decision = Direction::Undecided;
  double score_xy = 0.0;
  double score_yx = 0.0;
  Method method = Method::KiimHt;
  std::uint64_t seed = 0;
};

/// X->Y when score_xy < score_yx, Y->X when greater, Undecided on exact
/// equality. Throws InputError on NaN.
Direction decide(double score_xy, double score_yx);

/// Scores both directions and applies decide(). The x->y direction runs
/// with cfg.seed and the y->x direction with cfg.seed + 1; length-scales are
/// re-estimated for each direction. Scorer errors are rethrown with the
/// failing direction prefixed to the message.
DirectionDecision infer_pair(const PairDataset& data, Method method, const ScoreConfig& cfg);

struct AccuracyRecord {
  double accuracy = 0.0;  // fraction in [0, 1]; Undecided counts as wrong
  int correct = 0;
  int wrong = 0;
  int undecided = 0;
  int total = 0;
};

/// Optional `weights` gives a weighted accuracy (sum of weights of correct
/// decisions over the total weight); the counts stay unweighted.
AccuracyRecord evaluate_accuracy(std::span<const Direction> decisions,
                                 std::span<const Direction> truths,
                                 std::span<const double> weights = {});

AccuracyRecord evaluate_accuracy(std::span<const DirectionDecision> decisions,
                                 std::span<const Direction> truths,
                                 std::span<const double> weights = {});

}  // namespace kdm
