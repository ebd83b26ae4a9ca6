#include "kdm/inference.hpp"

#include <cmath>
#include <string>

namespace kdm {

Direction decide(double score_xy, double score_yx) {
  if (std::isnan(score_xy) || std::isnan(score_yx)) {
    throw InputError("decide: NaN score");
  }
  if (score_xy < score_yx) return Direction::XtoY;
  if (score_xy > score_yx) return Direction::YtoX;
  return Direction::Undecided;
}

namespace {

template <typename Fn>
ScoreResult annotated(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const ScorerError& e) {
    throw ScorerError(std::string(label) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(label) + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string(label) + ": " + e.what());
  }
}

}  // namespace

DirectionDecision infer_pair(const PairDataset& data, Method method, const ScoreConfig& cfg) {
  data.validate();
  ScoreConfig fwd = cfg;
  ScoreConfig bwd = cfg;
  bwd.seed = cfg.seed + 1;
  const ScoreResult xy = annotated("x->y", [&] { return score(method, data.x, data.y, fwd); });
  const ScoreResult yx = annotated("y->x", [&] { return score(method, data.y, data.x, bwd); });
  return {decide(xy.value, yx.value), xy.value, yx.value, method, cfg.seed};
}

AccuracyRecord evaluate_accuracy(std::span<const Direction> decisions,
                                 std::span<const Direction> truths,
                                 std::span<const double> weights) {
  if (decisions.size() != truths.size()) {
    throw InputError("evaluate_accuracy: " + std::to_string(decisions.size()) +
                     " decisions but " + std::to_string(truths.size()) + " truths");
  }
  if (!weights.empty() && weights.size() != decisions.size()) {
    throw InputError("evaluate_accuracy: weight count does not match decisions");
  }
  AccuracyRecord rec;
  rec.total = static_cast<int>(decisions.size());
  double hit = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    mass += w;
    if (decisions[i] == Direction::Undecided) {
      ++rec.undecided;
    } else if (decisions[i] == truths[i]) {
      ++rec.correct;
      hit += w;
    } else {
      ++rec.wrong;
    }
  }
  rec.accuracy = mass > 0.0 ? hit / mass : 0.0;
  return rec;
}

AccuracyRecord evaluate_accuracy(std::span<const DirectionDecision> decisions,
                                 std::span<const Direction> truths,
                                 std::span<const double> weights) {
  std::vector<Direction> d;
  d.reserve(decisions.size());
  for (const auto& x : decisions) d.push_back(x.decision);
  return evaluate_accuracy(std::span<const Direction>(d), truths, weights);
}

}  // namespace kdm
