#include "kdm/types.hpp"

#include <string>

namespace kdm {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::XtoY:
      return "X->Y";
    case Direction::YtoX:
      return "Y->X";
    case Direction::Undecided:
      return "undecided";
  }
  return "undecided";
}

Direction direction_from_string(std::string_view s) {
  if (s == "X->Y") return Direction::XtoY;
  if (s == "Y->X") return Direction::YtoX;
  if (s == "undecided") return Direction::Undecided;
  throw InputError("unknown direction '" + std::string(s) + "'");
}

void PairDataset::validate() const {
  if (x.rows() != y.rows()) {
    throw InputError("pair dataset: x has " + std::to_string(x.rows()) + " rows but y has " +
                     std::to_string(y.rows()));
  }
  if (x.cols() == 0 || y.cols() == 0) {
    throw InputError("pair dataset: zero-dimensional variable");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InputError("pair dataset: non-finite entries");
  }
}

PairDataset PairDataset::swapped() const {
  PairDataset s{y, x, Direction::Undecided, provenance};
  if (truth == Direction::XtoY) s.truth = Direction::YtoX;
  if (truth == Direction::YtoX) s.truth = Direction::XtoY;
  return s;
}

}  // namespace kdm
