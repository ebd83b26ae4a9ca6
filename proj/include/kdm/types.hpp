#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kdm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatches, out-of-range indices, NaNs.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A factorization or eigen-solve failed, or parameters became non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A scorer cannot produce a meaningful score for the given samples
/// (for example a constant variable).
class ScorerError : public Error {
 public:
  using Error::Error;
};

/// File system or file-format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

enum class Direction { XtoY, YtoX, Undecided };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

/// Two aligned sample matrices; row i of `x` and row i of `y` form one
/// observation.
struct PairDataset {
  Matrix x;  // n x d_x
  Matrix y;  // n x d_y
  Direction truth = Direction::XtoY;
  std::string provenance;

  Index size() const { return x.rows(); }

  /// Throws InputError if the row counts differ or any entry is non-finite.
  void validate() const;

  PairDataset swapped() const;
};

}  // namespace kdm
