#pragma once

#include "kdm/scorers.hpp"
#include "kdm/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kdm {

/// Whitespace-separated numeric table; blank lines and lines starting with
/// '#' are skipped. Throws IoError naming file and line on a bad token or
/// a ragged row.
Matrix load_matrix(const std::string& path);

/// Inclusive 0-based column range.
struct ColumnRange {
  Index first = 0;
  Index last = 0;
  Index width() const { return last - first + 1; }
};

PairDataset load_pair_file(const std::string& path, ColumnRange x_cols, ColumnRange y_cols);

struct TcepPair {
  std::string id;
  PairDataset data;
  double weight = 1.0;
};

struct TcepLoadReport {
  int listed = 0;
  int loaded = 0;
  std::vector<std::string> excluded_multivariate;
  bool one_based = true;
};

/// Loads a Tuebingen-style directory: `pairmeta.txt` with one line per pair
///   id cause-first cause-last effect-first effect-last weight
/// and one `pair<id>.txt` data file per pair. Column indices are 1-based
/// unless some index is 0, in which case the file is read as 0-based.
/// Pairs whose cause or effect spans several columns are skipped. Each
/// pair is oriented cause-first (x = cause, y = effect, truth X->Y).
std::vector<TcepPair> load_tcep(const std::string& dir, TcepLoadReport* report = nullptr);

/// Seeded Fisher-Yates shuffle of the rows, keeping the first `cap`.
/// Pairs with at most `cap` rows are returned unchanged.
TcepPair downsample(const TcepPair& pair, Index cap, std::uint64_t seed);

/// 16 hex digits of the FNV-1a hash of cfg.canonical().
std::string config_digest(const ScoreConfig& cfg);

struct ResultRecord {
  std::string id;
  std::string method;
  std::string cfg_digest;
  Direction decision = Direction::Undecided;
  double score_xy = 0.0;
  double score_yx = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRecord&) const = default;
};

using ConfigHeader = std::vector<std::pair<std::string, std::string>>;

struct ResultsFile {
  ConfigHeader header;
  std::vector<ResultRecord> records;
  std::vector<std::string> warnings;
};

/// Tab-separated, UTF-8. Layout:
///   # kdm-results v1
///   # key=value              (one line per header entry)
///   id<TAB>method<TAB>cfg_digest<TAB>decision<TAB>score_xy<TAB>score_yx<TAB>wall_time_s<TAB>seed
///   ...one row per record
/// Doubles are written in shortest round-trip form. The file is written to
/// a temporary sibling and renamed into place.
void write_results(const std::vector<ResultRecord>& records, const std::string& path,
                   const ConfigHeader& header = {});

/// Inverse of write_results. Unknown extra columns are ignored and noted in
/// `warnings`; a missing or different format line is an IoError.
ResultsFile read_results(const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Writes `content` to a temporary sibling of `path`, then renames it.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace kdm
