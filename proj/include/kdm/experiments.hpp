#pragma once

#include "kdm/dataio.hpp"
#include "kdm/datagen.hpp"
#include "kdm/scorers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kdm {

/// A named scoring recipe as it appears in result tables, e.g. "IGCI-N" or
/// "Rw-KIIM-HT-L".
struct MethodSpec {
  std::string name;
  Method method = Method::KiimHt;
  IgciReference igci_reference = IgciReference::Uniform;
  std::optional<ReferenceDensity> reweight;  // Rw- variants only
  bool kcdc_n_lambda = false;

  /// `base` with this recipe's method-specific fields applied. A run-wide
  /// reweight in `base` is kept for plain KIIM / KIIM-HT.
  ScoreConfig apply(const ScoreConfig& base) const;
};

/// Accepted (case-insensitive): KIIM-HT, KCDC, KCDC-nL, KIIM, IGCI-N,
/// IGCI-U, Rw-KIIM-N, Rw-KIIM-L, Rw-KIIM-HT-N, Rw-KIIM-HT-L. "IGCI" alone
/// means IGCI-U. ANM and LiNGAM are rejected with a pointer to
/// --import-decisions.
MethodSpec parse_method(const std::string& name);

enum class Suite { Synth, Synth2d, Both };

struct RunConfig {
  std::string command;
  std::vector<MethodSpec> methods;
  ScoreConfig base;
  int trials = 5;
  int datasets_per_trial = 50;
  std::optional<Index> n;  // default 100 scalar, 5 two-dimensional
  std::uint64_t seed = 0;

  std::vector<double> lambdas{1e-3, 1e-2, 1e-1, 1.0, 5.0, 10.0, 50.0};
  std::vector<Index> grid_ranks{5, 10, 20, 80, 100};
  std::vector<double> grid_lambda_regs{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  Suite suite = Suite::Both;
  /// Restricts the synthetic settings, entries like "ANM-1/N" or
  /// "ANM-1+MNM-1/U". Empty means all.
  std::vector<std::string> settings;

  std::string tcep_dir;
  Index cap = 400;
  std::string import_decisions;
  bool weighted = false;

  /// Wall time goes into the records only when asked, so that repeated
  /// runs stay byte-identical.
  bool record_timing = false;

  void desk_scale() {
    trials = 1;
    datasets_per_trial = 20;
  }
  Index n_for(SettingKind kind) const { return n ? *n : (kind == SettingKind::Scalar ? 100 : 5); }
  /// Every run parameter as key/value pairs, in a fixed order.
  ConfigHeader header() const;
};

struct Table {
  ConfigHeader header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<ResultRecord> records;
  std::vector<std::string> errors;  // one line per failed task
  std::vector<std::string> notes;

  /// "# kdm-table v1", the header as "# key=value", then columns and rows,
  /// tab-separated.
  std::string to_tsv() const;
  /// Value of `column` in the first row whose leading cells equal `key`.
  std::optional<std::string> lookup(const std::vector<std::string>& key,
                                    const std::string& column) const;
};

/// Accuracy in percent for one setting/method across trials.
struct CellStats {
  double mean = 0.0;
  double sd = 0.0;  // population SD over trials
  int trials = 0;
  int errors = 0;
};

std::string setting_key(const Setting& s);  // "ANM-1/N", "ANM-1+ANM-2/U"
std::vector<Setting> select_settings(SettingKind kind, const std::vector<std::string>& filter);

/// Scalar settings x methods.
Table run_synth(const RunConfig& cfg);
/// Two-dimensional settings x methods.
Table run_synth2d(const RunConfig& cfg);
/// Real-world pairs from a Tuebingen-style directory.
Table run_tcep(const RunConfig& cfg);
/// Kernel ridge sweep over cfg.lambdas.
Table run_lambda_sweep(const RunConfig& cfg);
/// KIIM-HT over grid_ranks x grid_lambda_regs, with a per-setting summary
/// across cells.
Table run_hypergrid(const RunConfig& cfg);

std::string format_percent(double v);  // two decimals

}  // namespace kdm
