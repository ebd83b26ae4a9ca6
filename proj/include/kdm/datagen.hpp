#pragma once

#include "kdm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdm {

enum class Mechanism { Anm1, Anm2, Mnm1, Mnm2, Cnm };
enum class Noise { StdNormal, StdUniform };

std::string_view to_string(Mechanism m);  // "ANM-1", ...
std::string_view to_string(Noise n);      // "N", "U"
Mechanism mechanism_from_string(std::string_view s);
Noise noise_from_string(std::string_view s);

struct MechanismSpec {
  Mechanism mechanism = Mechanism::Anm1;
  Noise noise = Noise::StdNormal;
  Index n = 100;
  std::uint64_t seed = 0;
};

/// Effect value for cause x and noise eps:
///   ANM-1  x^3 + x + eps
///   ANM-2  x + eps
///   MNM-1  (x^3 + x) exp(eps)
///   MNM-2  (sin(10 x) + exp(3 x)) exp(eps)
///   CNM    log(x^6 + 5) + x^5 - sin(x^2 |eps|)
double apply_mechanism(Mechanism m, double x, double eps);

/// x ~ N(0, 1), eps i.i.d. from spec.noise (U(0, 1) for StdUniform).
/// Draw order: the n causes, then the n noise values.
PairDataset generate_scalar(const MechanismSpec& spec);

/// Two independent scalar mechanisms stacked column-wise (first column
/// from `a`, second from `b`), sharing the noise law of `a`. Throws
/// InputError if the mechanisms coincide or the noise laws differ.
PairDataset generate_2d(const MechanismSpec& a, const MechanismSpec& b, Index n,
                        std::uint64_t seed);

enum class SettingKind { Scalar, TwoDim };

struct Setting {
  SettingKind kind = SettingKind::Scalar;
  Mechanism first = Mechanism::Anm1;
  std::optional<Mechanism> second;  // TwoDim only
  Noise noise = Noise::StdNormal;

  /// "ANM-1" or "ANM-1+ANM-2"; noise is reported separately.
  std::string label() const;
  PairDataset generate(Index n, std::uint64_t seed) const;
};

/// Scalar: 5 mechanisms x 2 noises (10). TwoDim: 10 unordered mechanism
/// pairs x 2 noises (20). Mechanism-major order with Gaussian noise first.
std::vector<Setting> enumerate_settings(SettingKind kind);

/// Plain-text export: '#' comment header describing the data, then one
/// whitespace-separated row per sample (x columns then y columns).
void write_dataset(const PairDataset& data, const std::string& path,
                   const std::string& description);

}  // namespace kdm
