#include "kdm/datagen.hpp"

#include "kdm/random.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace kdm {

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Anm1:
      return "ANM-1";
    case Mechanism::Anm2:
      return "ANM-2";
    case Mechanism::Mnm1:
      return "MNM-1";
    case Mechanism::Mnm2:
      return "MNM-2";
    case Mechanism::Cnm:
      return "CNM";
  }
  return "?";
}

std::string_view to_string(Noise n) { return n == Noise::StdNormal ? "N" : "U"; }

Mechanism mechanism_from_string(std::string_view s) {
  for (Mechanism m : {Mechanism::Anm1, Mechanism::Anm2, Mechanism::Mnm1, Mechanism::Mnm2,
                      Mechanism::Cnm}) {
    if (s == to_string(m)) return m;
  }
  throw InputError("unknown mechanism '" + std::string(s) + "'");
}

Noise noise_from_string(std::string_view s) {
  if (s == "N") return Noise::StdNormal;
  if (s == "U") return Noise::StdUniform;
  throw InputError("unknown noise law '" + std::string(s) + "'");
}

double apply_mechanism(Mechanism m, double x, double eps) {
  switch (m) {
    case Mechanism::Anm1:
      return x * x * x + x + eps;
    case Mechanism::Anm2:
      return x + eps;
    case Mechanism::Mnm1:
      return (x * x * x + x) * std::exp(eps);
    case Mechanism::Mnm2:
      return (std::sin(10.0 * x) + std::exp(3.0 * x)) * std::exp(eps);
    case Mechanism::Cnm: {
      const double x2 = x * x;
      return std::log(x2 * x2 * x2 + 5.0) + x2 * x2 * x - std::sin(x2 * std::abs(eps));
    }
  }
  return 0.0;
}

namespace {

void fill_column(Rng& rng, Mechanism m, Noise noise, Eigen::Ref<Vector> x,
                 Eigen::Ref<Vector> y) {
  const Index n = x.size();
  for (Index i = 0; i < n; ++i) x(i) = rng.normal();
  for (Index i = 0; i < n; ++i) {
    const double eps = noise == Noise::StdNormal ? rng.normal() : rng.uniform();
    y(i) = apply_mechanism(m, x(i), eps);
  }
}

}  // namespace

PairDataset generate_scalar(const MechanismSpec& spec) {
  if (spec.n < 2) throw InputError("generate_scalar: n must be at least 2");
  PairDataset d;
  d.x.resize(spec.n, 1);
  d.y.resize(spec.n, 1);
  Rng rng(spec.seed);
  fill_column(rng, spec.mechanism, spec.noise, d.x.col(0), d.y.col(0));
  d.truth = Direction::XtoY;
  d.provenance = std::string(to_string(spec.mechanism)) + "/" + std::string(to_string(spec.noise)) +
                 "/n=" + std::to_string(spec.n) + "/seed=" + std::to_string(spec.seed);
  return d;
}

PairDataset generate_2d(const MechanismSpec& a, const MechanismSpec& b, Index n,
                        std::uint64_t seed) {
  if (a.mechanism == b.mechanism) {
    throw InputError("generate_2d: the two mechanisms must differ");
  }
  if (a.noise != b.noise) {
    throw InputError("generate_2d: both dimensions share one noise law");
  }
  if (n < 2) throw InputError("generate_2d: n must be at least 2");
  PairDataset d;
  d.x.resize(n, 2);
  d.y.resize(n, 2);
  Rng rng(seed);
  fill_column(rng, a.mechanism, a.noise, d.x.col(0), d.y.col(0));
  fill_column(rng, b.mechanism, b.noise, d.x.col(1), d.y.col(1));
  d.truth = Direction::XtoY;
  d.provenance = std::string(to_string(a.mechanism)) + "+" + std::string(to_string(b.mechanism)) +
                 "/" + std::string(to_string(a.noise)) + "/n=" + std::to_string(n) +
                 "/seed=" + std::to_string(seed);
  return d;
}

std::string Setting::label() const {
  std::string s(to_string(first));
  if (second) s += "+" + std::string(to_string(*second));
  return s;
}

PairDataset Setting::generate(Index n, std::uint64_t seed) const {
  if (kind == SettingKind::Scalar) return generate_scalar({first, noise, n, seed});
  return generate_2d({first, noise, n, seed}, {*second, noise, n, seed}, n, seed);
}

std::vector<Setting> enumerate_settings(SettingKind kind) {
  constexpr std::array mechs{Mechanism::Anm1, Mechanism::Anm2, Mechanism::Mnm1, Mechanism::Mnm2,
                             Mechanism::Cnm};
  std::vector<Setting> out;
  if (kind == SettingKind::Scalar) {
    for (Mechanism m : mechs) {
      for (Noise z : {Noise::StdNormal, Noise::StdUniform}) {
        out.push_back({SettingKind::Scalar, m, std::nullopt, z});
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < mechs.size(); ++i) {
    for (std::size_t j = i + 1; j < mechs.size(); ++j) {
      for (Noise z : {Noise::StdNormal, Noise::StdUniform}) {
        out.push_back({SettingKind::TwoDim, mechs[i], mechs[j], z});
      }
    }
  }
  return out;
}

void write_dataset(const PairDataset& data, const std::string& path,
                   const std::string& description) {
  data.validate();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.precision(17);
  os << "# " << description << "\n";
  os << "# columns: " << data.x.cols() << " x, " << data.y.cols() << " y\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index k = 0; k < data.x.cols(); ++k) os << (k ? " " : "") << data.x(i, k);
    for (Index k = 0; k < data.y.cols(); ++k) os << " " << data.y(i, k);
    os << "\n";
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace kdm
