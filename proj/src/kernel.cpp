#include "kdm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace kdm {

namespace {

double sqdist(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError("kernel: dimension mismatch (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

std::span<const double> column(const Matrix& m, Index j) {
  return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

void check_points(const Matrix& points, const char* what) {
  if (points.rows() == 0 || points.cols() == 0) {
    throw InputError(std::string(what) + ": empty point set");
  }
}

}  // namespace

void KernelConfig::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw InputError("kernel: length_scale must be positive and finite");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw InputError("kernel: amplitude must be positive and finite");
  }
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    throw InputError("kernel: regularization must be nonnegative and finite");
  }
}

double kernel_from_sqdist(double d2, const KernelConfig& c) {
  const double rbf = c.amplitude * c.amplitude *
                     std::exp(-d2 / (2.0 * c.length_scale * c.length_scale));
  const double rq = 1.0 - d2 / (d2 + 1.0);
  switch (c.family) {
    case KernelFamily::Rbf:
      return rbf;
    case KernelFamily::Rq:
      return rq;
    case KernelFamily::ProductRbfRq:
      return rbf * rq;
  }
  return rbf * rq;
}

double rbf_eval(std::span<const double> x, std::span<const double> y,
                double length_scale, double amplitude) {
  KernelConfig c{KernelFamily::Rbf, length_scale, amplitude, 0.0};
  c.validate();
  return kernel_from_sqdist(sqdist(x, y), c);
}

double rq_eval(std::span<const double> x, std::span<const double> y) {
  const double d2 = sqdist(x, y);
  return 1.0 - d2 / (d2 + 1.0);
}

double product_eval(std::span<const double> x, std::span<const double> y,
                    const KernelConfig& config) {
  if (config.family != KernelFamily::ProductRbfRq) {
    throw InputError("product_eval: config family is not ProductRbfRq");
  }
  return kernel_eval(x, y, config);
}

double kernel_eval(std::span<const double> x, std::span<const double> y,
                   const KernelConfig& config) {
  config.validate();
  return kernel_from_sqdist(sqdist(x, y), config);
}

Matrix gram_serial(const Matrix& points, const KernelConfig& config) {
  check_points(points, "gram");
  config.validate();
  const Matrix pt = points.transpose();  // columns are points
  const Index n = pt.cols();
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    K(i, i) = kernel_from_sqdist(0.0, config);
    for (Index j = i + 1; j < n; ++j) {
      const double v = kernel_from_sqdist(sqdist(column(pt, i), column(pt, j)), config);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Matrix gram(const Matrix& points, const KernelConfig& config) {
  check_points(points, "gram");
  config.validate();
  const Matrix pt = points.transpose();
  const Index n = pt.cols();
  Matrix K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Index i = 0; i < n; ++i) {
    K(i, i) = kernel_from_sqdist(0.0, config);
    for (Index j = i + 1; j < n; ++j) {
      const double v = kernel_from_sqdist(sqdist(column(pt, i), column(pt, j)), config);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

double median_heuristic(const Matrix& points) {
  const Index n = points.rows();
  if (n < 2) {
    throw InputError("median_heuristic: need at least two points");
  }
  const Matrix pt = points.transpose();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(sqdist(column(pt, i), column(pt, j))));
    }
  }

  auto median_of = [](std::vector<double>& v) {
    const std::size_t m = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double upper = *mid;
    if (m % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
  };

  double med = median_of(dist);
  if (med > 0.0) return med;

  std::erase(dist, 0.0);
  if (dist.empty()) {
    throw InputError("median_heuristic: all points are identical (zero bandwidth)");
  }
  return median_of(dist);
}

Matrix regularized_solve(const Matrix& K, double lambda, const Matrix& B,
                         std::string_view name) {
  if (K.rows() != K.cols()) {
    throw InputError("regularized_solve: " + std::string(name) + " is not square");
  }
  if (B.rows() != K.rows()) {
    throw InputError("regularized_solve: right-hand side has " +
                     std::to_string(B.rows()) + " rows, expected " +
                     std::to_string(K.rows()));
  }
  if (!(lambda >= 0.0)) {
    throw InputError("regularized_solve: lambda must be nonnegative");
  }
  Matrix A = K;
  A.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericError("regularized_solve: Cholesky factorization of " +
                       std::string(name) + " + lambda*I failed (lambda=" +
                       std::to_string(lambda) + ")");
  }
  Matrix X = llt.solve(B);
  if (!X.allFinite()) {
    throw NumericError("regularized_solve: non-finite solution for " + std::string(name));
  }
  return X;
}

}  // namespace kdm
