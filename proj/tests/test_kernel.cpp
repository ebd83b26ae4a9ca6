#include "kdm/kernel.hpp"
#include "kdm/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace kdm;

namespace {
std::vector<double> v(std::initializer_list<double> l) { return l; }

Matrix column(std::initializer_list<double> l) {
  Matrix m(static_cast<Index>(l.size()), 1);
  Index i = 0;
  for (double x : l) m(i++, 0) = x;
  return m;
}
}  // namespace

TEST_SUITE("kernel_core") {
  TEST_CASE("rbf closed forms") {
    const auto a = v({0.3, -1.0});
    CHECK(rbf_eval(a, a, 0.7, 1.0) == 1.0);
    // |x - y|^2 = 2 l^2 gives exp(-1)
    CHECK(rbf_eval(v({0.0}), v({std::sqrt(2.0) * 1.5}), 1.5, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(rbf_eval(v({0.0}), v({3.0}), 1.0, 2.0) ==
          doctest::Approx(4.0 * std::exp(-4.5)).epsilon(1e-14));
    CHECK_THROWS_AS(rbf_eval(v({0.0}), v({1.0, 2.0}), 1.0, 1.0), InputError);
  }

  TEST_CASE("rq closed forms") {
    CHECK(rq_eval(v({2.0}), v({2.0})) == 1.0);
    CHECK(rq_eval(v({0.0}), v({1.0})) == doctest::Approx(0.5));
    CHECK(rq_eval(v({0.0, 0.0}), v({1.0, std::sqrt(2.0)})) == doctest::Approx(0.25));
    CHECK_THROWS_AS(rq_eval(v({0.0}), v({1.0, 2.0})), InputError);
  }

  TEST_CASE("product kernel") {
    KernelConfig c;
    c.length_scale = 1.0;
    CHECK(product_eval(v({1.0}), v({1.0}), c) == 1.0);
    CHECK(product_eval(v({0.0}), v({1.0}), c) ==
          doctest::Approx(std::exp(-0.5) * 0.5).epsilon(1e-14));
    CHECK(product_eval(v({0.0, 0.0}), v({1.0, 1.0}), c) ==
          doctest::Approx(std::exp(-1.0) / 3.0).epsilon(1e-14));
    KernelConfig rbf = c;
    rbf.family = KernelFamily::Rbf;
    CHECK_THROWS_AS(product_eval(v({0.0}), v({1.0}), rbf), InputError);
  }

  TEST_CASE("kernel config validation") {
    KernelConfig c;
    c.length_scale = 0.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = KernelConfig{};
    c.amplitude = -1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = KernelConfig{};
    c.reg = -1e-9;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = KernelConfig{};
    c.reg = 0.0;
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("gram small cases") {
    KernelConfig c;
    const Matrix one = gram(column({4.2}), c);
    CHECK(one.rows() == 1);
    CHECK(one(0, 0) == 1.0);
    const Matrix same = gram(column({1.5, 1.5}), c);
    CHECK(same.isApprox(Matrix::Ones(2, 2)));

    KernelConfig r;
    r.family = KernelFamily::Rbf;
    const Matrix K = gram(column({0.0, 1.0, 3.0}), r);
    CHECK(K(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(K(0, 2) == doctest::Approx(std::exp(-4.5)).epsilon(1e-14));
    CHECK(K(1, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(gram(Matrix(0, 1), c), InputError);
  }

  TEST_CASE("gram matches the closed-form oracle") {
    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
      const Matrix P = oracle::random_matrix(7, 1 + t % 3, rng);
      KernelConfig c;
      c.length_scale = 0.5 + rng.uniform();
      const Matrix K = gram(P, c);
      const Matrix O = oracle::gram(P, c.length_scale);
      CHECK((K - O).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("property: gram symmetric and PSD") {
    Rng rng(5);
    for (int t = 0; t < 40; ++t) {
      const Index n = 2 + static_cast<Index>(rng.below(30));
      const Index d = 1 + static_cast<Index>(rng.below(3));
      Matrix P = oracle::random_matrix(n, d, rng) * (0.1 + 5.0 * rng.uniform());
      KernelConfig c;
      c.family = static_cast<KernelFamily>(rng.below(3));
      c.length_scale = 0.05 + 3.0 * rng.uniform();
      const Matrix K = gram(P, c);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          CHECK(std::abs(K(i, j) - K(j, i)) <= 1e-12 * std::max(1.0, std::abs(K(i, j))));
      Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      CHECK(lo >= -1e-8 * hi);
    }
  }

  TEST_CASE("property: kernels symmetric and maximal on the diagonal") {
    Rng rng(8);
    KernelConfig c;
    for (int t = 0; t < 200; ++t) {
      std::vector<double> a{rng.normal(), rng.normal()}, b{rng.normal(), rng.normal()};
      c.length_scale = 0.1 + rng.uniform();
      CHECK(rbf_eval(a, b, c.length_scale, 1.0) == rbf_eval(b, a, c.length_scale, 1.0));
      CHECK(rq_eval(a, b) == rq_eval(b, a));
      CHECK(product_eval(a, b, c) <= product_eval(a, a, c));
      CHECK(rq_eval(a, b) <= rq_eval(b, b));
    }
  }

  TEST_CASE("parallel gram is bitwise equal to the serial one") {
    Rng rng(3);
    const Matrix P = oracle::random_matrix(120, 2, rng);
    KernelConfig c;
    c.length_scale = 0.8;
    const Matrix ref = gram_serial(P, c);
#ifdef _OPENMP
    const int keep = omp_get_max_threads();
    for (int th : {1, 2, 5}) {
      omp_set_num_threads(th);
      CHECK((gram(P, c).array() == ref.array()).all());
    }
    omp_set_num_threads(keep);
#else
    CHECK((gram(P, c).array() == ref.array()).all());
#endif
  }

  TEST_CASE("median heuristic examples") {
    CHECK(median_heuristic(column({0.0, 1.0, 3.0})) == 2.0);
    CHECK(median_heuristic(column({0.0, 2.0})) == 2.0);
    // distances {1,2,4,1,3,2} -> sorted {1,1,2,2,3,4} -> 2
    CHECK(median_heuristic(column({0.0, 1.0, 2.0, 4.0})) == 2.0);
    CHECK_THROWS_AS(median_heuristic(column({1.0, 1.0, 1.0})), InputError);
    CHECK_THROWS_AS(median_heuristic(column({1.0})), InputError);
  }

  TEST_CASE("median heuristic on heavily tied data uses nonzero distances") {
    // 6 zero distances among the four zeros, 4 unit distances to the 1.
    CHECK(median_heuristic(column({0.0, 0.0, 0.0, 0.0, 1.0})) == 1.0);
  }

  TEST_CASE("property: median heuristic matches oracle, permutation and translation invariant") {
    Rng rng(21);
    for (int t = 0; t < 30; ++t) {
      const Index n = 2 + static_cast<Index>(rng.below(25));
      const Index d = 1 + static_cast<Index>(rng.below(3));
      Matrix P = oracle::random_matrix(n, d, rng);
      const double m = median_heuristic(P);
      CHECK(m == doctest::Approx(oracle::median_distance(P)).epsilon(1e-12));

      std::vector<Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Index{0});
      for (Index i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
      Matrix Q(n, d);
      for (Index i = 0; i < n; ++i) Q.row(i) = P.row(perm[static_cast<std::size_t>(i)]);
      CHECK(median_heuristic(Q) == m);

      Matrix S = P;
      const Eigen::RowVectorXd shift = oracle::random_matrix(1, d, rng) * 10.0;
      S.rowwise() += shift;
      CHECK(median_heuristic(S) == doctest::Approx(m).epsilon(1e-10));
    }
  }

  TEST_CASE("regularized solve examples") {
    const Matrix I2 = Matrix::Identity(2, 2);
    CHECK(regularized_solve(I2, 1.0, I2).isApprox(0.5 * I2));
    Matrix K(2, 2);
    K << 2, 0, 0, 2;
    Matrix b(2, 1);
    b << 1, 1;
    const Matrix x = regularized_solve(K, 0.0, b);
    CHECK(x(0, 0) == doctest::Approx(0.5));
    CHECK(x(1, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("regularized solve residual and inverse property") {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
      const Matrix K = oracle::random_spd(5, rng, 0.0);
      const Matrix B = oracle::random_matrix(5, 3, rng);
      const Matrix X = regularized_solve(K, 1e-3, B);
      const Matrix A = K + 1e-3 * Matrix::Identity(5, 5);
      CHECK((A * X - B).norm() <= 1e-8 * B.norm());
      const Matrix Inv = regularized_solve(K, 1e-3, Matrix::Identity(5, 5));
      CHECK((Inv * A - Matrix::Identity(5, 5)).norm() <= 1e-8 * std::sqrt(5.0));
    }
  }

  TEST_CASE("regularized solve failure names the matrix") {
    const Matrix K = -Matrix::Identity(3, 3);
    try {
      regularized_solve(K, 0.0, Matrix::Identity(3, 3), "K_x");
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("K_x") != std::string::npos);
    }
    CHECK_THROWS_AS(regularized_solve(Matrix::Identity(3, 3), 0.0, Matrix::Identity(2, 2)),
                    InputError);
  }
}
