#include <doctest.h>

#include "support.hpp"
#include "wvpath/hilbert.hpp"

using namespace wvpath;
using testsupport::Gen;

namespace {
const Complex I(0.0, 1.0);
const double pi = std::numbers::pi;

CMatrix sigma_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
}  // namespace

TEST_CASE("inner product examples") {
  CHECK(inner(StateVector{1, 0}, StateVector{1, 0}) == Complex(1.0));
  CHECK(inner(StateVector{1, 0}, StateVector{0, 1}) == Complex(0.0));
  const StateVector f{1.0 / std::sqrt(2.0), I / std::sqrt(2.0)};
  CHECK(std::abs(inner(f, StateVector{1, 0}) - 1.0 / std::sqrt(2.0)) < 1e-15);
  // conj(f) is applied: <(0,i)|(0,1)> = -i
  CHECK(std::abs(inner(StateVector{0, I}, StateVector{0, 1}) - (-I)) < 1e-15);
  CHECK_THROWS_AS(inner(StateVector{1, 0}, StateVector{1, 0, 0}), DimensionMismatch);
}

TEST_CASE("inner product properties") {
  testsupport::for_trials(11, 50, [](Gen& g, int) {
    const std::size_t n = g.index(1, 8);
    const StateVector a(g.vector(n));
    const StateVector b(g.vector(n));
    CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-13);
    const Complex aa = inner(a, a);
    CHECK(aa.imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(aa.real() > 0.0);
  });
  CHECK(inner(StateVector(CVector::Zero(3)), StateVector(CVector::Zero(3))) == Complex(0.0));
}

TEST_CASE("state vectors") {
  const StateVector e = StateVector::basis(3, 2);
  CHECK(e.dim() == 3);
  CHECK(e[2] == Complex(1.0));
  CHECK(e.is_normalized());
  CHECK_FALSE(StateVector{1, 1}.is_normalized());
  CHECK(StateVector{3, 4}.normalized().is_normalized());
  CHECK_THROWS_AS(StateVector(CVector::Zero(2)).normalized(), InvalidArgument);
  CHECK_THROWS_AS(StateVector::basis(2, 2), InvalidArgument);
}

TEST_CASE("operator kinds are verified") {
  CMatrix h(2, 2);
  h << 1, Complex(0, 1), Complex(0, -1), 2;
  CHECK(OperatorMatrix::hermitian(h).is_hermitian());
  CMatrix nilpotent(2, 2);
  nilpotent << 0, 1, 0, 0;
  CHECK_THROWS_AS(OperatorMatrix::hermitian(nilpotent), InvalidArgument);
  CHECK_THROWS_AS(OperatorMatrix(nilpotent, OperatorKind::normal), InvalidArgument);
  CHECK(OperatorMatrix::classify(nilpotent).kind() == OperatorKind::general);
  CMatrix unitary(2, 2);
  unitary << 0, Complex(0, 1), Complex(0, 1), 0;
  CHECK(OperatorMatrix::classify(unitary).kind() == OperatorKind::normal);
  CHECK(OperatorMatrix::classify(h).kind() == OperatorKind::hermitian);
  CHECK_THROWS(OperatorMatrix::general(CMatrix::Zero(2, 3)));
  // per-call tolerance override
  CMatrix almost = h;
  almost(0, 1) += 1e-9;
  CHECK_THROWS(OperatorMatrix::hermitian(almost));
  Tolerances loose;
  loose.hermitian = 1e-8;
  CHECK(OperatorMatrix::hermitian(almost, loose).is_hermitian());
}

TEST_CASE("matexp examples") {
  const Propagator z = matexp(OperatorMatrix::zero(3), 2.5, 1.0);
  CHECK(max_abs_diff(z.matrix(), CMatrix::Identity(3, 3)) == 0.0);

  const std::vector<double> E{0.5, -1.25, 3.0};
  const Propagator d = matexp(OperatorMatrix::diagonal(E), 0.7, 0.9);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(d.matrix()(k, k) - std::exp(-I * E[k] * 0.7 / 0.9)) < 1e-14);
  CHECK(std::abs(d.matrix()(0, 1)) == 0.0);

  const OperatorMatrix X = OperatorMatrix::hermitian(sigma_x());
  // exp(-i pi sigma_x) = -1 and exp(-i pi/2 sigma_x) = -i sigma_x.
  const CMatrix full = matexp(X, pi, 1.0).matrix();
  CHECK(testsupport::max_abs(full, -CMatrix::Identity(2, 2)) < 1e-14);
  CHECK(testsupport::max_abs(full, testsupport::taylor_propagator(sigma_x(), pi)) < 1e-13);
  const CMatrix half = matexp(X, pi / 2, 1.0).matrix();
  CHECK(testsupport::max_abs(half, -I * sigma_x()) < 1e-14);
  CHECK(testsupport::max_abs(half, testsupport::taylor_propagator(sigma_x(), pi / 2)) < 1e-13);
}

TEST_CASE("matexp errors") {
  CHECK_THROWS_AS(matexp(OperatorMatrix::identity(2), 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(matexp(OperatorMatrix::identity(2), 1.0, -1.0), InvalidArgument);
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(matexp(OperatorMatrix::general(bad), 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(matexp(OperatorMatrix::identity(2), std::numeric_limits<double>::infinity(), 1.0), InvalidArgument);
}

TEST_CASE("matexp agrees with the Taylor oracle for small norms") {
  testsupport::for_trials(21, 60, [](Gen& g, int) {
    const std::size_t n = g.index(1, 6);
    CMatrix H = g.general(n);
    double norm = 0.0;
    for (Eigen::Index r = 0; r < H.rows(); ++r) norm = std::max(norm, H.row(r).cwiseAbs().sum());
    const double t = g.uniform(0.05, 1.0) / norm;
    const double hbar = g.uniform(0.5, 2.0);
    const CMatrix U = matexp(OperatorMatrix::general(H), t * hbar, hbar).matrix();
    CHECK(testsupport::max_abs(U, testsupport::taylor_propagator(H, t)) < 1e-12);
  });
}

TEST_CASE("matexp of large Hermitian generators matches diagonalization") {
  testsupport::for_trials(22, 20, [](Gen& g, int) {
    const std::size_t n = g.index(2, 8);
    const CMatrix H = 20.0 * g.hermitian(n);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    const CMatrix oracle =
        es.eigenvectors() * (Complex(0, -3.0) * es.eigenvalues().cast<Complex>()).array().exp().matrix().asDiagonal() *
        es.eigenvectors().adjoint();
    CHECK(testsupport::max_abs(matexp(OperatorMatrix::hermitian(H), 3.0, 1.0).matrix(), oracle) < 1e-10);
  });
}

TEST_CASE("propagator invariants") {
  testsupport::for_trials(23, 40, [](Gen& g, int trial) {
    const std::size_t n = g.index(1, 7);
    const bool herm = trial % 2 == 0;
    const OperatorMatrix H = herm ? OperatorMatrix::hermitian(g.hermitian(n)) : OperatorMatrix::general(g.non_normal(n));
    const double t1 = g.uniform(0.0, 2.0);
    const double t2 = g.uniform(0.0, 2.0);
    const double hbar = g.uniform(0.5, 1.5);
    const Propagator a = matexp(H, t1, hbar);
    const Propagator b = matexp(H, t2, hbar);
    const Propagator ab = a.then(b);
    CHECK(ab.duration() == doctest::Approx(t1 + t2));
    CHECK(testsupport::max_abs(ab.matrix(), matexp(H, t1 + t2, hbar).matrix()) < 1e-10);
    if (herm) {
      const CMatrix U = a.matrix();
      CHECK(testsupport::max_abs(U.adjoint() * U, CMatrix::Identity(U.rows(), U.cols())) < 1e-10);
      CHECK(std::abs(std::abs(U.determinant()) - 1.0) < 1e-10);
    }
  });
  CHECK_THROWS_AS(matexp(OperatorMatrix::identity(2), 1.0, 1.0).then(matexp(OperatorMatrix::identity(2), 1.0, 2.0)),
                  InvalidArgument);
}

TEST_CASE("eigh examples") {
  const auto id = eigh(OperatorMatrix::identity(3));
  for (double v : id.eigenvalues) CHECK(v == doctest::Approx(1.0));
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(id.eigenvectors[k][k] - 1.0) < 1e-14);

  const auto d = eigh(OperatorMatrix::diagonal({3.0, 1.0}));
  CHECK(d.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(d.eigenvalues[1] == doctest::Approx(3.0));
  CHECK(std::abs(d.eigenvectors[0][1] - 1.0) < 1e-14);
  CHECK(std::abs(d.eigenvectors[1][0] - 1.0) < 1e-14);

  const auto x = eigh(OperatorMatrix::hermitian(sigma_x()));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(x.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(x.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(std::abs(x.eigenvectors[0][0] - r) < 1e-14);
  CHECK(std::abs(x.eigenvectors[0][1] + r) < 1e-14);
  CHECK(std::abs(x.eigenvectors[1][0] - r) < 1e-14);
  CHECK(std::abs(x.eigenvectors[1][1] - r) < 1e-14);

  CMatrix nh(2, 2);
  nh << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigh(OperatorMatrix::general(nh)), InvalidArgument);
}

TEST_CASE("eigh properties") {
  testsupport::for_trials(24, 40, [](Gen& g, int) {
    const std::size_t n = g.index(1, 8);
    const CMatrix O = g.hermitian(n);
    const auto e = eigh(OperatorMatrix::hermitian(O));
    CMatrix rebuilt = CMatrix::Zero(O.rows(), O.cols());
    for (std::size_t k = 0; k < n; ++k) {
      const CVector& v = e.eigenvectors[k].amplitudes();
      CHECK((O * v - e.eigenvalues[k] * v).cwiseAbs().maxCoeff() < 1e-10);
      if (k > 0) CHECK(e.eigenvalues[k - 1] <= e.eigenvalues[k]);
      for (std::size_t j = 0; j < n; ++j) {
        const Complex ip = e.eigenvectors[j].amplitudes().dot(v);
        CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-10);
      }
      Eigen::Index big = 0;
      v.cwiseAbs().maxCoeff(&big);
      CHECK(v(big).imag() == 0.0);
      CHECK(v(big).real() > 0.0);
      rebuilt += e.eigenvalues[k] * v * v.adjoint();
    }
    CHECK(testsupport::max_abs(rebuilt, O) < 1e-10);
  });
}

TEST_CASE("fix_phase") {
  CVector v(3);
  v << Complex(0.1, 0.2), Complex(0, -2), Complex(1, 0);
  const CVector w = fix_phase(v);
  CHECK(w(1) == Complex(2.0, 0.0));
  CHECK(std::abs(std::abs(w(0)) - std::abs(v(0))) < 1e-15);
  CVector tie(2);
  tie << Complex(0, 1), Complex(-1, 0);
  const CVector t = fix_phase(tie);
  CHECK(std::abs(t(0) - 1.0) < 1e-15);
}

TEST_CASE("json interchange round trips") {
  Gen g(25);
  const StateVector s(g.vector(4));
  const StateVector s2 = state_from_json(to_json(s));
  CHECK(s2.amplitudes() == s.amplitudes());
  const CMatrix m = g.general(3);
  CHECK(matrix_from_json(to_json(m)) == m);
  CHECK(to_json(StateVector{Complex(1, 2)}).dump() == "[[1.0,2.0]]");
  CHECK(matrix_from_json(nlohmann::json::parse("[[1, [0, 2]], [[0, -2], 3]]"))(0, 1) == Complex(0, 2));
  CHECK_THROWS(matrix_from_json(nlohmann::json::parse("[[1, 2], [3]]")));
  CHECK_THROWS(complex_from_json(nlohmann::json::parse("\"x\"")));
}
