#include "wvpath/hilbert.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace wvpath {

namespace {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
  return true;
}

double one_norm(const CMatrix& a) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) best = std::max(best, a.col(c).cwiseAbs().sum());
  return best;
}

}  // namespace

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw InvalidArgument("state vector must have positive dimension");
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector(CVector::Map(std::data(amplitudes), static_cast<Eigen::Index>(amplitudes.size()))) {}

StateVector StateVector::basis(std::size_t dim, std::size_t k) {
  if (k >= dim) throw InvalidArgument("basis index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return StateVector(std::move(v));
}

bool StateVector::is_normalized(const Tolerances& tol) const {
  return std::abs(amps_.squaredNorm() - 1.0) <= tol.normalization;
}

StateVector StateVector::normalized() const {
  const double n = amps_.norm();
  if (n == 0.0 || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite state");
  return StateVector(amps_ / n);
}

// ------------------------------------------------------------- OperatorMatrix

OperatorMatrix::OperatorMatrix(CMatrix entries, OperatorKind kind, const Tolerances& tol)
    : m_(std::move(entries)), kind_(kind) {
  if (m_.rows() == 0 || m_.rows() != m_.cols())
    throw InvalidArgument("operator must be a non-empty square matrix");
  switch (kind_) {
    case OperatorKind::hermitian:
      if (max_abs_diff(m_, m_.adjoint()) > tol.hermitian)
        throw InvalidArgument("operator declared hermitian is not (M != M^dagger)");
      break;
    case OperatorKind::normal:
      if (max_abs_diff(m_ * m_.adjoint(), m_.adjoint() * m_) > tol.normal)
        throw InvalidArgument("operator declared normal does not commute with its adjoint");
      break;
    case OperatorKind::general:
      break;
  }
}

OperatorMatrix OperatorMatrix::classify(CMatrix entries, const Tolerances& tol) {
  if (entries.rows() == entries.cols() && entries.rows() > 0) {
    if (max_abs_diff(entries, entries.adjoint()) <= tol.hermitian)
      return {std::move(entries), OperatorKind::hermitian, tol};
    if (max_abs_diff(entries * entries.adjoint(), entries.adjoint() * entries) <= tol.normal)
      return {std::move(entries), OperatorKind::normal, tol};
  }
  return {std::move(entries), OperatorKind::general, tol};
}

OperatorMatrix OperatorMatrix::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return hermitian(CMatrix::Zero(n, n));
}

OperatorMatrix OperatorMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return hermitian(CMatrix::Identity(n, n));
}

OperatorMatrix OperatorMatrix::diagonal(const std::vector<double>& diag) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = diag[static_cast<std::size_t>(k)];
  return hermitian(std::move(m));
}

OperatorMatrix OperatorMatrix::adjoint() const {
  OperatorMatrix out;
  out.m_ = m_.adjoint();
  out.kind_ = kind_;
  return out;
}

// ----------------------------------------------------------------- Propagator

Propagator::Propagator(CMatrix matrix, double duration, double hbar)
    : u_(std::move(matrix)), duration_(duration), hbar_(hbar) {}

StateVector Propagator::apply(const StateVector& psi) const {
  if (psi.dim() != dim()) throw DimensionMismatch(dim(), psi.dim());
  return StateVector(u_ * psi.amplitudes());
}

Propagator Propagator::then(const Propagator& later) const {
  if (later.dim() != dim()) throw DimensionMismatch(dim(), later.dim());
  if (later.hbar_ != hbar_) throw InvalidArgument("cannot compose propagators with different hbar");
  return {later.u_ * u_, duration_ + later.duration_, hbar_};
}

// ----------------------------------------------------------------- operations

Complex inner(const StateVector& f, const StateVector& i) {
  if (f.dim() != i.dim()) throw DimensionMismatch(f.dim(), i.dim());
  return f.amplitudes().dot(i.amplitudes());  // Eigen conjugates the left operand
}

CMatrix expm(const CMatrix& A) {
  // Higham (2005) degree-13 Pade with scaling and squaring.
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  static constexpr double theta13 = 5.371920351148152;

  if (!all_finite(A)) throw InvalidArgument("matrix exponential of non-finite matrix");
  const Eigen::Index n = A.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  if (A.cwiseAbs().maxCoeff() == 0.0) return I;

  const double norm = one_norm(A);
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const CMatrix As = A / std::ldexp(1.0, squarings);

  const CMatrix A2 = As * As;
  const CMatrix A4 = A2 * A2;
  const CMatrix A6 = A4 * A2;
  const CMatrix U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const CMatrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  CMatrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < squarings; ++k) R = R * R;
  return R;
}

Propagator matexp(const OperatorMatrix& H, double t, double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive and finite");
  if (!std::isfinite(t)) throw InvalidArgument("evolution time must be finite");
  if (!all_finite(H.entries())) throw InvalidArgument("Hamiltonian has non-finite entries");
  const Complex factor(0.0, -t / hbar);
  return {expm(factor * H.entries()), t, hbar};
}

CVector fix_phase(const CVector& v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double a = std::abs(v(k));
    // Later components must beat the current best by a clear margin so that
    // numerically equal magnitudes resolve to the first index.
    if (a > best_abs * (1.0 + 1e-10) + 1e-14) {
      best_abs = a;
      best = k;
    }
  }
  if (best_abs <= 0.0) return v;
  const Complex phase = std::conj(v(best)) / std::abs(v(best));
  CVector out = v * phase;
  out(best) = Complex(std::abs(v(best)), 0.0);
  return out;
}

EigenDecomposition eigh(const OperatorMatrix& O) {
  if (!O.is_hermitian()) throw InvalidArgument("eigh requires a Hermitian operator");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(O.entries());
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver failed to converge");

  const auto n = static_cast<std::size_t>(O.dim());
  const Eigen::VectorXd& values = solver.eigenvalues();
  const CMatrix& vectors = solver.eigenvectors();

  // Eigen already sorts ascending; within a degenerate cluster order by the
  // position of the dominant component so the result does not depend on the
  // solver's internal choice of basis ordering.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  auto dominant = [&](std::size_t k) {
    Eigen::Index idx = 0;
    vectors.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff(&idx);
    return idx;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = values(static_cast<Eigen::Index>(a));
    const double vb = values(static_cast<Eigen::Index>(b));
    if (std::abs(va - vb) > 1e-12 * scale) return va < vb;
    return dominant(a) < dominant(b);
  });

  EigenDecomposition out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t k : order) {
    out.eigenvalues.push_back(values(static_cast<Eigen::Index>(k)));
    out.eigenvectors.emplace_back(fix_phase(vectors.col(static_cast<Eigen::Index>(k))));
  }
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

// ----------------------------------------------------------------------- JSON

nlohmann::json to_json_value(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw InvalidArgument("complex number must be [re, im] or a real number, got " + j.dump());
}

nlohmann::json to_json(const StateVector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.amplitudes().size(); ++k) out.push_back(to_json_value(v.amplitudes()(k)));
  return out;
}

nlohmann::json to_json(const CMatrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json_value(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const OperatorMatrix& m) { return to_json(m.entries()); }

StateVector state_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("state must be a non-empty array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(j[k]);
  return StateVector(std::move(v));
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("matrix must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InvalidArgument("matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = complex_from_json(j[r][c]);
  }
  return m;
}

}  // namespace wvpath
