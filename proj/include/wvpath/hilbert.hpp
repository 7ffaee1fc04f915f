#pragma once

// Core complex linear algebra: state vectors, operators, propagators.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wvpath/errors.hpp"

namespace wvpath {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Default numerical tolerances. Every routine that checks one of these takes
/// a `Tolerances` argument so callers can override them per call.
struct Tolerances {
  double normalization = 1e-12;
  double hermitian = 1e-12;
  double normal = 1e-12;
  double denominator = 1e-12;
  /// Relative gap (times the operator norm) below which eigenvalues merge.
  double degeneracy_gap = 1e-9;
  /// Relative gap between the top two singular values flagged as degenerate.
  double singular_gap = 1e-9;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVector amplitudes);
  StateVector(std::initializer_list<Complex> amplitudes);

  /// Basis vector e_k of dimension `dim`.
  static StateVector basis(std::size_t dim, std::size_t k);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const noexcept { return amps_; }
  Complex operator[](std::size_t k) const { return amps_(static_cast<Eigen::Index>(k)); }

  double norm() const { return amps_.norm(); }
  bool is_normalized(const Tolerances& tol = default_tolerances()) const;

  /// Unit-norm copy; throws InvalidArgument for the zero vector.
  StateVector normalized() const;

  StateVector scaled(Complex factor) const { return StateVector(amps_ * factor); }

 private:
  CVector amps_;
};

enum class OperatorKind { hermitian, normal, general };

/// Square complex matrix whose declared kind is verified on construction.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(CMatrix entries, OperatorKind kind, const Tolerances& tol = default_tolerances());

  static OperatorMatrix hermitian(CMatrix entries, const Tolerances& tol = default_tolerances()) {
    return {std::move(entries), OperatorKind::hermitian, tol};
  }
  static OperatorMatrix general(CMatrix entries) {
    return {std::move(entries), OperatorKind::general};
  }
  /// Classifies the matrix as tightly as the tolerances allow.
  static OperatorMatrix classify(CMatrix entries, const Tolerances& tol = default_tolerances());

  static OperatorMatrix zero(std::size_t dim);
  static OperatorMatrix identity(std::size_t dim);
  /// Real diagonal matrix, always Hermitian.
  static OperatorMatrix diagonal(const std::vector<double>& diag);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& entries() const noexcept { return m_; }
  OperatorKind kind() const noexcept { return kind_; }
  bool is_hermitian() const noexcept { return kind_ == OperatorKind::hermitian; }

  OperatorMatrix adjoint() const;

 private:
  CMatrix m_;
  OperatorKind kind_ = OperatorKind::general;
};

/// exp(-i H t / hbar) together with the time and hbar that produced it.
class Propagator {
 public:
  Propagator(CMatrix matrix, double duration, double hbar);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(u_.rows()); }
  const CMatrix& matrix() const noexcept { return u_; }
  double duration() const noexcept { return duration_; }
  double hbar() const noexcept { return hbar_; }

  StateVector apply(const StateVector& psi) const;

  /// `this * later` is only meaningful when both share a generator; the
  /// product represents evolution over the summed duration.
  Propagator then(const Propagator& later) const;

 private:
  CMatrix u_;
  double duration_;
  double hbar_;
};

/// <f|i> = sum_k conj(f_k) i_k.
Complex inner(const StateVector& f, const StateVector& i);

/// exp(-i H t / hbar) by scaling and squaring with a degree-13 Pade core.
Propagator matexp(const OperatorMatrix& H, double t, double hbar);

/// Matrix exponential of an arbitrary square matrix (the Pade core itself).
CMatrix expm(const CMatrix& A);

struct EigenDecomposition {
  std::vector<double> eigenvalues;         // ascending
  std::vector<StateVector> eigenvectors;   // orthonormal, phase-fixed
};

/// Hermitian eigendecomposition. Each eigenvector is rephased so that its
/// largest-magnitude component (first one on ties) is real and positive.
EigenDecomposition eigh(const OperatorMatrix& O);

/// Rephase `v` so its largest-magnitude component is real positive.
CVector fix_phase(const CVector& v);

/// Largest |M_ij - N_ij|.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

// JSON interchange: nested arrays of [re, im] pairs.
nlohmann::json to_json_value(Complex z);
Complex complex_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StateVector& v);
nlohmann::json to_json(const CMatrix& m);
nlohmann::json to_json(const OperatorMatrix& m);
StateVector state_from_json(const nlohmann::json& j);
CMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace wvpath
