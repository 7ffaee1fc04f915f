#pragma once

// Time development of the initial and final boundary states.
//
// |i(t)> obeys  i hbar d/dt |i> = H |i>,
// |f(t)> obeys  i hbar d/dt |f> = H^dagger |f>,
// so <f(t)|i(t)> is the same at every t. Nothing here renormalizes: for a
// non-Hermitian H the norm of an evolved state drifts.

#include "wvpath/hilbert.hpp"

namespace wvpath {

class BoundaryPair {
 public:
  /// Validates dimensions and t_f > t_i, and normalizes both states.
  BoundaryPair(StateVector initial, StateVector final_state, double t_i, double t_f);

  const StateVector& initial() const noexcept { return initial_; }
  const StateVector& final_state() const noexcept { return final_; }
  double t_i() const noexcept { return t_i_; }
  double t_f() const noexcept { return t_f_; }
  std::size_t dim() const noexcept { return initial_.dim(); }

 private:
  StateVector initial_;
  StateVector final_;
  double t_i_;
  double t_f_;
};

/// exp(-i H (t_to - t_from)/hbar) |i>; requires t_to >= t_from.
StateVector evolve_initial(const StateVector& i, const OperatorMatrix& H, double t_from, double t_to,
                           double hbar);

/// Solves the H^dagger equation from t_from to t_to in either direction:
/// |f(t_to)> = exp(-i H^dagger (t_to - t_from)/hbar) |f(t_from)>.
/// The usual call runs backward from t_f, where this equals
/// exp(-i H (t_from - t_to)/hbar)^dagger |f(t_from)>.
StateVector evolve_final(const StateVector& f, const OperatorMatrix& H, double t_from, double t_to,
                         double hbar);

}  // namespace wvpath
