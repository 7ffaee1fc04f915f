#include "wvpath/evolution.hpp"

#include <cmath>

namespace wvpath {

BoundaryPair::BoundaryPair(StateVector initial, StateVector final_state, double t_i, double t_f)
    : t_i_(t_i), t_f_(t_f) {
  if (initial.dim() != final_state.dim()) throw DimensionMismatch(initial.dim(), final_state.dim());
  if (!std::isfinite(t_i) || !std::isfinite(t_f) || !(t_f > t_i))
    throw InvalidArgument("boundary pair requires finite t_f > t_i");
  initial_ = initial.normalized();
  final_ = final_state.normalized();
}

StateVector evolve_initial(const StateVector& i, const OperatorMatrix& H, double t_from, double t_to,
                           double hbar) {
  if (i.dim() != H.dim()) throw DimensionMismatch(H.dim(), i.dim());
  if (t_to < t_from) throw InvalidArgument("evolve_initial runs forward in time (t_to >= t_from)");
  return matexp(H, t_to - t_from, hbar).apply(i);
}

StateVector evolve_final(const StateVector& f, const OperatorMatrix& H, double t_from, double t_to,
                         double hbar) {
  if (f.dim() != H.dim()) throw DimensionMismatch(H.dim(), f.dim());
  if (t_to >= t_from) return matexp(H.adjoint(), t_to - t_from, hbar).apply(f);
  const Propagator u = matexp(H, t_from - t_to, hbar);
  return StateVector(u.matrix().adjoint() * f.amplitudes());
}

}  // namespace wvpath
