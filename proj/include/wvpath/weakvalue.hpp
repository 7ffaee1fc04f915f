#pragma once

// Weak values <f|U(t_f-t) O U(t-t_i)|i> / <f|U(t_f-t_i)|i>, their time
// series, and the projector quasi-probability weights that sum to them.

#include <iosfwd>
#include <vector>

#include "wvpath/evolution.hpp"

namespace wvpath {

struct WeakValueSeries {
  std::vector<double> times;
  std::vector<Complex> values;
  Complex denominator;  // <f|U(t_f - t_i)|i>
};

struct WeightDistribution {
  std::vector<double> eigenvalues;  // one per merged eigenspace, ascending
  std::vector<Complex> weights;     // <f(t)|P_k|i(t)> / <f(t)|i(t)>

  Complex total() const;
  Complex mean() const;  // sum_k lambda_k w_k
};

struct RealityReport {
  double max_imag_abs = 0.0;
  double max_real_abs = 0.0;
  /// max|Im| / max(1, max|Re|)
  double max_imag_over_real = 0.0;
  bool is_real = true;
};

Complex weak_value(const OperatorMatrix& O, const BoundaryPair& pair, const OperatorMatrix& H, double t,
                   double hbar, const Tolerances& tol = default_tolerances());

/// Same quotient for arbitrary (unnormalized) boundary states; the result is
/// invariant under rescaling either state by a nonzero constant.
Complex weak_value(const OperatorMatrix& O, const StateVector& i, const StateVector& f, double t_i,
                   double t_f, const OperatorMatrix& H, double t, double hbar,
                   const Tolerances& tol = default_tolerances());

WeakValueSeries weak_value_series(const OperatorMatrix& O, const BoundaryPair& pair, const OperatorMatrix& H,
                                  const std::vector<double>& grid, double hbar,
                                  const Tolerances& tol = default_tolerances());

WeightDistribution weight_distribution(const OperatorMatrix& O, const BoundaryPair& pair,
                                       const OperatorMatrix& H, double t, double hbar,
                                       const Tolerances& tol = default_tolerances());

/// Projector weights for already-evolved states f(t), i(t).
WeightDistribution weight_distribution(const OperatorMatrix& O, const StateVector& f_t,
                                       const StateVector& i_t, const Tolerances& tol = default_tolerances());

RealityReport reality_report(const WeakValueSeries& series, double tol);

/// Eigenvalue clusters of a Hermitian O with their spectral projectors.
struct SpectralProjector {
  double eigenvalue;
  CMatrix projector;
};
std::vector<SpectralProjector> spectral_projectors(const OperatorMatrix& O,
                                                   const Tolerances& tol = default_tolerances());

/// Uniform grid of `points` times from t_i to t_f inclusive.
std::vector<double> uniform_grid(double t_i, double t_f, std::size_t points);

void write_csv(std::ostream& out, const WeakValueSeries& series);
nlohmann::json to_json(const WeakValueSeries& series);
nlohmann::json to_json(const WeightDistribution& dist);
nlohmann::json to_json(const RealityReport& report);

}  // namespace wvpath
