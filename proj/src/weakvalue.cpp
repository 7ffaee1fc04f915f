#include "wvpath/weakvalue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace wvpath {

namespace {

void require_observable(const OperatorMatrix& O, const OperatorMatrix& H) {
  if (!O.is_hermitian()) throw InvalidArgument("observable must be Hermitian");
  if (O.dim() != H.dim()) throw DimensionMismatch(H.dim(), O.dim());
}

void require_time(double t, double t_i, double t_f) {
  if (!(t >= t_i && t <= t_f)) throw InvalidArgument("weak value time must lie in [t_i, t_f]");
}

// <f|U(t_f - t_i)|i>, rejected when it is negligible relative to |i||f|.
Complex checked_denominator(const StateVector& i, const StateVector& f, double t_i, double t_f,
                            const OperatorMatrix& H, double hbar, const Tolerances& tol) {
  if (i.dim() != H.dim()) throw DimensionMismatch(H.dim(), i.dim());
  if (f.dim() != H.dim()) throw DimensionMismatch(H.dim(), f.dim());
  const Complex den = inner(f, matexp(H, t_f - t_i, hbar).apply(i));
  const double scale = i.norm() * f.norm();
  if (!(std::abs(den) > tol.denominator * scale)) throw OrthogonalBoundaryStates(std::abs(den) / scale);
  return den;
}

struct EvolvedPair {
  StateVector i_t;
  StateVector f_t;
};

EvolvedPair evolve_pair(const StateVector& i, const StateVector& f, double t_i, double t_f,
                        const OperatorMatrix& H, double t, double hbar) {
  return {evolve_initial(i, H, t_i, t, hbar), evolve_final(f, H, t_f, t, hbar)};
}

Complex numerator(const OperatorMatrix& O, const EvolvedPair& p) {
  return inner(p.f_t, StateVector(O.entries() * p.i_t.amplitudes()));
}

}  // namespace

Complex WeightDistribution::total() const {
  Complex s = 0.0;
  for (const auto& w : weights) s += w;
  return s;
}

Complex WeightDistribution::mean() const {
  Complex s = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) s += eigenvalues[k] * weights[k];
  return s;
}

Complex weak_value(const OperatorMatrix& O, const StateVector& i, const StateVector& f, double t_i,
                   double t_f, const OperatorMatrix& H, double t, double hbar, const Tolerances& tol) {
  require_observable(O, H);
  require_time(t, t_i, t_f);
  const Complex den = checked_denominator(i, f, t_i, t_f, H, hbar, tol);
  return numerator(O, evolve_pair(i, f, t_i, t_f, H, t, hbar)) / den;
}

Complex weak_value(const OperatorMatrix& O, const BoundaryPair& pair, const OperatorMatrix& H, double t,
                   double hbar, const Tolerances& tol) {
  return weak_value(O, pair.initial(), pair.final_state(), pair.t_i(), pair.t_f(), H, t, hbar, tol);
}

WeakValueSeries weak_value_series(const OperatorMatrix& O, const BoundaryPair& pair, const OperatorMatrix& H,
                                  const std::vector<double>& grid, double hbar, const Tolerances& tol) {
  require_observable(O, H);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    require_time(grid[k], pair.t_i(), pair.t_f());
    if (k > 0 && grid[k] < grid[k - 1]) throw InvalidArgument("time grid must be ascending");
  }
  WeakValueSeries out;
  out.denominator =
      checked_denominator(pair.initial(), pair.final_state(), pair.t_i(), pair.t_f(), H, hbar, tol);
  out.times = grid;
  out.values.reserve(grid.size());
  for (double t : grid)
    out.values.push_back(
        numerator(O, evolve_pair(pair.initial(), pair.final_state(), pair.t_i(), pair.t_f(), H, t, hbar)) /
        out.denominator);
  return out;
}

std::vector<SpectralProjector> spectral_projectors(const OperatorMatrix& O, const Tolerances& tol) {
  const EigenDecomposition eig = eigh(O);
  double norm = 0.0;
  for (double v : eig.eigenvalues) norm = std::max(norm, std::abs(v));
  const double gap = tol.degeneracy_gap * std::max(norm, 1e-300);

  std::vector<SpectralProjector> out;
  const auto n = static_cast<Eigen::Index>(O.dim());
  double cluster_sum = 0.0;
  std::size_t cluster_size = 0;
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    const CVector& v = eig.eigenvectors[k].amplitudes();
    const bool starts_new = out.empty() || eig.eigenvalues[k] - eig.eigenvalues[k - 1] > gap;
    if (starts_new) {
      out.push_back({eig.eigenvalues[k], CMatrix::Zero(n, n)});
      cluster_sum = 0.0;
      cluster_size = 0;
    }
    out.back().projector += v * v.adjoint();
    cluster_sum += eig.eigenvalues[k];
    ++cluster_size;
    out.back().eigenvalue = cluster_sum / static_cast<double>(cluster_size);
  }
  return out;
}

WeightDistribution weight_distribution(const OperatorMatrix& O, const StateVector& f_t, const StateVector& i_t,
                                       const Tolerances& tol) {
  if (!O.is_hermitian()) throw InvalidArgument("observable must be Hermitian");
  if (f_t.dim() != O.dim()) throw DimensionMismatch(O.dim(), f_t.dim());
  if (i_t.dim() != O.dim()) throw DimensionMismatch(O.dim(), i_t.dim());
  const Complex bracket = inner(f_t, i_t);
  const double scale = f_t.norm() * i_t.norm();
  if (!(std::abs(bracket) > tol.denominator * scale)) throw OrthogonalBoundaryStates(std::abs(bracket) / scale);

  WeightDistribution out;
  for (const auto& p : spectral_projectors(O, tol)) {
    out.eigenvalues.push_back(p.eigenvalue);
    out.weights.push_back(inner(f_t, StateVector(p.projector * i_t.amplitudes())) / bracket);
  }
  return out;
}

WeightDistribution weight_distribution(const OperatorMatrix& O, const BoundaryPair& pair,
                                       const OperatorMatrix& H, double t, double hbar, const Tolerances& tol) {
  require_observable(O, H);
  require_time(t, pair.t_i(), pair.t_f());
  checked_denominator(pair.initial(), pair.final_state(), pair.t_i(), pair.t_f(), H, hbar, tol);
  const EvolvedPair p = evolve_pair(pair.initial(), pair.final_state(), pair.t_i(), pair.t_f(), H, t, hbar);
  return weight_distribution(O, p.f_t, p.i_t, tol);
}

RealityReport reality_report(const WeakValueSeries& series, double tol) {
  RealityReport r;
  for (const Complex& v : series.values) {
    r.max_imag_abs = std::max(r.max_imag_abs, std::abs(v.imag()));
    r.max_real_abs = std::max(r.max_real_abs, std::abs(v.real()));
  }
  r.max_imag_over_real = r.max_imag_abs / std::max(1.0, r.max_real_abs);
  r.is_real = r.max_imag_abs <= tol * std::max(1.0, r.max_real_abs);
  return r;
}

std::vector<double> uniform_grid(double t_i, double t_f, std::size_t points) {
  if (points == 0) throw InvalidArgument("time grid needs at least one point");
  if (points == 1) return {t_i};
  std::vector<double> out(points);
  const double step = (t_f - t_i) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) out[k] = t_i + step * static_cast<double>(k);
  out.back() = t_f;
  return out;
}

void write_csv(std::ostream& out, const WeakValueSeries& series) {
  out << "t,re,im\n";
  char buf[96];
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", series.times[k], series.values[k].real(),
                  series.values[k].imag());
    out << buf;
  }
}

nlohmann::json to_json(const WeakValueSeries& series) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : series.values) values.push_back(to_json_value(v));
  return {{"times", series.times}, {"values", values}, {"denominator", to_json_value(series.denominator)}};
}

nlohmann::json to_json(const WeightDistribution& dist) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : dist.weights) weights.push_back(to_json_value(w));
  return {{"eigenvalues", dist.eigenvalues}, {"weights", weights}};
}

nlohmann::json to_json(const RealityReport& r) {
  return {{"max_imag_abs", r.max_imag_abs},
          {"max_real_abs", r.max_real_abs},
          {"max_imag_over_real", r.max_imag_over_real},
          {"is_real", r.is_real}};
}

}  // namespace wvpath
