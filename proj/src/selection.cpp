#include "wvpath/selection.hpp"

#include <Eigen/SVD>

namespace wvpath {

OverlapMaximum maximize_overlap(const OperatorMatrix& H, double t_i, double t_f, double hbar,
                                const Tolerances& tol) {
  if (!(t_f > t_i)) throw InvalidArgument("maximize_overlap requires t_f > t_i");
  const CMatrix U = matexp(H, t_f - t_i, hbar).matrix();
  // Always on the propagator: for non-normal H its singular values are not
  // simple functions of the spectrum of H.
  Eigen::JacobiSVD<CMatrix> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);

  OverlapMaximum out;
  const Eigen::VectorXd& s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  out.value = s(0);
  out.degenerate = s.size() > 1 && (s(0) - s(1)) <= tol.singular_gap * s(0);

  const CVector right = fix_phase(svd.matrixV().col(0));
  out.initial = StateVector(right);
  const CVector image = U * right;
  out.final_state = out.value > 0.0 ? StateVector(image / out.value) : StateVector(fix_phase(svd.matrixU().col(0)));
  return out;
}

SelectedSuite selected_weak_value_suite(const OperatorMatrix& H, const std::vector<NamedObservable>& observables,
                                        double t_i, double t_f, const std::vector<double>& grid, double hbar,
                                        double reality_tol, const Tolerances& tol) {
  for (const auto& o : observables)
    if (!o.op.is_hermitian()) throw InvalidArgument("observable '" + o.name + "' is not Hermitian");

  SelectedSuite suite;
  suite.selection = maximize_overlap(H, t_i, t_f, hbar, tol);
  const BoundaryPair pair(suite.selection.initial, suite.selection.final_state, t_i, t_f);
  for (const auto& o : observables) {
    SuiteEntry e;
    e.observable_name = o.name;
    e.series = weak_value_series(o.op, pair, H, grid, hbar, tol);
    e.report = reality_report(e.series, reality_tol);
    e.representative_of_degenerate_set = suite.selection.degenerate;
    suite.entries.push_back(std::move(e));
  }
  return suite;
}

nlohmann::json to_json(const SelectedSuite& suite) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& e : suite.entries) {
    records.push_back({{"observable_name", e.observable_name},
                       {"value", suite.selection.value},
                       {"degenerate", suite.selection.degenerate},
                       {"max_imag_abs", e.report.max_imag_abs}});
  }
  return records;
}

}  // namespace wvpath
