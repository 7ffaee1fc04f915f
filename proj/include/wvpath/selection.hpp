#pragma once

// Maximization principle: pick normalized |i>, |f> maximizing
// |<f| exp(-i H (t_f - t_i)/hbar) |i>|. The maximizer is the top singular pair
// of the propagator, and the maximum is its largest singular value.

#include <string>
#include <vector>

#include "wvpath/weakvalue.hpp"

namespace wvpath {

struct OverlapMaximum {
  StateVector initial;  // top right-singular vector, phase-fixed
  StateVector final_state;  // U initial / value
  double value = 0.0;       // sigma_max(U)
  bool degenerate = false;  // sigma_1 - sigma_2 <= gap * sigma_1
  std::vector<double> singular_values;
};

OverlapMaximum maximize_overlap(const OperatorMatrix& H, double t_i, double t_f, double hbar,
                                const Tolerances& tol = default_tolerances());

struct NamedObservable {
  std::string name;
  OperatorMatrix op;
};

struct SuiteEntry {
  std::string observable_name;
  WeakValueSeries series;
  RealityReport report;
  /// The selected pair is one representative of a degenerate maximizing set.
  bool representative_of_degenerate_set = false;
};

struct SelectedSuite {
  OverlapMaximum selection;
  std::vector<SuiteEntry> entries;
};

SelectedSuite selected_weak_value_suite(const OperatorMatrix& H, const std::vector<NamedObservable>& observables,
                                        double t_i, double t_f, const std::vector<double>& grid, double hbar,
                                        double reality_tol = 1e-8,
                                        const Tolerances& tol = default_tolerances());

/// {observable_name, value, degenerate, max_imag_abs} records.
nlohmann::json to_json(const SelectedSuite& suite);

}  // namespace wvpath
