#pragma once

// Beating-clock interference. A clock ticks along each history at a rate
// relative to standard time; its delay ratio
//   delta[q, t] = (t - c[q, t]) / period
// supplies a phase 2 pi delta that turns positive path weights into
// interfering amplitudes.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wvpath/pathspace.hpp"
#include "wvpath/trajectory.hpp"

namespace wvpath {

struct ClockModel {
  double period = 1.0;
  /// Ticking rate at a position and time, relative to the standard rate.
  std::function<double(const Eigen::VectorXd& position, double t)> rate;

  static ClockModel standard(double period);
  /// Rate that depends only on the lattice site.
  static ClockModel site_rates(double period, std::vector<double> rates);
};

struct DelaySeries {
  std::vector<double> times;
  std::vector<double> c_standard;  // = times
  std::vector<double> c;           // clock stand, synchronized at the first slice
  std::vector<double> delta;       // (c_standard - c) / period
};

DelaySeries clock_stand(const Trajectory& traj, const ClockModel& clock);
/// Lattice path with slice k at time t0 + k * lattice.dt(); position = site index.
DelaySeries clock_stand(const Path& path, const PathLattice& lattice, const ClockModel& clock, double t0 = 0.0);

/// delta accumulated between two slices.
double delay_between(const DelaySeries& series, std::size_t from, std::size_t to);

/// iS = S_P + i delta: real part is the probability exponent, imaginary part the phase.
Complex combined_action(double s_p, double delta);

/// An exponent that splits as S_P = S_rest + S_clock.
struct SeparableClockAction {
  RealAction rest;
  RealAction clock_part;

  double full(const Path& q) const { return rest(q) + clock_part(q); }
};

enum class CombinedForm {
  clock_removed,  // iS = S_P|clock removed + i delta
  with_clock,     // iS = S_P + i delta
};

Complex combined_action(const SeparableClockAction& action, const Path& q, double delta,
                        CombinedForm form = CombinedForm::clock_removed);

/// -coupling * sum_k dt * (rate_k - 1)^2: penalizes clocks that do not beat at the standard rate.
RealAction clock_mismatch_penalty(const PathLattice& lattice, const ClockModel& clock, double coupling);

/// Complex path weight exp(s_p / hbar) * exp(2 pi i delta).
Complex clocked_weight(double s_p, double delta, double hbar);

/// cos^2(Delta / 2) with Delta = 2 pi (delta_a - delta_b).
double two_path_probability(double delta_a, double delta_b);

/// |w_a + w_b e^{i Delta}|^2 / (|w_a| + |w_b|)^2.
double two_amplitude_suppression(Complex w_a, Complex w_b, double phase_difference);

struct SplitSpec {
  std::size_t start_site = 0;
  std::size_t end_site = 0;
  std::vector<std::size_t> branch_a_sites;
  std::vector<std::size_t> branch_b_sites;
  /// The delay is accumulated between these slices.
  std::size_t split_slice = 0;
  std::size_t rejoin_slice = 0;
};

struct DoubleSlitReport {
  std::size_t paths_a = 0;
  std::size_t paths_b = 0;
  double delta_a = 0.0;  // |amplitude|-weighted mean split-segment delay, branch A
  double delta_b = 0.0;
  double phase_difference = 0.0;  // 2 pi (delta_a - delta_b)
  double suppression_law = 1.0;   // two_path_probability(delta_a, delta_b)
  double suppression_amplitudes = 1.0;  // from the per-path phased sums
  Complex bundle_a = 0.0;  // sum over branch A of amplitude * clock phase
  Complex bundle_b = 0.0;
  double clockless_probability = 0.0;  // sum of |amplitude| over both branches
  double clock_probability = 0.0;      // clockless_probability * suppression_amplitudes
  /// Weak values of the which-branch projectors; absent when the branches cancel.
  std::optional<Complex> which_path_a;
  std::optional<Complex> which_path_b;
};

/// A path belongs to branch A when it visits some branch-A site and no
/// branch-B site (and symmetrically for B); only paths from start_site to
/// end_site count.
DoubleSlitReport double_slit_demo(const PathLattice& lattice, const PathAction& A, const ClockModel& clock,
                                  const SplitSpec& split, const EnumerationOptions& opts = {});

void write_csv(std::ostream& out, const DelaySeries& series);
nlohmann::json to_json(const DoubleSlitReport& r);

}  // namespace wvpath
