#pragma once

// Favored paths of a continuous configuration: the real exponent
//   S_P = orientation * integral (K - V) dt,   K = sum_i m_i qdot_i^2 / 2,
// discretized with forward differences for qdot and trapezoidal weights for V.
// The orientation is +scale in kinetic_favored mode (conventional mechanics
// sign) and -scale in potential_favored mode, where exp(S_P/hbar) prefers
// standing high on the potential.
//
// Both modes share the stationarity condition
//   m (q_{t+1} - 2 q_t + q_{t-1}) / dt^2 + grad V(q_t) = 0,
// which is what the residual measures; multiplying the action by any nonzero
// constant leaves it untouched.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wvpath/errors.hpp"

namespace wvpath {

struct Potential {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> value;
  /// Optional analytic derivatives; central differences are used otherwise.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

  double operator()(const Eigen::VectorXd& x) const { return value(x); }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hess(const Eigen::VectorXd& x) const;
};

Potential zero_potential();
/// V(q) = sum_i k_i q_i^2 / 2 with one stiffness per coordinate (broadcast if 1).
Potential harmonic_potential(std::vector<double> stiffness);

/// Two Gaussian bumps on a linear slope, in one dimension:
/// V(q) = a_h exp(-(q-a_c)^2 / 2 a_w^2) + b_h exp(-(q-b_c)^2 / 2 b_w^2) + slope q.
struct TwoPeakParams {
  double height_a = 1.0;
  double center_a = -1.0;
  double width_a = 0.35;
  double height_b = 0.9;
  double center_b = 1.0;
  double width_b = 0.35;
  double slope = 0.0;
};
Potential two_peak_potential(const TwoPeakParams& p);
nlohmann::json to_json(const TwoPeakParams& p);

enum class SignMode { potential_favored, kinetic_favored };
const char* to_string(SignMode m);
SignMode sign_mode_from_string(const std::string& s);

struct ActionModel {
  std::vector<double> masses;
  Potential potential;
  SignMode sign_mode = SignMode::potential_favored;
  double dt = 0.01;
  double hbar = 1.0;
  /// Overall constant multiplying the whole action.
  double scale = 1.0;

  /// Coefficient of integral (K - V) dt in S_P.
  double orientation() const;
  void validate(std::size_t dim) const;
};

struct Trajectory {
  double t0 = 0.0;
  double dt = 0.01;
  Eigen::MatrixXd positions;  // (T+1) x d
  bool fixed_start = true;
  bool fixed_end = true;

  std::size_t slices() const noexcept { return static_cast<std::size_t>(positions.rows()); }
  std::size_t steps() const noexcept { return slices() == 0 ? 0 : slices() - 1; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(positions.cols()); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  std::vector<double> times() const;

  static Trajectory linear(double t0, double dt, std::size_t steps, const Eigen::VectorXd& from,
                           const Eigen::VectorXd& to);
  static Trajectory sampled(const std::function<Eigen::VectorXd(double)>& q, double t0, double dt,
                            std::size_t steps);
};

/// Joins two trajectories that share the junction slice.
Trajectory concatenate(const Trajectory& a, const Trajectory& b);

double action_value(const Trajectory& traj, const ActionModel& model);

/// dS_P/dq_t for every slice, (T+1) x d.
Eigen::MatrixXd action_gradient(const Trajectory& traj, const ActionModel& model);

/// Max-norm of the discrete Euler-Lagrange residual over interior slices.
double stationarity_residual(const Trajectory& traj, const ActionModel& model);

struct OptimizerConfig {
  std::size_t gradient_iterations = 200;
  std::size_t newton_iterations = 100;
  bool newton = true;
  double tol_residual = 1e-8;
  /// Characteristic force scale multiplying tol_residual; 0 picks
  /// max(1, max |grad V| over the initial path).
  double residual_scale = 0.0;
  double bump = 1e-5;
};

enum class ExtremumKind { maximum, minimum, saddle };
const char* to_string(ExtremumKind k);

struct FavoredPathReport {
  double action = 0.0;
  double residual = 0.0;
  double residual_tolerance = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Behaviour of S_P under single-coordinate bumps.
  ExtremumKind extremum = ExtremumKind::saddle;
};

struct FavoredPath {
  Trajectory trajectory;
  FavoredPathReport report;
};

/// Stationary path of the action reached from `init`; its endpoint flags say
/// which ends stay fixed. Hitting the iteration cap is reported through
/// `converged == false` with the best iterate.
FavoredPath find_favored_path(const ActionModel& model, const Trajectory& init, const OptimizerConfig& config = {});

/// Classify the bump response of S_P around `traj`.
ExtremumKind bump_extremum(const Trajectory& traj, const ActionModel& model, double bump);

// ------------------------------------------------------------- scenario

struct PeakInfo {
  double position = 0.0;
  double height = 0.0;
};

/// Local maxima of a one-dimensional potential on [lo, hi], refined to
/// |V'| ~ 0, ordered by descending height.
std::vector<PeakInfo> find_peaks(const Potential& V, double lo, double hi, std::size_t grid = 4001);

struct DwellStats {
  std::vector<double> dwell_fraction;     // per peak (same order as the report's peaks)
  std::size_t transit_count = 0;          // moves between distinct peak neighborhoods
  std::vector<double> transit_durations;  // time from leaving one neighborhood to entering the next
};

DwellStats dwell_statistics(const Trajectory& traj, const std::vector<PeakInfo>& peaks, double eps_peak);

struct ScenarioPath {
  std::string label;  // e.g. "A-only", "A->B", "restart-3"
  FavoredPath path;
  DwellStats dwell;
};

struct SlowRollConfig {
  double duration = 6.0;
  std::size_t restarts = 8;
  std::uint64_t seed = 1;
  double domain_lo = -3.0;
  double domain_hi = 3.0;
  /// Peak neighborhood radius as a fraction of the distance between the two highest peaks.
  double eps_fraction = 0.05;
  OptimizerConfig optimizer{};
};

struct SlowRollReport {
  std::vector<PeakInfo> peaks;  // [0] = A (highest), [1] = B
  double eps_peak = 0.0;
  std::vector<ScenarioPath> ranked;  // descending action, ties by label
};

SlowRollReport slow_roll_scenario(const ActionModel& model, const SlowRollConfig& config);

void write_csv(std::ostream& out, const Trajectory& traj);
nlohmann::json to_json(const FavoredPathReport& r);
nlohmann::json to_json(const SlowRollReport& r);

}  // namespace wvpath
