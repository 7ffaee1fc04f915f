#include "wvpath/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace wvpath {

// ---------------------------------------------------------------- potentials

Eigen::VectorXd Potential::grad(const Eigen::VectorXd& x) const {
  if (gradient) return gradient(x);
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = value(probe);
    probe(i) = x(i) - h;
    const double down = value(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd Potential::hess(const Eigen::VectorXd& x) const {
  if (hessian) return hessian(x);
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const Eigen::VectorXd up = grad(probe);
    probe(i) = x(i) - h;
    const Eigen::VectorXd down = grad(probe);
    probe(i) = x(i);
    H.col(i) = (up - down) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

Potential zero_potential() {
  Potential p;
  p.name = "zero";
  p.value = [](const Eigen::VectorXd&) { return 0.0; };
  p.gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()).eval(); };
  p.hessian = [](const Eigen::VectorXd& x) { return Eigen::MatrixXd::Zero(x.size(), x.size()).eval(); };
  return p;
}

Potential harmonic_potential(std::vector<double> stiffness) {
  if (stiffness.empty()) throw InvalidArgument("harmonic potential needs a stiffness");
  auto k_of = [stiffness](Eigen::Index i) {
    return stiffness.size() == 1 ? stiffness[0] : stiffness.at(static_cast<std::size_t>(i));
  };
  Potential p;
  p.name = "harmonic";
  p.value = [k_of](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) v += 0.5 * k_of(i) * x(i) * x(i);
    return v;
  };
  p.gradient = [k_of](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = k_of(i) * x(i);
    return g;
  };
  p.hessian = [k_of](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) h(i, i) = k_of(i);
    return h;
  };
  return p;
}

Potential two_peak_potential(const TwoPeakParams& pp) {
  if (!(pp.width_a > 0.0) || !(pp.width_b > 0.0)) throw InvalidArgument("two-peak widths must be positive");
  struct Bump {
    double h, c, w;
    double v(double x) const { return h * std::exp(-(x - c) * (x - c) / (2.0 * w * w)); }
    double d1(double x) const { return -v(x) * (x - c) / (w * w); }
    double d2(double x) const { return v(x) * ((x - c) * (x - c) / (w * w) - 1.0) / (w * w); }
  };
  const Bump a{pp.height_a, pp.center_a, pp.width_a};
  const Bump b{pp.height_b, pp.center_b, pp.width_b};
  const double slope = pp.slope;
  auto require_1d = [](const Eigen::VectorXd& x) {
    if (x.size() != 1) throw DimensionMismatch(1, static_cast<std::size_t>(x.size()));
  };
  Potential p;
  p.name = "two_peak";
  p.value = [=](const Eigen::VectorXd& x) {
    require_1d(x);
    return a.v(x(0)) + b.v(x(0)) + slope * x(0);
  };
  p.gradient = [=](const Eigen::VectorXd& x) {
    require_1d(x);
    return Eigen::VectorXd::Constant(1, a.d1(x(0)) + b.d1(x(0)) + slope).eval();
  };
  p.hessian = [=](const Eigen::VectorXd& x) {
    require_1d(x);
    return Eigen::MatrixXd::Constant(1, 1, a.d2(x(0)) + b.d2(x(0))).eval();
  };
  return p;
}

nlohmann::json to_json(const TwoPeakParams& p) {
  return {{"height_a", p.height_a}, {"center_a", p.center_a}, {"width_a", p.width_a}, {"height_b", p.height_b},
          {"center_b", p.center_b}, {"width_b", p.width_b},   {"slope", p.slope}};
}

const char* to_string(SignMode m) {
  return m == SignMode::potential_favored ? "potential_favored" : "kinetic_favored";
}

SignMode sign_mode_from_string(const std::string& s) {
  if (s == "potential_favored") return SignMode::potential_favored;
  if (s == "kinetic_favored") return SignMode::kinetic_favored;
  throw InvalidArgument("unknown sign_mode '" + s + "'");
}

const char* to_string(ExtremumKind k) {
  switch (k) {
    case ExtremumKind::maximum: return "maximum";
    case ExtremumKind::minimum: return "minimum";
    case ExtremumKind::saddle: return "saddle";
  }
  return "saddle";
}

// -------------------------------------------------------------------- model

double ActionModel::orientation() const {
  return sign_mode == SignMode::kinetic_favored ? scale : -scale;
}

void ActionModel::validate(std::size_t dim) const {
  if (masses.size() != dim && masses.size() != 1)
    throw InvalidArgument("need one mass per coordinate (or a single shared mass)");
  for (double m : masses)
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("masses must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive");
  if (scale == 0.0 || !std::isfinite(scale)) throw InvalidArgument("action scale must be finite and nonzero");
  if (!potential.value) throw InvalidArgument("model has no potential");
}

namespace {

double mass(const ActionModel& m, Eigen::Index i) {
  return m.masses.size() == 1 ? m.masses[0] : m.masses[static_cast<std::size_t>(i)];
}

void check_compatible(const Trajectory& traj, const ActionModel& model) {
  if (traj.slices() < 2) throw InvalidArgument("trajectory needs at least two slices");
  model.validate(traj.dim());
  if (std::abs(traj.dt - model.dt) > 1e-12 * model.dt)
    throw InvalidArgument("trajectory dt does not match the model dt");
  if (!traj.positions.allFinite()) throw InvalidArgument("trajectory has non-finite positions");
}

double potential_at(const ActionModel& model, const Trajectory& traj, std::size_t k) {
  const double v = model.potential(traj.positions.row(static_cast<Eigen::Index>(k)).transpose());
  if (!std::isfinite(v)) throw InvalidArgument("potential is non-finite at slice " + std::to_string(k));
  return v;
}

// Integral of K - V, no orientation.
double lagrangian_action(const Trajectory& traj, const ActionModel& model) {
  const double dt = traj.dt;
  double total = 0.0;
  double v_prev = potential_at(model, traj, 0);
  for (std::size_t k = 0; k + 1 < traj.slices(); ++k) {
    const double v_next = potential_at(model, traj, k + 1);
    double kinetic = 0.0;
    for (Eigen::Index i = 0; i < traj.positions.cols(); ++i) {
      const double dq = traj.positions(static_cast<Eigen::Index>(k + 1), i) - traj.positions(static_cast<Eigen::Index>(k), i);
      kinetic += 0.5 * mass(model, i) * dq * dq / dt;
    }
    total += kinetic - 0.5 * dt * (v_prev + v_next);
    v_prev = v_next;
  }
  return total;
}

// d/dq of integral (K - V), no orientation.
Eigen::MatrixXd lagrangian_gradient(const Trajectory& traj, const ActionModel& model) {
  const auto n = static_cast<Eigen::Index>(traj.slices());
  const Eigen::Index d = traj.positions.cols();
  const double dt = traj.dt;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double w = (t == 0 || t == n - 1) ? 0.5 : 1.0;
    const Eigen::VectorXd gv = model.potential.grad(traj.positions.row(t).transpose());
    for (Eigen::Index i = 0; i < d; ++i) {
      const double m = mass(model, i);
      double v = -w * dt * gv(i);
      if (t > 0) v += m * (traj.positions(t, i) - traj.positions(t - 1, i)) / dt;
      if (t < n - 1) v -= m * (traj.positions(t + 1, i) - traj.positions(t, i)) / dt;
      g(t, i) = v;
    }
  }
  return g;
}

struct FreeRange {
  Eigen::Index first;
  Eigen::Index last;  // inclusive
};

FreeRange free_range(const Trajectory& traj) {
  const auto n = static_cast<Eigen::Index>(traj.slices());
  return {traj.fixed_start ? 1 : 0, traj.fixed_end ? n - 2 : n - 1};
}

double free_gradient_max(const Eigen::MatrixXd& g, const FreeRange& r) {
  if (r.last < r.first) return 0.0;
  return g.middleRows(r.first, r.last - r.first + 1).cwiseAbs().maxCoeff();
}

// Newton step for grad L = 0 over the free slices. Returns false when the
// sparse factorization fails.
bool newton_direction(const Trajectory& traj, const ActionModel& model, const Eigen::MatrixXd& g,
                      const FreeRange& r, Eigen::MatrixXd& step) {
  const auto n = static_cast<Eigen::Index>(traj.slices());
  const Eigen::Index d = traj.positions.cols();
  const Eigen::Index free = r.last - r.first + 1;
  const double dt = traj.dt;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(free * d * (3 + d)));
  auto var = [&](Eigen::Index t, Eigen::Index i) { return (t - r.first) * d + i; };

  for (Eigen::Index t = r.first; t <= r.last; ++t) {
    const double w = (t == 0 || t == n - 1) ? 0.5 : 1.0;
    const Eigen::MatrixXd hv = model.potential.hess(traj.positions.row(t).transpose());
    const int neighbours = (t > 0 ? 1 : 0) + (t < n - 1 ? 1 : 0);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double m = mass(model, i);
      for (Eigen::Index j = 0; j < d; ++j) {
        double h = -w * dt * hv(i, j);
        if (i == j) h += neighbours * m / dt;
        if (h != 0.0) entries.emplace_back(var(t, i), var(t, j), h);
      }
      if (t > r.first) entries.emplace_back(var(t, i), var(t - 1, i), -m / dt);
      if (t < r.last) entries.emplace_back(var(t, i), var(t + 1, i), -m / dt);
    }
  }
  Eigen::SparseMatrix<double> H(free * d, free * d);
  H.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(H);
  if (lu.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs(free * d);
  for (Eigen::Index t = r.first; t <= r.last; ++t)
    for (Eigen::Index i = 0; i < d; ++i) rhs(var(t, i)) = -g(t, i);
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;

  step = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index t = r.first; t <= r.last; ++t)
    for (Eigen::Index i = 0; i < d; ++i) step(t, i) = x(var(t, i));
  return true;
}

}  // namespace

// --------------------------------------------------------------- trajectory

std::vector<double> Trajectory::times() const {
  std::vector<double> out(slices());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

Trajectory Trajectory::linear(double t0, double dt, std::size_t steps, const Eigen::VectorXd& from,
                              const Eigen::VectorXd& to) {
  if (from.size() != to.size()) throw DimensionMismatch(static_cast<std::size_t>(from.size()), static_cast<std::size_t>(to.size()));
  if (steps == 0) throw InvalidArgument("trajectory needs at least one step");
  Trajectory tr;
  tr.t0 = t0;
  tr.dt = dt;
  tr.positions.resize(static_cast<Eigen::Index>(steps + 1), from.size());
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(steps);
    tr.positions.row(static_cast<Eigen::Index>(k)) = ((1.0 - s) * from + s * to).transpose();
  }
  return tr;
}

Trajectory Trajectory::sampled(const std::function<Eigen::VectorXd(double)>& q, double t0, double dt,
                               std::size_t steps) {
  Trajectory tr;
  tr.t0 = t0;
  tr.dt = dt;
  const Eigen::VectorXd first = q(t0);
  tr.positions.resize(static_cast<Eigen::Index>(steps + 1), first.size());
  for (std::size_t k = 0; k <= steps; ++k)
    tr.positions.row(static_cast<Eigen::Index>(k)) = q(t0 + dt * static_cast<double>(k)).transpose();
  return tr;
}

Trajectory concatenate(const Trajectory& a, const Trajectory& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  if (std::abs(a.dt - b.dt) > 1e-12 * a.dt) throw InvalidArgument("cannot join trajectories with different dt");
  if ((a.positions.bottomRows(1) - b.positions.topRows(1)).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("trajectories do not meet at the junction slice");
  Trajectory out;
  out.t0 = a.t0;
  out.dt = a.dt;
  out.fixed_start = a.fixed_start;
  out.fixed_end = b.fixed_end;
  out.positions.resize(a.positions.rows() + b.positions.rows() - 1, a.positions.cols());
  out.positions.topRows(a.positions.rows()) = a.positions;
  out.positions.bottomRows(b.positions.rows() - 1) = b.positions.bottomRows(b.positions.rows() - 1);
  return out;
}

double action_value(const Trajectory& traj, const ActionModel& model) {
  check_compatible(traj, model);
  return model.orientation() * lagrangian_action(traj, model);
}

Eigen::MatrixXd action_gradient(const Trajectory& traj, const ActionModel& model) {
  check_compatible(traj, model);
  return model.orientation() * lagrangian_gradient(traj, model);
}

double stationarity_residual(const Trajectory& traj, const ActionModel& model) {
  if (traj.slices() < 3) throw InvalidArgument("stationarity residual needs interior slices (T >= 2)");
  const Eigen::MatrixXd g = action_gradient(traj, model);
  const double norm = std::abs(model.orientation()) * traj.dt;
  return g.middleRows(1, g.rows() - 2).cwiseAbs().maxCoeff() / norm;
}

ExtremumKind bump_extremum(const Trajectory& traj, const ActionModel& model, double bump) {
  check_compatible(traj, model);
  const FreeRange r = free_range(traj);
  const auto n = static_cast<Eigen::Index>(traj.slices());
  const Eigen::Index d = traj.positions.cols();
  const double dt = traj.dt;
  const double orient = model.orientation();
  bool any_up = false;
  bool any_down = false;
  Eigen::VectorXd probe;
  for (Eigen::Index t = r.first; t <= r.last; ++t) {
    const Eigen::VectorXd x = traj.positions.row(t).transpose();
    const double vx = model.potential(x);
    const double w = (t == 0 || t == n - 1) ? 0.5 : 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double m = mass(model, i);
      for (double h : {bump, -bump}) {
        // Change of integral (K - V) from moving q_t[i] by h, from the local terms only.
        double kin = 0.0;
        if (t > 0) {
          const double dq = x(i) - traj.positions(t - 1, i);
          kin += 0.5 * m * (2.0 * dq * h + h * h) / dt;
        }
        if (t < n - 1) {
          const double dq = traj.positions(t + 1, i) - x(i);
          kin += 0.5 * m * (-2.0 * dq * h + h * h) / dt;
        }
        probe = x;
        probe(i) += h;
        const double dv = model.potential(probe) - vx;
        const double change = orient * (kin - w * dt * dv);
        const double noise = 1e-13 * (std::abs(kin) + w * dt * std::abs(vx)) + 1e-300;
        if (change > noise) any_up = true;
        if (change < -noise) any_down = true;
      }
    }
  }
  if (any_up && any_down) return ExtremumKind::saddle;
  return any_up ? ExtremumKind::minimum : ExtremumKind::maximum;
}

FavoredPath find_favored_path(const ActionModel& model, const Trajectory& init, const OptimizerConfig& config) {
  check_compatible(init, model);
  if (init.slices() < 3) throw InvalidArgument("favored path needs at least one interior slice");

  Trajectory q = init;
  const FreeRange free = free_range(q);
  const double dt = q.dt;

  double scale = config.residual_scale;
  if (scale <= 0.0) {
    scale = 1.0;
    for (std::size_t k = 0; k < q.slices(); ++k)
      scale = std::max(scale, model.potential.grad(q.positions.row(static_cast<Eigen::Index>(k)).transpose())
                                  .cwiseAbs()
                                  .maxCoeff());
  }
  const double tol = config.tol_residual * scale;

  // The iteration works on the normalized integral (K - V), which has the
  // same stationary paths as S_P in either sign mode. It ascends
  // integral (V - K), which is bounded above in the kinetic term.
  auto measure = [&](const Eigen::MatrixXd& g) { return free_gradient_max(g, free) / dt; };
  Eigen::MatrixXd g = lagrangian_gradient(q, model);
  double res = measure(g);
  std::size_t iterations = 0;

  double max_mass = 0.0;
  for (double m : model.masses) max_mass = std::max(max_mass, m);
  double step = dt / max_mass;
  double objective = -lagrangian_action(q, model);
  for (std::size_t it = 0; it < config.gradient_iterations && res > tol; ++it) {
    ++iterations;
    Eigen::MatrixXd dir = -g;
    if (init.fixed_start) dir.row(0).setZero();
    if (init.fixed_end) dir.row(dir.rows() - 1).setZero();
    const double slope = dir.squaredNorm();
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Trajectory trial = q;
      trial.positions += step * dir;
      const double obj = -lagrangian_action(trial, model);
      if (obj >= objective + 1e-4 * step * slope) {
        q = std::move(trial);
        objective = obj;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    g = lagrangian_gradient(q, model);
    res = measure(g);
  }

  if (config.newton) {
    for (std::size_t it = 0; it < config.newton_iterations && res > tol; ++it) {
      ++iterations;
      Eigen::MatrixXd dir;
      if (!newton_direction(q, model, g, free, dir)) break;
      const double merit = free_gradient_max(g, free);
      bool moved = false;
      double alpha = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        Trajectory trial = q;
        trial.positions += alpha * dir;
        const Eigen::MatrixXd gt = lagrangian_gradient(trial, model);
        if (free_gradient_max(gt, free) < merit) {
          q = std::move(trial);
          g = gt;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      res = measure(g);
    }
  }

  FavoredPath out{q, {}};
  out.report.action = action_value(q, model);
  out.report.residual = q.slices() >= 3 ? stationarity_residual(q, model) : 0.0;
  out.report.residual_tolerance = tol;
  out.report.iterations = iterations;
  out.report.extremum = bump_extremum(q, model, config.bump);
  out.report.converged = res <= tol && out.report.extremum != ExtremumKind::saddle;
  return out;
}

// ------------------------------------------------------------- scenario

std::vector<PeakInfo> find_peaks(const Potential& V, double lo, double hi, std::size_t grid) {
  if (!(hi > lo) || grid < 3) throw InvalidArgument("peak search needs hi > lo and at least 3 grid points");
  auto f = [&](double x) { return V(Eigen::VectorXd::Constant(1, x)); };
  std::vector<double> xs(grid);
  std::vector<double> vs(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
    vs[k] = f(xs[k]);
  }
  std::vector<PeakInfo> peaks;
  for (std::size_t k = 1; k + 1 < grid; ++k) {
    if (!(vs[k] > vs[k - 1] && vs[k] >= vs[k + 1])) continue;
    // Golden-section on the bracketing cell, then a Newton polish on V'.
    double a = xs[k - 1];
    double b = xs[k + 1];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
      if (f(c) > f(d)) {
        b = d;
      } else {
        a = c;
      }
      c = b - phi * (b - a);
      d = a + phi * (b - a);
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 20; ++it) {
      const Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
      const double g = V.grad(xv)(0);
      const double h = V.hess(xv)(0, 0);
      if (!(h < 0.0) || std::abs(g) < 1e-15) break;
      const double nx = x - g / h;
      if (std::abs(nx - x) > (xs[1] - xs[0])) break;
      x = nx;
    }
    peaks.push_back({x, f(x)});
  }
  std::sort(peaks.begin(), peaks.end(), [](const PeakInfo& p, const PeakInfo& q) {
    if (p.height != q.height) return p.height > q.height;
    return p.position < q.position;
  });
  return peaks;
}

DwellStats dwell_statistics(const Trajectory& traj, const std::vector<PeakInfo>& peaks, double eps_peak) {
  DwellStats s;
  s.dwell_fraction.assign(peaks.size(), 0.0);
  const std::size_t n = traj.slices();
  int last_peak = -1;
  std::size_t last_slice = 0;
  for (std::size_t k = 0; k < n; ++k) {
    int here = -1;
    for (std::size_t p = 0; p < peaks.size(); ++p) {
      const double dist = std::abs(traj.positions(static_cast<Eigen::Index>(k), 0) - peaks[p].position);
      if (dist <= eps_peak) {
        here = static_cast<int>(p);
        break;
      }
    }
    if (here < 0) continue;
    s.dwell_fraction[static_cast<std::size_t>(here)] += 1.0;
    if (last_peak >= 0 && here != last_peak) {
      ++s.transit_count;
      s.transit_durations.push_back(traj.dt * static_cast<double>(k - last_slice));
    }
    last_peak = here;
    last_slice = k;
  }
  for (double& f : s.dwell_fraction) f /= static_cast<double>(n);
  return s;
}

namespace {

Trajectory constant_path(double t0, double dt, std::size_t steps, double x) {
  return Trajectory::linear(t0, dt, steps, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, x));
}

Trajectory transfer_path(double dt, std::size_t steps, double from, double to) {
  Trajectory tr = constant_path(0.0, dt, steps, from);
  const double duration = dt * static_cast<double>(steps);
  const double width = duration / 20.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = dt * static_cast<double>(k);
    const double s = 0.5 * (1.0 + std::tanh((t - 0.5 * duration) / width));
    tr.positions(static_cast<Eigen::Index>(k), 0) = from + (to - from) * s;
  }
  tr.positions(0, 0) = from;
  tr.positions(static_cast<Eigen::Index>(steps), 0) = to;
  return tr;
}

}  // namespace

SlowRollReport slow_roll_scenario(const ActionModel& model, const SlowRollConfig& config) {
  model.validate(1);
  if (model.masses.size() != 1) throw InvalidArgument("slow-roll scenario is one-dimensional");
  if (!(config.duration > 0.0)) throw InvalidArgument("scenario duration must be positive");

  SlowRollReport report;
  report.peaks = find_peaks(model.potential, config.domain_lo, config.domain_hi);
  if (report.peaks.size() < 2)
    throw InvalidArgument("potential has fewer than 2 local maxima on the scenario domain");
  const double a = report.peaks[0].position;
  const double b = report.peaks[1].position;
  report.eps_peak = config.eps_fraction * std::abs(a - b);

  const auto steps = static_cast<std::size_t>(std::llround(config.duration / model.dt));
  if (steps < 2) throw InvalidArgument("scenario duration is shorter than two time steps");

  struct Task {
    std::string label;
    Trajectory init;
  };
  std::vector<Task> tasks;
  tasks.push_back({"A-only", constant_path(0.0, model.dt, steps, a)});
  tasks.push_back({"B-only", constant_path(0.0, model.dt, steps, b)});
  tasks.push_back({"A->B", transfer_path(model.dt, steps, a, b)});
  tasks.push_back({"B->A", transfer_path(model.dt, steps, b, a)});

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  for (std::size_t r = 0; r < config.restarts; ++r) {
    const double from = coin(rng) ? a : b;
    const double to = coin(rng) ? a : b;
    Trajectory init = from == to ? constant_path(0.0, model.dt, steps, from) : transfer_path(model.dt, steps, from, to);
    double modes[3];
    for (double& m : modes) m = amp(rng) * std::abs(a - b);
    for (std::size_t k = 1; k < steps; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(steps);
      double bumpv = 0.0;
      for (int j = 0; j < 3; ++j) bumpv += modes[j] * std::sin((j + 1) * M_PI * s);
      init.positions(static_cast<Eigen::Index>(k), 0) += bumpv;
    }
    char label[32];
    std::snprintf(label, sizeof label, "restart-%02zu", r);
    tasks.push_back({label, std::move(init)});
  }

  std::vector<std::future<ScenarioPath>> futures;
  futures.reserve(tasks.size());
  for (const auto& task : tasks) {
    futures.push_back(std::async(std::launch::async, [&model, &config, &report, &task] {
      ScenarioPath sp{task.label, find_favored_path(model, task.init, config.optimizer), {}};
      sp.dwell = dwell_statistics(sp.path.trajectory, report.peaks, report.eps_peak);
      return sp;
    }));
  }
  std::vector<ScenarioPath> all;
  all.reserve(futures.size());
  for (auto& f : futures) all.push_back(f.get());

  std::sort(all.begin(), all.end(), [](const ScenarioPath& x, const ScenarioPath& y) {
    if (x.path.report.action != y.path.report.action) return x.path.report.action > y.path.report.action;
    return x.label < y.label;
  });

  // Restarts that land on an already reported stationary path are dropped.
  for (auto& sp : all) {
    const bool is_restart = sp.label.rfind("restart-", 0) == 0;
    bool duplicate = false;
    if (is_restart && sp.path.report.converged) {
      for (const auto& kept : report.ranked) {
        if (!kept.path.report.converged) continue;
        const double dev =
            (kept.path.trajectory.positions - sp.path.trajectory.positions).cwiseAbs().maxCoeff();
        if (dev < 1e-6) {
          duplicate = true;
          break;
        }
      }
    }
    if (!duplicate) report.ranked.push_back(std::move(sp));
  }
  return report;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  out << "t";
  for (std::size_t i = 0; i < traj.dim(); ++i) out << ",q" << (i + 1);
  out << "\n";
  char buf[40];
  for (std::size_t k = 0; k < traj.slices(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.time(k));
    out << buf;
    for (std::size_t i = 0; i < traj.dim(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.positions(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
      out << buf;
    }
    out << "\n";
  }
}

nlohmann::json to_json(const FavoredPathReport& r) {
  return {{"action", r.action},
          {"residual", r.residual},
          {"residual_tolerance", r.residual_tolerance},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"extremum", to_string(r.extremum)}};
}

nlohmann::json to_json(const SlowRollReport& r) {
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : r.peaks) peaks.push_back({{"position", p.position}, {"height", p.height}});
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& sp : r.ranked) {
    paths.push_back({{"label", sp.label},
                     {"report", to_json(sp.path.report)},
                     {"dwell_fraction", sp.dwell.dwell_fraction},
                     {"transit_count", sp.dwell.transit_count},
                     {"transit_durations", sp.dwell.transit_durations}});
  }
  return {{"peaks", peaks}, {"eps_peak", r.eps_peak}, {"ranked_paths", paths}};
}

}  // namespace wvpath
