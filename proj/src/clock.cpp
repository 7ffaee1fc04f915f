#include "wvpath/clock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace wvpath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DelaySeries accumulate(std::size_t slices, double t0, double dt, double period,
                       const std::function<double(std::size_t)>& rate_at) {
  if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("clock period must be positive");
  DelaySeries s;
  s.times.resize(slices);
  s.c_standard.resize(slices);
  s.c.resize(slices);
  s.delta.resize(slices);
  // Trapezoid sums are kept in units of dt so a standard clock reproduces
  // t0 + k dt bit for bit.
  double ticks = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < slices; ++k) {
    const double r = rate_at(k);
    if (!(r > 0.0) || !std::isfinite(r))
      throw InvalidArgument("clock rate must be positive and finite (slice " + std::to_string(k) + ")");
    if (k > 0) ticks += 0.5 * (prev + r);
    prev = r;
    s.times[k] = t0 + dt * static_cast<double>(k);
    s.c_standard[k] = s.times[k];
    s.c[k] = t0 + dt * ticks;
    s.delta[k] = (s.c_standard[k] - s.c[k]) / period;
  }
  return s;
}

}  // namespace

ClockModel ClockModel::standard(double period) {
  return {period, [](const Eigen::VectorXd&, double) { return 1.0; }};
}

ClockModel ClockModel::site_rates(double period, std::vector<double> rates) {
  return {period, [rates = std::move(rates)](const Eigen::VectorXd& x, double) {
            const auto site = static_cast<std::size_t>(std::llround(x(0)));
            if (site >= rates.size()) throw InvalidArgument("no clock rate for site " + std::to_string(site));
            return rates[site];
          }};
}

DelaySeries clock_stand(const Trajectory& traj, const ClockModel& clock) {
  if (!clock.rate) throw InvalidArgument("clock has no rate function");
  return accumulate(traj.slices(), traj.t0, traj.dt, clock.period, [&](std::size_t k) {
    return clock.rate(traj.positions.row(static_cast<Eigen::Index>(k)).transpose(), traj.time(k));
  });
}

DelaySeries clock_stand(const Path& path, const PathLattice& lattice, const ClockModel& clock, double t0) {
  if (!clock.rate) throw InvalidArgument("clock has no rate function");
  if (!lattice.contains(path)) throw InvalidArgument("path does not fit the lattice");
  Eigen::VectorXd x(1);
  return accumulate(path.length(), t0, lattice.dt(), clock.period, [&](std::size_t k) {
    x(0) = static_cast<double>(path[k]);
    return clock.rate(x, t0 + lattice.dt() * static_cast<double>(k));
  });
}

double delay_between(const DelaySeries& series, std::size_t from, std::size_t to) {
  if (from >= series.delta.size() || to >= series.delta.size()) throw InvalidArgument("slice outside delay series");
  return series.delta[to] - series.delta[from];
}

Complex combined_action(double s_p, double delta) {
  if (!std::isfinite(s_p) || !std::isfinite(delta)) throw InvalidArgument("combined action inputs must be finite");
  return {s_p, delta};
}

Complex combined_action(const SeparableClockAction& action, const Path& q, double delta, CombinedForm form) {
  const double s = form == CombinedForm::clock_removed ? action.rest(q) : action.full(q);
  return combined_action(s, delta);
}

RealAction clock_mismatch_penalty(const PathLattice& lattice, const ClockModel& clock, double coupling) {
  return [lattice, clock, coupling](const Path& q) {
    Eigen::VectorXd x(1);
    double sum = 0.0;
    for (std::size_t k = 0; k < q.length(); ++k) {
      x(0) = static_cast<double>(q[k]);
      const double r = clock.rate(x, lattice.dt() * static_cast<double>(k)) - 1.0;
      sum += r * r;
    }
    return -coupling * lattice.dt() * sum;
  };
}

Complex clocked_weight(double s_p, double delta, double hbar) {
  return std::polar(path_weight(s_p, hbar), kTwoPi * delta);
}

double two_path_probability(double delta_a, double delta_b) {
  const double c = std::cos(0.5 * kTwoPi * (delta_a - delta_b));
  return c * c;
}

double two_amplitude_suppression(Complex w_a, Complex w_b, double phase_difference) {
  const double denom = std::abs(w_a) + std::abs(w_b);
  if (denom == 0.0) throw InvalidArgument("both amplitudes vanish");
  return std::norm(w_a + w_b * std::polar(1.0, phase_difference)) / (denom * denom);
}

DoubleSlitReport double_slit_demo(const PathLattice& lattice, const PathAction& A, const ClockModel& clock,
                                  const SplitSpec& split, const EnumerationOptions& opts) {
  if (A.sites() != lattice.sites()) throw DimensionMismatch(lattice.sites(), A.sites());
  if (split.start_site >= lattice.sites() || split.end_site >= lattice.sites())
    throw InvalidArgument("split endpoints outside the lattice");
  if (split.split_slice > split.rejoin_slice || split.rejoin_slice > lattice.steps())
    throw InvalidArgument("split slices must satisfy split <= rejoin <= steps");
  std::vector<char> in_a(lattice.sites(), 0);
  std::vector<char> in_b(lattice.sites(), 0);
  for (auto s : split.branch_a_sites) in_a.at(s) = 1;
  for (auto s : split.branch_b_sites) in_b.at(s) = 1;

  struct BranchSums {
    Complex phased = 0.0;
    double magnitude = 0.0;
    double delta_weighted = 0.0;
    std::size_t count = 0;
  };
  BranchSums a;
  BranchSums b;
  const std::uint64_t total = lattice.enumerable_count(opts.cap);
  const ClampedBoundary clamp{split.start_site, split.end_site};
  for (std::uint64_t k = 0; k < total; ++k) {
    const Path q = lattice.path_at(k);
    if (boundary_factor(clamp, q) == 0.0) continue;
    bool visits_a = false;
    bool visits_b = false;
    for (auto p : q.points) {
      visits_a = visits_a || in_a[p];
      visits_b = visits_b || in_b[p];
    }
    if (visits_a == visits_b) continue;
    const Complex amp = A.amplitude(q);
    if (amp == 0.0) continue;
    const DelaySeries ds = clock_stand(q, lattice, clock);
    const double delta = delay_between(ds, split.split_slice, split.rejoin_slice);
    BranchSums& br = visits_a ? a : b;
    br.phased += amp * std::polar(1.0, kTwoPi * delta);
    br.magnitude += std::abs(amp);
    br.delta_weighted += std::abs(amp) * delta;
    ++br.count;
  }
  if (a.count == 0 || b.count == 0) throw InvalidArgument("double slit split has an empty branch");

  DoubleSlitReport r;
  r.paths_a = a.count;
  r.paths_b = b.count;
  r.delta_a = a.delta_weighted / a.magnitude;
  r.delta_b = b.delta_weighted / b.magnitude;
  r.phase_difference = kTwoPi * (r.delta_a - r.delta_b);
  r.suppression_law = two_path_probability(r.delta_a, r.delta_b);
  r.bundle_a = a.phased;
  r.bundle_b = b.phased;
  r.suppression_amplitudes = std::norm(a.phased + b.phased) / std::pow(std::abs(a.phased) + std::abs(b.phased), 2);
  r.clockless_probability = a.magnitude + b.magnitude;
  r.clock_probability = r.clockless_probability * r.suppression_amplitudes;
  const Complex sum = a.phased + b.phased;
  if (std::abs(sum) > 1e-12 * (std::abs(a.phased) + std::abs(b.phased))) {
    r.which_path_a = a.phased / sum;
    r.which_path_b = b.phased / sum;
  }
  return r;
}

void write_csv(std::ostream& out, const DelaySeries& s) {
  out << "t,c_standard,c,delta\n";
  char buf[128];
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.times[k], s.c_standard[k], s.c[k], s.delta[k]);
    out << buf;
  }
}

nlohmann::json to_json(const DoubleSlitReport& r) {
  auto opt = [](const std::optional<Complex>& z) { return z ? to_json_value(*z) : nlohmann::json(nullptr); };
  return {{"paths_a", r.paths_a},
          {"paths_b", r.paths_b},
          {"delta_a", r.delta_a},
          {"delta_b", r.delta_b},
          {"phase_difference", r.phase_difference},
          {"suppression_law", r.suppression_law},
          {"suppression_amplitudes", r.suppression_amplitudes},
          {"bundle_a", to_json_value(r.bundle_a)},
          {"bundle_b", to_json_value(r.bundle_b)},
          {"clockless_probability", r.clockless_probability},
          {"clock_probability", r.clock_probability},
          {"which_path_a", opt(r.which_path_a)},
          {"which_path_b", opt(r.which_path_b)}};
}

}  // namespace wvpath
