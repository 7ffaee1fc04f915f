// Acceptance criteria: one pass/fail line per criterion with its runtime.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "support.hpp"
#include "wvpath/clock.hpp"
#include "wvpath/evolution.hpp"
#include "wvpath/pathspace.hpp"
#include "wvpath/selection.hpp"
#include "wvpath/trajectory.hpp"
#include "wvpath/weakvalue.hpp"

using namespace wvpath;
using testsupport::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

ActionModel oscillator(double dt) {
  ActionModel m;
  m.masses = {1.0};
  m.potential = harmonic_potential({1.0});
  m.dt = dt;
  return m;
}

Outcome real_action_maximization() {
  Gen g(1001);
  double worst = 0.0;
  bool all_degenerate = true;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = g.index(2, 8);
    const OverlapMaximum m =
        maximize_overlap(OperatorMatrix::hermitian(g.hermitian(n)), g.uniform(-1, 0), g.uniform(0.5, 2), 1.0);
    worst = std::max(worst, std::abs(m.value - 1.0));
    all_degenerate = all_degenerate && m.degenerate;
  }
  return {worst <= 1e-10 && all_degenerate,
          fmt("max |value - 1| = %.2e, degenerate flagged: ", worst) + (all_degenerate ? "all" : "not all")};
}

Outcome svd_vs_brute_force() {
  Gen g(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = g.index(2, 3);
    const CMatrix H = g.non_normal(n);
    const OverlapMaximum m = maximize_overlap(OperatorMatrix::general(H), 0.0, 1.0, 1.0);
    const double brute =
        testsupport::grid_search_overlap(testsupport::taylor_propagator(H, 1.0), 2000 + static_cast<unsigned>(trial));
    worst = std::max(worst, std::abs(m.value - brute));
  }
  return {worst <= 1e-4, fmt("max |svd - grid search| = %.2e", worst)};
}

Outcome reality_theorem() {
  Gen g(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = g.index(2, 6);
    const OperatorMatrix H = OperatorMatrix::hermitian(g.hermitian(n));
    const double t_i = 0.0;
    const double t_f = g.uniform(0.5, 3.0);
    const OverlapMaximum m = maximize_overlap(H, t_i, t_f, 1.0);
    const BoundaryPair pair(m.initial, m.final_state, t_i, t_f);
    const auto grid = uniform_grid(t_i, t_f, 50);
    for (int k = 0; k < 5; ++k) {
      const WeakValueSeries s = weak_value_series(OperatorMatrix::hermitian(g.hermitian(n)), pair, H, grid, 1.0);
      worst = std::max(worst, reality_report(s, 1e-8).max_imag_over_real);
    }
  }
  return {worst <= 1e-8, fmt("max |Im| / max(1, max |Re|) = %.2e", worst)};
}

Outcome pathsum_equivalence() {
  Gen g(1004);
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t n : {2u, 3u}) {
    for (std::size_t T = 1; T <= 6; ++T) {
      const double dt = g.uniform(0.1, 0.5);
      const CMatrix Hm = g.non_normal(n);
      const OperatorMatrix H = OperatorMatrix::general(Hm);
      const PathAction A = action_from_transfer(matexp(H, dt, 1.0));
      const PathLattice lattice(n, T, dt);
      for (int trial = 0; trial < 10; ++trial) {
        const StateVector i = g.state(n);
        const StateVector f = g.state(n);
        const std::vector<double> values = g.reals(n, -2.0, 2.0);
        for (std::size_t t = 0; t <= T; ++t) {
          const Complex ps = weak_value_pathsum(A, site_values(values), t, lattice, i, f);
          const Complex op = weak_value(OperatorMatrix::diagonal(values), i, f, 0.0, T * dt, H,
                                        static_cast<double>(t) * dt, 1.0);
          worst = std::max(worst, std::abs(ps - op) / std::max(1.0, std::abs(op)));
          ++compared;
        }
      }
    }
  }
  return {worst <= 1e-12, fmt("max discrepancy = %.2e over %.0f comparisons", worst, static_cast<double>(compared))};
}

Outcome weight_identities() {
  Gen g(1005);
  double worst_total = 0.0;
  double worst_mean = 0.0;
  double most_negative = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = g.index(2, 6);
    const OperatorMatrix H =
        trial % 2 ? OperatorMatrix::general(g.non_normal(n)) : OperatorMatrix::hermitian(g.hermitian(n));
    const OperatorMatrix O = OperatorMatrix::hermitian(g.hermitian(n));
    const BoundaryPair pair(g.state(n), g.state(n), 0.0, 1.5);
    const double t = g.uniform(0.0, 1.5);
    const WeightDistribution w = weight_distribution(O, pair, H, t, 1.0);
    const Complex wv = weak_value(O, pair, H, t, 1.0);
    worst_total = std::max(worst_total, std::abs(w.total() - 1.0));
    worst_mean = std::max(worst_mean, std::abs(w.mean() - wv) / std::max(1.0, std::abs(wv)));

    // f = i: the weights are ordinary probabilities.
    const StateVector s = evolve_initial(g.state(n), H, 0.0, t, 1.0);
    for (const Complex& p : weight_distribution(O, s, s).weights)
      most_negative = std::min({most_negative, p.real(), -std::abs(p.imag())});
  }
  const bool ok = worst_total <= 1e-10 && worst_mean <= 1e-10 && most_negative >= -1e-12;
  return {ok, fmt("max |sum w - 1| = %.2e, max |sum lambda w - wv| = %.2e, min f=i weight = %.2e", worst_total,
                  worst_mean, most_negative)};
}

Outcome interference_law() {
  double worst_law = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double D = -4 * kPi + 8 * kPi * k / 999.0;
    const double p = two_path_probability(D / (2 * kPi), 0.0);
    worst_law = std::max(worst_law, std::abs(p - std::pow(std::cos(0.5 * D), 2)));
  }
  double worst_integer = 0.0;
  for (int k = -3; k <= 3; ++k) worst_integer = std::max(worst_integer, std::abs(two_path_probability(k + 0.3, 0.3) - 1));

  // Three sites, two steps: branch A is 0-1-0, branch B is 0-2-0.
  Gen g(1006);
  SplitSpec split;
  split.branch_a_sites = {1};
  split.branch_b_sites = {2};
  split.rejoin_slice = 2;
  double worst_demo = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const PathLattice lattice(3, 2, g.uniform(0.05, 0.5));
    CMatrix step(3, 3);
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) step(r, c) = g.cnormal();
    const PathAction A(3, [step](std::size_t from, std::size_t to) { return step(to, from); }, "random");
    const std::vector<double> rates = g.reals(3, 0.5, 2.0);
    const double period = g.uniform(0.02, 0.5);
    const DoubleSlitReport r = double_slit_demo(lattice, A, ClockModel::site_rates(period, rates), split);
    const Complex wa = step(1, 0) * step(0, 1);
    const Complex wb = step(2, 0) * step(0, 2);
    const double da = lattice.dt() * (2.0 - rates[0] - rates[1]) / period;
    const double db = lattice.dt() * (2.0 - rates[0] - rates[2]) / period;
    const double oracle = std::norm(wa * std::polar(1.0, 2 * kPi * (da - db)) + wb) /
                          std::pow(std::abs(wa) + std::abs(wb), 2);
    worst_demo = std::max(worst_demo, std::abs(r.suppression_amplitudes - oracle));
  }
  const bool ok = worst_law <= 1e-12 && worst_integer <= 1e-12 && worst_demo <= 1e-12;
  return {ok, fmt("cos^2 law %.2e, integer periods %.2e, double slit vs oracle %.2e", worst_law, worst_integer,
                  worst_demo)};
}

struct PeakedModel {
  PathLattice lattice{2, 6, 1.0};
  Path target{{0, 1, 0, 1, 0, 1, 0}};
  RealAction S = hamming_penalty_action(target, 1.0);
};

Outcome metropolis_consistency() {
  const PeakedModel model;
  MetropolisConfig cfg;
  cfg.n_samples = 100000;
  cfg.burn_in = 1000;
  cfg.seed = 20240607;
  const MetropolisResult res = metropolis_sample(model.S, model.lattice, 1.0, cfg);
  struct Obs {
    std::vector<double> values;
    std::size_t t;
  };
  const std::vector<Obs> observables{{{0.0, 1.0}, 2}, {{-1.0, 2.0}, 3}, {{0.5, -0.5}, 5}};
  double worst_z = 0.0;
  for (const auto& o : observables) {
    const SampleEstimate e = estimate(res.samples, site_values(o.values), o.t);
    const double exact = our_average(model.S, site_values(o.values), o.t, model.lattice, 1.0);
    worst_z = std::max(worst_z, std::abs(e.mean - exact) / e.standard_error);
  }
  return {worst_z <= 5.0, fmt("max |sampled - exact| = %.2f standard errors, acceptance %.2f", worst_z,
                              res.diagnostics.acceptance_rate)};
}

Outcome dominant_path_limit() {
  const PeakedModel model;
  const SiteObservable O = site_values({0.0, 1.0});
  const std::size_t t = 3;
  const Path best = argmax_path(model.S, model.lattice);
  const double target_value = O(best[t]);
  std::vector<double> gaps;
  for (double hbar : {1.0, 0.3, 0.1, 0.03}) gaps.push_back(std::abs(our_average(model.S, O, t, model.lattice, hbar) - target_value));
  bool decreasing = best == model.target;
  for (std::size_t k = 1; k < gaps.size(); ++k) decreasing = decreasing && gaps[k] < gaps[k - 1];
  return {decreasing, fmt("gaps %.3e, %.3e, %.3e", gaps[0], gaps[1], gaps[2]) + fmt(", %.3e", gaps[3])};
}

Outcome classical_stationarity() {
  const double dt = 1e-3;
  const FavoredPath fp = find_favored_path(oscillator(dt), Trajectory::linear(0.0, dt, 1000, vec1(1.0), vec1(std::cos(1.0))));
  const Trajectory exact = Trajectory::sampled([](double t) { return vec1(std::cos(t)); }, 0.0, dt, 1000);
  const double deviation = (fp.trajectory.positions - exact.positions).cwiseAbs().maxCoeff();

  double min_order = HUGE_VAL;
  double prev = 0.0;
  for (double h : {0.04, 0.02, 0.01, 0.005}) {
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / h));
    const double r = stationarity_residual(
        Trajectory::sampled([](double t) { return vec1(std::cos(t)); }, 0.0, h, steps), oscillator(h));
    if (prev > 0.0) min_order = std::min(min_order, std::log2(prev / r));
    prev = r;
  }
  const bool ok = fp.report.converged && deviation <= 1e-6 && min_order >= 1.8;
  return {ok, fmt("max deviation %.2e, observed residual order %.3f", deviation, min_order)};
}

Outcome sign_constant_invariance() {
  Gen g(1010);
  const double dt = 0.05;
  ActionModel base;
  base.masses = {1.0};
  base.potential = two_peak_potential({});
  base.dt = dt;
  std::vector<Trajectory> candidates;
  for (int k = 0; k < 12; ++k) {
    Trajectory t = Trajectory::linear(0.0, dt, 60, vec1(g.uniform(-2, 2)), vec1(g.uniform(-2, 2)));
    for (std::size_t s = 1; s < 60; ++s) t.positions(static_cast<Eigen::Index>(s), 0) += g.uniform(-0.4, 0.4);
    candidates.push_back(std::move(t));
  }
  double worst = 0.0;
  for (const auto& t : candidates) {
    const double r = stationarity_residual(t, base);
    for (double c : {-1.0, 2.0, 10.0}) {
      ActionModel m = base;
      m.scale = c;
      worst = std::max(worst, std::abs(stationarity_residual(t, m) - r) / std::max(1.0, r));
    }
  }
  auto ranking = [&](double c) {
    ActionModel m = base;
    m.scale = c;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t k = 0; k < candidates.size(); ++k) order.emplace_back(action_value(candidates[k], m), k);
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> idx;
    for (const auto& [s, k] : order) idx.push_back(k);
    return idx;
  };
  std::vector<std::size_t> forward = ranking(1.0);
  const std::vector<std::size_t> flipped = ranking(-1.0);
  std::reverse(forward.begin(), forward.end());
  const bool reversed = forward == flipped;
  return {worst <= 1e-12 && reversed,
          fmt("max residual change %.2e, ranking reversed under c = -1: ", worst) + (reversed ? "yes" : "no")};
}

Outcome slow_roll() {
  ActionModel m;
  m.masses = {1.0};
  m.potential = two_peak_potential({});
  m.sign_mode = SignMode::potential_favored;
  m.dt = 0.05;
  SlowRollConfig cfg;
  cfg.duration = 6.0;
  cfg.restarts = 4;
  cfg.seed = 11;
  const SlowRollReport rep = slow_roll_scenario(m, cfg);
  std::map<std::string, const ScenarioPath*> by_label;
  for (const auto& p : rep.ranked) by_label[p.label] = &p;
  const std::vector<std::string> canonical{"A-only", "B-only", "A->B"};
  for (const auto& label : canonical)
    if (!by_label.count(label)) return {false, "missing canonical path " + label};

  const bool dwelling = by_label["A-only"]->path.report.converged && by_label["B-only"]->path.report.converged &&
                        by_label["A-only"]->dwell.dwell_fraction[0] == 1.0 &&
                        by_label["B-only"]->dwell.dwell_fraction[1] == 1.0 &&
                        by_label["A->B"]->dwell.transit_count == 1;

  // Order of the canonical paths in the report versus direct evaluation.
  std::vector<std::string> reported;
  for (const auto& p : rep.ranked)
    if (std::find(canonical.begin(), canonical.end(), p.label) != canonical.end()) reported.push_back(p.label);
  std::vector<std::pair<double, std::string>> direct;
  for (const auto& label : canonical) direct.emplace_back(-action_value(by_label[label]->path.trajectory, m), label);
  std::sort(direct.begin(), direct.end());
  bool consistent = reported.size() == direct.size();
  for (std::size_t k = 0; consistent && k < direct.size(); ++k) consistent = reported[k] == direct[k].second;

  std::string order;
  for (const auto& l : reported) order += (order.empty() ? "" : " > ") + l;
  return {dwelling && consistent, "peak-dwelling paths " + std::string(dwelling ? "found" : "missing") +
                                      ", ranking " + order + (consistent ? " matches" : " disagrees with") +
                                      " direct evaluation"};
}

Outcome bracket_conservation() {
  Gen g(1012);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = g.index(2, 6);
    const OperatorMatrix H =
        trial % 3 == 0 ? OperatorMatrix::hermitian(g.hermitian(n)) : OperatorMatrix::general(g.non_normal(n));
    const double t_f = g.uniform(0.5, 2.0);
    const StateVector i = g.state(n);
    const StateVector f = g.state(n);
    const Complex ref = inner(f, evolve_initial(i, H, 0.0, t_f, 1.0));
    for (int k = 0; k <= 20; ++k) {
      const double t = t_f * k / 20.0;
      const Complex b = inner(evolve_final(f, H, t_f, t, 1.0), evolve_initial(i, H, 0.0, t, 1.0));
      worst = std::max(worst, std::abs(b - ref));
    }
  }
  return {worst <= 1e-10, fmt("max |<f(t)|i(t)> - <f|U|i>| = %.2e", worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "real-action maximization", 5, real_action_maximization},
      {2, "svd vs brute force", 60, svd_vs_brute_force},
      {3, "reality theorem, hermitian case", 30, reality_theorem},
      {4, "path-sum / operator equivalence", 60, pathsum_equivalence},
      {5, "weight-distribution identities", 10, weight_identities},
      {6, "interference law", 5, interference_law},
      {7, "metropolis consistency", 60, metropolis_consistency},
      {8, "dominant-path limit", 30, dominant_path_limit},
      {9, "classical stationarity", 30, classical_stationarity},
      {10, "sign / constant invariance", 10, sign_constant_invariance},
      {11, "slow-roll scenario", 60, slow_roll},
      {12, "bracket conservation", 10, bracket_conservation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool passed = o.passed && in_time;
    failures += passed ? 0 : 1;
    std::printf("[%s] criterion %2d %-34s %s (%.2f s of %.0f s)\n", passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_seconds);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
