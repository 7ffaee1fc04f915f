#include <doctest.h>

#include <map>
#include <sstream>

#include "support.hpp"
#include "wvpath/trajectory.hpp"

using namespace wvpath;
using testsupport::Gen;

namespace {

ActionModel model_with(Potential V, double dt, SignMode mode = SignMode::kinetic_favored, double mass = 1.0) {
  ActionModel m;
  m.masses = {mass};
  m.potential = std::move(V);
  m.sign_mode = mode;
  m.dt = dt;
  return m;
}

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

Trajectory cosine(double dt, double duration) {
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  return Trajectory::sampled([](double t) { return vec1(std::cos(t)); }, 0.0, dt, steps);
}

}  // namespace

TEST_CASE("action value examples") {
  const ActionModel free = model_with(zero_potential(), 0.01);
  CHECK(action_value(Trajectory::linear(0.0, 0.01, 100, vec1(0.7), vec1(0.7)), free) == 0.0);

  // m = 2, speed 3, duration 1: integral of K dt = 9.
  ActionModel m2 = model_with(zero_potential(), 0.01, SignMode::kinetic_favored, 2.0);
  const Trajectory line = Trajectory::linear(0.0, 0.01, 100, vec1(0.0), vec1(3.0));
  CHECK(action_value(line, m2) == doctest::Approx(9.0).epsilon(1e-12));
  m2.sign_mode = SignMode::potential_favored;
  CHECK(action_value(line, m2) == doctest::Approx(-9.0).epsilon(1e-12));
  m2.scale = 2.5;
  CHECK(action_value(line, m2) == doctest::Approx(-22.5).epsilon(1e-12));

  // Harmonic oscillator on q = cos t over [0, 1]: continuum action -sin(2)/4.
  const double exact = -std::sin(2.0) / 4.0;
  double prev_err = 0.0;
  for (double dt : {0.02, 0.01, 0.005}) {
    const double err = std::abs(action_value(cosine(dt, 1.0), model_with(harmonic_potential({1.0}), dt)) - exact);
    if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.05));
    prev_err = err;
  }
}

TEST_CASE("action value is additive under concatenation") {
  testsupport::for_trials(71, 10, [](Gen& g, int) {
    const double dt = 0.05;
    const std::size_t n1 = g.index(2, 30);
    const std::size_t n2 = g.index(2, 30);
    Trajectory a = Trajectory::linear(0.0, dt, n1, vec1(g.uniform(-1, 1)), vec1(g.uniform(-1, 1)));
    Trajectory b = Trajectory::linear(a.time(n1), dt, n2, a.positions.row(static_cast<Eigen::Index>(n1)).transpose(),
                                      vec1(g.uniform(-1, 1)));
    for (std::size_t k = 1; k < n1; ++k) a.positions(static_cast<Eigen::Index>(k), 0) += g.uniform(-0.2, 0.2);
    const ActionModel m = model_with(two_peak_potential({}), dt);
    const double joined = action_value(concatenate(a, b), m);
    CHECK(std::abs(joined - (action_value(a, m) + action_value(b, m))) < 1e-12);
  });
  const Trajectory a = Trajectory::linear(0.0, 0.1, 3, vec1(0.0), vec1(1.0));
  const Trajectory b = Trajectory::linear(0.3, 0.1, 3, vec1(2.0), vec1(1.0));
  CHECK_THROWS_AS(concatenate(a, b), InvalidArgument);
}

TEST_CASE("action value reports non-finite potentials") {
  Potential bad;
  bad.name = "log";
  bad.value = [](const Eigen::VectorXd& x) { return std::log(x(0)); };
  const Trajectory t = Trajectory::linear(0.0, 0.1, 4, vec1(1.0), vec1(-1.0));
  try {
    action_value(t, model_with(bad, 0.1));
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("slice 2") != std::string::npos);
  }
  CHECK_THROWS_AS(action_value(t, model_with(zero_potential(), 0.2)), InvalidArgument);
}

TEST_CASE("stationarity residual examples") {
  const ActionModel free = model_with(zero_potential(), 0.01);
  CHECK(stationarity_residual(Trajectory::linear(0.0, 0.01, 100, vec1(-1.0), vec1(2.0)), free) < 1e-10);

  double prev = 0.0;
  for (double dt : {0.02, 0.01, 0.005}) {
    const double r = stationarity_residual(cosine(dt, 1.0), model_with(harmonic_potential({1.0}), dt));
    CHECK(r <= 0.1 * dt * dt);
    if (prev > 0.0) CHECK(std::log2(prev / r) >= 1.8);
    prev = r;
  }

  Gen g(72);
  Trajectory jag = Trajectory::linear(0.0, 0.01, 50, vec1(0.0), vec1(0.0));
  for (std::size_t k = 1; k < 50; ++k) jag.positions(static_cast<Eigen::Index>(k), 0) = g.uniform(-1.0, 1.0);
  CHECK(stationarity_residual(jag, model_with(harmonic_potential({1.0}), 0.01)) > 1.0);

  CHECK_THROWS_AS(stationarity_residual(Trajectory::linear(0.0, 0.01, 1, vec1(0), vec1(1)), free), InvalidArgument);
}

TEST_CASE("residual is invariant under scaling the action") {
  testsupport::for_trials(73, 10, [](Gen& g, int) {
    const double dt = 0.05;
    Trajectory t = Trajectory::linear(0.0, dt, 40, vec1(g.uniform(-2, 2)), vec1(g.uniform(-2, 2)));
    for (std::size_t k = 1; k < 40; ++k) t.positions(static_cast<Eigen::Index>(k), 0) += g.uniform(-0.3, 0.3);
    ActionModel m = model_with(two_peak_potential({}), dt);
    const double r = stationarity_residual(t, m);
    const double s = action_value(t, m);
    for (double c : {2.0, 10.0}) {
      ActionModel mc = m;
      mc.scale = c;
      CHECK(std::abs(stationarity_residual(t, mc) - r) <= 1e-12 * std::max(1.0, r));
      CHECK(action_value(t, mc) == doctest::Approx(c * s).epsilon(1e-13));
    }
    ActionModel flipped = m;
    flipped.sign_mode = SignMode::potential_favored;
    CHECK(std::abs(stationarity_residual(t, flipped) - r) <= 1e-12 * std::max(1.0, r));
    CHECK(action_value(t, flipped) == doctest::Approx(-s).epsilon(1e-13));
  });
}

TEST_CASE("favored path examples") {
  const ActionModel free = model_with(zero_potential(), 0.02);
  Trajectory init = Trajectory::linear(0.0, 0.02, 50, vec1(-1.0), vec1(2.0));
  Gen g(74);
  for (std::size_t k = 1; k < 50; ++k) init.positions(static_cast<Eigen::Index>(k), 0) += g.uniform(-0.5, 0.5);
  const FavoredPath fp = find_favored_path(free, init);
  CHECK(fp.report.converged);
  const Trajectory line = Trajectory::linear(0.0, 0.02, 50, vec1(-1.0), vec1(2.0));
  CHECK((fp.trajectory.positions - line.positions).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fp.trajectory.positions(0, 0) == -1.0);
  CHECK(fp.trajectory.positions(50, 0) == 2.0);

  const double dt = 1e-3;
  const ActionModel harm = model_with(harmonic_potential({1.0}), dt);
  const FavoredPath h = find_favored_path(harm, Trajectory::linear(0.0, dt, 1000, vec1(1.0), vec1(std::cos(1.0))));
  CHECK(h.report.converged);
  CHECK(h.report.residual <= h.report.residual_tolerance);
  CHECK((h.trajectory.positions - cosine(dt, 1.0).positions).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(h.report.action == doctest::Approx(action_value(h.trajectory, harm)));

  // Iteration cap: best iterate returned, no exception.
  OptimizerConfig tiny;
  tiny.gradient_iterations = 1;
  tiny.newton = false;
  const FavoredPath capped =
      find_favored_path(harm, Trajectory::linear(0.0, dt, 1000, vec1(1.0), vec1(std::cos(1.0))), tiny);
  CHECK_FALSE(capped.report.converged);
  CHECK(capped.report.iterations <= 1);

  Trajectory bad = Trajectory::linear(0.0, 0.01, 10, vec1(0.0), vec1(1.0));
  CHECK_THROWS_AS(find_favored_path(harm, bad), InvalidArgument);
}

TEST_CASE("free end and multidimensional paths") {
  ActionModel m;
  m.masses = {1.0, 2.0};
  m.potential = harmonic_potential({1.0, 0.5});
  m.dt = 0.01;
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  Trajectory init = Trajectory::linear(0.0, 0.01, 100, a, b);
  const FavoredPath fp = find_favored_path(m, init);
  CHECK(fp.report.converged);
  CHECK(stationarity_residual(fp.trajectory, m) < 1e-7);

  init.fixed_end = false;
  const FavoredPath open = find_favored_path(m, init);
  CHECK(open.report.converged);
  // Natural boundary condition: zero momentum at a free end.
  const Eigen::MatrixXd grad = action_gradient(open.trajectory, m);
  CHECK(grad.row(100).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("energy is conserved to second order along converged paths") {
  double prev = 0.0;
  for (double dt : {0.02, 0.01, 0.005}) {
    const ActionModel m = model_with(harmonic_potential({1.0}), dt);
    const auto steps = static_cast<std::size_t>(std::llround(2.0 / dt));
    const FavoredPath fp = find_favored_path(m, Trajectory::linear(0.0, dt, steps, vec1(1.0), vec1(std::cos(2.0))));
    REQUIRE(fp.report.converged);
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t k = 1; k + 1 < fp.trajectory.slices(); ++k) {
      const auto K = static_cast<Eigen::Index>(k);
      const double v = (fp.trajectory.positions(K + 1, 0) - fp.trajectory.positions(K - 1, 0)) / (2 * dt);
      const double q = fp.trajectory.positions(K, 0);
      const double e = 0.5 * v * v + 0.5 * q * q;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    const double drift = hi - lo;
    if (prev > 0.0) CHECK(prev / drift == doctest::Approx(4.0).epsilon(0.15));
    prev = drift;
  }
}

TEST_CASE("peaks and dwell statistics") {
  const Potential V = two_peak_potential({});
  const auto peaks = find_peaks(V, -3.0, 3.0);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].position == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(peaks[0].height > peaks[1].height);
  CHECK(std::abs(V.grad(vec1(peaks[0].position))(0)) < 1e-10);
  CHECK(find_peaks(harmonic_potential({1.0}), -3.0, 3.0).empty());

  const double eps = 0.05 * std::abs(peaks[0].position - peaks[1].position);
  const Trajectory pinned = Trajectory::linear(0.0, 0.05, 120, vec1(peaks[0].position), vec1(peaks[0].position));
  const DwellStats d = dwell_statistics(pinned, peaks, eps);
  CHECK(d.dwell_fraction[0] == 1.0);
  CHECK(d.dwell_fraction[1] == 0.0);
  CHECK(d.transit_count == 0);

  const Trajectory hop = concatenate(
      Trajectory::linear(0.0, 0.05, 40, vec1(peaks[0].position), vec1(peaks[0].position)),
      concatenate(Trajectory::linear(2.0, 0.05, 20, vec1(peaks[0].position), vec1(peaks[1].position)),
                  Trajectory::linear(3.0, 0.05, 40, vec1(peaks[1].position), vec1(peaks[1].position))));
  const DwellStats dh = dwell_statistics(hop, peaks, eps);
  CHECK(dh.transit_count == 1);
  REQUIRE(dh.transit_durations.size() == 1);
  CHECK(dh.transit_durations[0] > 0.0);
  CHECK(dh.transit_durations[0] <= 1.0 + 1e-12);
  CHECK(dh.dwell_fraction[0] + dh.dwell_fraction[1] < 1.0);
}

TEST_CASE("slow roll scenario") {
  ActionModel m = model_with(two_peak_potential({}), 0.05, SignMode::potential_favored);
  SlowRollConfig cfg;
  cfg.duration = 6.0;
  cfg.restarts = 3;
  cfg.seed = 9;
  const SlowRollReport rep = slow_roll_scenario(m, cfg);
  REQUIRE(rep.peaks.size() == 2);
  CHECK(rep.eps_peak == doctest::Approx(0.05 * std::abs(rep.peaks[0].position - rep.peaks[1].position)));

  std::map<std::string, const ScenarioPath*> by_label;
  for (const auto& sp : rep.ranked) by_label[sp.label] = &sp;
  for (const char* label : {"A-only", "B-only", "A->B"}) REQUIRE(by_label.count(label) == 1);
  const ScenarioPath& a_only = *by_label["A-only"];
  CHECK(a_only.path.report.converged);
  CHECK(a_only.dwell.dwell_fraction[0] == 1.0);
  CHECK(a_only.dwell.transit_count == 0);
  CHECK(by_label["A->B"]->dwell.transit_count == 1);
  CHECK(by_label["A->B"]->dwell.dwell_fraction[0] > 0.0);
  CHECK(by_label["A->B"]->dwell.dwell_fraction[1] > 0.0);

  // The ranking agrees with direct evaluation of the action.
  for (std::size_t k = 0; k + 1 < rep.ranked.size(); ++k)
    CHECK(action_value(rep.ranked[k].path.trajectory, m) >= action_value(rep.ranked[k + 1].path.trajectory, m));
  CHECK(rep.ranked.front().label == "A-only");

  // Deterministic for a fixed seed.
  const SlowRollReport again = slow_roll_scenario(m, cfg);
  CHECK(to_json(again).dump() == to_json(rep).dump());

  // Flipping the overall sign reverses the order of the canonical paths and leaves residuals alone.
  ActionModel flipped = m;
  flipped.sign_mode = SignMode::kinetic_favored;
  std::vector<std::pair<double, std::string>> orig, flip;
  for (const char* label : {"A-only", "B-only", "A->B"}) {
    const Trajectory& tr = by_label[label]->path.trajectory;
    orig.emplace_back(action_value(tr, m), label);
    flip.emplace_back(action_value(tr, flipped), label);
    CHECK(stationarity_residual(tr, flipped) == doctest::Approx(stationarity_residual(tr, m)).epsilon(1e-12));
  }
  std::sort(orig.begin(), orig.end());
  std::sort(flip.begin(), flip.end());
  for (std::size_t k = 0; k < 3; ++k) CHECK(orig[k].second == flip[2 - k].second);

  CHECK_THROWS_AS(slow_roll_scenario(model_with(harmonic_potential({1.0}), 0.05), cfg), InvalidArgument);

  std::ostringstream csv;
  write_csv(csv, a_only.path.trajectory);
  CHECK(csv.str().rfind("t,q1\n0,", 0) == 0);
}
