#include "wvpath/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "wvpath/clock.hpp"
#include "wvpath/pathspace.hpp"
#include "wvpath/selection.hpp"
#include "wvpath/trajectory.hpp"
#include "wvpath/weakvalue.hpp"

namespace wvpath {

using nlohmann::json;

namespace {

// ------------------------------------------------------------ field access

class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_, "expected a table");
  }

  const std::string& path() const { return path_; }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& at(const std::string& key) const {
    if (!has(key)) throw ValidationError(sub(key), "required field is missing");
    return j_.at(key);
  }

  Fields table(const std::string& key) const { return Fields(at(key), sub(key)); }

  void only(std::initializer_list<const char*> known) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : known) ok = ok || it.key() == k;
      if (!ok) throw ValidationError(sub(it.key()), "unknown field");
    }
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ValidationError(sub(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(sub(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) const {
    const double x = number(key);
    if (!(x > 0.0)) throw ValidationError(sub(key), "must be positive");
    return x;
  }
  double positive(const std::string& key, double fallback) const { return has(key) ? positive(key) : fallback; }

  std::size_t count(const std::string& key, std::size_t min) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ValidationError(sub(key), "expected an integer");
    if (v.is_number_unsigned() ? v.get<std::uint64_t>() < min : v.get<std::int64_t>() < static_cast<std::int64_t>(min))
      throw ValidationError(sub(key), "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v.get<std::uint64_t>());
  }
  std::size_t count(const std::string& key, std::size_t min, std::size_t fallback) const {
    return has(key) ? count(key, min) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ValidationError(sub(key), "expected true or false");
    return at(key).get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ValidationError(sub(key), "expected a string");
    const std::string s = at(key).get<std::string>();
    std::string options;
    for (const char* a : allowed) {
      if (s == a) return s;
      options += options.empty() ? a : std::string(", ") + a;
    }
    throw ValidationError(sub(key), "must be one of: " + options);
  }

  std::vector<double> reals(const std::string& key, std::size_t min_size = 1) const {
    const json& v = at(key);
    if (!v.is_array()) throw ValidationError(sub(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number() || !std::isfinite(v[k].get<double>()))
        throw ValidationError(sub(key) + "[" + std::to_string(k) + "]", "expected a finite number");
      out.push_back(v[k].get<double>());
    }
    if (out.size() < min_size) throw ValidationError(sub(key), "needs at least " + std::to_string(min_size) + " entries");
    return out;
  }

  std::vector<std::size_t> indices(const std::string& key, std::size_t bound) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ValidationError(sub(key), "expected a non-empty array of site indices");
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number_integer() || v[k].get<std::int64_t>() < 0 || v[k].get<std::uint64_t>() >= bound)
        throw ValidationError(sub(key) + "[" + std::to_string(k) + "]",
                              "expected an index below " + std::to_string(bound));
      out.push_back(v[k].get<std::size_t>());
    }
    return out;
  }

  std::size_t index(const std::string& key, std::size_t bound) const {
    const std::size_t k = count(key, 0);
    if (k >= bound) throw ValidationError(sub(key), "must be below " + std::to_string(bound));
    return k;
  }

  CMatrix matrix(const std::string& key) const {
    CMatrix m;
    try {
      m = matrix_from_json(at(key));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ValidationError(sub(key), e.what());
    }
    if (m.rows() == 0 || m.rows() != m.cols()) throw ValidationError(sub(key), "expected a non-empty square matrix");
    if (!m.allFinite()) throw ValidationError(sub(key), "entries must be finite");
    return m;
  }

  StateVector state(const std::string& key, std::size_t dim) const {
    StateVector s;
    try {
      s = state_from_json(at(key));
    } catch (const std::exception& e) {
      throw ValidationError(sub(key), e.what());
    }
    if (s.dim() != dim) throw ValidationError(sub(key), "expected dimension " + std::to_string(dim));
    if (!s.amplitudes().allFinite() || s.norm() == 0.0) throw ValidationError(sub(key), "must be a finite nonzero vector");
    return s;
  }

 private:
  const json& j_;
  std::string path_;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const char c = s[k];
    if (c == '-' && k + 1 < s.size() && s[k + 1] == '>') {
      out += "-to-";
      ++k;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      out += c;
    } else {
      out += '_';
    }
  }
  return out.empty() ? "_" : out;
}

// ------------------------------------------------------------ shared specs

CVector random_complex(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double re = g(rng);
    const double im = g(rng);
    v(k) = Complex(re, im);
  }
  return v;
}

CMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) = random_complex(rng, n);
  return m / std::sqrt(static_cast<double>(n));
}

CMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
  const CMatrix g = random_matrix(rng, n);
  return (g + g.adjoint()) / 2.0;
}

StateVector random_state(std::mt19937_64& rng, std::size_t n) { return StateVector(random_complex(rng, n)).normalized(); }

struct HamiltonianSpec {
  std::optional<CMatrix> explicit_matrix;
  std::string model;
  std::size_t dim = 0;
  double hopping = 1.0;
  std::vector<double> onsite;
  std::vector<double> loss;
};

HamiltonianSpec parse_hamiltonian(const Fields& p, const std::string& key) {
  HamiltonianSpec h;
  if (p.has(key) && p.at(key).is_array()) {
    h.explicit_matrix = p.matrix(key);
    h.dim = static_cast<std::size_t>(h.explicit_matrix->rows());
    return h;
  }
  const Fields f = p.table(key);
  f.only({"model", "dim", "hopping", "onsite", "loss"});
  h.model = f.text("model", "hopping", {"hopping", "random_hermitian", "random_general"});
  h.dim = f.count("dim", 1);
  if (h.model == "hopping") {
    h.hopping = f.number("hopping", 1.0);
    if (f.has("onsite")) h.onsite = f.reals("onsite");
    if (f.has("loss")) h.loss = f.reals("loss");
    if (!h.onsite.empty() && h.onsite.size() != h.dim) throw ValidationError(f.sub("onsite"), "length must equal dim");
    if (!h.loss.empty() && h.loss.size() != h.dim) throw ValidationError(f.sub("loss"), "length must equal dim");
  } else if (f.has("hopping") || f.has("onsite") || f.has("loss")) {
    throw ValidationError(f.sub("model"), "random models take only dim");
  }
  return h;
}

OperatorMatrix build_hamiltonian(const HamiltonianSpec& h, std::mt19937_64& rng) {
  if (h.explicit_matrix) return OperatorMatrix::classify(*h.explicit_matrix);
  if (h.model == "random_hermitian") return OperatorMatrix::hermitian(random_hermitian(rng, h.dim));
  if (h.model == "random_general") return OperatorMatrix::classify(random_matrix(rng, h.dim));
  const auto n = static_cast<Eigen::Index>(h.dim);
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) m(k, k + 1) = m(k + 1, k) = -h.hopping;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = h.onsite.empty() ? 0.0 : h.onsite[static_cast<std::size_t>(k)];
    const double g = h.loss.empty() ? 0.0 : h.loss[static_cast<std::size_t>(k)];
    m(k, k) = Complex(e, -g);
  }
  return OperatorMatrix::classify(m);
}

struct ObservableSpec {
  std::string name;
  std::optional<CMatrix> matrix;
  std::vector<double> diagonal;
  bool random = false;
};

std::vector<ObservableSpec> parse_observables(const Fields& p, const std::string& key, std::size_t dim) {
  const json& arr = p.at(key);
  if (!arr.is_array() || arr.empty()) throw ValidationError(p.sub(key), "expected a non-empty array of observables");
  std::vector<ObservableSpec> out;
  std::set<std::string> names;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Fields f(arr[k], p.sub(key) + "[" + std::to_string(k) + "]");
    f.only({"name", "matrix", "diagonal", "random"});
    ObservableSpec o;
    if (!f.at("name").is_string() || f.at("name").get<std::string>().empty())
      throw ValidationError(f.sub("name"), "expected a non-empty string");
    o.name = f.at("name").get<std::string>();
    if (!names.insert(sanitize(o.name)).second) throw ValidationError(f.sub("name"), "duplicate observable name");
    const int given = int(f.has("matrix")) + int(f.has("diagonal")) + int(f.has("random"));
    if (given != 1) throw ValidationError(f.path(), "give exactly one of matrix, diagonal, random");
    if (f.has("matrix")) {
      o.matrix = f.matrix("matrix");
      if (static_cast<std::size_t>(o.matrix->rows()) != dim)
        throw ValidationError(f.sub("matrix"), "expected dimension " + std::to_string(dim));
      try {
        OperatorMatrix::hermitian(*o.matrix);
      } catch (const std::exception&) {
        throw ValidationError(f.sub("matrix"), "observable must be Hermitian");
      }
    } else if (f.has("diagonal")) {
      o.diagonal = f.reals("diagonal");
      if (o.diagonal.size() != dim) throw ValidationError(f.sub("diagonal"), "expected dimension " + std::to_string(dim));
    } else {
      o.random = f.text("random", "hermitian", {"hermitian"}) == "hermitian";
    }
    out.push_back(std::move(o));
  }
  return out;
}

OperatorMatrix build_observable(const ObservableSpec& o, std::size_t dim, std::mt19937_64& rng) {
  if (o.matrix) return OperatorMatrix::hermitian(*o.matrix);
  if (!o.diagonal.empty()) return OperatorMatrix::diagonal(o.diagonal);
  return OperatorMatrix::hermitian(random_hermitian(rng, dim));
}

OptimizerConfig parse_optimizer(const Fields& p) {
  OptimizerConfig c;
  if (!p.has("optimizer")) return c;
  const Fields f = p.table("optimizer");
  f.only({"gradient_iterations", "newton_iterations", "newton", "tol_residual", "residual_scale", "bump"});
  c.gradient_iterations = f.count("gradient_iterations", 0, c.gradient_iterations);
  c.newton_iterations = f.count("newton_iterations", 0, c.newton_iterations);
  c.newton = f.flag("newton", c.newton);
  c.tol_residual = f.positive("tol_residual", c.tol_residual);
  c.residual_scale = f.number("residual_scale", c.residual_scale);
  if (c.residual_scale < 0.0) throw ValidationError(f.sub("residual_scale"), "must be nonnegative");
  c.bump = f.positive("bump", c.bump);
  return c;
}

std::size_t steps_from_duration(const Fields& p, double dt) {
  const double duration = p.positive("duration");
  const double ratio = duration / dt;
  const double steps = std::round(ratio);
  if (steps < 2.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio))
    throw ValidationError(p.sub("duration"), "must be an integer multiple (at least 2) of dt");
  return static_cast<std::size_t>(steps);
}

void check_enumerable(const Fields& p, const std::string& field, const PathLattice& lattice, double cap) {
  if (lattice.path_count() > cap)
    throw ValidationError(p.sub(field), "lattice has more than " + std::to_string(static_cast<std::uint64_t>(cap)) +
                                            " paths; exact enumeration is not possible");
}

// ------------------------------------------------------------ run context

struct Context {
  const ScenarioConfig& cfg;
  std::mt19937_64 rng;
  std::vector<std::string> files;
  std::vector<CheckResult> checks;
  json summary = json::object();

  explicit Context(const ScenarioConfig& c) : cfg(c), rng(c.seed) {}

  std::ofstream open(const std::string& name) {
    files.push_back(name);
    std::ofstream out(cfg.output_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (cfg.output_dir / name).string());
    return out;
  }
  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
  void check(const std::string& name, bool passed, const std::string& detail) {
    if (cfg.checks) checks.push_back({name, passed, detail});
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ------------------------------------------------------------ weakvalue_suite

struct SuiteSpec {
  HamiltonianSpec hamiltonian;
  std::vector<ObservableSpec> observables;
  double t_i = 0.0;
  double t_f = 1.0;
  std::size_t grid_points = 50;
  std::optional<StateVector> initial;
  std::optional<StateVector> final_state;
  double reality_tol = 1e-8;
  std::optional<bool> expect_real;
};

SuiteSpec parse_suite(const Fields& p) {
  p.only({"hamiltonian", "observables", "t_i", "t_f", "grid_points", "boundary", "reality_tol", "expect_real"});
  SuiteSpec s;
  s.hamiltonian = parse_hamiltonian(p, "hamiltonian");
  s.observables = parse_observables(p, "observables", s.hamiltonian.dim);
  s.t_i = p.number("t_i", 0.0);
  s.t_f = p.number("t_f");
  if (!(s.t_f > s.t_i)) throw ValidationError(p.sub("t_f"), "must exceed t_i");
  s.grid_points = p.count("grid_points", 1, s.grid_points);
  s.reality_tol = p.positive("reality_tol", s.reality_tol);
  if (p.has("expect_real")) s.expect_real = p.flag("expect_real", true);
  if (p.has("boundary")) {
    if (p.at("boundary").is_string()) {
      p.text("boundary", "maximized", {"maximized"});
    } else {
      const Fields b = p.table("boundary");
      b.only({"initial", "final"});
      s.initial = b.state("initial", s.hamiltonian.dim);
      s.final_state = b.state("final", s.hamiltonian.dim);
    }
  }
  return s;
}

void run_suite(const SuiteSpec& s, Context& ctx) {
  const OperatorMatrix H = build_hamiltonian(s.hamiltonian, ctx.rng);
  std::vector<NamedObservable> obs;
  for (const auto& o : s.observables) obs.push_back({o.name, build_observable(o, H.dim(), ctx.rng)});
  const auto grid = uniform_grid(s.t_i, s.t_f, s.grid_points);

  json doc;
  std::vector<SuiteEntry> entries;
  if (s.initial) {
    const BoundaryPair pair(*s.initial, *s.final_state, s.t_i, s.t_f);
    for (const auto& o : obs) {
      SuiteEntry e;
      e.observable_name = o.name;
      e.series = weak_value_series(o.op, pair, H, grid, ctx.cfg.hbar);
      e.report = reality_report(e.series, s.reality_tol);
      entries.push_back(std::move(e));
    }
    doc["boundary"] = {{"initial", to_json(pair.initial())}, {"final", to_json(pair.final_state())}};
  } else {
    SelectedSuite suite = selected_weak_value_suite(H, obs, s.t_i, s.t_f, grid, ctx.cfg.hbar, s.reality_tol);
    doc["records"] = to_json(suite);
    doc["boundary"] = {{"initial", to_json(suite.selection.initial)},
                       {"final", to_json(suite.selection.final_state)},
                       {"value", suite.selection.value},
                       {"degenerate", suite.selection.degenerate}};
    entries = std::move(suite.entries);
  }

  bool all_real = true;
  json reports = json::array();
  json series = json::object();
  for (const auto& e : entries) {
    all_real = all_real && e.report.is_real;
    reports.push_back({{"observable_name", e.observable_name}, {"reality", to_json(e.report)}});
    if (ctx.cfg.csv) {
      auto out = ctx.open("series_" + sanitize(e.observable_name) + ".csv");
      write_csv(out, e.series);
    }
    if (ctx.cfg.json) series[e.observable_name] = to_json(e.series);
  }
  doc["hamiltonian_kind"] = H.is_hermitian() ? "hermitian" : "non_hermitian";
  doc["reports"] = reports;
  doc["all_real"] = all_real;
  ctx.write_json("suite.json", doc);
  if (ctx.cfg.json) ctx.write_json("series.json", series);

  ctx.summary = {{"observables", entries.size()}, {"grid_points", grid.size()}, {"all_real", all_real}};
  const bool expect = s.expect_real.value_or(H.is_hermitian() && !s.initial);
  if (expect) ctx.check("reality", all_real, all_real ? "every series real" : "a series has an imaginary part");
}

// ------------------------------------------------------------ maximization

struct MaxSpec {
  HamiltonianSpec hamiltonian;
  double t_i = 0.0;
  double t_f = 1.0;
  std::size_t power_iterations = 20000;
  double check_tol = 1e-8;
};

MaxSpec parse_max(const Fields& p) {
  p.only({"hamiltonian", "t_i", "t_f", "power_iterations", "check_tol"});
  MaxSpec s;
  s.hamiltonian = parse_hamiltonian(p, "hamiltonian");
  s.t_i = p.number("t_i", 0.0);
  s.t_f = p.number("t_f");
  if (!(s.t_f > s.t_i)) throw ValidationError(p.sub("t_f"), "must exceed t_i");
  s.power_iterations = p.count("power_iterations", 1, s.power_iterations);
  s.check_tol = p.positive("check_tol", s.check_tol);
  return s;
}

double power_iteration_sigma(const CMatrix& U, std::size_t iterations, std::mt19937_64& rng) {
  const CMatrix G = U.adjoint() * U;
  CVector v = random_complex(rng, static_cast<std::size_t>(U.cols())).normalized();
  for (std::size_t k = 0; k < iterations; ++k) {
    const CVector w = G * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
  }
  return (U * v).norm();
}

void run_max(const MaxSpec& s, Context& ctx) {
  const OperatorMatrix H = build_hamiltonian(s.hamiltonian, ctx.rng);
  const OverlapMaximum m = maximize_overlap(H, s.t_i, s.t_f, ctx.cfg.hbar);
  json doc = {{"initial", to_json(m.initial)},
              {"final", to_json(m.final_state)},
              {"value", m.value},
              {"degenerate", m.degenerate},
              {"singular_values", m.singular_values},
              {"hamiltonian_kind", H.is_hermitian() ? "hermitian" : "non_hermitian"}};
  ctx.write_json("selection.json", doc);
  if (ctx.cfg.csv) {
    auto out = ctx.open("singular_values.csv");
    out << "index,value\n";
    for (std::size_t k = 0; k < m.singular_values.size(); ++k)
      out << k << ',' << csv_number(m.singular_values[k]) << '\n';
  }
  const CMatrix U = matexp(H, s.t_f - s.t_i, ctx.cfg.hbar).matrix();
  const double sigma = power_iteration_sigma(U, s.power_iterations, ctx.rng);
  const double diff = std::abs(sigma - m.value);
  ctx.summary = {{"value", m.value}, {"degenerate", m.degenerate}, {"power_iteration_value", sigma}};
  ctx.check("power_iteration", diff <= s.check_tol * std::max(1.0, m.value), "|sigma_svd - sigma_power| = " + fmt(diff));
  const double overlap = std::abs(inner(m.final_state, StateVector(U * m.initial.amplitudes())));
  ctx.check("attained_overlap", std::abs(overlap - m.value) <= 1e-10 * std::max(1.0, m.value),
            "|<f|U|i>| = " + fmt(overlap));
}

// ------------------------------------------------------------ pathsum_equivalence

struct PathsumSpec {
  HamiltonianSpec hamiltonian;
  double dt = 0.1;
  std::size_t steps = 1;
  std::vector<double> observable;
  std::size_t instances = 10;
  double tolerance = 1e-12;
  double cap = 1e7;
};

PathsumSpec parse_pathsum(const Fields& p) {
  p.only({"hamiltonian", "dt", "steps", "observable", "instances", "tolerance", "cap"});
  PathsumSpec s;
  s.hamiltonian = parse_hamiltonian(p, "hamiltonian");
  s.dt = p.positive("dt");
  s.steps = p.count("steps", 1);
  s.observable = p.reals("observable");
  if (s.observable.size() != s.hamiltonian.dim)
    throw ValidationError(p.sub("observable"), "needs one value per site");
  s.instances = p.count("instances", 1, s.instances);
  s.tolerance = p.positive("tolerance", s.tolerance);
  s.cap = p.positive("cap", s.cap);
  check_enumerable(p, "steps", PathLattice(s.hamiltonian.dim, s.steps, s.dt), s.cap);
  return s;
}

void run_pathsum(const PathsumSpec& s, Context& ctx) {
  const OperatorMatrix H = build_hamiltonian(s.hamiltonian, ctx.rng);
  const std::size_t n = H.dim();
  const PathLattice lattice(n, s.steps, s.dt);
  const PathAction A = action_from_transfer(matexp(H, s.dt, ctx.cfg.hbar));
  const OperatorMatrix O = OperatorMatrix::diagonal(s.observable);
  const SiteObservable site = site_values(s.observable);
  const double t_f = s.dt * static_cast<double>(s.steps);
  EnumerationOptions opts;
  opts.cap = s.cap;

  std::ostringstream csv;
  csv << "instance,t_index,pathsum_re,pathsum_im,operator_re,operator_im,abs_diff\n";
  json rows = json::array();
  double worst = 0.0;
  for (std::size_t k = 0; k < s.instances; ++k) {
    const StateVector i = random_state(ctx.rng, n);
    const StateVector f = random_state(ctx.rng, n);
    for (std::size_t t = 0; t <= s.steps; ++t) {
      const Complex ps = weak_value_pathsum(A, site, t, lattice, i, f, default_tolerances(), opts);
      const Complex op = weak_value(O, i, f, 0.0, t_f, H, s.dt * static_cast<double>(t), ctx.cfg.hbar);
      const double d = std::abs(ps - op);
      worst = std::max(worst, d);
      csv << k << ',' << t << ',' << csv_number(ps.real()) << ',' << csv_number(ps.imag()) << ','
          << csv_number(op.real()) << ',' << csv_number(op.imag()) << ',' << csv_number(d) << '\n';
      rows.push_back({{"instance", k}, {"t_index", t}, {"pathsum", to_json_value(ps)}, {"operator", to_json_value(op)},
                      {"abs_diff", d}});
    }
  }
  if (ctx.cfg.csv) ctx.open("equivalence.csv") << csv.str();
  json doc = {{"sites", n}, {"steps", s.steps}, {"dt", s.dt}, {"instances", s.instances},
              {"max_abs_diff", worst}, {"tolerance", s.tolerance}};
  if (ctx.cfg.json) doc["rows"] = rows;
  ctx.write_json("equivalence.json", doc);
  ctx.summary = {{"max_abs_diff", worst}, {"paths", lattice.path_count()}};
  ctx.check("pathsum_equals_operator", worst <= s.tolerance, "max |delta| = " + fmt(worst));
}

// ------------------------------------------------------------ metropolis

struct SiteObservableSpec {
  std::string name;
  std::vector<double> values;
  std::size_t t_index = 0;
};

struct MetropolisSpec {
  std::size_t sites = 2;
  std::size_t steps = 1;
  double dt = 1.0;
  std::vector<std::uint32_t> target;
  double lambda = 1.0;
  MetropolisConfig sampler;
  std::vector<SiteObservableSpec> observables;
  std::size_t batches = 50;
  bool compare_exact = true;
  double z_threshold = 5.0;
  double cap = 1e7;
};

MetropolisSpec parse_metropolis(const Fields& p) {
  p.only({"sites", "steps", "dt", "target", "lambda", "n_samples", "burn_in", "proposal", "chains", "thin", "clamp",
          "observables", "batches", "compare_exact", "z_threshold", "cap"});
  MetropolisSpec s;
  s.sites = p.count("sites", 2);
  s.steps = p.count("steps", 1);
  s.dt = p.positive("dt", 1.0);
  if (p.has("target")) {
    for (auto v : p.indices("target", s.sites)) s.target.push_back(static_cast<std::uint32_t>(v));
    if (s.target.size() != s.steps + 1) throw ValidationError(p.sub("target"), "needs steps + 1 entries");
  } else {
    s.target.assign(s.steps + 1, 0);
  }
  s.lambda = p.number("lambda");
  if (s.lambda < 0.0) throw ValidationError(p.sub("lambda"), "must be nonnegative");
  s.sampler.n_samples = p.count("n_samples", 1);
  s.sampler.burn_in = p.count("burn_in", 1, 1000);
  s.sampler.proposal =
      p.text("proposal", "slice_resample", {"slice_resample", "neighbor_shift"}) == "neighbor_shift"
          ? Proposal::neighbor_shift
          : Proposal::slice_resample;
  s.sampler.chains = p.count("chains", 1, 1);
  s.sampler.thin = p.count("thin", 1, 1);
  if (p.has("clamp")) {
    const Fields c = p.table("clamp");
    c.only({"start_site", "end_site"});
    s.sampler.clamp = ClampedBoundary{c.index("start_site", s.sites), c.index("end_site", s.sites)};
    if (s.steps < 2) throw ValidationError(c.path(), "clamped sampling needs at least two steps");
  }
  const json& arr = p.at("observables");
  if (!arr.is_array() || arr.empty()) throw ValidationError(p.sub("observables"), "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Fields f(arr[k], p.sub("observables") + "[" + std::to_string(k) + "]");
    f.only({"name", "values", "t_index"});
    SiteObservableSpec o;
    if (!f.at("name").is_string()) throw ValidationError(f.sub("name"), "expected a string");
    o.name = f.at("name").get<std::string>();
    if (!names.insert(o.name).second) throw ValidationError(f.sub("name"), "duplicate observable name");
    o.values = f.reals("values");
    if (o.values.size() != s.sites) throw ValidationError(f.sub("values"), "needs one value per site");
    o.t_index = f.has("t_index") ? f.index("t_index", s.steps + 1) : s.steps / 2;
    s.observables.push_back(std::move(o));
  }
  s.batches = p.count("batches", 2, s.batches);
  if (s.batches > s.sampler.n_samples * s.sampler.chains)
    throw ValidationError(p.sub("batches"), "cannot exceed the number of samples");
  s.compare_exact = p.flag("compare_exact", true);
  s.z_threshold = p.positive("z_threshold", s.z_threshold);
  s.cap = p.positive("cap", s.cap);
  if (s.compare_exact) check_enumerable(p, "compare_exact", PathLattice(s.sites, s.steps, s.dt), s.cap);
  return s;
}

void run_metropolis(MetropolisSpec s, Context& ctx) {
  const PathLattice lattice(s.sites, s.steps, s.dt);
  const RealAction S = hamming_penalty_action(Path{s.target}, s.lambda);
  s.sampler.seed = ctx.rng();
  const MetropolisResult res = metropolis_sample(S, lattice, ctx.cfg.hbar, s.sampler);

  {
    auto out = ctx.open("samples.bin");
    write_sample_records(out, res.samples);
  }
  json sidecar = {{"records", "samples.bin"},
                  {"encoding", "uint32 little-endian, one site index per slice"},
                  {"path_length", res.samples.path_length},
                  {"count", res.samples.size()},
                  {"chains", s.sampler.chains},
                  {"sampler_seed", s.sampler.seed},
                  {"acceptance_rate", res.diagnostics.acceptance_rate},
                  {"autocorrelation_estimate", res.diagnostics.autocorrelation_estimate}};
  ctx.write_json("samples.json", sidecar);

  EnumerationOptions opts;
  opts.cap = s.cap;
  std::ostringstream csv;
  csv << "name,t_index,mean,standard_error,exact,z\n";
  json rows = json::array();
  bool all_ok = true;
  double worst_z = 0.0;
  for (const auto& o : s.observables) {
    const SampleEstimate e = estimate(res.samples, site_values(o.values), o.t_index, s.batches);
    json row = {{"name", o.name}, {"t_index", o.t_index}, {"mean", e.mean}, {"standard_error", e.standard_error}};
    csv << o.name << ',' << o.t_index << ',' << csv_number(e.mean) << ',' << csv_number(e.standard_error);
    if (s.compare_exact) {
      const double exact =
          our_average(S, site_values(o.values), o.t_index, lattice, ctx.cfg.hbar, s.sampler.clamp, opts);
      const double diff = std::abs(e.mean - exact);
      const double z = e.standard_error > 0.0 ? diff / e.standard_error : (diff <= 1e-12 ? 0.0 : HUGE_VAL);
      worst_z = std::max(worst_z, z);
      all_ok = all_ok && z <= s.z_threshold;
      row["exact"] = exact;
      row["z"] = std::isfinite(z) ? json(z) : json(nullptr);
      csv << ',' << csv_number(exact) << ',' << csv_number(z);
    } else {
      csv << ",,";
    }
    csv << '\n';
    rows.push_back(row);
  }
  if (ctx.cfg.csv) ctx.open("estimates.csv") << csv.str();
  if (ctx.cfg.json) ctx.write_json("estimates.json", rows);
  const Path mode = empirical_mode(res.samples);
  ctx.summary = {{"samples", res.samples.size()},
                 {"acceptance_rate", res.diagnostics.acceptance_rate},
                 {"autocorrelation_estimate", res.diagnostics.autocorrelation_estimate},
                 {"empirical_mode", mode.points}};
  if (s.compare_exact) {
    ctx.summary["max_z"] = std::isfinite(worst_z) ? json(worst_z) : json(nullptr);
    ctx.check("metropolis_vs_exact", all_ok, "max |z| = " + fmt(worst_z));
  }
}

// ------------------------------------------------------------ potentials

TwoPeakParams parse_two_peak(const Fields& f) {
  TwoPeakParams t;
  t.height_a = f.number("height_a", t.height_a);
  t.center_a = f.number("center_a", t.center_a);
  t.width_a = f.positive("width_a", t.width_a);
  t.height_b = f.number("height_b", t.height_b);
  t.center_b = f.number("center_b", t.center_b);
  t.width_b = f.positive("width_b", t.width_b);
  t.slope = f.number("slope", t.slope);
  return t;
}

struct PotentialSpec {
  std::string type = "zero";
  std::vector<double> stiffness;
  TwoPeakParams two_peak;
};

PotentialSpec parse_potential(const Fields& p, const std::string& key) {
  PotentialSpec s;
  const Fields f = p.table(key);
  s.type = f.text("type", "zero", {"zero", "harmonic", "two_peak"});
  if (s.type == "harmonic") {
    f.only({"type", "stiffness"});
    s.stiffness = f.reals("stiffness");
  } else if (s.type == "two_peak") {
    f.only({"type", "height_a", "center_a", "width_a", "height_b", "center_b", "width_b", "slope"});
    s.two_peak = parse_two_peak(f);
  } else {
    f.only({"type"});
  }
  return s;
}

Potential build_potential(const PotentialSpec& s) {
  if (s.type == "harmonic") return harmonic_potential(s.stiffness);
  if (s.type == "two_peak") return two_peak_potential(s.two_peak);
  return zero_potential();
}

SignMode parse_sign(const Fields& p, const char* fallback) {
  return sign_mode_from_string(p.text("sign_mode", fallback, {"potential_favored", "kinetic_favored"}));
}

json trajectory_json(const Trajectory& tr) {
  json q = json::array();
  for (Eigen::Index r = 0; r < tr.positions.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < tr.positions.cols(); ++c) row.push_back(tr.positions(r, c));
    q.push_back(row);
  }
  return {{"t", tr.times()}, {"q", q}};
}

// ------------------------------------------------------------ favored_path

struct FavoredSpec {
  PotentialSpec potential;
  std::vector<double> masses;
  SignMode sign = SignMode::kinetic_favored;
  double scale = 1.0;
  double dt = 0.01;
  std::size_t steps = 100;
  double t0 = 0.0;
  std::vector<double> start;
  std::vector<double> end;
  bool fixed_start = true;
  bool fixed_end = true;
  OptimizerConfig optimizer;
};

FavoredSpec parse_favored(const Fields& p) {
  p.only({"potential", "masses", "sign_mode", "scale", "dt", "duration", "t0", "start", "end", "fixed_start",
          "fixed_end", "optimizer"});
  FavoredSpec s;
  s.potential = parse_potential(p, "potential");
  s.start = p.reals("start");
  s.end = p.reals("end");
  const std::size_t dim = s.start.size();
  if (s.end.size() != dim) throw ValidationError(p.sub("end"), "must match the length of start");
  s.masses = p.has("masses") ? p.reals("masses") : std::vector<double>{1.0};
  if (s.masses.size() != 1 && s.masses.size() != dim) throw ValidationError(p.sub("masses"), "needs 1 or dim entries");
  for (double m : s.masses)
    if (!(m > 0.0)) throw ValidationError(p.sub("masses"), "masses must be positive");
  if (s.potential.type == "harmonic" && s.potential.stiffness.size() != 1 && s.potential.stiffness.size() != dim)
    throw ValidationError(p.sub("potential.stiffness"), "needs 1 or dim entries");
  if (s.potential.type == "two_peak" && dim != 1)
    throw ValidationError(p.sub("start"), "the two-peak potential is one-dimensional");
  s.sign = parse_sign(p, "kinetic_favored");
  s.scale = p.positive("scale", 1.0);
  s.dt = p.positive("dt");
  s.steps = steps_from_duration(p, s.dt);
  s.t0 = p.number("t0", 0.0);
  s.fixed_start = p.flag("fixed_start", true);
  s.fixed_end = p.flag("fixed_end", true);
  s.optimizer = parse_optimizer(p);
  return s;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void run_favored(const FavoredSpec& s, Context& ctx) {
  ActionModel model;
  model.masses = s.masses.size() == 1 ? std::vector<double>(s.start.size(), s.masses[0]) : s.masses;
  model.potential = build_potential(s.potential);
  model.sign_mode = s.sign;
  model.dt = s.dt;
  model.hbar = ctx.cfg.hbar;
  model.scale = s.scale;
  Trajectory init = Trajectory::linear(s.t0, s.dt, s.steps, to_vec(s.start), to_vec(s.end));
  init.fixed_start = s.fixed_start;
  init.fixed_end = s.fixed_end;
  const FavoredPath fp = find_favored_path(model, init, s.optimizer);

  if (ctx.cfg.csv) {
    auto out = ctx.open("trajectory.csv");
    write_csv(out, fp.trajectory);
  }
  if (ctx.cfg.json) ctx.write_json("trajectory.json", trajectory_json(fp.trajectory));
  json rep = to_json(fp.report);
  rep["sign_mode"] = to_string(s.sign);
  rep["potential"] = model.potential.name;
  ctx.write_json("report.json", rep);
  ctx.summary = rep;
  ctx.check("converged", fp.report.converged,
            "residual " + fmt(fp.report.residual) + " vs tolerance " + fmt(fp.report.residual_tolerance));
}

// ------------------------------------------------------------ slow_roll

struct SlowRollSpec {
  TwoPeakParams potential;
  double mass = 1.0;
  SignMode sign = SignMode::potential_favored;
  double scale = 1.0;
  double dt = 0.05;
  SlowRollConfig config;
};

SlowRollSpec parse_slow_roll(const Fields& p) {
  p.only({"potential", "mass", "sign_mode", "scale", "dt", "duration", "restarts", "domain", "eps_fraction",
          "optimizer"});
  SlowRollSpec s;
  if (p.has("potential")) {
    const Fields f = p.table("potential");
    f.only({"type", "height_a", "center_a", "width_a", "height_b", "center_b", "width_b", "slope"});
    f.text("type", "two_peak", {"two_peak"});
    s.potential = parse_two_peak(f);
  }
  s.mass = p.positive("mass", 1.0);
  s.sign = parse_sign(p, "potential_favored");
  s.scale = p.positive("scale", 1.0);
  s.dt = p.positive("dt");
  steps_from_duration(p, s.dt);
  s.config.duration = p.positive("duration");
  s.config.restarts = p.count("restarts", 0, s.config.restarts);
  if (p.has("domain")) {
    const auto d = p.reals("domain", 2);
    if (d.size() != 2 || !(d[1] > d[0])) throw ValidationError(p.sub("domain"), "expected [lo, hi] with lo < hi");
    s.config.domain_lo = d[0];
    s.config.domain_hi = d[1];
  }
  s.config.eps_fraction = p.positive("eps_fraction", s.config.eps_fraction);
  if (s.config.eps_fraction >= 0.5) throw ValidationError(p.sub("eps_fraction"), "must be below 0.5");
  s.config.optimizer = parse_optimizer(p);
  return s;
}

void run_slow_roll(SlowRollSpec s, Context& ctx) {
  ActionModel model;
  model.masses = {s.mass};
  model.potential = two_peak_potential(s.potential);
  model.sign_mode = s.sign;
  model.dt = s.dt;
  model.hbar = ctx.cfg.hbar;
  model.scale = s.scale;
  s.config.seed = ctx.rng();
  const SlowRollReport rep = slow_roll_scenario(model, s.config);

  json doc = to_json(rep);
  doc["potential"] = to_json(s.potential);
  doc["sign_mode"] = to_string(s.sign);
  doc["restart_seed"] = s.config.seed;
  ctx.write_json("slow_roll.json", doc);

  std::ostringstream csv;
  csv << "rank,label,action,residual,converged,extremum,dwell_a,dwell_b,transits\n";
  bool consistent = true;
  double prev = HUGE_VAL;
  for (std::size_t r = 0; r < rep.ranked.size(); ++r) {
    const auto& sp = rep.ranked[r];
    const double direct = action_value(sp.path.trajectory, model);
    consistent = consistent && std::abs(direct - sp.path.report.action) <= 1e-12 * std::max(1.0, std::abs(direct)) &&
                 direct <= prev;
    prev = direct;
    csv << r << ',' << sp.label << ',' << csv_number(sp.path.report.action) << ','
        << csv_number(sp.path.report.residual) << ',' << (sp.path.report.converged ? "true" : "false") << ','
        << to_string(sp.path.report.extremum) << ',' << csv_number(sp.dwell.dwell_fraction.at(0)) << ','
        << csv_number(sp.dwell.dwell_fraction.at(1)) << ',' << sp.dwell.transit_count << '\n';
    if (ctx.cfg.csv) {
      auto out = ctx.open("path_" + sanitize(sp.label) + ".csv");
      write_csv(out, sp.path.trajectory);
    }
  }
  if (ctx.cfg.csv) ctx.open("ranking.csv") << csv.str();
  if (ctx.cfg.json) {
    json paths = json::object();
    for (const auto& sp : rep.ranked) paths[sp.label] = trajectory_json(sp.path.trajectory);
    ctx.write_json("paths.json", paths);
  }
  std::size_t converged = 0;
  for (const auto& sp : rep.ranked) converged += sp.path.report.converged ? 1 : 0;
  ctx.summary = {{"peaks", rep.peaks.size()}, {"paths", rep.ranked.size()}, {"converged", converged},
                 {"top", rep.ranked.empty() ? json(nullptr) : json(rep.ranked.front().label)}};
  ctx.check("ranking_matches_action", consistent, "ranked actions agree with direct evaluation");
  ctx.check("converged_paths", converged > 0, std::to_string(converged) + " converged stationary paths");
}

// ------------------------------------------------------------ double_slit

struct DoubleSlitSpec {
  std::size_t sites = 3;
  std::size_t steps = 4;
  double dt = 0.25;
  std::optional<CMatrix> step_action;  // real exponent per (to, from); NaN marks forbidden moves
  std::optional<HamiltonianSpec> hamiltonian;
  double period = 1.0;
  std::vector<double> rates;
  SplitSpec split;
  double cap = 1e7;
};

DoubleSlitSpec parse_double_slit(const Fields& p) {
  p.only({"sites", "steps", "dt", "step_action", "hamiltonian", "clock", "split", "cap"});
  DoubleSlitSpec s;
  s.sites = p.count("sites", 2);
  s.steps = p.count("steps", 1);
  s.dt = p.positive("dt");
  if (p.has("step_action") == p.has("hamiltonian"))
    throw ValidationError(p.sub("step_action"), "give exactly one of step_action, hamiltonian");
  if (p.has("step_action")) {
    const json& m = p.at("step_action");
    if (!m.is_array() || m.size() != s.sites) throw ValidationError(p.sub("step_action"), "expected sites x sites rows");
    CMatrix a(static_cast<Eigen::Index>(s.sites), static_cast<Eigen::Index>(s.sites));
    for (std::size_t r = 0; r < s.sites; ++r) {
      const std::string row = p.sub("step_action") + "[" + std::to_string(r) + "]";
      if (!m[r].is_array() || m[r].size() != s.sites) throw ValidationError(row, "expected " + std::to_string(s.sites) + " entries");
      for (std::size_t c = 0; c < s.sites; ++c) {
        const json& v = m[r][c];
        if (v.is_null()) {
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::nan("");
        } else if (v.is_number() && std::isfinite(v.get<double>())) {
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v.get<double>();
        } else {
          throw ValidationError(row + "[" + std::to_string(c) + "]", "expected a number or null");
        }
      }
    }
    s.step_action = a;
  } else {
    s.hamiltonian = parse_hamiltonian(p, "hamiltonian");
    if (s.hamiltonian->dim != s.sites) throw ValidationError(p.sub("hamiltonian"), "dimension must equal sites");
  }
  const Fields clock = p.table("clock");
  clock.only({"period", "rates"});
  s.period = clock.positive("period");
  s.rates = clock.reals("rates");
  if (s.rates.size() != s.sites) throw ValidationError(clock.sub("rates"), "needs one rate per site");
  for (double r : s.rates)
    if (!(r > 0.0)) throw ValidationError(clock.sub("rates"), "rates must be positive");

  const Fields sp = p.table("split");
  sp.only({"start_site", "end_site", "branch_a", "branch_b", "split_slice", "rejoin_slice"});
  s.split.start_site = sp.index("start_site", s.sites);
  s.split.end_site = sp.index("end_site", s.sites);
  s.split.branch_a_sites = sp.indices("branch_a", s.sites);
  s.split.branch_b_sites = sp.indices("branch_b", s.sites);
  for (auto a : s.split.branch_a_sites)
    for (auto b : s.split.branch_b_sites)
      if (a == b) throw ValidationError(sp.sub("branch_b"), "branches must not share sites");
  s.split.split_slice = sp.count("split_slice", 0, 0);
  s.split.rejoin_slice = sp.count("rejoin_slice", 0, s.steps);
  if (s.split.rejoin_slice > s.steps || s.split.split_slice > s.split.rejoin_slice)
    throw ValidationError(sp.sub("rejoin_slice"), "need split_slice <= rejoin_slice <= steps");
  s.cap = p.positive("cap", s.cap);
  check_enumerable(p, "steps", PathLattice(s.sites, s.steps, s.dt), s.cap);
  return s;
}

void run_double_slit(const DoubleSlitSpec& s, Context& ctx) {
  const PathLattice lattice(s.sites, s.steps, s.dt);
  const double hbar = ctx.cfg.hbar;
  std::optional<PathAction> action;
  if (s.step_action) {
    const CMatrix a = *s.step_action;
    action.emplace(s.sites,
                   [a, hbar](std::size_t from, std::size_t to) -> Complex {
                     const double v = a(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)).real();
                     return std::isnan(v) ? Complex(0.0) : Complex(std::exp(v / hbar));
                   },
                   "exp(step_action / hbar)");
  } else {
    action.emplace(action_from_transfer(matexp(build_hamiltonian(*s.hamiltonian, ctx.rng), s.dt, hbar)));
  }
  const ClockModel clock = ClockModel::site_rates(s.period, s.rates);
  EnumerationOptions opts;
  opts.cap = s.cap;
  const DoubleSlitReport rep = double_slit_demo(lattice, *action, clock, s.split, opts);
  ctx.write_json("double_slit.json", to_json(rep));

  // Plot-ready interference curve with this run's phase marked by the law value.
  std::ostringstream csv;
  csv << "phase_difference,probability\n";
  json curve = json::array();
  constexpr std::size_t points = 201;
  for (std::size_t k = 0; k < points; ++k) {
    const double delta = -2.0 + 4.0 * static_cast<double>(k) / static_cast<double>(points - 1);
    const double prob = two_path_probability(delta, 0.0);
    csv << csv_number(2.0 * std::numbers::pi * delta) << ',' << csv_number(prob) << '\n';
    curve.push_back({2.0 * std::numbers::pi * delta, prob});
  }
  if (ctx.cfg.csv) ctx.open("interference_law.csv") << csv.str();
  if (ctx.cfg.json) ctx.write_json("interference_law.json", curve);

  const double oracle = two_amplitude_suppression(rep.bundle_a, rep.bundle_b, 0.0);
  const double diff = std::abs(oracle - rep.suppression_amplitudes);
  ctx.summary = {{"paths_a", rep.paths_a}, {"paths_b", rep.paths_b}, {"phase_difference", rep.phase_difference},
                 {"suppression_law", rep.suppression_law}, {"suppression_amplitudes", rep.suppression_amplitudes}};
  ctx.check("two_amplitude_oracle", diff <= 1e-12, "|difference| = " + fmt(diff));
}

// ------------------------------------------------------------ dispatch

struct KindEntry {
  const char* kind;
  const char* description;
};

constexpr KindEntry kKinds[] = {
    {"weakvalue_suite", "weak-value time series of several observables for one boundary pair"},
    {"maximization", "boundary pair maximizing the transition amplitude, checked by power iteration"},
    {"pathsum_equivalence", "lattice path sums against the operator form of the weak value"},
    {"metropolis", "Metropolis path sampling under exp(S_P/hbar) compared with exact enumeration"},
    {"favored_path", "stationary path of a continuous action between fixed endpoints"},
    {"slow_roll", "ranked stationary paths on the two-peak potential with peak dwell statistics"},
    {"double_slit", "two-branch lattice interference with clock-delay phases"},
};

void validate_kind(const std::string& kind, const Fields& p) {
  if (kind == "weakvalue_suite") parse_suite(p);
  else if (kind == "maximization") parse_max(p);
  else if (kind == "pathsum_equivalence") parse_pathsum(p);
  else if (kind == "metropolis") parse_metropolis(p);
  else if (kind == "favored_path") parse_favored(p);
  else if (kind == "slow_roll") parse_slow_roll(p);
  else if (kind == "double_slit") parse_double_slit(p);
}

void run_kind(const ScenarioConfig& cfg, Context& ctx) {
  const Fields p(cfg.parameters, "parameters");
  const std::string& kind = cfg.kind;
  if (kind == "weakvalue_suite") run_suite(parse_suite(p), ctx);
  else if (kind == "maximization") run_max(parse_max(p), ctx);
  else if (kind == "pathsum_equivalence") run_pathsum(parse_pathsum(p), ctx);
  else if (kind == "metropolis") run_metropolis(parse_metropolis(p), ctx);
  else if (kind == "favored_path") run_favored(parse_favored(p), ctx);
  else if (kind == "slow_roll") run_slow_roll(parse_slow_roll(p), ctx);
  else if (kind == "double_slit") run_double_slit(parse_double_slit(p), ctx);
}

json example_parameters(const std::string& kind) {
  if (kind == "weakvalue_suite")
    return json::parse(R"({
      "hamiltonian": [[1.0, 0.5], [0.5, -1.0]],
      "observables": [
        {"name": "sigma_x", "matrix": [[0, 1], [1, 0]]},
        {"name": "sigma_z", "diagonal": [1, -1]}
      ],
      "t_i": 0.0, "t_f": 1.0, "grid_points": 11
    })");
  if (kind == "maximization")
    return json::parse(R"({
      "hamiltonian": {"model": "hopping", "dim": 3, "hopping": 1.0, "loss": [0.0, 0.3, 0.0]},
      "t_i": 0.0, "t_f": 2.0
    })");
  if (kind == "pathsum_equivalence")
    return json::parse(R"({
      "hamiltonian": {"model": "hopping", "dim": 2, "hopping": 1.0},
      "dt": 0.3, "steps": 4, "observable": [1.0, -1.0], "instances": 10
    })");
  if (kind == "metropolis")
    return json::parse(R"({
      "sites": 2, "steps": 6, "target": [0, 1, 0, 1, 0, 1, 0], "lambda": 1.0,
      "n_samples": 20000, "burn_in": 2000,
      "observables": [
        {"name": "q0", "values": [0, 1], "t_index": 0},
        {"name": "q3", "values": [0, 1], "t_index": 3},
        {"name": "parity6", "values": [1, -1], "t_index": 6}
      ]
    })");
  if (kind == "favored_path")
    return json::parse(R"({
      "potential": {"type": "harmonic", "stiffness": [1.0]},
      "masses": [1.0], "sign_mode": "kinetic_favored",
      "dt": 0.01, "duration": 1.0, "start": [1.0], "end": [0.5403023058681398]
    })");
  if (kind == "slow_roll")
    return json::parse(R"({
      "potential": {"type": "two_peak"},
      "dt": 0.05, "duration": 6.0, "restarts": 4
    })");
  return json::parse(R"({
      "sites": 3, "steps": 4, "dt": 0.25,
      "step_action": [[0.0, -1.0, -1.0], [-1.0, 0.0, null], [-1.0, null, 0.0]],
      "clock": {"period": 1.0, "rates": [1.0, 1.0, 0.5]},
      "split": {"start_site": 0, "end_site": 0, "branch_a": [1], "branch_b": [2]}
    })");
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& k : kKinds) {
    json ex = {{"scenario", k.kind},
               {"hbar", 1.0},
               {"seed", 42},
               {"output", {{"dir", std::string("out/") + k.kind}, {"formats", {"csv", "json"}}}},
               {"checks", true},
               {"parameters", example_parameters(k.kind)}};
    out.push_back({k.kind, k.description, std::move(ex)});
  }
  return out;
}

ScenarioConfig parse_config(const json& j, const RunOverrides& overrides) {
  const Fields top(j, "");
  top.only({"scenario", "description", "hbar", "seed", "output", "checks", "parameters"});
  ScenarioConfig c;
  if (!top.at("scenario").is_string()) throw ValidationError("scenario", "expected a string");
  c.kind = top.at("scenario").get<std::string>();
  bool known = false;
  for (const auto& k : kKinds) known = known || c.kind == k.kind;
  if (!known) throw ValidationError("scenario", "unknown scenario kind '" + c.kind + "'");
  c.hbar = top.positive("hbar");
  if (top.has("seed")) {
    const json& s = top.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ValidationError("seed", "expected a nonnegative integer");
    c.seed = top.at("seed").get<std::uint64_t>();
  }
  c.checks = top.flag("checks", true);

  std::string dir;
  if (top.has("output")) {
    const Fields out = top.table("output");
    out.only({"dir", "formats"});
    if (out.has("dir")) {
      if (!out.at("dir").is_string() || out.at("dir").get<std::string>().empty())
        throw ValidationError("output.dir", "expected a non-empty path");
      dir = out.at("dir").get<std::string>();
    }
    if (out.has("formats")) {
      const json& f = out.at("formats");
      if (!f.is_array() || f.empty()) throw ValidationError("output.formats", "expected a non-empty array");
      c.csv = c.json = false;
      for (const auto& v : f) {
        if (v == "csv") c.csv = true;
        else if (v == "json") c.json = true;
        else throw ValidationError("output.formats", "formats are csv and json");
      }
    }
  }
  if (overrides.output_dir) dir = overrides.output_dir->string();
  if (dir.empty()) throw ValidationError("output.dir", "an output directory is required (config or --out)");
  c.output_dir = dir;
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.format) {
    if (*overrides.format != "csv" && *overrides.format != "json")
      throw ValidationError("--format", "must be csv or json");
    c.csv = *overrides.format == "csv";
    c.json = !c.csv;
  }
  c.parameters = top.has("parameters") ? j.at("parameters") : json::object();
  validate_kind(c.kind, Fields(c.parameters, "parameters"));

  c.source = j;
  c.source["seed"] = c.seed;
  c.source["output"] = {{"dir", dir}, {"formats", json::array()}};
  if (c.csv) c.source["output"]["formats"].push_back("csv");
  if (c.json) c.source["output"]["formats"].push_back("json");
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file, const RunOverrides& overrides) {
  std::ifstream in(file);
  if (!in) throw ValidationError("config", "cannot open " + file.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j, overrides);
}

RunResult run(const ScenarioConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  RunResult result;
  Context ctx(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    result.exit_code = exit_computation;
    result.message = "scenario " + config.kind + ": cannot create " + config.output_dir.string() + ": " + ec.message();
    return result;
  }
  try {
    run_kind(config, ctx);
  } catch (const ValidationError& e) {
    result.exit_code = exit_validation;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = exit_computation;
    result.message = "scenario " + config.kind + ": " + e.what();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  bool checks_ok = true;
  json checks = json::array();
  for (const auto& c : ctx.checks) {
    checks_ok = checks_ok && c.passed;
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  if (result.exit_code == exit_ok && !checks_ok) {
    result.exit_code = exit_invariant;
    result.message = "scenario " + config.kind + ": invariant check failed";
  }
  std::string status = "ok";
  if (result.exit_code == exit_validation) status = "validation_error";
  if (result.exit_code == exit_computation) status = "computation_error";
  if (result.exit_code == exit_invariant) status = "check_failed";

  std::vector<std::string> files = ctx.files;
  std::sort(files.begin(), files.end());
  json manifest = {{"tool", "wvpath"},
                   {"version", kVersion},
                   {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"scenario", config.kind},
                   {"seed", config.seed},
                   {"config", config.source},
                   {"files", files},
                   {"checks", checks},
                   {"summary", ctx.summary},
                   {"status", status},
                   {"message", result.message},
                   {"wall_time_seconds", wall}};
  std::ofstream(config.output_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';

  files.push_back("manifest.json");
  result.files = files;
  result.checks = ctx.checks;
  result.summary = ctx.summary;
  return result;
}

}  // namespace wvpath
