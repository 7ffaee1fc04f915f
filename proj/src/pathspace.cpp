#include "wvpath/pathspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

namespace wvpath {

namespace {

constexpr std::uint64_t kChunk = 4096;

void advance(Path& q, std::size_t sites) {
  for (auto& p : q.points) {
    if (++p < sites) return;
    p = 0;
  }
}

// Deterministic parallel reduction over every path. Each fixed-size chunk is
// summed in enumeration order and chunk results are merged as a balanced
// pairwise tree, so the result is independent of the thread count.
template <class Acc, class Visit, class Merge>
Acc reduce_paths(const PathLattice& lattice, const EnumerationOptions& opts, const Acc& init, Visit visit,
                 Merge merge) {
  const std::uint64_t total = lattice.enumerable_count(opts.cap);
  const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<Acc> partial(chunks, init);

  auto run_chunk = [&](std::uint64_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(total, begin + kChunk);
    Path q = lattice.path_at(begin);
    Acc& acc = partial[c];
    for (std::uint64_t k = begin; k < end; ++k) {
      visit(acc, q);
      advance(q, lattice.sites());
    }
  };

  unsigned workers = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
      });
  }

  while (partial.size() > 1) {
    std::vector<Acc> next;
    next.reserve((partial.size() + 1) / 2);
    for (std::size_t k = 0; k + 1 < partial.size(); k += 2) next.push_back(merge(partial[k], partial[k + 1]));
    if (partial.size() % 2 == 1) next.push_back(std::move(partial.back()));
    partial = std::move(next);
  }
  return partial.empty() ? init : partial.front();
}

// Streaming log-sum-exp of weights exp(s) with per-bin weighted sums.
struct LogWeights {
  double max = -std::numeric_limits<double>::infinity();
  std::vector<double> sums;  // bin sums, scaled by exp(-max)

  void add(double s, std::size_t bin, double value_weight = 1.0) {
    if (std::isnan(s) || s == std::numeric_limits<double>::infinity())
      throw InvalidArgument("S_P evaluated to a non-finite value");
    if (s == -std::numeric_limits<double>::infinity()) return;
    if (s > max) {
      const double r = std::exp(max - s);
      for (double& v : sums) v *= r;
      max = s;
    }
    sums[bin] += value_weight * std::exp(s - max);
  }

  static LogWeights merge(const LogWeights& a, const LogWeights& b) {
    LogWeights out;
    out.max = std::max(a.max, b.max);
    out.sums.assign(a.sums.size(), 0.0);
    if (out.max == -std::numeric_limits<double>::infinity()) return out;
    const double ra = std::exp(a.max - out.max);
    const double rb = std::exp(b.max - out.max);
    for (std::size_t k = 0; k < out.sums.size(); ++k) out.sums[k] = a.sums[k] * ra + b.sums[k] * rb;
    return out;
  }
};

void require_slice(std::size_t t_index, const PathLattice& lattice) {
  if (t_index > lattice.steps()) throw InvalidArgument("time index exceeds the number of steps");
}

void require_hbar(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive and finite");
}

bool clamp_admits(const std::optional<ClampedBoundary>& clamp, const Path& q) {
  return !clamp || (q.points.front() == clamp->start_site && q.points.back() == clamp->end_site);
}

void check_clamp(const std::optional<ClampedBoundary>& clamp, const PathLattice& lattice) {
  if (clamp && (clamp->start_site >= lattice.sites() || clamp->end_site >= lattice.sites()))
    throw InvalidArgument("clamped endpoint outside the lattice");
}

void check_boundary(const Boundary& b, const PathLattice& lattice) {
  if (const auto* amp = std::get_if<AmplitudeBoundary>(&b)) {
    if (amp->initial.dim() != lattice.sites()) throw DimensionMismatch(lattice.sites(), amp->initial.dim());
    if (amp->final_state.dim() != lattice.sites()) throw DimensionMismatch(lattice.sites(), amp->final_state.dim());
  } else {
    const auto& c = std::get<ClampedBoundary>(b);
    check_clamp(c, lattice);
  }
}

double boundary_scale(const Boundary& b) {
  if (const auto* amp = std::get_if<AmplitudeBoundary>(&b)) return amp->initial.norm() * amp->final_state.norm();
  return 1.0;
}

// Distinct values of O over the sites (merged within a relative 1e-12) and
// the bin of each site.
struct ValueBins {
  std::vector<double> values;
  std::vector<std::size_t> bin_of_site;
};

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

ValueBins bin_values(const SiteObservable& O, std::size_t sites) {
  std::vector<double> raw(sites);
  for (std::size_t s = 0; s < sites; ++s) {
    raw[s] = O(s);
    if (!std::isfinite(raw[s])) throw InvalidArgument("observable is non-finite at site " + std::to_string(s));
  }
  ValueBins out;
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted)
    if (out.values.empty() || !same_value(v, out.values.back())) out.values.push_back(v);
  out.bin_of_site.resize(sites);
  for (std::size_t s = 0; s < sites; ++s)
    for (std::size_t b = 0; b < out.values.size(); ++b)
      if (same_value(raw[s], out.values[b])) {
        out.bin_of_site[s] = b;
        break;
      }
  return out;
}

struct ComplexBins {
  std::vector<Complex> sums;
  static ComplexBins merge(const ComplexBins& a, const ComplexBins& b) {
    ComplexBins out = a;
    for (std::size_t k = 0; k < out.sums.size(); ++k) out.sums[k] += b.sums[k];
    return out;
  }
};

ComplexBins weak_bins(const PathAction& A, const ValueBins& bins, std::size_t t_index, const PathLattice& lattice,
                      const Boundary& boundary, const EnumerationOptions& opts) {
  ComplexBins init{std::vector<Complex>(bins.values.size(), 0.0)};
  return reduce_paths(
      lattice, opts, init,
      [&](ComplexBins& acc, const Path& q) {
        const Complex b = boundary_factor(boundary, q);
        if (b == 0.0) return;
        acc.sums[bins.bin_of_site[q[t_index]]] += b * A.amplitude(q);
      },
      ComplexBins::merge);
}

LogWeights real_bins(const RealAction& S_P, const ValueBins& bins, std::size_t t_index, const PathLattice& lattice,
                     double hbar, const std::optional<ClampedBoundary>& clamp, const EnumerationOptions& opts) {
  LogWeights init;
  init.sums.assign(bins.values.size(), 0.0);
  LogWeights acc = reduce_paths(
      lattice, opts, init,
      [&](LogWeights& a, const Path& q) {
        if (!clamp_admits(clamp, q)) return;
        a.add(S_P(q) / hbar, bins.bin_of_site[q[t_index]]);
      },
      LogWeights::merge);
  if (acc.max == -std::numeric_limits<double>::infinity())
    throw InvalidArgument("every admissible path has zero weight");
  return acc;
}

}  // namespace

// ---------------------------------------------------------------- lattice

PathLattice::PathLattice(std::size_t sites, std::size_t steps, double dt) : sites_(sites), steps_(steps), dt_(dt) {
  if (sites == 0) throw InvalidArgument("lattice needs at least one site");
  if (steps == 0) throw InvalidArgument("lattice needs at least one step");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("lattice dt must be positive");
  if (sites > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("too many lattice sites");
}

double PathLattice::path_count() const {
  return std::pow(static_cast<double>(sites_), static_cast<double>(steps_ + 1));
}

std::uint64_t PathLattice::enumerable_count(double cap) const {
  const double count = path_count();
  if (count > cap) throw EnumerationCapExceeded(count, cap);
  std::uint64_t n = 1;
  for (std::size_t t = 0; t <= steps_; ++t) n *= sites_;
  return n;
}

Path PathLattice::path_at(std::uint64_t index) const {
  Path q;
  q.points.resize(steps_ + 1);
  for (auto& p : q.points) {
    p = static_cast<std::uint32_t>(index % sites_);
    index /= sites_;
  }
  if (index != 0) throw InvalidArgument("path index outside the lattice");
  return q;
}

bool PathLattice::contains(const Path& q) const {
  if (q.points.size() != steps_ + 1) return false;
  return std::all_of(q.points.begin(), q.points.end(), [&](std::uint32_t p) { return p < sites_; });
}

SiteObservable site_values(std::vector<double> values) {
  return [values = std::move(values)](std::size_t site) {
    if (site >= values.size()) throw InvalidArgument("site observable has no value for site " + std::to_string(site));
    return values[site];
  };
}

// ----------------------------------------------------------------- actions

PathAction::PathAction(std::size_t sites, StepWeight step, std::string description)
    : sites_(sites), step_(std::move(step)), description_(std::move(description)) {
  if (sites == 0) throw InvalidArgument("path action needs at least one site");
  if (!step_) throw InvalidArgument("path action needs a step weight");
}

Complex PathAction::amplitude(const Path& q) const {
  Complex a = 1.0;
  for (std::size_t t = 0; t + 1 < q.points.size(); ++t) a *= step_(q.points[t], q.points[t + 1]);
  return a;
}

PathAction action_from_transfer(const Propagator& U_step) {
  const CMatrix U = U_step.matrix();
  PathAction A(
      U_step.dim(),
      [U](std::size_t from, std::size_t to) {
        return U(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));
      },
      "transfer matrix: exp(i S_step/hbar) = <q'|U_step|q>, step duration " + std::to_string(U_step.duration()));
  A.transfer_ = U;
  return A;
}

Complex boundary_factor(const Boundary& b, const Path& q) {
  if (const auto* amp = std::get_if<AmplitudeBoundary>(&b))
    return std::conj(amp->final_state[q.points.back()]) * amp->initial[q.points.front()];
  const auto& c = std::get<ClampedBoundary>(b);
  return (q.points.front() == c.start_site && q.points.back() == c.end_site) ? 1.0 : 0.0;
}

Complex amplitude_sum(const PathAction& A, const PathLattice& lattice, const Boundary& boundary,
                      const EnumerationOptions& opts) {
  if (A.sites() != lattice.sites()) throw DimensionMismatch(lattice.sites(), A.sites());
  check_boundary(boundary, lattice);
  return reduce_paths(
      lattice, opts, Complex(0.0),
      [&](Complex& acc, const Path& q) {
        const Complex b = boundary_factor(boundary, q);
        if (b != 0.0) acc += b * A.amplitude(q);
      },
      [](Complex a, Complex b) { return a + b; });
}

Complex weak_value_pathsum(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                           const PathLattice& lattice, const Boundary& boundary, const Tolerances& tol,
                           const EnumerationOptions& opts) {
  if (A.sites() != lattice.sites()) throw DimensionMismatch(lattice.sites(), A.sites());
  require_slice(t_index, lattice);
  check_boundary(boundary, lattice);

  std::vector<double> o(lattice.sites());
  for (std::size_t s = 0; s < o.size(); ++s) o[s] = O(s);

  struct Sums {
    Complex num = 0.0;
    Complex den = 0.0;
  };
  const Sums s = reduce_paths(
      lattice, opts, Sums{},
      [&](Sums& acc, const Path& q) {
        const Complex b = boundary_factor(boundary, q);
        if (b == 0.0) return;
        const Complex w = b * A.amplitude(q);
        acc.den += w;
        acc.num += w * o[q[t_index]];
      },
      [](const Sums& a, const Sums& b) { return Sums{a.num + b.num, a.den + b.den}; });

  const double scale = boundary_scale(boundary);
  if (!(std::abs(s.den) > tol.denominator * scale)) throw OrthogonalBoundaryStates(std::abs(s.den) / scale);
  return s.num / s.den;
}

Complex weak_value_pathsum(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                           const PathLattice& lattice, const StateVector& i, const StateVector& f,
                           const Tolerances& tol, const EnumerationOptions& opts) {
  return weak_value_pathsum(A, O, t_index, lattice, Boundary{AmplitudeBoundary{i, f}}, tol, opts);
}

double path_weight(double s_p, double hbar) { return std::exp(s_p / hbar); }

double our_average(const RealAction& S_P, const SiteObservable& O, std::size_t t_index, const PathLattice& lattice,
                   double hbar, const std::optional<ClampedBoundary>& clamp, const EnumerationOptions& opts) {
  require_hbar(hbar);
  require_slice(t_index, lattice);
  check_clamp(clamp, lattice);
  const ValueBins bins = bin_values(O, lattice.sites());
  const LogWeights acc = real_bins(S_P, bins, t_index, lattice, hbar, clamp, opts);
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t b = 0; b < bins.values.size(); ++b) {
    total += acc.sums[b];
    weighted += acc.sums[b] * bins.values[b];
  }
  // Clamp against rounding so the result stays inside the range of O.
  const double avg = weighted / total;
  return std::clamp(avg, bins.values.front(), bins.values.back());
}

RealAction hamming_penalty_action(Path target, double lambda) {
  return [target = std::move(target), lambda](const Path& q) {
    if (q.points.size() != target.points.size()) throw DimensionMismatch(target.points.size(), q.points.size());
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < q.points.size(); ++t) mismatches += (q.points[t] != target.points[t]);
    return -lambda * static_cast<double>(mismatches);
  };
}

Path argmax_path(const RealAction& S_P, const PathLattice& lattice, const std::optional<ClampedBoundary>& clamp,
                 const EnumerationOptions& opts) {
  check_clamp(clamp, lattice);
  struct Best {
    double s = -std::numeric_limits<double>::infinity();
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
  };
  auto index_of = [&](const Path& q) {
    std::uint64_t k = 0;
    for (std::size_t t = q.points.size(); t-- > 0;) k = k * lattice.sites() + q.points[t];
    return k;
  };
  const Best b = reduce_paths(
      lattice, opts, Best{},
      [&](Best& acc, const Path& q) {
        if (!clamp_admits(clamp, q)) return;
        const double s = S_P(q);
        const std::uint64_t k = index_of(q);
        if (s > acc.s || (s == acc.s && k < acc.index)) {
          acc.s = s;
          acc.index = k;
        }
      },
      [](const Best& x, const Best& y) {
        if (y.s > x.s || (y.s == x.s && y.index < x.index)) return y;
        return x;
      });
  if (b.index == std::numeric_limits<std::uint64_t>::max()) throw InvalidArgument("no admissible path");
  return lattice.path_at(b.index);
}

// ---------------------------------------------------------------- sampling

namespace {

double integrated_autocorrelation(const std::vector<double>& trace) {
  const std::size_t n = trace.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : trace) var += (v - mean) * (v - mean);
  if (var <= 0.0) return 1.0;
  double tau = 1.0;
  const std::size_t max_lag = std::min<std::size_t>(n / 4, 2000);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) c += (trace[k] - mean) * (trace[k + lag] - mean);
    const double rho = c / var;
    if (rho <= 0.0) break;
    tau += 2.0 * rho;
    // Sokal's automatic window.
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return tau;
}

}  // namespace

MetropolisResult metropolis_sample(const RealAction& S_P, const PathLattice& lattice, double hbar,
                                   const MetropolisConfig& config) {
  require_hbar(hbar);
  if (config.n_samples == 0) throw InvalidArgument("n_samples must be positive");
  if (config.burn_in == 0) throw InvalidArgument("burn_in must be positive");
  if (config.chains == 0) throw InvalidArgument("chains must be positive");
  if (config.thin == 0) throw InvalidArgument("thin must be positive");
  check_clamp(config.clamp, lattice);

  const std::size_t slices = lattice.slices();
  std::vector<std::size_t> free_slices;
  for (std::size_t t = 0; t < slices; ++t) {
    const bool pinned = config.clamp && (t == 0 || t + 1 == slices);
    if (!pinned) free_slices.push_back(t);
  }
  if (free_slices.empty()) throw InvalidArgument("no free slices to sample");

  MetropolisResult out;
  out.samples.path_length = slices;
  out.samples.sites.reserve(config.n_samples * slices);
  std::vector<double> trace;
  trace.reserve(config.n_samples);

  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  const std::size_t sites = lattice.sites();

  for (std::size_t chain = 0; chain < config.chains; ++chain) {
    const std::size_t wanted = config.n_samples / config.chains + (chain < config.n_samples % config.chains ? 1 : 0);
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(chain)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick_slice(0, free_slices.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_site(0, sites - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Path q;
    q.points.resize(slices);
    for (auto& p : q.points) p = static_cast<std::uint32_t>(pick_site(rng));
    if (config.clamp) {
      q.points.front() = static_cast<std::uint32_t>(config.clamp->start_site);
      q.points.back() = static_cast<std::uint32_t>(config.clamp->end_site);
    }
    double s = S_P(q) / hbar;

    auto sweep_step = [&] {
      const std::size_t t = free_slices[pick_slice(rng)];
      const std::uint32_t old = q.points[t];
      std::uint32_t proposed = old;
      if (config.proposal == Proposal::slice_resample) {
        proposed = static_cast<std::uint32_t>(pick_site(rng));
      } else {
        const bool up = unit(rng) < 0.5;
        proposed = static_cast<std::uint32_t>(up ? (old + 1) % sites : (old + sites - 1) % sites);
      }
      q.points[t] = proposed;
      const double s_new = S_P(q) / hbar;
      const double log_ratio = s_new - s;
      const bool accept = log_ratio >= 0.0 || std::log(unit(rng)) < log_ratio;
      if (accept) {
        s = s_new;
      } else {
        q.points[t] = old;
      }
      return accept;
    };

    std::uint64_t burn_accepts = 0;
    for (std::size_t k = 0; k < config.burn_in; ++k) burn_accepts += sweep_step();
    if (burn_accepts == 0)
      throw SamplerStalled("no proposal accepted during burn-in; retune the proposal or raise hbar");

    for (std::size_t k = 0; k < wanted; ++k) {
      for (std::size_t j = 0; j < config.thin; ++j) {
        ++proposals;
        accepted += sweep_step();
      }
      out.samples.sites.insert(out.samples.sites.end(), q.points.begin(), q.points.end());
      trace.push_back(s);
    }
  }

  out.diagnostics.acceptance_rate = proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  out.diagnostics.autocorrelation_estimate = integrated_autocorrelation(trace);
  return out;
}

SampleEstimate estimate(const SampleSet& samples, const SiteObservable& O, std::size_t t_index, std::size_t batches) {
  const std::size_t n = samples.size();
  if (n == 0) throw InvalidArgument("empty sample set");
  if (t_index >= samples.path_length) throw InvalidArgument("time index exceeds the sampled path length");
  batches = std::clamp<std::size_t>(batches, 1, n);

  std::vector<double> values(n);
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = O(samples.path(k)[t_index]);
    mean += values[k];
  }
  mean /= static_cast<double>(n);

  SampleEstimate est;
  est.mean = mean;
  if (batches < 2) return est;
  const std::size_t per = n / batches;
  double ss = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    double bm = 0.0;
    for (std::size_t k = b * per; k < (b + 1) * per; ++k) bm += values[k];
    bm /= static_cast<double>(per);
    ss += (bm - mean) * (bm - mean);
  }
  est.standard_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return est;
}

Path empirical_mode(const SampleSet& samples) {
  if (samples.size() == 0) throw InvalidArgument("empty sample set");
  std::map<std::vector<std::uint32_t>, std::size_t> counts;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    auto p = samples.path(k);
    ++counts[std::vector<std::uint32_t>(p.begin(), p.end())];
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return Path{best->first};
}

void write_sample_records(std::ostream& out, const SampleSet& samples) {
  for (std::uint32_t v : samples.sites) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xffu), static_cast<unsigned char>((v >> 8) & 0xffu),
                                    static_cast<unsigned char>((v >> 16) & 0xffu),
                                    static_cast<unsigned char>((v >> 24) & 0xffu)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
}

SampleSet read_sample_records(std::istream& in, std::size_t path_length) {
  if (path_length == 0) throw InvalidArgument("path length must be positive");
  SampleSet s;
  s.path_length = path_length;
  unsigned char bytes[4];
  while (in.read(reinterpret_cast<char*>(bytes), 4))
    s.sites.push_back(static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
                      (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24));
  if (s.sites.size() % path_length != 0) throw InvalidArgument("record file is truncated");
  return s;
}

// ------------------------------------------------------- value probabilities

std::vector<RealValueWeight> value_distribution(const RealAction& S_P, const SiteObservable& O, std::size_t t_index,
                                                const PathLattice& lattice, double hbar,
                                                const std::optional<ClampedBoundary>& clamp,
                                                const EnumerationOptions& opts) {
  require_hbar(hbar);
  require_slice(t_index, lattice);
  check_clamp(clamp, lattice);
  const ValueBins bins = bin_values(O, lattice.sites());
  const LogWeights acc = real_bins(S_P, bins, t_index, lattice, hbar, clamp, opts);
  double total = 0.0;
  for (double v : acc.sums) total += v;
  std::vector<RealValueWeight> out;
  for (std::size_t b = 0; b < bins.values.size(); ++b) out.push_back({bins.values[b], acc.sums[b] / total});
  return out;
}

std::vector<WeakValueWeight> value_distribution(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                                                const PathLattice& lattice, const Boundary& boundary,
                                                const Tolerances& tol, const EnumerationOptions& opts) {
  if (A.sites() != lattice.sites()) throw DimensionMismatch(lattice.sites(), A.sites());
  require_slice(t_index, lattice);
  check_boundary(boundary, lattice);
  const ValueBins bins = bin_values(O, lattice.sites());
  const ComplexBins acc = weak_bins(A, bins, t_index, lattice, boundary, opts);
  Complex total = 0.0;
  for (const auto& v : acc.sums) total += v;
  const double scale = boundary_scale(boundary);
  if (!(std::abs(total) > tol.denominator * scale)) throw OrthogonalBoundaryStates(std::abs(total) / scale);
  std::vector<WeakValueWeight> out;
  for (std::size_t b = 0; b < bins.values.size(); ++b) out.push_back({bins.values[b], acc.sums[b] / total});
  return out;
}

double probability_of_value(const RealAction& S_P, const SiteObservable& O, double value, std::size_t t_index,
                            const PathLattice& lattice, double hbar, const std::optional<ClampedBoundary>& clamp,
                            const EnumerationOptions& opts) {
  for (const auto& w : value_distribution(S_P, O, t_index, lattice, hbar, clamp, opts))
    if (same_value(value, w.value)) return w.probability;
  return 0.0;
}

Complex probability_of_value(const PathAction& A, const SiteObservable& O, double value, std::size_t t_index,
                             const PathLattice& lattice, const Boundary& boundary, const Tolerances& tol,
                             const EnumerationOptions& opts) {
  for (const auto& w : value_distribution(A, O, t_index, lattice, boundary, tol, opts))
    if (same_value(value, w.value)) return w.weight;
  return 0.0;
}

}  // namespace wvpath
