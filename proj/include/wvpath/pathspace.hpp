#pragma once

// Histories on a finite lattice: exact path sums and Metropolis sampling.
//
// Two weightings live side by side:
//   * a real exponent S_P[q], giving the positive weight exp(S_P[q]/hbar);
//   * a complex per-step amplitude built from a one-step transfer matrix,
//     amplitude(q) = prod_t <q_{t+1}|U_step|q_t>, whose boundary-weighted sum
//     reproduces matrix elements of U_step^T exactly.
//
// Path index k enumerates histories in mixed radix with q_0 the fastest digit:
// for two sites and one step the order is (0,0), (1,0), (0,1), (1,1).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wvpath/hilbert.hpp"

namespace wvpath {

struct Path {
  std::vector<std::uint32_t> points;  // site at each of the T+1 slices

  std::size_t length() const noexcept { return points.size(); }
  std::uint32_t operator[](std::size_t t) const { return points[t]; }
  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

struct EnumerationOptions {
  double cap = 1e7;
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend
  /// on this value.
  unsigned threads = 0;
};

class PathLattice {
 public:
  PathLattice(std::size_t sites, std::size_t steps, double dt);

  std::size_t sites() const noexcept { return sites_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t slices() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }

  /// n^(T+1), as a double so it never overflows.
  double path_count() const;
  /// Exact count; throws EnumerationCapExceeded above `cap`.
  std::uint64_t enumerable_count(double cap) const;

  Path path_at(std::uint64_t index) const;
  bool contains(const Path& q) const;

 private:
  std::size_t sites_;
  std::size_t steps_;
  double dt_;
};

using SiteObservable = std::function<double(std::size_t site)>;
using RealAction = std::function<double(const Path&)>;

/// Observable that takes `values[site]` on each site.
SiteObservable site_values(std::vector<double> values);

/// Per-step complex amplitude; amplitude(q) is the product over steps.
class PathAction {
 public:
  using StepWeight = std::function<Complex(std::size_t from, std::size_t to)>;

  PathAction(std::size_t sites, StepWeight step, std::string description);

  std::size_t sites() const noexcept { return sites_; }
  Complex step(std::size_t from, std::size_t to) const { return step_(from, to); }
  Complex amplitude(const Path& q) const;
  const std::string& description() const noexcept { return description_; }

  /// Transfer matrix, when the action was built from one.
  const std::optional<CMatrix>& transfer() const noexcept { return transfer_; }

 private:
  friend PathAction action_from_transfer(const Propagator&);
  std::size_t sites_;
  StepWeight step_;
  std::string description_;
  std::optional<CMatrix> transfer_;
};

/// amplitude(q) = prod_t <q_{t+1}|U_step|q_t>.
PathAction action_from_transfer(const Propagator& U_step);

/// Boundary states enter as conj(f[q_T]) * i[q_0].
struct AmplitudeBoundary {
  StateVector initial;
  StateVector final_state;
};

/// Only paths with q_0 = start_site and q_T = end_site contribute.
struct ClampedBoundary {
  std::size_t start_site = 0;
  std::size_t end_site = 0;
};

using Boundary = std::variant<AmplitudeBoundary, ClampedBoundary>;

Complex boundary_factor(const Boundary& b, const Path& q);

/// Sum over all paths of boundary * amplitude * O(q_t) divided by the same
/// sum without the observable.
Complex weak_value_pathsum(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                           const PathLattice& lattice, const Boundary& boundary,
                           const Tolerances& tol = default_tolerances(), const EnumerationOptions& opts = {});

Complex weak_value_pathsum(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                           const PathLattice& lattice, const StateVector& i, const StateVector& f,
                           const Tolerances& tol = default_tolerances(), const EnumerationOptions& opts = {});

/// Boundary-weighted sum of amplitudes over every path.
Complex amplitude_sum(const PathAction& A, const PathLattice& lattice, const Boundary& boundary,
                      const EnumerationOptions& opts = {});

/// Average of O(q_t) under exp(S_P/hbar), optionally over clamped paths only.
double our_average(const RealAction& S_P, const SiteObservable& O, std::size_t t_index,
                   const PathLattice& lattice, double hbar, const std::optional<ClampedBoundary>& clamp = {},
                   const EnumerationOptions& opts = {});

/// exp(S_P/hbar); the unnormalized weight our_average uses.
double path_weight(double s_p, double hbar);

/// -lambda * (number of slices where q differs from target).
RealAction hamming_penalty_action(Path target, double lambda);

/// Path with the largest S_P (first in enumeration order on ties).
Path argmax_path(const RealAction& S_P, const PathLattice& lattice, const std::optional<ClampedBoundary>& clamp = {},
                 const EnumerationOptions& opts = {});

// ---------------------------------------------------------------- sampling

enum class Proposal {
  slice_resample,  // pick a free slice, draw a uniformly random site
  neighbor_shift,  // pick a free slice, move to site +-1 (periodic)
};

struct MetropolisConfig {
  std::size_t n_samples = 0;
  std::size_t burn_in = 0;
  Proposal proposal = Proposal::slice_resample;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::size_t thin = 1;
  std::optional<ClampedBoundary> clamp;
};

/// Flat storage of sampled paths, each `path_length` site indices long.
struct SampleSet {
  std::size_t path_length = 0;
  std::vector<std::uint32_t> sites;

  std::size_t size() const noexcept { return path_length == 0 ? 0 : sites.size() / path_length; }
  std::span<const std::uint32_t> path(std::size_t k) const {
    return {sites.data() + k * path_length, path_length};
  }
};

struct MetropolisDiagnostics {
  double acceptance_rate = 0.0;
  /// Integrated autocorrelation time of the S_P trace, in samples.
  double autocorrelation_estimate = 1.0;
};

struct MetropolisResult {
  SampleSet samples;
  MetropolisDiagnostics diagnostics;
};

MetropolisResult metropolis_sample(const RealAction& S_P, const PathLattice& lattice, double hbar,
                                   const MetropolisConfig& config);

struct SampleEstimate {
  double mean = 0.0;
  double standard_error = 0.0;  // batch-means estimate
};

SampleEstimate estimate(const SampleSet& samples, const SiteObservable& O, std::size_t t_index,
                        std::size_t batches = 50);

/// Most frequent path in the sample set (lexicographically smallest on ties).
Path empirical_mode(const SampleSet& samples);

/// Binary records: each path as `path_length` little-endian uint32 values.
void write_sample_records(std::ostream& out, const SampleSet& samples);
SampleSet read_sample_records(std::istream& in, std::size_t path_length);

// ------------------------------------------------------- value probabilities

/// Genuine probability that O(q_t) == value under exp(S_P/hbar).
double probability_of_value(const RealAction& S_P, const SiteObservable& O, double value, std::size_t t_index,
                            const PathLattice& lattice, double hbar,
                            const std::optional<ClampedBoundary>& clamp = {}, const EnumerationOptions& opts = {});

/// Complex quasi-weight of O(q_t) == value under the boundary-weighted amplitude.
Complex probability_of_value(const PathAction& A, const SiteObservable& O, double value, std::size_t t_index,
                             const PathLattice& lattice, const Boundary& boundary,
                             const Tolerances& tol = default_tolerances(), const EnumerationOptions& opts = {});

struct RealValueWeight {
  double value;
  double probability;
};
struct WeakValueWeight {
  double value;
  Complex weight;
};

/// All distinct values of O on the lattice (ascending) with their weights.
std::vector<RealValueWeight> value_distribution(const RealAction& S_P, const SiteObservable& O, std::size_t t_index,
                                                const PathLattice& lattice, double hbar,
                                                const std::optional<ClampedBoundary>& clamp = {},
                                                const EnumerationOptions& opts = {});
std::vector<WeakValueWeight> value_distribution(const PathAction& A, const SiteObservable& O, std::size_t t_index,
                                                const PathLattice& lattice, const Boundary& boundary,
                                                const Tolerances& tol = default_tolerances(),
                                                const EnumerationOptions& opts = {});

}  // namespace wvpath
