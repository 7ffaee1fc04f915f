#pragma once

// Random generators and brute-force oracles shared by the test suites. The
// oracles deliberately avoid the library's own numerics.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include "wvpath/hilbert.hpp"

namespace testsupport {

using wvpath::CMatrix;
using wvpath::Complex;
using wvpath::CVector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& engine() { return rng_; }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Complex cnormal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  CVector vector(std::size_t n) {
    CVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cnormal();
    return v;
  }
  wvpath::StateVector state(std::size_t n) { return wvpath::StateVector(vector(n).normalized()); }

  CMatrix general(std::size_t n) {
    CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) = vector(n);
    return m / std::sqrt(static_cast<double>(n));
  }
  CMatrix hermitian(std::size_t n) {
    const CMatrix g = general(n);
    return (g + g.adjoint()) / 2.0;
  }
  /// Strictly non-normal: a Hermitian part plus a nilpotent upper triangle.
  CMatrix non_normal(std::size_t n) {
    CMatrix m = hermitian(n);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = r + 1; c < m.cols(); ++c) m(r, c) += Complex(uniform(0.2, 1.0), uniform(-0.5, 0.5));
    for (Eigen::Index k = 0; k < m.rows(); ++k) m(k, k) += Complex(0.0, -uniform(0.0, 0.5));
    return m;
  }
  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

/// exp(A) by a plain truncated Taylor series with repeated halving for large norms.
inline CMatrix taylor_expm(const CMatrix& A, int terms = 50) {
  double norm = 0.0;
  for (Eigen::Index r = 0; r < A.rows(); ++r) norm = std::max(norm, A.row(r).cwiseAbs().sum());
  int halvings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++halvings;
  }
  const CMatrix B = A / std::pow(2.0, halvings);
  CMatrix sum = CMatrix::Identity(A.rows(), A.cols());
  CMatrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * B / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < halvings; ++k) sum = sum * sum;
  return sum;
}

/// exp(-i H t / hbar) through the Taylor oracle.
inline CMatrix taylor_propagator(const CMatrix& H, double t, double hbar = 1.0) {
  return taylor_expm(Complex(0.0, -t / hbar) * H);
}

inline double max_abs(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Largest singular value by power iteration on U^dagger U.
inline double power_sigma(const CMatrix& U, int iterations, std::uint64_t seed = 7) {
  Gen g(seed);
  CVector v = g.vector(static_cast<std::size_t>(U.cols())).normalized();
  const CMatrix G = U.adjoint() * U;
  for (int k = 0; k < iterations; ++k) v = (G * v).normalized();
  return (U * v).norm();
}

/// Unit vector in C^n from 2n-1 real angles: hyperspherical moduli and relative phases.
inline CVector angles_to_state(const std::vector<double>& a, std::size_t n) {
  CVector v(static_cast<Eigen::Index>(n));
  double carry = 1.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    v(static_cast<Eigen::Index>(k)) = carry * std::cos(a[k]);
    carry *= std::sin(a[k]);
  }
  v(static_cast<Eigen::Index>(n - 1)) = carry;
  for (std::size_t k = 1; k < n; ++k) v(static_cast<Eigen::Index>(k)) *= std::polar(1.0, a[n - 1 + k - 1]);
  return v;
}

/// max |<f|U|i>| over unit pairs: coarse random sampling, then compass search
/// over the hyperspherical parametrization of both states.
inline double grid_search_overlap(const CMatrix& U, std::uint64_t seed, int coarse = 4000) {
  const std::size_t n = static_cast<std::size_t>(U.rows());
  const std::size_t per = 2 * n - 1;
  Gen g(seed);
  auto objective = [&](const std::vector<double>& x) {
    const std::vector<double> xi(x.begin(), x.begin() + static_cast<long>(per));
    const std::vector<double> xf(x.begin() + static_cast<long>(per), x.end());
    return std::abs(angles_to_state(xf, n).dot(U * angles_to_state(xi, n)));
  };
  std::vector<double> best(2 * per);
  double best_val = -1.0;
  for (int s = 0; s < coarse; ++s) {
    std::vector<double> x(2 * per);
    for (auto& v : x) v = g.uniform(0.0, 2.0 * std::numbers::pi);
    const double val = objective(x);
    if (val > best_val) {
      best_val = val;
      best = x;
    }
  }
  double step = 0.5;
  while (step > 1e-7) {
    bool improved = false;
    for (std::size_t k = 0; k < best.size(); ++k) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> x = best;
        x[k] += dir * step;
        const double val = objective(x);
        if (val > best_val) {
          best_val = val;
          best = x;
          improved = true;
        }
      }
    }
    if (!improved) step /= 2.0;
  }
  return best_val;
}

/// Run `body(gen, trial)` for `trials` independent seeded generators.
template <class F>
void for_trials(std::uint64_t seed, int trials, F&& body) {
  for (int k = 0; k < trials; ++k) {
    Gen g(seed * 1000003ULL + static_cast<std::uint64_t>(k));
    body(g, k);
  }
}

}  // namespace testsupport
