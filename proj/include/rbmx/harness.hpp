#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rbmx/bridge_math.hpp"
#include "rbmx/rng.hpp"
#include "rbmx/skorokhod.hpp"

namespace rbmx {

struct KSReport {
    double statistic = 0.0;
    std::size_t n = 0;
    double alpha = 0.0;
    double critical = 0.0;  // threshold on the statistic itself
    bool pass = false;
};

struct OracleEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    double grid_step = 0.0;
};

// CDF of 1-d RBM started at 0: P(|B(T)| <= x) = 2 Phi(x / sqrt(T)) - 1.
double half_normal_cdf(double x, double T);

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
KSReport ks_test(const std::vector<double>& samples, const std::function<double(double)>& cdf,
                 double alpha);

// Max ECDF distance between two sample sets.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

// Monte Carlo estimate of the stay-in-band probability of a Brownian bridge.
// Endpoints are simulated on a grid; within-segment boundary crossings are
// resolved by exact reflection-formula thinning, so the extrema carry no
// O(sqrt(step)) discretization bias.
OracleEstimate mc_gamma_oracle(double L, double U, const BridgeGeometry& geom,
                               std::uint64_t n_paths, double grid_step, Stream rng);

// Conditional oracle for rho: bridges through (s, x) and (l, v), per-segment
// extrema sampled exactly by inversion; estimates
// P{min in (L_low, L_up], max in [U_low, U_up)}.
OracleEstimate mc_rho_oracle(const BandDensityParams& p, double x, std::uint64_t n_paths,
                             double grid_step, Stream rng);

// Same bracketed-extrema probability for a single unconditioned bridge.
OracleEstimate mc_extrema_oracle(const Band& band, const BridgeGeometry& geom,
                                 std::uint64_t n_paths, double grid_step, Stream rng);

// Approximate RBM draws from reflecting fine piecewise-linear Brownian
// interpolations; O(sqrt(grid_step)) bias, used as a distributional
// reference in d >= 2. Returns n_samples rows of dimension spec.d.
std::vector<std::vector<double>> fine_grid_rbm_oracle(const ReflectionSpec& spec,
                                                      const std::vector<double>& y0, double T,
                                                      double grid_step, std::size_t n_samples,
                                                      Stream rng, unsigned threads = 0);

struct ConvergenceStudy {
    std::vector<int> levels;
    std::vector<double> mean_area;                // E integral of envelope gap
    std::vector<std::vector<double>> area_by_seed;  // [seed][level index]
    double slope = 0.0;                           // log2 mean_area vs level, least squares
};

// Mean envelope area per level over seeded layer refinements plus the fitted
// log2 slope (the O(2^{-n/2}) rate check).
ConvergenceStudy convergence_study(int level_lo, int level_hi, std::size_t n_seeds, Stream rng);

} // namespace rbmx
