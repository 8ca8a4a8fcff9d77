#pragma once

#include <cstdint>

#include "rbmx/interval.hpp"

namespace rbmx {

// Brownian bridge from a to b over duration r.
struct BridgeGeometry {
    double r;  // duration, > 0
    double a;  // start value
    double b;  // end value
};

// Band bracketing the minimum and maximum of the increment path, expressed
// relative to the value at the left endpoint of the interval:
//   min in (L_low, L_up], max in [U_low, U_up),  L_low < L_up <= U_low < U_up.
struct Band {
    double L_low, L_up, U_low, U_up;
};

// Parameters of the layer-constrained increment density f(x) \propto rho(x)pi(x):
// s = elapsed time past the left endpoint, l = interval length,
// v = increment of the driving path over the interval.
struct BandDensityParams {
    Band band;
    double s;
    double l;
    double v;
};

// Certified bracket of a truncated series value.
struct SeriesBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::uint32_t terms_used = 0;

    Interval iv() const { return {lower, upper}; }
};

struct DensityConstants {
    double c_pi;   // sup of pi, equals 1
    double K_pi;   // Lipschitz constant of pi on the band support
    double c_rho;  // K_rho * (U_up - L_low)
    double K_rho;  // Lipschitz constant of rho
};

// Probability that a Brownian bridge from a to b over [0,r] stays inside
// (L,U), bracketed to absolute width <= tol by truncating the alternating
// series at a geometrically dominated tail. Returns exactly [0,0] when a or
// b lies outside the open band.
SeriesBounds gamma_bounds(double L, double U, const BridgeGeometry& geom, double tol);

// Midpoint of gamma_bounds; absolute error <= tol/2.
double gamma(double L, double U, const BridgeGeometry& geom, double tol);

// Same series with one interval-valued endpoint; returns an enclosure of
// {gamma(L,U;r,a,b) : a in av, b in bv}. Used for decisions whose arguments
// are only known to lie in a certified box.
Interval gamma_bounds_box(double L, double U, double r, Interval av, Interval bv, double tol);

// Unnormalized Gaussian factor pi(x) = exp(-(x - (s/l)v)^2 / (2 s(l-s)/l)).
double pi_density(double x, const BandDensityParams& p);

// Range of pi over an interval of arguments (exact: pi is unimodal).
Interval pi_density_box(Interval x, const BandDensityParams& p);

// rho(x) = P{min in (L_low,L_up], max in [U_low,U_up) | W(s)=x, W(l)=v},
// the four-term product combination of gamma values, within tol; clamped
// to [0, c_rho]. Zero outside (L_low, U_up).
double rho(double x, const BandDensityParams& p, double tol);

// Certified enclosure of rho over a box of arguments.
Interval rho_box(Interval x, const BandDensityParams& p, double tol);

// Lipschitz constant K(L,U,r) = (8(U-L)/r) sum_j j exp(-2(U-L)^2 (j-1)^2 / r),
// summed until the tail is below 1e-12 relative. K(L,L,r) = 0.
double lipschitz_gamma(double L, double U, double r);

// The four constants of the likelihood-ratio lemma for given parameters.
DensityConstants density_constants(const BandDensityParams& p);

// P(min of bridge <= level) = exp(-2(level-a)(level-b)/r) for
// level <= min(a,b), else 1.
double bridge_min_cdf(double level, const BridgeGeometry& geom);

// Lower root of bridge_min_cdf(level) = u; used to sample the bridge minimum
// by inversion.
double bridge_min_quantile(double u, const BridgeGeometry& geom);

} // namespace rbmx
