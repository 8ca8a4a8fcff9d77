#include "rbmx/bridge_math.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rbmx {

namespace {

constexpr std::uint32_t kMaxSeriesTerms = 20'000'000;

void validate_band(double L, double U) {
    if (!(U > L)) throw std::invalid_argument("gamma: band upper must exceed lower");
}

// Tail of sum_{j>m}(sigma_j + tau_j): each term is dominated by
// 4 q^{(j-1)^2} with q = exp(-2(U-L)^2/r), so the tail beyond m is at most
// 4 q^{m^2} / (1 - q^{2m}).
double series_tail(double q, std::uint32_t m) {
    const double x = std::pow(q, 2.0 * m);
    if (x >= 1.0) return 4.0;  // no useful bound yet
    return 4.0 * std::pow(q, static_cast<double>(m) * m) / (1.0 - x);
}

struct GammaTerms {
    double D, r, c;  // c = 2/r
    Interval a, b;

    Interval sigma(std::uint32_t j) const {
        const double Dj = D * j;
        // (Dj + L - a)(Dj + L - b) with L - a = -(a - L); both factors in
        // (D(j-1), Dj) when a,b in (L,U). Expressed via distances from the
        // band edges: fa = Dj - (a - L), increasing as a decreases.
        Interval f1a{Dj - a_hi_from_L, Dj - a_lo_from_L};
        Interval f1b{Dj - b_hi_from_L, Dj - b_lo_from_L};
        Interval f2a{Dj - (D - a_lo_from_L), Dj - (D - a_hi_from_L)};
        Interval f2b{Dj - (D - b_lo_from_L), Dj - (D - b_hi_from_L)};
        Interval p1{f1a.lo * f1b.lo, f1a.hi * f1b.hi};
        Interval p2{f2a.lo * f2b.lo, f2a.hi * f2b.hi};
        return {std::exp(-c * p1.hi) + std::exp(-c * p2.hi),
                std::exp(-c * p1.lo) + std::exp(-c * p2.lo)};
    }

    Interval tau(std::uint32_t j) const {
        const double Dj = D * j;
        Interval amb{a.lo - b.hi, a.hi - b.lo};
        Interval g1{Dj + amb.lo, Dj + amb.hi};   // Dj + a - b > D(j-1) >= 0
        Interval g2{Dj - amb.hi, Dj - amb.lo};   // Dj + b - a
        const double s = c * Dj;
        return {std::exp(-s * g1.hi) + std::exp(-s * g2.hi),
                std::exp(-s * g1.lo) + std::exp(-s * g2.lo)};
    }

    double a_lo_from_L, a_hi_from_L, b_lo_from_L, b_hi_from_L;
};

// Core series evaluation over (possibly degenerate) interval endpoints that
// are assumed to lie inside the open band.
SeriesBounds gamma_series(double L, double U, double r, Interval a, Interval b, double tol) {
    const double D = U - L;
    GammaTerms t;
    t.D = D;
    t.r = r;
    t.c = 2.0 / r;
    t.a = a;
    t.b = b;
    t.a_lo_from_L = a.lo - L;
    t.a_hi_from_L = a.hi - L;
    t.b_lo_from_L = b.lo - L;
    t.b_hi_from_L = b.hi - L;

    const double q = std::exp(-2.0 * D * D / r);
    Interval S{1.0, 1.0};
    std::uint32_t j = 0;
    double tail = 4.0;
    while (true) {
        tail = series_tail(q, j);
        if (tail <= tol) break;
        if (j >= kMaxSeriesTerms)
            throw std::runtime_error("gamma: series truncation budget exceeded");
        ++j;
        S = S - t.sigma(j) + t.tau(j);
    }
    SeriesBounds out;
    out.terms_used = j;
    out.lower = std::min(1.0, std::max(0.0, S.lo - tail));
    out.upper = std::min(1.0, std::max(0.0, S.hi + tail));
    return out;
}

Interval band_interval_gammas(double Llo, double Uhi, double r, Interval a, Interval b,
                              double tol) {
    // Degenerate band has empty interior: the stay probability is zero.
    if (!(Uhi > Llo)) return {0.0, 0.0};
    // Clip interval endpoints against the open band; anything outside maps
    // to an exact zero, so the enclosure is hulled with 0.
    bool a_out = a.hi <= Llo || a.lo >= Uhi;
    bool b_out = b.hi <= Llo || b.lo >= Uhi;
    if (a_out || b_out) return {0.0, 0.0};
    bool clipped = a.lo <= Llo || a.hi >= Uhi || b.lo <= Llo || b.hi >= Uhi;
    Interval ac{std::max(a.lo, Llo), std::min(a.hi, Uhi)};
    Interval bc{std::max(b.lo, Llo), std::min(b.hi, Uhi)};
    SeriesBounds sb = gamma_series(Llo, Uhi, r, ac, bc, tol);
    Interval out = sb.iv();
    if (clipped) out.lo = 0.0;
    return out;
}

} // namespace

SeriesBounds gamma_bounds(double L, double U, const BridgeGeometry& geom, double tol) {
    validate_band(L, U);
    if (!(geom.r > 0.0)) throw std::invalid_argument("gamma: duration must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("gamma: tol must be positive");
    if (!(geom.a > L && geom.a < U && geom.b > L && geom.b < U)) return {};
    return gamma_series(L, U, geom.r, Interval::point(geom.a), Interval::point(geom.b), tol);
}

double gamma(double L, double U, const BridgeGeometry& geom, double tol) {
    return gamma_bounds(L, U, geom, tol).iv().mid();
}

Interval gamma_bounds_box(double L, double U, double r, Interval av, Interval bv, double tol) {
    if (!(r > 0.0)) throw std::invalid_argument("gamma: duration must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("gamma: tol must be positive");
    return band_interval_gammas(L, U, r, av, bv, tol);
}

double pi_density(double x, const BandDensityParams& p) {
    if (!(p.s > 0.0 && p.s < p.l))
        throw std::invalid_argument("pi_density: requires 0 < s < l");
    const double mean = (p.s / p.l) * p.v;
    const double var = p.s * (p.l - p.s) / p.l;
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var);
}

Interval pi_density_box(Interval x, const BandDensityParams& p) {
    const double mean = (p.s / p.l) * p.v;
    const double xm = std::min(std::max(mean, x.lo), x.hi);
    const double hi = pi_density(xm, p);
    const double lo = std::min(pi_density(x.lo, p), pi_density(x.hi, p));
    return {lo, hi};
}

Interval rho_box(Interval x, const BandDensityParams& p, double tol) {
    if (!(p.s > 0.0 && p.s < p.l)) throw std::invalid_argument("rho: requires 0 < s < l");
    if (!(tol > 0.0)) throw std::invalid_argument("rho: tol must be positive");
    const Band& b = p.band;
    const double e = tol / 10.0;
    const Interval zero = Interval::point(0.0);
    const Interval vv = Interval::point(p.v);
    const double ls = p.l - p.s;

    Interval g1 = band_interval_gammas(b.L_low, b.U_up, p.s, zero, x, e);
    Interval g2 = band_interval_gammas(b.L_low, b.U_up, ls, x, vv, e);
    Interval g3 = band_interval_gammas(b.L_up, b.U_up, p.s, zero, x, e);
    Interval g4 = band_interval_gammas(b.L_up, b.U_up, ls, x, vv, e);
    Interval g5 = band_interval_gammas(b.L_low, b.U_low, p.s, zero, x, e);
    Interval g6 = band_interval_gammas(b.L_low, b.U_low, ls, x, vv, e);
    Interval g7 = band_interval_gammas(b.L_up, b.U_low, p.s, zero, x, e);
    Interval g8 = band_interval_gammas(b.L_up, b.U_low, ls, x, vv, e);

    Interval t12 = g1.mul_nonneg(g2);
    Interval t34 = g3.mul_nonneg(g4);
    Interval t56 = g5.mul_nonneg(g6);
    Interval t78 = g7.mul_nonneg(g8);
    Interval out{t12.lo - t34.hi - t56.hi + t78.lo, t12.hi - t34.lo - t56.lo + t78.hi};
    return out.clamp(0.0, 1.0);
}

double rho(double x, const BandDensityParams& p, double tol) {
    const double c_rho = density_constants(p).c_rho;
    const double cap = std::min(1.0, c_rho);
    const double mid = rho_box(Interval::point(x), p, tol).mid();
    return std::min(cap, std::max(0.0, mid));
}

double lipschitz_gamma(double L, double U, double r) {
    validate_band(L, U);
    if (!(r > 0.0)) throw std::invalid_argument("lipschitz_gamma: duration must be positive");
    const double D = U - L;
    const double q = std::exp(-2.0 * D * D / r);
    const double scale = 8.0 * D / r;
    double sum = 0.0;
    for (std::uint32_t j = 1;; ++j) {
        const double term = j * std::pow(q, static_cast<double>(j - 1) * (j - 1));
        sum += term;
        // Tail: sum_{i>=j} (i+1) q^{i^2} <= q^{j^2} [(j+1)/(1-x) + x/(1-x)^2],
        // x = q^{2j}.
        const double x = std::pow(q, 2.0 * j);
        if (x < 1.0) {
            const double tail =
                std::pow(q, static_cast<double>(j) * j) *
                ((j + 1.0) / (1.0 - x) + x / ((1.0 - x) * (1.0 - x)));
            if (tail <= 1e-12 * sum) break;
        }
        if (j >= kMaxSeriesTerms)
            throw std::runtime_error("lipschitz_gamma: series did not converge");
    }
    return scale * sum;
}

DensityConstants density_constants(const BandDensityParams& p) {
    const Band& b = p.band;
    if (!(b.U_up > b.L_low))
        throw std::invalid_argument("density_constants: degenerate band");
    if (!(p.s > 0.0 && p.s < p.l))
        throw std::invalid_argument("density_constants: requires 0 < s < l");

    DensityConstants out;
    out.c_pi = 1.0;
    out.K_pi = std::max(std::fabs(b.U_up * p.l - p.s * p.v),
                        std::fabs(b.L_low * p.l - p.s * p.v)) /
               (p.s * (p.l - p.s));

    const double ls = p.l - p.s;
    auto K = [&](double lo, double hi, double r) {
        return hi > lo ? lipschitz_gamma(lo, hi, r) : 0.0;
    };
    const double K12 = 2.0 * K(b.L_low, b.U_up, p.s) * K(b.L_low, b.U_up, ls) * (b.U_up - b.L_low);
    const double K34 = 2.0 * K(b.L_up, b.U_up, p.s) * K(b.L_up, b.U_up, ls) * (b.U_up - b.L_up);
    const double K56 = 2.0 * K(b.L_low, b.U_low, p.s) * K(b.L_low, b.U_low, ls) * (b.U_low - b.L_low);
    const double K78 = 2.0 * K(b.L_up, b.U_low, p.s) * K(b.L_up, b.U_low, ls) * (b.U_low - b.L_up);
    out.K_rho = K12 + K34 + K56 + K78;
    out.c_rho = out.K_rho * (b.U_up - b.L_low);
    return out;
}

double bridge_min_cdf(double level, const BridgeGeometry& geom) {
    if (!(geom.r > 0.0)) throw std::invalid_argument("bridge_min_cdf: duration must be positive");
    if (level >= std::min(geom.a, geom.b)) return 1.0;
    return std::exp(-2.0 * (level - geom.a) * (level - geom.b) / geom.r);
}

double bridge_min_quantile(double u, const BridgeGeometry& geom) {
    if (!(geom.r > 0.0)) throw std::invalid_argument("bridge_min_quantile: duration must be positive");
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("bridge_min_quantile: u outside (0,1)");
    const double P = -0.5 * geom.r * std::log(u);
    const double d = geom.a - geom.b;
    return 0.5 * ((geom.a + geom.b) - std::sqrt(d * d + 4.0 * P));
}

} // namespace rbmx
