#include "rbmx/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbmx {

namespace {

constexpr std::size_t kMaxPicardIterations = 100000;

double row_norm(const std::vector<double>& A, std::size_t d) {
    double n = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += std::fabs(A[i * d + j]);
        n = std::max(n, s);
    }
    return n;
}

// Certified upper bound on the spectral radius from scaled repeated
// squarings: rho(Q) <= ||Q^{2^m}||^{1/2^m}.
double spectral_radius_upper(const std::vector<double>& Q, std::size_t d) {
    std::vector<double> A = Q;
    double log_scale = 0.0;
    double bound = row_norm(A, d);
    for (int m = 1; m <= 24; ++m) {
        const double nu = row_norm(A, d);
        if (nu == 0.0) return 0.0;
        std::vector<double> B(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                const double aik = A[i * d + k] / nu;
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) B[i * d + j] += aik * (A[k * d + j] / nu);
            }
        A = std::move(B);
        log_scale = 2.0 * (log_scale + std::log(nu));
        const double nrm = row_norm(A, d);
        if (nrm == 0.0) return 0.0;
        bound = std::min(bound, std::exp((std::log(nrm) + log_scale) / std::exp2(m)));
    }
    return bound;
}

double spectral_radius_estimate(const std::vector<double>& Q, std::size_t d) {
    std::vector<double> x(d, 1.0), y(d);
    double est = 0.0;
    for (int it = 0; it < 20000; ++it) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += Q[i * d + j] * x[j];
            y[i] = s;
            nrm = std::max(nrm, std::fabs(s));
        }
        if (nrm == 0.0) return 0.0;
        for (std::size_t i = 0; i < d; ++i) x[i] = y[i] / nrm;
        if (std::fabs(nrm - est) <= 1e-13 * std::max(1.0, nrm)) return nrm;
        est = nrm;
    }
    return est;
}

// Solve (I - Q^T) e = Q^T b for nonnegative b (tiny dimension, partial
// pivoting). Used for the certified Picard tail bound.
std::vector<double> solve_tail(const std::vector<double>& Q, std::size_t d,
                               const std::vector<double>& b) {
    std::vector<double> A(d * d), rhs(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double qt = Q[j * d + i];
            A[i * d + j] = (i == j ? 1.0 : 0.0) - qt;
            rhs[i] += qt * b[j];
        }
    }
    std::vector<std::size_t> piv(d);
    for (std::size_t i = 0; i < d; ++i) piv[i] = i;
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t best = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::fabs(A[piv[r] * d + c]) > std::fabs(A[piv[best] * d + c])) best = r;
        std::swap(piv[c], piv[best]);
        const double p = A[piv[c] * d + c];
        if (p == 0.0) throw std::runtime_error("skorokhod: singular I - Q^T");
        for (std::size_t r = c + 1; r < d; ++r) {
            const double f = A[piv[r] * d + c] / p;
            if (f == 0.0) continue;
            for (std::size_t j = c; j < d; ++j) A[piv[r] * d + j] -= f * A[piv[c] * d + j];
            rhs[piv[r]] -= f * rhs[piv[c]];
        }
    }
    std::vector<double> e(d);
    for (std::size_t c = d; c-- > 0;) {
        double s = rhs[piv[c]];
        for (std::size_t j = c + 1; j < d; ++j) s -= A[piv[c] * d + j] * e[j];
        e[c] = s / A[piv[c] * d + c];
        e[c] = std::max(0.0, e[c]);
    }
    return e;
}

} // namespace

std::vector<double> picard_tail_bound(const ReflectionSpec& spec,
                                      const std::vector<double>& diff) {
    return solve_tail(spec.Q, spec.d, diff);
}

bool ReflectionSpec::uncoupled() const {
    for (double v : Q)
        if (v != 0.0) return false;
    return true;
}

ReflectionSpec validate_spec(const std::vector<double>& Q, std::size_t d) {
    if (d == 0 || Q.size() != d * d)
        throw std::invalid_argument("validate_spec: Q must be d x d");
    for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (Q[i * d + j] < 0.0)
                throw std::invalid_argument("validate_spec: negative entry in Q");
            row += Q[i * d + j];
        }
        if (row > 1.0) throw std::invalid_argument("validate_spec: row sum of Q exceeds 1");
    }
    ReflectionSpec spec;
    spec.d = d;
    spec.Q = Q;
    spec.alpha_upper = spectral_radius_upper(Q, d);
    spec.alpha = std::min(spectral_radius_estimate(Q, d), spec.alpha_upper);
    if (spec.alpha_upper >= 1.0 - 1e-12)
        throw std::invalid_argument("validate_spec: spectral radius not certifiably below 1");
    spec.K = 1.0 / (1.0 - spec.alpha_upper);
    return spec;
}

SkorokhodSolution reflect_1d(const Polyline& X, double y0) {
    if (X.dim() != 1) throw std::invalid_argument("reflect_1d: 1-d input required");
    if (y0 < 0.0) throw std::invalid_argument("reflect_1d: y0 must be >= 0");
    Polyline negz(X.times(), [&] {
        std::vector<double> v(X.size());
        for (std::size_t k = 0; k < X.size(); ++k) v[k] = -(y0 + X.value(k, 0));
        return v;
    }(), 1);
    Polyline L = positive_part(running_sup(negz));
    const std::vector<double> grid = Polyline::merge_grids(X.times(), L.times());
    std::vector<double> yv(grid.size()), lv(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        lv[k] = L.eval(grid[k], 0);
        yv[k] = y0 + X.eval(grid[k], 0) + lv[k];
    }
    SkorokhodSolution sol;
    sol.Y = Polyline(grid, std::move(yv), 1);
    sol.L = Polyline(grid, std::move(lv), 1);
    sol.err_bound = 0.0;
    sol.iterations = 1;
    return sol;
}

SkorokhodSolution reflect_picard(const Polyline& X, const ReflectionSpec& spec,
                                 const std::vector<double>& y0, double tol) {
    const std::size_t d = spec.d;
    if (X.dim() != d) throw std::invalid_argument("reflect: dimension mismatch");
    if (y0.size() != d) throw std::invalid_argument("reflect: y0 dimension mismatch");
    for (double v : y0)
        if (v < 0.0) throw std::invalid_argument("reflect: y0 must be >= 0 componentwise");
    if (!(tol > 0.0)) throw std::invalid_argument("reflect: tol must be positive");

    Polyline L = Polyline::constant(X.t_end(), std::vector<double>(d, 0.0))
                     .resampled(X.times());
    std::vector<double> diff(d, 0.0);
    std::size_t iters = 0;
    double err_y = 0.0;

    while (true) {
        if (++iters > kMaxPicardIterations)
            throw std::runtime_error("reflect: Picard iteration cap exceeded");
        // Z_i = -(y0_i + X_i - (Q^T L)_i) per coordinate, on the union grid
        // so every kink of X and L is represented exactly.
        std::vector<Polyline> newL;
        newL.reserve(d);
        std::vector<double> merged = Polyline::merge_grids(X.times(), L.times());
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> zv(merged.size());
            for (std::size_t k = 0; k < merged.size(); ++k) {
                double qtl = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double qji = spec.q(j, i);
                    if (qji != 0.0) qtl += qji * L.eval(merged[k], j);
                }
                zv[k] = -(y0[i] + X.eval(merged[k], i) - qtl);
            }
            newL.push_back(positive_part(running_sup(Polyline(merged, std::move(zv), 1))));
        }
        // Assemble the iterate on the union of all coordinate grids.
        std::vector<double> g = merged;
        for (const Polyline& p : newL) g = Polyline::merge_grids(g, p.times());
        std::vector<double> lv(g.size() * d);
        for (std::size_t k = 0; k < g.size(); ++k)
            for (std::size_t i = 0; i < d; ++i) lv[k * d + i] = newL[i].eval(g[k], 0);
        Polyline Lnext(g, std::move(lv), d);

        for (std::size_t i = 0; i < d; ++i) {
            double m = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                m = std::max(m, std::fabs(Lnext.value(k, i) - L.eval(g[k], i)));
            diff[i] = m;
        }
        L = std::move(Lnext);
        L.simplify();

        double dmax = 0.0;
        for (double v : diff) dmax = std::max(dmax, v);
        if (dmax == 0.0) {
            err_y = 0.0;
            break;
        }
        const std::vector<double> tail = solve_tail(spec.Q, d, diff);
        err_y = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double amp = tail[i];
            for (std::size_t j = 0; j < d; ++j) amp += spec.q(j, i) * tail[j];
            err_y = std::max(err_y, amp);
        }
        if (err_y <= tol) break;
    }

    std::vector<double> g = Polyline::merge_grids(X.times(), L.times());
    std::vector<double> yv(g.size() * spec.d), lv(g.size() * spec.d);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t i = 0; i < d; ++i) {
            double rl = L.eval(g[k], i);
            for (std::size_t j = 0; j < d; ++j) rl -= spec.q(j, i) * L.eval(g[k], j);
            lv[k * d + i] = L.eval(g[k], i);
            yv[k * d + i] = y0[i] + X.eval(g[k], i) + rl;
        }
    SkorokhodSolution sol;
    sol.Y = Polyline(g, std::move(yv), d);
    sol.L = Polyline(g, std::move(lv), d);
    sol.err_bound = err_y;
    sol.iterations = iters;
    return sol;
}

SkorokhodSolution reflect(const Polyline& X, const ReflectionSpec& spec,
                          const std::vector<double>& y0, double tol) {
    if (spec.d == 1 && spec.uncoupled()) {
        SkorokhodSolution sol = reflect_1d(X, y0.at(0));
        return sol;
    }
    return reflect_picard(X, spec, y0, tol);
}

ConditionsReport check_conditions(const SkorokhodSolution& sol, const Polyline& X,
                                  const ReflectionSpec& spec, const std::vector<double>& y0,
                                  double tol) {
    ConditionsReport rep;
    const std::size_t d = sol.Y.dim();
    const std::vector<double> grid = Polyline::merge_grids(
        Polyline::merge_grids(sol.Y.times(), sol.L.times()), X.times());

    for (std::size_t i = 0; i < d; ++i) {
        double prev_l = sol.L.eval(grid[0], i);
        rep.l_at_zero = std::max(rep.l_at_zero, std::fabs(prev_l));
        double compl_int = 0.0;
        double prev_y = sol.Y.eval(grid[0], i);
        rep.worst_negative_y = std::min(rep.worst_negative_y, prev_y);
        for (std::size_t k = 1; k < grid.size(); ++k) {
            const double l = sol.L.eval(grid[k], i);
            const double y = sol.Y.eval(grid[k], i);
            rep.worst_negative_y = std::min(rep.worst_negative_y, y);
            rep.worst_l_decrease = std::max(rep.worst_l_decrease, prev_l - l);
            const double dl = l - prev_l;
            if (dl > 0.0) compl_int += 0.5 * (std::max(0.0, prev_y) + std::max(0.0, y)) * dl;
            prev_l = l;
            prev_y = y;
        }
        rep.complementarity = std::max(rep.complementarity, compl_int);
    }
    for (double t : grid)
        for (std::size_t i = 0; i < d; ++i) {
            double rl = sol.L.eval(t, i);
            for (std::size_t j = 0; j < d; ++j) rl -= spec.q(j, i) * sol.L.eval(t, j);
            const double rhs = y0[i] + X.eval(t, i) + rl;
            rep.identity_error = std::max(rep.identity_error, std::fabs(sol.Y.eval(t, i) - rhs));
        }
    rep.ok = rep.worst_negative_y >= -tol && rep.worst_l_decrease <= tol &&
             rep.l_at_zero <= tol && rep.complementarity <= tol && rep.identity_error <= tol;
    return rep;
}

} // namespace rbmx
