#include "rbmx/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "rbmx/layers.hpp"

namespace rbmx {

namespace {

// P(sqrt(n) D > x) for the Kolmogorov distribution.
double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * x * x);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, q));
}

double kolmogorov_critical(double alpha) {
    double lo = 0.2, hi = 3.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_q(mid) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Sequential Brownian bridge step: W(t+dt) given W(t), pinned at (r, b).
double bridge_step(double w, double b, double t, double dt, double r, Stream& rng) {
    const double rem = r - t;
    const double mean = w + (b - w) * dt / rem;
    const double var = dt * (rem - dt) / rem;
    return var > 0.0 ? mean + std::sqrt(var) * rng.next_normal() : b;
}

// Exact crossing indicator for one segment: the bridge between (w0, w1) over
// dt dips below level with probability exp(-2(w0-level)(w1-level)/dt).
bool segment_crosses_below(double w0, double w1, double level, double dt, Stream& rng) {
    if (w0 <= level || w1 <= level) return true;
    const double z = 2.0 * (w0 - level) * (w1 - level) / dt;
    if (z > 50.0) return false;  // probability < 2e-22
    return rng.next_uniform() < std::exp(-z);
}

// Exact draw of the segment minimum by inversion of the reflection CDF.
double segment_min(double w0, double w1, double dt, Stream& rng) {
    return bridge_min_quantile(rng.next_uniform(), BridgeGeometry{dt, w0, w1});
}

unsigned resolve_threads(unsigned threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? std::min(hw, 16u) : 1u;
}

} // namespace

double half_normal_cdf(double x, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("half_normal_cdf: T must be positive");
    if (x < 0.0) return 0.0;
    return std::erf(x / std::sqrt(2.0 * T));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

KSReport ks_test(const std::vector<double>& samples, const std::function<double(double)>& cdf,
                 double alpha) {
    if (samples.size() < 20) throw std::invalid_argument("ks_test: need at least 20 samples");
    KSReport rep;
    rep.n = samples.size();
    rep.alpha = alpha;
    rep.statistic = ks_statistic(samples, cdf);
    rep.critical = kolmogorov_critical(alpha) / std::sqrt(static_cast<double>(rep.n));
    rep.pass = rep.statistic < rep.critical;
    return rep;
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / a.size() -
                                  static_cast<double>(j) / b.size()));
    }
    return d;
}

OracleEstimate mc_gamma_oracle(double L, double U, const BridgeGeometry& geom,
                               std::uint64_t n_paths, double grid_step, Stream rng) {
    if (!(U > L) || !(geom.r > 0.0) || !(grid_step > 0.0))
        throw std::invalid_argument("mc_gamma_oracle: invalid band or grid");
    OracleEstimate est;
    est.n_paths = n_paths;
    est.grid_step = grid_step;
    if (!(geom.a > L && geom.a < U && geom.b > L && geom.b < U)) return est;

    const auto steps = static_cast<std::uint64_t>(std::ceil(geom.r / grid_step));
    const double dt = geom.r / static_cast<double>(steps);

    const unsigned pool = resolve_threads(0);
    const std::uint64_t block = (n_paths + pool - 1) / pool;
    std::vector<std::future<std::uint64_t>> futs;
    for (unsigned w = 0; w < pool; ++w) {
        const std::uint64_t lo = w * block, hi = std::min(n_paths, (w + 1) * block);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            std::uint64_t stayed = 0;
            for (std::uint64_t p = lo; p < hi; ++p) {
                Stream path_rng = rng.split(p + 1);
                double w0 = geom.a;
                bool inside = true;
                for (std::uint64_t k = 0; k < steps && inside; ++k) {
                    const double t = dt * static_cast<double>(k);
                    const double w1 = (k + 1 == steps)
                                          ? geom.b
                                          : bridge_step(w0, geom.b, t, dt, geom.r, path_rng);
                    if (w1 <= L || w1 >= U) {
                        inside = false;
                        break;
                    }
                    if (segment_crosses_below(w0, w1, L, dt, path_rng) ||
                        segment_crosses_below(-w0, -w1, -U, dt, path_rng))
                        inside = false;
                    w0 = w1;
                }
                if (inside) ++stayed;
            }
            return stayed;
        }));
    }
    std::uint64_t stayed = 0;
    for (auto& f : futs) stayed += f.get();
    const double p = static_cast<double>(stayed) / static_cast<double>(n_paths);
    est.mean = p;
    est.std_error = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n_paths));
    return est;
}

namespace {

// Walks one bridge leg from a0 to b0 over r, updating the running extrema
// with exact per-segment draws.
void extrema_leg(double a0, double b0, double r, double grid_step, Stream& prng, double& mn,
                 double& mx) {
    const auto steps = static_cast<std::uint64_t>(std::ceil(r / grid_step));
    const double dt = r / static_cast<double>(steps);
    double w0 = a0;
    for (std::uint64_t k = 0; k < steps; ++k) {
        const double t = dt * static_cast<double>(k);
        const double w1 = (k + 1 == steps) ? b0 : bridge_step(w0, b0, t, dt, r, prng);
        mn = std::min(mn, segment_min(w0, w1, dt, prng));
        mx = std::max(mx, -segment_min(-w0, -w1, dt, prng));
        w0 = w1;
    }
}

} // namespace

OracleEstimate mc_rho_oracle(const BandDensityParams& p, double x, std::uint64_t n_paths,
                             double grid_step, Stream rng) {
    OracleEstimate est;
    est.n_paths = n_paths;
    est.grid_step = grid_step;
    const Band& b = p.band;

    const unsigned pool = resolve_threads(0);
    const std::uint64_t block = (n_paths + pool - 1) / pool;
    std::vector<std::future<std::uint64_t>> futs;
    for (unsigned w = 0; w < pool; ++w) {
        const std::uint64_t lo = w * block, hi = std::min(n_paths, (w + 1) * block);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            std::uint64_t hits = 0;
            for (std::uint64_t q = lo; q < hi; ++q) {
                Stream prng = rng.split(q + 1);
                double mn = std::min({0.0, x, p.v});
                double mx = std::max({0.0, x, p.v});
                extrema_leg(0.0, x, p.s, grid_step, prng, mn, mx);
                extrema_leg(x, p.v, p.l - p.s, grid_step, prng, mn, mx);
                if (mn > b.L_low && mn <= b.L_up && mx >= b.U_low && mx < b.U_up) ++hits;
            }
            return hits;
        }));
    }
    std::uint64_t hits = 0;
    for (auto& f : futs) hits += f.get();
    const double pr = static_cast<double>(hits) / static_cast<double>(n_paths);
    est.mean = pr;
    est.std_error = std::sqrt(std::max(pr * (1.0 - pr), 1e-12) / static_cast<double>(n_paths));
    return est;
}

OracleEstimate mc_extrema_oracle(const Band& band, const BridgeGeometry& geom,
                                 std::uint64_t n_paths, double grid_step, Stream rng) {
    OracleEstimate est;
    est.n_paths = n_paths;
    est.grid_step = grid_step;
    const unsigned pool = resolve_threads(0);
    const std::uint64_t block = (n_paths + pool - 1) / pool;
    std::vector<std::future<std::uint64_t>> futs;
    for (unsigned w = 0; w < pool; ++w) {
        const std::uint64_t lo = w * block, hi = std::min(n_paths, (w + 1) * block);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            std::uint64_t hits = 0;
            for (std::uint64_t q = lo; q < hi; ++q) {
                Stream prng = rng.split(q + 1);
                double mn = std::min(geom.a, geom.b);
                double mx = std::max(geom.a, geom.b);
                extrema_leg(geom.a, geom.b, geom.r, grid_step, prng, mn, mx);
                if (mn > band.L_low && mn <= band.L_up && mx >= band.U_low && mx < band.U_up)
                    ++hits;
            }
            return hits;
        }));
    }
    std::uint64_t hits = 0;
    for (auto& f : futs) hits += f.get();
    const double pr = static_cast<double>(hits) / static_cast<double>(n_paths);
    est.mean = pr;
    est.std_error = std::sqrt(std::max(pr * (1.0 - pr), 1e-12) / static_cast<double>(n_paths));
    return est;
}

std::vector<std::vector<double>> fine_grid_rbm_oracle(const ReflectionSpec& spec,
                                                      const std::vector<double>& y0, double T,
                                                      double grid_step, std::size_t n_samples,
                                                      Stream rng, unsigned threads) {
    if (!(T > 0.0) || !(grid_step > 0.0))
        throw std::invalid_argument("fine_grid_rbm_oracle: invalid T or grid");
    const auto steps = static_cast<std::size_t>(std::ceil(T / grid_step));
    const double dt = T / static_cast<double>(steps);
    const std::size_t d = spec.d;

    std::vector<std::vector<double>> out(n_samples);
    const unsigned pool = resolve_threads(threads);
    const std::size_t block = (n_samples + pool - 1) / pool;
    std::vector<std::future<void>> futs;
    for (unsigned w = 0; w < pool; ++w) {
        const std::size_t lo = w * block, hi = std::min(n_samples, (w + 1) * block);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            for (std::size_t sidx = lo; sidx < hi; ++sidx) {
                Stream prng = rng.split(sidx + 1);
                std::vector<double> t(steps + 1), v((steps + 1) * d, 0.0);
                const double sq = std::sqrt(dt);
                for (std::size_t k = 1; k <= steps; ++k) {
                    t[k] = dt * static_cast<double>(k);
                    for (std::size_t i = 0; i < d; ++i)
                        v[k * d + i] = v[(k - 1) * d + i] + sq * prng.next_normal();
                }
                const Polyline B(std::move(t), std::move(v), d);
                const SkorokhodSolution sol = reflect(B, spec, y0, 1e-9);
                out[sidx] = sol.Y.eval(T);
            }
        }));
    }
    for (auto& f : futs) f.get();
    return out;
}

ConvergenceStudy convergence_study(int level_lo, int level_hi, std::size_t n_seeds, Stream rng) {
    if (level_lo < 1 || level_hi > 12 || level_lo > level_hi)
        throw std::invalid_argument("convergence_study: levels must lie in [1, 12]");
    ConvergenceStudy st;
    for (int n = level_lo; n <= level_hi; ++n) st.levels.push_back(n);
    st.mean_area.assign(st.levels.size(), 0.0);
    st.area_by_seed.assign(n_seeds, std::vector<double>(st.levels.size(), 0.0));

    for (std::size_t seed = 0; seed < n_seeds; ++seed) {
        LayerSet set = LayerSet::init_root(rng.split(seed + 1));
        for (int n = 1; n <= level_hi; ++n) {
            set.refine_to_level(n, 0.0, 1.0);
            if (n >= level_lo) {
                double area = 0.0;
                for (const IntersectionLayer& L : set.layers()) area += L.span() * L.h();
                st.area_by_seed[seed][static_cast<std::size_t>(n - level_lo)] = area;
            }
        }
    }
    for (std::size_t k = 0; k < st.levels.size(); ++k) {
        double m = 0.0;
        for (std::size_t s = 0; s < n_seeds; ++s) m += st.area_by_seed[s][k];
        st.mean_area[k] = m / static_cast<double>(n_seeds);
    }
    // Least-squares slope of log2(mean_area) against the level.
    const std::size_t m = st.levels.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double xk = st.levels[k];
        const double yk = std::log2(st.mean_area[k]);
        sx += xk;
        sy += yk;
        sxx += xk * xk;
        sxy += xk * yk;
    }
    st.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return st;
}

} // namespace rbmx
