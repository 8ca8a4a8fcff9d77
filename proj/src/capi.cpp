#include "rbm_exact.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "rbmx/bridge_math.hpp"
#include "rbmx/harness.hpp"
#include "rbmx/layers.hpp"
#include "rbmx/sampler.hpp"

namespace {

thread_local std::string g_last_error;

rbmx_status fail(rbmx_status code, const char* what) {
    g_last_error = what ? what : "unknown error";
    return code;
}

template <class Fn>
rbmx_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(RBMX_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(RBMX_ERR_NUMERICAL, e.what());
    } catch (const std::exception& e) {
        return fail(RBMX_ERR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

struct rbmx_sampler {
    rbmx::RbmSampler impl;
};

extern "C" {

const char* rbmx_version(void) { return "1.0.0"; }

const char* rbmx_last_error(void) { return g_last_error.c_str(); }

void rbmx_string_free(char* s) { delete[] s; }

rbmx_status rbmx_sampler_create(const rbmx_config* cfg, rbmx_sampler** out) {
    if (!cfg || !out || !cfg->Q || !cfg->y0)
        return fail(RBMX_ERR_INVALID_ARGUMENT, "null argument");
    if (cfg->d == 0 || cfg->d > 16)
        return fail(RBMX_ERR_INVALID_ARGUMENT, "dimension must lie in 1..16");
    *out = nullptr;
    return guarded([&] {
        rbmx::SamplerConfig sc;
        sc.spec = rbmx::validate_spec(
            std::vector<double>(cfg->Q, cfg->Q + cfg->d * cfg->d), cfg->d);
        sc.T = cfg->T;
        sc.y0.assign(cfg->y0, cfg->y0 + cfg->d);
        sc.seed = cfg->seed;
        if (cfg->max_level > 0) sc.caps.max_level = cfg->max_level;
        if (cfg->max_attempts > 0) sc.caps.max_attempts = cfg->max_attempts;
        if (cfg->decision_budget > 0) sc.caps.decision_budget = cfg->decision_budget;
        *out = new rbmx_sampler{rbmx::RbmSampler(std::move(sc))};
        return RBMX_OK;
    });
}

void rbmx_sampler_destroy(rbmx_sampler* s) { delete s; }

rbmx_status rbmx_sampler_draw(rbmx_sampler* s, uint64_t sample_index, rbmx_sample* out) {
    if (!s || !out) return fail(RBMX_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const rbmx::SampleResult r = s->impl.draw(sample_index);
        std::memset(out->value, 0, sizeof(out->value));
        for (std::size_t i = 0; i < r.value.size() && i < 16; ++i) out->value[i] = r.value[i];
        out->attempts = r.attempts;
        out->max_level_reached = r.max_level_reached;
        out->status = r.status == rbmx::SampleStatus::accepted ? RBMX_SAMPLE_ACCEPTED
                                                               : RBMX_SAMPLE_BUDGET_EXHAUSTED;
        return RBMX_OK;
    });
}

rbmx_status rbmx_spec_info(size_t d, const double* Q, double* alpha, double* alpha_upper,
                           double* K) {
    if (!Q) return fail(RBMX_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const rbmx::ReflectionSpec spec =
            rbmx::validate_spec(std::vector<double>(Q, Q + d * d), d);
        if (alpha) *alpha = spec.alpha;
        if (alpha_upper) *alpha_upper = spec.alpha_upper;
        if (K) *K = spec.K;
        return RBMX_OK;
    });
}

rbmx_status rbmx_gamma_bounds(double L, double U, double r, double a, double b, double tol,
                              double* lo, double* hi) {
    if (!lo || !hi) return fail(RBMX_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const rbmx::SeriesBounds sb = rbmx::gamma_bounds(L, U, rbmx::BridgeGeometry{r, a, b}, tol);
        *lo = sb.lower;
        *hi = sb.upper;
        return RBMX_OK;
    });
}

rbmx_status rbmx_validate(const char* suite, uint64_t seed, char** json_out, int* pass_out) {
    if (!suite) return fail(RBMX_ERR_INVALID_ARGUMENT, "null suite name");
    return guarded([&] {
        const std::string name(suite);
        std::ostringstream js;
        js.precision(12);
        bool pass = false;
        if (name == "one_d_halfnormal") {
            rbmx::SamplerConfig sc;
            sc.spec = rbmx::validate_spec({0.0}, 1);
            sc.T = 1.0 / 3.0;
            sc.y0 = {0.0};
            sc.seed = seed;
            rbmx::RbmSampler sampler(sc);
            std::vector<double> xs;
            std::uint64_t exhausted = 0, idx = 0;
            while (xs.size() < 500) {
                const rbmx::SampleResult r = sampler.draw(idx++);
                if (r.status == rbmx::SampleStatus::accepted)
                    xs.push_back(r.value[0]);
                else
                    ++exhausted;
            }
            const rbmx::KSReport ks = rbmx::ks_test(
                xs, [&](double x) { return rbmx::half_normal_cdf(x, sc.T); }, 0.01);
            pass = ks.pass;
            js << "{\"schema_version\":1,\"suite\":\"" << name << "\",\"seed\":" << seed
               << ",\"n\":" << ks.n << ",\"ks_statistic\":" << ks.statistic
               << ",\"critical\":" << ks.critical << ",\"alpha\":" << ks.alpha
               << ",\"budget_exhausted\":" << exhausted << ",\"pass\":" << (pass ? "true" : "false")
               << "}";
        } else if (name == "gamma_mc") {
            const rbmx::BridgeGeometry g{1.0, 0.0, 0.0};
            const rbmx::SeriesBounds sb = rbmx::gamma_bounds(-1.0, 1.0, g, 1e-9);
            const rbmx::OracleEstimate est =
                rbmx::mc_gamma_oracle(-1.0, 1.0, g, 200000, std::exp2(-12), rbmx::Stream(seed));
            const double mid = 0.5 * (sb.lower + sb.upper);
            pass = std::fabs(est.mean - mid) <= 3.0 * est.std_error;
            js << "{\"schema_version\":1,\"suite\":\"" << name << "\",\"seed\":" << seed
               << ",\"series\":" << mid << ",\"oracle\":" << est.mean
               << ",\"std_error\":" << est.std_error << ",\"pass\":" << (pass ? "true" : "false")
               << "}";
        } else if (name == "skorokhod") {
            // Lipschitz audit on random polyline pairs plus conditions check.
            const rbmx::ReflectionSpec spec = rbmx::validate_spec({0.0, 0.5, 0.5, 0.0}, 2);
            rbmx::Stream rng(seed);
            bool all_ok = true;
            double worst = 0.0;
            for (int c = 0; c < 20; ++c) {
                const std::size_t m = 24;
                std::vector<double> t(m + 1), v1((m + 1) * 2, 0.0), v2((m + 1) * 2, 0.0);
                for (std::size_t k = 1; k <= m; ++k) {
                    t[k] = static_cast<double>(k) / m;
                    for (std::size_t i = 0; i < 2; ++i) {
                        const double step = std::sqrt(1.0 / m);
                        v1[k * 2 + i] = v1[(k - 1) * 2 + i] + step * rng.next_normal();
                        v2[k * 2 + i] = v1[k * 2 + i] + 0.1 * step * rng.next_normal();
                    }
                }
                const rbmx::Polyline X1(t, v1, 2), X2(t, v2, 2);
                const std::vector<double> y0{0.0, 0.0};
                const double tol = 1e-10;
                const auto s1 = rbmx::reflect(X1, spec, y0, tol);
                const auto s2 = rbmx::reflect(X2, spec, y0, tol);
                const double dx = rbmx::Polyline::distance(X1, X2);
                const double dy = rbmx::Polyline::distance(s1.Y, s2.Y);
                worst = std::max(worst, dy - spec.K * dx);
                if (dy > spec.K * dx + 2.0 * tol) all_ok = false;
                if (!rbmx::check_conditions(s1, X1, spec, y0, s1.err_bound + 1e-9).ok)
                    all_ok = false;
            }
            pass = all_ok;
            js << "{\"schema_version\":1,\"suite\":\"" << name << "\",\"seed\":" << seed
               << ",\"worst_excess\":" << worst << ",\"pass\":" << (pass ? "true" : "false")
               << "}";
        } else {
            return fail(RBMX_ERR_INVALID_ARGUMENT, "unknown validation suite");
        }
        if (json_out) *json_out = dup_string(js.str());
        if (pass_out) *pass_out = pass ? 1 : 0;
        return RBMX_OK;
    });
}

rbmx_status rbmx_convergence(int level_lo, int level_hi, uint64_t n_seeds, uint64_t seed,
                             char** csv_out, double* slope_out) {
    return guarded([&] {
        const rbmx::ConvergenceStudy st = rbmx::convergence_study(
            level_lo, level_hi, static_cast<std::size_t>(n_seeds), rbmx::Stream(seed));
        std::ostringstream os;
        os.precision(12);
        os << "level,mean_area\n";
        for (std::size_t k = 0; k < st.levels.size(); ++k)
            os << st.levels[k] << ',' << st.mean_area[k] << '\n';
        os << "slope," << st.slope << '\n';
        if (csv_out) *csv_out = dup_string(os.str());
        if (slope_out) *slope_out = st.slope;
        return RBMX_OK;
    });
}

rbmx_status rbmx_inspect_layers(uint64_t seed, int level, char** table_out) {
    if (!table_out) return fail(RBMX_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        rbmx::LayerSet set = rbmx::LayerSet::init_root(rbmx::Stream(seed));
        if (level > 0) set.refine_to_level(level, 0.0, 1.0);
        *table_out = dup_string(set.dump());
        return RBMX_OK;
    });
}

} // extern "C"
