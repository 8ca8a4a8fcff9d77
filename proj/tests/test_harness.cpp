#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rbmx/harness.hpp"
#include "rbmx/layers.hpp"

using namespace rbmx;

TEST_CASE("half_normal_cdf") {
    CHECK(half_normal_cdf(0.0, 1.0) == 0.0);
    CHECK(half_normal_cdf(-1.0, 1.0) == 0.0);
    CHECK(half_normal_cdf(50.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(half_normal_cdf(1.0, 1.0) == doctest::Approx(0.6826894921).epsilon(1e-9));
    CHECK(half_normal_cdf(std::sqrt(0.5), 0.5) == doctest::Approx(0.6826894921).epsilon(1e-9));
    CHECK_THROWS_AS(half_normal_cdf(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("ks statistic sanity") {
    std::vector<double> constant(50, 0.5);
    const double d = ks_statistic(constant, [](double x) { return x; });
    CHECK(d <= 1.0);
    CHECK(d >= 0.45);  // point mass against uniform
    const KSReport rep = ks_test(constant, [](double x) { return x; }, 0.01);
    CHECK(!rep.pass);
}

TEST_CASE("ks calibration: samples from the null pass about 1 - alpha") {
    Stream rng(31337);
    int passes = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> xs(400);
        Stream sub = rng.split(r + 1);
        for (double& x : xs) x = sub.next_uniform();
        if (ks_test(xs, [](double v) { return std::min(1.0, std::max(0.0, v)); }, 0.01).pass)
            ++passes;
    }
    CHECK(passes >= reps * 0.95);
    CHECK(passes <= reps);
}

TEST_CASE("two-sample ks distance") {
    std::vector<double> a{0.1, 0.2, 0.3, 0.4};
    std::vector<double> b{0.6, 0.7, 0.8, 0.9};
    CHECK(ks_distance_two_sample(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ks_distance_two_sample(a, a) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gamma oracle degenerate cases") {
    const OracleEstimate zero =
        mc_gamma_oracle(-1.0, 1.0, BridgeGeometry{1.0, -1.0, 0.0}, 1000, 0.01, Stream(1));
    CHECK(zero.mean == 0.0);
    const OracleEstimate one =
        mc_gamma_oracle(-50.0, 50.0, BridgeGeometry{1.0, 0.0, 0.0}, 2000, 0.01, Stream(2));
    CHECK(one.mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rbm oracle in 1-d matches the half-normal law") {
    const ReflectionSpec spec = validate_spec({0.0}, 1);
    const auto samples =
        fine_grid_rbm_oracle(spec, {0.0}, 1.0 / 3.0, std::exp2(-14), 2000, Stream(3));
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s[0]);
    const KSReport ks = ks_test(xs, [](double x) { return half_normal_cdf(x, 1.0 / 3.0); }, 0.01);
    CHECK(ks.pass);
}

TEST_CASE("rbm oracle with Q = 0 has uncorrelated coordinates") {
    const ReflectionSpec spec = validate_spec({0.0, 0.0, 0.0, 0.0}, 2);
    const auto samples =
        fine_grid_rbm_oracle(spec, {0.0, 0.0}, 1.0 / 3.0, std::exp2(-12), 2000, Stream(4));
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        sx += s[0];
        sy += s[1];
        sxx += s[0] * s[0];
        syy += s[1] * s[1];
        sxy += s[0] * s[1];
    }
    const double corr = (n * sxy - sx * sy) /
                        std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    CHECK(std::fabs(corr) < 0.05);
}

TEST_CASE("rbm oracle is stable under grid refinement") {
    const ReflectionSpec spec = validate_spec({0.0, 0.5, 0.5, 0.0}, 2);
    const auto coarse =
        fine_grid_rbm_oracle(spec, {0.0, 0.0}, 1.0 / 3.0, std::exp2(-10), 1500, Stream(5));
    const auto fine =
        fine_grid_rbm_oracle(spec, {0.0, 0.0}, 1.0 / 3.0, std::exp2(-14), 1500, Stream(6));
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> a, b;
        for (const auto& s : coarse) a.push_back(s[i]);
        for (const auto& s : fine) b.push_back(s[i]);
        CHECK(ks_distance_two_sample(a, b) < 0.05);
    }
}

TEST_CASE("convergence study decays at the square-root rate") {
    const ConvergenceStudy st = convergence_study(2, 8, 60, Stream(7));
    CHECK(st.slope > -0.65);
    CHECK(st.slope < -0.35);
    for (const auto& per_seed : st.area_by_seed)
        for (std::size_t k = 1; k < per_seed.size(); ++k)
            CHECK(per_seed[k] < per_seed[k - 1]);
    CHECK(st.mean_area.front() > 0.0);
    CHECK(std::isfinite(st.mean_area.front()));
    CHECK_THROWS_AS(convergence_study(0, 8, 10, Stream(1)), std::invalid_argument);
}
