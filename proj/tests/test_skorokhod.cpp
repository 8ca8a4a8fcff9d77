#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rbmx/rng.hpp"
#include "rbmx/skorokhod.hpp"

using namespace rbmx;

namespace {

Polyline random_walk(Stream& rng, std::size_t steps, std::size_t d) {
    std::vector<double> t(steps + 1), v((steps + 1) * d, 0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        t[k] = static_cast<double>(k) / static_cast<double>(steps);
        for (std::size_t i = 0; i < d; ++i)
            v[k * d + i] = v[(k - 1) * d + i] + std::sqrt(1.0 / steps) * rng.next_normal();
    }
    return Polyline(std::move(t), std::move(v), d);
}

} // namespace

TEST_CASE("validate_spec basics") {
    const ReflectionSpec id = validate_spec({0.0}, 1);
    CHECK(id.alpha == 0.0);
    CHECK(id.K == 1.0);

    const ReflectionSpec two = validate_spec({0.0, 0.5, 0.5, 0.0}, 2);
    CHECK(two.alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.alpha_upper == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.K == doctest::Approx(2.0).epsilon(1e-9));

    CHECK_THROWS_AS(validate_spec({0.0, 0.6, 0.6, 0.0, 0.0, 0.0, 0.6, 0.6, 0.0}, 2),
                    std::invalid_argument);  // wrong size
    CHECK_THROWS_AS(validate_spec({-0.1}, 1), std::invalid_argument);
    CHECK_THROWS_AS(validate_spec({0.4, 0.7, 0.0, 0.0}, 2), std::invalid_argument);  // row > 1
    CHECK_THROWS_AS(validate_spec({0.0, 1.0, 1.0, 0.0}, 2), std::invalid_argument);  // alpha = 1
}

TEST_CASE("1-d closed form: never hits zero") {
    Polyline X({0.0, 1.0}, {0.0, 1.0}, 1);
    const SkorokhodSolution sol = reflect_1d(X, 0.0);
    CHECK(sol.err_bound == 0.0);
    CHECK(sol.Y.eval(1.0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sol.L.eval(1.0, 0) == 0.0);
}

TEST_CASE("1-d closed form: pushed the whole way") {
    Polyline X({0.0, 1.0}, {0.0, -1.0}, 1);
    const SkorokhodSolution sol = reflect_1d(X, 0.0);
    CHECK(sol.Y.eval(0.7, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(sol.L.eval(0.7, 0) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("1-d zigzag: pushing freezes after the trough") {
    Polyline X({0.0, 0.5, 1.0}, {0.0, -0.5, 0.0}, 1);
    const SkorokhodSolution sol = reflect_1d(X, 0.0);
    CHECK(sol.L.eval(0.25, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sol.L.eval(0.5, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sol.L.eval(1.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sol.Y.eval(1.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("start far from the boundary: no pushing at all") {
    Stream rng(9);
    Polyline X = random_walk(rng, 64, 1);
    const SkorokhodSolution sol = reflect_1d(X, 5.0);
    CHECK(sol.L.eval(1.0, 0) == 0.0);
    CHECK(sol.Y.eval(0.3, 0) == doctest::Approx(5.0 + X.eval(0.3, 0)).epsilon(1e-12));
}

TEST_CASE("hand-solved 2-d case") {
    const ReflectionSpec spec = validate_spec({0.0, 0.5, 0.5, 0.0}, 2);
    Polyline X({0.0, 1.0}, {0.0, 0.0, -1.0, 1.0}, 2);
    const std::vector<double> y0{0.0, 0.0};
    const SkorokhodSolution sol = reflect(X, spec, y0, 1e-12);
    CHECK(sol.err_bound <= 1e-12);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
        CHECK(sol.Y.eval(t, 0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sol.Y.eval(t, 1) == doctest::Approx(t / 2.0).epsilon(1e-12));
        CHECK(sol.L.eval(t, 0) == doctest::Approx(t).epsilon(1e-12));
        CHECK(sol.L.eval(t, 1) == doctest::Approx(0.0).epsilon(1e-12));
    }
    const ConditionsReport rep = check_conditions(sol, X, spec, y0, 1e-12);
    CHECK(rep.ok);
}

TEST_CASE("Picard matches the 1-d closed form on random inputs") {
    Stream rng(21);
    const ReflectionSpec spec = validate_spec({0.0}, 1);
    for (int c = 0; c < 1000; ++c) {
        Polyline X = random_walk(rng, 32, 1);
        const double y0 = 0.3 * rng.next_uniform();
        const SkorokhodSolution exact = reflect_1d(X, y0);
        const SkorokhodSolution picard = reflect_picard(X, spec, {y0}, 1e-11);
        CHECK(Polyline::distance(exact.Y, picard.Y) <= picard.err_bound + 1e-11);
        CHECK(Polyline::distance(exact.L, picard.L) <= picard.err_bound + 1e-11);
    }
}

TEST_CASE("reflect equals reflect_1d for d = 1") {
    Stream rng(22);
    const ReflectionSpec spec = validate_spec({0.0}, 1);
    Polyline X = random_walk(rng, 128, 1);
    const SkorokhodSolution a = reflect(X, spec, {0.0}, 1e-10);
    const SkorokhodSolution b = reflect_1d(X, 0.0);
    CHECK(a.err_bound == 0.0);
    CHECK(Polyline::distance(a.Y, b.Y) == 0.0);
}

TEST_CASE("uncoupled 2-d solves exactly in finitely many sweeps") {
    Stream rng(23);
    const ReflectionSpec spec = validate_spec({0.0, 0.0, 0.0, 0.0}, 2);
    Polyline X = random_walk(rng, 64, 2);
    const SkorokhodSolution sol = reflect(X, spec, {0.0, 0.1}, 1e-12);
    CHECK(sol.err_bound == 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
        const SkorokhodSolution ref = reflect_1d(X.coordinate(i), i == 0 ? 0.0 : 0.1);
        CHECK(Polyline::distance(sol.Y.coordinate(i), ref.Y) <= 1e-14);
    }
}

TEST_CASE("Lipschitz property of the map") {
    Stream rng(31);
    const ReflectionSpec spec = validate_spec({0.0, 0.5, 0.5, 0.0}, 2);
    const std::vector<double> y0{0.0, 0.0};
    const double tol = 1e-10;
    for (int c = 0; c < 100; ++c) {
        Polyline X1 = random_walk(rng, 32, 2);
        Polyline X2 = random_walk(rng, 32, 2);
        const double dx = Polyline::distance(X1, X2);
        const SkorokhodSolution s1 = reflect(X1, spec, y0, tol);
        const SkorokhodSolution s2 = reflect(X2, spec, y0, tol);
        CHECK(Polyline::distance(s1.Y, s2.Y) <= spec.K * dx + 2.0 * tol);
    }
}

TEST_CASE("non-anticipativity: restriction commutes with reflection") {
    Stream rng(37);
    const ReflectionSpec spec = validate_spec({0.0, 0.3, 0.4, 0.1}, 2);
    Polyline X = random_walk(rng, 64, 2);
    const std::vector<double> y0{0.0, 0.2};
    const SkorokhodSolution full = reflect(X, spec, y0, 1e-12);
    const SkorokhodSolution head = reflect(X.restrict_to(0.5), spec, y0, 1e-12);
    for (double t : {0.1, 0.25, 0.5})
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(head.Y.eval(t, i) ==
                  doctest::Approx(full.Y.eval(t, i)).epsilon(1e-9));
}

TEST_CASE("Picard contraction on coupled instances") {
    Stream rng(41);
    const ReflectionSpec spec = validate_spec({0.0, 0.45, 0.45, 0.0}, 2);
    Polyline X = random_walk(rng, 64, 2);
    const SkorokhodSolution tight = reflect(X, spec, {0.0, 0.0}, 1e-13);
    const SkorokhodSolution loose = reflect(X, spec, {0.0, 0.0}, 1e-4);
    CHECK(tight.iterations >= loose.iterations);
    CHECK(Polyline::distance(tight.Y, loose.Y) <= loose.err_bound + tight.err_bound);
}

TEST_CASE("check_conditions flags corrupted solutions") {
    const ReflectionSpec spec = validate_spec({0.0}, 1);
    Polyline X({0.0, 1.0}, {0.0, -1.0}, 1);
    SkorokhodSolution sol = reflect_1d(X, 0.0);
    CHECK(check_conditions(sol, X, spec, {0.0}, 1e-12).ok);
    // Negate one increment of L.
    SkorokhodSolution bad = sol;
    const std::size_t last = bad.L.size() - 1;
    bad.L.value(last, 0) = bad.L.value(last - 1, 0) - 0.25;
    const ConditionsReport rep = check_conditions(bad, X, spec, {0.0}, 1e-12);
    CHECK(!rep.ok);
    CHECK(rep.worst_l_decrease > 0.1);
}

TEST_CASE("conditions pass on random solver outputs") {
    Stream rng(43);
    const ReflectionSpec spec = validate_spec({0.1, 0.4, 0.2, 0.3}, 2);
    for (int c = 0; c < 25; ++c) {
        Polyline X = random_walk(rng, 48, 2);
        const SkorokhodSolution sol = reflect(X, spec, {0.05, 0.0}, 1e-11);
        CHECK(check_conditions(sol, X, spec, {0.05, 0.0}, sol.err_bound + 1e-9).ok);
    }
}
