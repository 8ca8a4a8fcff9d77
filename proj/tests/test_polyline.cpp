#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rbmx/polyline.hpp"
#include "rbmx/rng.hpp"

using namespace rbmx;

namespace {

Polyline random_walk(Stream& rng, std::size_t steps) {
    std::vector<double> t(steps + 1), v(steps + 1);
    t[0] = 0.0;
    v[0] = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        t[k] = static_cast<double>(k) / static_cast<double>(steps);
        v[k] = v[k - 1] + std::sqrt(1.0 / steps) * rng.next_normal();
    }
    return Polyline(std::move(t), std::move(v), 1);
}

} // namespace

TEST_CASE("construction validation") {
    CHECK_THROWS_AS(Polyline({0.5, 1.0}, {0.0, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(Polyline({0.0, 0.0}, {0.0, 1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(Polyline({0.0, 1.0}, {0.0}, 1), std::invalid_argument);
}

TEST_CASE("eval interpolates linearly and clamps") {
    Polyline p({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, 1);
    CHECK(p.eval(0.5, 0) == 1.0);
    CHECK(p.eval(1.5, 0) == 1.5);
    CHECK(p.eval(-1.0, 0) == 0.0);
    CHECK(p.eval(5.0, 0) == 1.0);
}

TEST_CASE("running_sup on monotone input is the identity") {
    Polyline p({0.0, 0.5, 1.0}, {0.0, 0.3, 0.9}, 1);
    Polyline r = running_sup(p);
    for (double t : {0.0, 0.25, 0.5, 0.77, 1.0}) CHECK(r.eval(t, 0) == p.eval(t, 0));
}

TEST_CASE("running_sup of a tent is flat after the peak") {
    Polyline p({0.0, 0.5, 1.0}, {0.0, 1.0, -1.0}, 1);
    Polyline r = running_sup(p);
    CHECK(r.eval(0.25, 0) == 0.5);
    CHECK(r.eval(0.75, 0) == 1.0);
    CHECK(r.eval(1.0, 0) == 1.0);
}

TEST_CASE("running_sup matches dense-grid brute force on random walks") {
    Stream rng(17);
    for (int c = 0; c < 20; ++c) {
        Polyline p = random_walk(rng, 64);
        Polyline r = running_sup(p);
        double rm = p.value(0, 0);
        // Dense forward sweep; the exact running max must dominate the input
        // and match at every breakpoint of either polyline.
        const auto grid = Polyline::merge_grids(p.times(), r.times());
        for (double t : grid) {
            rm = std::max(rm, p.eval(t, 0));
            CHECK(r.eval(t, 0) == doctest::Approx(rm).epsilon(1e-12));
            CHECK(r.eval(t, 0) >= p.eval(t, 0) - 1e-15);
        }
    }
}

TEST_CASE("positive_part inserts crossings exactly") {
    Polyline p({0.0, 1.0}, {-1.0, 1.0}, 1);
    Polyline q = positive_part(p);
    CHECK(q.eval(0.25, 0) == 0.0);
    CHECK(q.eval(0.5, 0) == 0.0);
    CHECK(q.eval(0.75, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("distance is exact on merged breakpoints") {
    Polyline a({0.0, 1.0}, {0.0, 1.0}, 1);
    Polyline b({0.0, 0.5, 1.0}, {0.0, 1.0, 1.0}, 1);
    CHECK(Polyline::distance(a, b) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("simplify drops collinear interior points only") {
    Polyline p({0.0, 0.5, 1.0, 1.5}, {0.0, 0.5, 1.0, 0.0}, 1);
    p.simplify();
    CHECK(p.size() == 3);
    CHECK(p.eval(0.25, 0) == 0.25);
    CHECK(p.eval(1.25, 0) == 0.5);
}

TEST_CASE("restrict_to keeps values exactly") {
    Stream rng(4);
    Polyline p = random_walk(rng, 32);
    Polyline q = p.restrict_to(0.40625);
    CHECK(q.t_end() == 0.40625);
    for (double t : {0.0, 0.1, 0.25, 0.40625})
        CHECK(q.eval(t, 0) == doctest::Approx(p.eval(t, 0)).epsilon(1e-15));
}
