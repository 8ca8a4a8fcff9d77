#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbmx/interval.hpp"
#include "rbmx/polyline.hpp"
#include "rbmx/rng.hpp"

namespace rbmx {

class BudgetExhausted : public std::runtime_error {
public:
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

// Cap on bracket refinements within a single unbiased decision. Hitting it
// signals a pathological numerical state; the sample is aborted, never
// silently resampled.
struct DecisionBudget {
    std::uint64_t per_decision = 1'000'000;
};

// One uniform draw against a probability known only through a shrinking
// certified bracket. The decision is made exactly when u exits the bracket;
// the uniform is never redrawn.
struct LazyDecision {
    double u = 0.0;
    Interval p{0.0, 1.0};

    bool decided() const { return u < p.lo || u > p.hi; }
    bool value() const { return u < p.lo; }
};

// Per-dyadic-interval record: endpoint values of the driving Brownian path
// plus intervals bracketing its minimum and maximum on the interval.
//   t in ((j-1) 2^-n, j 2^-n], min in (min_lo, min_hi], max in [max_lo, max_hi)
struct IntersectionLayer {
    int level = 0;
    std::uint64_t index = 1;
    double b_left = 0.0;
    double b_right = 0.0;
    double min_lo = 0.0, min_hi = 0.0;
    double max_lo = 0.0, max_hi = 0.0;

    double h() const { return std::ldexp(1.0, -level); }
    double t_left() const { return std::ldexp(static_cast<double>(index - 1), -level); }
    double t_right() const { return std::ldexp(static_cast<double>(index), -level); }
    double span() const { return max_hi - min_lo; }
    double min_width() const { return min_hi - min_lo; }
    double max_width() const { return max_hi - max_lo; }

    bool invariants_hold() const;
};

// Fraction of the width bound 2^{-(n+1)/2} that freshly produced extrema
// brackets are narrowed to.
inline constexpr double kBracketFraction = 0.25;

// Width bound 2^{-(n+1)/2} for level-n brackets.
double bracket_width_bound(int level);

// Certified bracket of P{min in (l1,l2], max in [u1,u2)} for a Brownian
// bridge from a to b over duration h (inclusion-exclusion of four gammas).
Interval extrema_event_prob(double l1, double l2, double u1, double u2, double h,
                            double a, double b, double tol);

// Decide u < p for p available only as certified brackets at tolerance tol.
// brackets(tol) must return an enclosure of p that converges as tol -> 0.
template <class BracketFn>
bool decide_less(double u, BracketFn brackets, const DecisionBudget& budget) {
    double tol = 0.01;
    for (std::uint64_t step = 0;; ++step) {
        const Interval p = brackets(tol);
        if (u < p.lo) return true;
        if (u > p.hi) return false;
        if (step >= budget.per_decision || tol < 1e-300)
            throw BudgetExhausted("lazy decision did not separate within budget");
        tol /= 32.0;
    }
}

// Root layer over (0,1]: b_left = 0, b_right standard normal, extrema cells
// of width kBracketFraction * 2^{-1/2} sampled from the exact conditional
// law (minimum by closed-form inversion, maximum by a lazy categorical walk).
IntersectionLayer make_root_layer(Stream& rng, const DecisionBudget& budget);

// Shrinks both extrema brackets below target_width by unbiased halving with
// gamma-ratio probabilities.
IntersectionLayer locate_extrema(IntersectionLayer layer, double target_width, Stream& rng,
                                 const DecisionBudget& budget);

// Splits a layer at its midpoint: samples the midpoint value from the exact
// conditional law (bridge-normal proposal thinned by the gamma-product
// probability of the layer event), allocates the extrema constraints to the
// halves by a lazy categorical over the admissible configurations, and
// localizes the children's brackets to the level-(n+1) width bound.
std::pair<IntersectionLayer, IntersectionLayer> bisect(const IntersectionLayer& layer,
                                                       Stream& rng,
                                                       const DecisionBudget& budget);

// Ordered collection of layers tiling (0,1] at possibly mixed levels, with
// the refinement guard used to preserve the conditioning discipline.
class LayerSet {
public:
    LayerSet() = default;
    static LayerSet init_root(Stream stream);

    const std::vector<IntersectionLayer>& layers() const { return layers_; }
    Stream& stream() { return stream_; }
    void set_budget(DecisionBudget b) { budget_ = b; }

    // Index of the layer whose interval contains t (t_left < t <= t_right).
    std::size_t find(double t) const;

    // Every layer intersecting (t_lo, t_hi) is brought to level n.
    void refine_to_level(int n, double t_lo, double t_hi);

    void bisect_at(std::size_t idx);
    void halve_min_bracket(std::size_t idx, double target_width);
    void halve_max_bracket(std::size_t idx, double target_width);

    // max (max_hi - min_lo) over layers intersecting (t_lo, t_hi).
    double epsilon(double t_lo, double t_hi) const;

    // Linear interpolation of the endpoint values, anchored at B(0) = 0,
    // over layers with t_right <= t_hi.
    Polyline interpolant(double t_hi) const;
    Polyline interpolant() const { return interpolant(1.0); }

    // Upper/lower step envelopes evaluated as a sup over (0, t]: used by
    // certified enclosures. Returns per-layer data; see sampler.

    // Refinement guard: mutations of layers with t_right > t are counted
    // (and rejected when armed). Guards the conditioning discipline.
    void freeze_after(double t) { freeze_t_ = t; }
    double frozen_after() const { return freeze_t_; }
    std::uint64_t guard_violations() const { return guard_violations_; }

    // Line-oriented debug table: level j b_left b_right min_lo min_hi max_lo max_hi.
    std::string dump() const;

    bool invariants_hold() const;

private:
    void check_guard(std::size_t idx);

    std::vector<IntersectionLayer> layers_;
    Stream stream_;
    DecisionBudget budget_;
    double freeze_t_ = 2.0;  // beyond the domain: guard disarmed
    std::uint64_t guard_violations_ = 0;
};

} // namespace rbmx
