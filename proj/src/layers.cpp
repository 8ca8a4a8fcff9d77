#include "rbmx/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rbmx/bridge_math.hpp"

namespace rbmx {

namespace {

Interval point_gamma(double lo, double hi, double r, double a, double b, double tol) {
    return gamma_bounds_box(lo, hi, r, Interval::point(a), Interval::point(b), tol);
}

Interval event_prob(const IntersectionLayer& L, double l1, double l2, double u1, double u2,
                    double tol) {
    return extrema_event_prob(l1, l2, u1, u2, L.h(), L.b_left, L.b_right, tol);
}

IntersectionLayer halve_min(IntersectionLayer L, Stream& rng, const DecisionBudget& budget) {
    const double mid = 0.5 * (L.min_lo + L.min_hi);
    if (mid <= L.min_lo || mid >= L.min_hi)
        throw BudgetExhausted("halve_min: bracket narrower than machine resolution");
    const double u = rng.next_uniform();
    const bool upper = decide_less(
        u,
        [&](double tol) {
            const Interval num = event_prob(L, mid, L.min_hi, L.max_lo, L.max_hi, tol);
            const Interval den = event_prob(L, L.min_lo, L.min_hi, L.max_lo, L.max_hi, tol);
            return ratio_prob(num, den);
        },
        budget);
    if (upper)
        L.min_lo = mid;
    else
        L.min_hi = mid;
    return L;
}

IntersectionLayer halve_max(IntersectionLayer L, Stream& rng, const DecisionBudget& budget) {
    const double mid = 0.5 * (L.max_lo + L.max_hi);
    if (mid <= L.max_lo || mid >= L.max_hi)
        throw BudgetExhausted("halve_max: bracket narrower than machine resolution");
    const double u = rng.next_uniform();
    const bool upper = decide_less(
        u,
        [&](double tol) {
            const Interval num = event_prob(L, L.min_lo, L.min_hi, mid, L.max_hi, tol);
            const Interval den = event_prob(L, L.min_lo, L.min_hi, L.max_lo, L.max_hi, tol);
            return ratio_prob(num, den);
        },
        budget);
    if (upper)
        L.max_lo = mid;
    else
        L.max_hi = mid;
    return L;
}

// Four stay-in-band probabilities of one half interval; x is the sampled
// midpoint value, so the endpoints are scalars here.
struct HalfGammas {
    Interval g_du, g_uu, g_dd, g_ud;

    // Joint law of (min state, max state) for this half:
    //   min state: in = falls in (min_lo, min_hi], ab = stays above min_hi
    //   max state: in = falls in [max_lo, max_hi), be = stays below max_lo
    Interval joint(bool min_in, bool max_in) const {
        Interval r;
        if (min_in && max_in)
            r = {g_du.lo - g_uu.hi - g_dd.hi + g_ud.lo, g_du.hi - g_uu.lo - g_dd.lo + g_ud.hi};
        else if (min_in && !max_in)
            r = g_dd - g_ud;
        else if (!min_in && max_in)
            r = g_uu - g_ud;
        else
            r = g_ud;
        return r.clamp(0.0, 1.0);
    }
};

HalfGammas half_gammas(const IntersectionLayer& L, double a, double b, double tol) {
    const double h2 = 0.5 * L.h();
    HalfGammas g;
    g.g_du = point_gamma(L.min_lo, L.max_hi, h2, a, b, tol);
    g.g_uu = point_gamma(L.min_hi, L.max_hi, h2, a, b, tol);
    g.g_dd = point_gamma(L.min_lo, L.max_lo, h2, a, b, tol);
    g.g_ud = point_gamma(L.min_hi, L.max_lo, h2, a, b, tol);
    return g;
}

// Admissible (min-half, max-half) configurations: at least one half attains
// the parent min bracket and at least one attains the parent max bracket.
// Order is fixed for reproducibility.
struct Config {
    bool min_in_left, min_in_right;
    bool max_in_left, max_in_right;
};

constexpr Config kConfigs[9] = {
    {true, true, true, true},   {true, true, true, false},  {true, true, false, true},
    {true, false, true, true},  {true, false, true, false}, {true, false, false, true},
    {false, true, true, true},  {false, true, true, false}, {false, true, false, true},
};

// -2: undecided at this tolerance, -1: reject the midpoint proposal,
// k >= 0: accept with configuration k.
int classify_midpoint(const IntersectionLayer& L, double x, double u, double tol) {
    if (x <= L.min_lo || x >= L.max_hi) return -1;  // event probability is exactly 0
    const HalfGammas h1 = half_gammas(L, L.b_left, x, tol);
    const HalfGammas h2 = half_gammas(L, x, L.b_right, tol);
    Interval cum{0.0, 0.0};
    double prev_hi = 0.0;
    for (int k = 0; k < 9; ++k) {
        const Config& c = kConfigs[k];
        const Interval w =
            h1.joint(c.min_in_left, c.max_in_left).mul_nonneg(h2.joint(c.min_in_right, c.max_in_right));
        cum = cum + w;
        if (u > prev_hi && u < cum.lo) return k;
        prev_hi = cum.hi;
    }
    if (u > cum.hi) return -1;
    return -2;
}

} // namespace

double bracket_width_bound(int level) { return std::exp2(-0.5 * (level + 1)); }

bool IntersectionLayer::invariants_hold() const {
    const double lo_end = std::min(b_left, b_right);
    const double hi_end = std::max(b_left, b_right);
    return min_lo < min_hi && min_hi <= lo_end && hi_end <= max_lo && max_lo < max_hi &&
           min_width() < bracket_width_bound(level) && max_width() < bracket_width_bound(level);
}

Interval extrema_event_prob(double l1, double l2, double u1, double u2, double h, double a,
                            double b, double tol) {
    const Interval g12 = point_gamma(l1, u2, h, a, b, tol);
    const Interval g22 = point_gamma(l2, u2, h, a, b, tol);
    const Interval g11 = point_gamma(l1, u1, h, a, b, tol);
    const Interval g21 = point_gamma(l2, u1, h, a, b, tol);
    return Interval{g12.lo - g22.hi - g11.hi + g21.lo, g12.hi - g22.lo - g11.lo + g21.hi}
        .clamp(0.0, 1.0);
}

IntersectionLayer make_root_layer(Stream& rng, const DecisionBudget& budget) {
    IntersectionLayer L;
    L.level = 0;
    L.index = 1;
    L.b_left = 0.0;
    L.b_right = rng.next_normal();
    const double w0 = kBracketFraction * bracket_width_bound(0);
    const double lo_end = std::min(0.0, L.b_right);
    const double hi_end = std::max(0.0, L.b_right);
    const BridgeGeometry geom{1.0, 0.0, L.b_right};

    const double m_draw = bridge_min_quantile(rng.next_uniform(), geom);
    const auto cell_m = static_cast<std::uint64_t>(std::floor((lo_end - m_draw) / w0));
    L.min_hi = lo_end - static_cast<double>(cell_m) * w0;
    L.min_lo = L.min_hi - w0;

    const double denom = bridge_min_cdf(L.min_hi, geom) - bridge_min_cdf(L.min_lo, geom);
    const double u = rng.next_uniform();
    std::uint64_t cell = 0;
    while (true) {
        const double ub = hi_end + static_cast<double>(cell + 1) * w0;
        const bool inside = decide_less(
            u,
            [&](double tol) {
                const Interval g_lo = point_gamma(L.min_lo, ub, 1.0, 0.0, L.b_right, tol);
                const Interval g_hi = point_gamma(L.min_hi, ub, 1.0, 0.0, L.b_right, tol);
                Interval num{g_lo.lo - g_hi.hi, g_lo.hi - g_hi.lo};
                num = num.clamp(0.0, 1.0);
                return Interval{num.lo / denom, num.hi / denom}.clamp(0.0, 1.0);
            },
            budget);
        if (inside) break;
        ++cell;
        if (cell > 1'000'000) throw BudgetExhausted("root layer: maximum cell walk diverged");
    }
    L.max_lo = hi_end + static_cast<double>(cell) * w0;
    L.max_hi = L.max_lo + w0;
    return L;
}

IntersectionLayer locate_extrema(IntersectionLayer layer, double target_width, Stream& rng,
                                 const DecisionBudget& budget) {
    if (!(target_width > 0.0))
        throw std::invalid_argument("locate_extrema: target width must be positive");
    while (layer.min_width() >= target_width) layer = halve_min(layer, rng, budget);
    while (layer.max_width() >= target_width) layer = halve_max(layer, rng, budget);
    return layer;
}

std::pair<IntersectionLayer, IntersectionLayer> bisect(const IntersectionLayer& layer,
                                                       Stream& rng,
                                                       const DecisionBudget& budget) {
    const double mean = 0.5 * (layer.b_left + layer.b_right);
    const double sd = std::sqrt(0.25 * layer.h());

    for (std::uint64_t attempt = 0; attempt < budget.per_decision; ++attempt) {
        const double x = mean + sd * rng.next_normal();
        const double u = rng.next_uniform();
        int cfg = -2;
        double tol = 0.02;
        for (std::uint64_t step = 0;; ++step) {
            cfg = classify_midpoint(layer, x, u, tol);
            if (cfg != -2) break;
            if (step >= budget.per_decision || tol < 1e-300)
                throw BudgetExhausted("bisect: configuration decision did not separate");
            tol /= 32.0;
        }
        if (cfg < 0) continue;

        const Config& c = kConfigs[cfg];
        auto make_child = [&](bool left, bool min_in, bool max_in) {
            IntersectionLayer ch;
            ch.level = layer.level + 1;
            ch.index = left ? 2 * layer.index - 1 : 2 * layer.index;
            ch.b_left = left ? layer.b_left : x;
            ch.b_right = left ? x : layer.b_right;
            const double lo_end = std::min(ch.b_left, ch.b_right);
            const double hi_end = std::max(ch.b_left, ch.b_right);
            if (min_in) {
                ch.min_lo = layer.min_lo;
                ch.min_hi = std::min(layer.min_hi, lo_end);
            } else {
                ch.min_lo = layer.min_hi;
                ch.min_hi = lo_end;
            }
            if (max_in) {
                ch.max_hi = layer.max_hi;
                ch.max_lo = std::max(layer.max_lo, hi_end);
            } else {
                ch.max_hi = layer.max_lo;
                ch.max_lo = hi_end;
            }
            if (!(ch.min_lo < ch.min_hi) || !(ch.max_lo < ch.max_hi))
                throw BudgetExhausted("bisect: degenerate child bracket");
            return ch;
        };
        IntersectionLayer left = make_child(true, c.min_in_left, c.max_in_left);
        IntersectionLayer right = make_child(false, c.min_in_right, c.max_in_right);
        const double target = kBracketFraction * bracket_width_bound(layer.level + 1);
        left = locate_extrema(left, target, rng, budget);
        right = locate_extrema(right, target, rng, budget);
        return {left, right};
    }
    throw BudgetExhausted("bisect: midpoint proposal budget exhausted");
}

LayerSet LayerSet::init_root(Stream stream) {
    LayerSet s;
    s.stream_ = stream;
    s.layers_.push_back(make_root_layer(s.stream_, s.budget_));
    return s;
}

std::size_t LayerSet::find(double t) const {
    std::size_t lo = 0, hi = layers_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (layers_[mid].t_right() < t)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo >= layers_.size()) throw std::out_of_range("LayerSet::find: t beyond cover");
    return lo;
}

void LayerSet::check_guard(std::size_t idx) {
    if (layers_[idx].t_right() > freeze_t_) {
        ++guard_violations_;
        throw std::logic_error("LayerSet: refinement past the conditioning boundary");
    }
}

void LayerSet::refine_to_level(int n, double t_lo, double t_hi) {
    bool again = true;
    while (again) {
        again = false;
        std::vector<IntersectionLayer> next;
        next.reserve(layers_.size() * 2);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            IntersectionLayer& L = layers_[i];
            if (L.level < n && L.t_right() > t_lo && L.t_left() < t_hi) {
                check_guard(i);
                auto [a, b] = rbmx::bisect(L, stream_, budget_);
                next.push_back(a);
                next.push_back(b);
                if (a.level < n) again = true;
            } else {
                next.push_back(L);
            }
        }
        layers_ = std::move(next);
    }
}

void LayerSet::bisect_at(std::size_t idx) {
    check_guard(idx);
    auto [a, b] = rbmx::bisect(layers_[idx], stream_, budget_);
    layers_[idx] = a;
    layers_.insert(layers_.begin() + static_cast<std::ptrdiff_t>(idx) + 1, b);
}

void LayerSet::halve_min_bracket(std::size_t idx, double target_width) {
    check_guard(idx);
    IntersectionLayer& L = layers_[idx];
    while (L.min_width() >= target_width) L = halve_min(L, stream_, budget_);
}

void LayerSet::halve_max_bracket(std::size_t idx, double target_width) {
    check_guard(idx);
    IntersectionLayer& L = layers_[idx];
    while (L.max_width() >= target_width) L = halve_max(L, stream_, budget_);
}

double LayerSet::epsilon(double t_lo, double t_hi) const {
    if (!(t_hi > t_lo)) throw std::invalid_argument("epsilon: empty time range");
    double e = 0.0;
    bool any = false;
    for (const IntersectionLayer& L : layers_) {
        if (L.t_right() > t_lo && L.t_left() < t_hi) {
            e = std::max(e, L.span());
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("epsilon: no layers in range");
    return e;
}

Polyline LayerSet::interpolant(double t_hi) const {
    std::vector<double> t{0.0}, v{0.0};
    for (const IntersectionLayer& L : layers_) {
        if (L.t_right() > t_hi) break;
        t.push_back(L.t_right());
        v.push_back(L.b_right);
    }
    return Polyline(std::move(t), std::move(v), 1);
}

std::string LayerSet::dump() const {
    std::ostringstream os;
    os.precision(17);
    for (const IntersectionLayer& L : layers_) {
        os << L.level << ' ' << L.index << ' ' << L.b_left << ' ' << L.b_right << ' '
           << L.min_lo << ' ' << L.min_hi << ' ' << L.max_lo << ' ' << L.max_hi << '\n';
    }
    return os.str();
}

bool LayerSet::invariants_hold() const {
    if (layers_.empty()) return false;
    if (layers_.front().t_left() != 0.0) return false;
    if (layers_.back().t_right() != 1.0) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (!layers_[i].invariants_hold()) return false;
        if (i + 1 < layers_.size()) {
            if (layers_[i].t_right() != layers_[i + 1].t_left()) return false;
            if (layers_[i].b_right != layers_[i + 1].b_left) return false;
        }
    }
    return true;
}

} // namespace rbmx
