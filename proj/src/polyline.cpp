#include "rbmx/polyline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbmx {

Polyline::Polyline(std::vector<double> times, std::vector<double> values, std::size_t d)
    : t_(std::move(times)), v_(std::move(values)), d_(d) {
    if (d_ == 0) throw std::invalid_argument("Polyline: dimension must be positive");
    if (t_.empty() || t_.front() != 0.0)
        throw std::invalid_argument("Polyline: breakpoints must start at 0");
    for (std::size_t k = 1; k < t_.size(); ++k)
        if (!(t_[k] > t_[k - 1]))
            throw std::invalid_argument("Polyline: breakpoints must be strictly increasing");
    if (v_.size() != t_.size() * d_)
        throw std::invalid_argument("Polyline: value count mismatch");
}

Polyline Polyline::constant(double t_end, const std::vector<double>& v) {
    std::vector<double> t{0.0, t_end};
    std::vector<double> vals(v);
    vals.insert(vals.end(), v.begin(), v.end());
    return Polyline(std::move(t), std::move(vals), v.size());
}

std::size_t Polyline::locate(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - t_.begin());
    if (k == 0) return 0;
    if (k >= t_.size()) return t_.size() - 2;
    return k - 1;
}

double Polyline::eval(double t, std::size_t i) const {
    if (t <= 0.0) return value(0, i);
    if (t >= t_.back()) return value(t_.size() - 1, i);
    const std::size_t k = locate(t);
    const double w = (t - t_[k]) / (t_[k + 1] - t_[k]);
    return value(k, i) + w * (value(k + 1, i) - value(k, i));
}

std::vector<double> Polyline::eval(double t) const {
    std::vector<double> out(d_);
    for (std::size_t i = 0; i < d_; ++i) out[i] = eval(t, i);
    return out;
}

Polyline Polyline::coordinate(std::size_t i) const {
    std::vector<double> vals(t_.size());
    for (std::size_t k = 0; k < t_.size(); ++k) vals[k] = value(k, i);
    return Polyline(t_, std::move(vals), 1);
}

Polyline Polyline::restrict_to(double t_hi) const {
    std::vector<double> t, vals;
    for (std::size_t k = 0; k < t_.size() && t_[k] < t_hi; ++k) {
        t.push_back(t_[k]);
        for (std::size_t i = 0; i < d_; ++i) vals.push_back(value(k, i));
    }
    t.push_back(t_hi);
    for (std::size_t i = 0; i < d_; ++i) vals.push_back(eval(t_hi, i));
    return Polyline(std::move(t), std::move(vals), d_);
}

Polyline Polyline::resampled(const std::vector<double>& grid) const {
    std::vector<double> vals;
    vals.reserve(grid.size() * d_);
    for (double t : grid)
        for (std::size_t i = 0; i < d_; ++i) vals.push_back(eval(t, i));
    return Polyline(grid, std::move(vals), d_);
}

std::vector<double> Polyline::merge_grids(const std::vector<double>& a,
                                          const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double Polyline::distance(const Polyline& x, const Polyline& y) {
    const std::vector<double> grid = merge_grids(x.times(), y.times());
    double d = 0.0;
    for (double t : grid)
        for (std::size_t i = 0; i < x.dim(); ++i)
            d = std::max(d, std::fabs(x.eval(t, i) - y.eval(t, i)));
    return d;
}

void Polyline::simplify() {
    if (t_.size() < 3) return;
    std::vector<double> t{t_[0]};
    std::vector<double> vals(v_.begin(), v_.begin() + d_);
    // Each interior point is tested against the last kept point, not its
    // original neighbour; independent per-neighbour tests can cascade and
    // delete a genuine kink between near-duplicate breakpoints.
    for (std::size_t k = 1; k + 1 < t_.size(); ++k) {
        const double tl = t.back();
        const std::size_t last = t.size() - 1;
        bool collinear = true;
        const double w = (t_[k] - tl) / (t_[k + 1] - tl);
        for (std::size_t i = 0; i < d_ && collinear; ++i) {
            const double vl = vals[last * d_ + i];
            const double lerp = vl + w * (value(k + 1, i) - vl);
            collinear = lerp == value(k, i);
        }
        if (!collinear) {
            t.push_back(t_[k]);
            for (std::size_t i = 0; i < d_; ++i) vals.push_back(value(k, i));
        }
    }
    t.push_back(t_.back());
    for (std::size_t i = 0; i < d_; ++i) vals.push_back(value(t_.size() - 1, i));
    t_ = std::move(t);
    v_ = std::move(vals);
}

Polyline running_sup(const Polyline& p) {
    if (p.dim() != 1) throw std::invalid_argument("running_sup: 1-d polylines only");
    std::vector<double> t{0.0};
    std::vector<double> v{p.value(0, 0)};
    double rm = p.value(0, 0);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const double t0 = p.times()[k], t1 = p.times()[k + 1];
        const double v0 = p.value(k, 0), v1 = p.value(k + 1, 0);
        if (v1 <= rm) {
            // Entire segment below the running max (v0 <= rm holds inductively).
            t.push_back(t1);
            v.push_back(rm);
            continue;
        }
        if (v0 < rm) {
            // Rising segment crosses the running max strictly inside.
            const double tc = t0 + (rm - v0) / (v1 - v0) * (t1 - t0);
            if (tc > t.back() && tc < t1) {
                t.push_back(tc);
                v.push_back(rm);
            }
        }
        rm = v1;
        t.push_back(t1);
        v.push_back(rm);
    }
    Polyline out(std::move(t), std::move(v), 1);
    out.simplify();
    return out;
}

Polyline positive_part(const Polyline& p) {
    // Insert zero crossings per coordinate, then clamp.
    std::vector<double> grid = p.times();
    for (std::size_t i = 0; i < p.dim(); ++i) {
        for (std::size_t k = 0; k + 1 < p.size(); ++k) {
            const double v0 = p.value(k, i), v1 = p.value(k + 1, i);
            if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
                const double t0 = p.times()[k], t1 = p.times()[k + 1];
                grid.push_back(t0 + v0 / (v0 - v1) * (t1 - t0));
            }
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Polyline out = p.resampled(grid);
    for (std::size_t k = 0; k < out.size(); ++k)
        for (std::size_t i = 0; i < out.dim(); ++i)
            if (out.value(k, i) < 0.0) out.value(k, i) = 0.0;
    out.simplify();
    return out;
}

} // namespace rbmx
