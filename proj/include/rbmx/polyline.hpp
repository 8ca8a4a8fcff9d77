#pragma once

#include <cstddef>
#include <vector>

namespace rbmx {

// Continuous piecewise-linear path on [0, t_end] in d dimensions:
// strictly increasing breakpoints starting at 0, one d-vector per breakpoint,
// linear interpolation in between.
class Polyline {
public:
    Polyline() : d_(1) {}
    Polyline(std::vector<double> times, std::vector<double> values, std::size_t d);

    static Polyline constant(double t_end, const std::vector<double>& v);

    std::size_t dim() const { return d_; }
    std::size_t size() const { return t_.size(); }
    double t_end() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }

    double value(std::size_t k, std::size_t i) const { return v_[k * d_ + i]; }
    double& value(std::size_t k, std::size_t i) { return v_[k * d_ + i]; }

    // Linear interpolation; t is clamped to [0, t_end].
    double eval(double t, std::size_t i) const;
    std::vector<double> eval(double t) const;

    Polyline coordinate(std::size_t i) const;
    Polyline restrict_to(double t_hi) const;

    // Resample onto a superset grid (exact for piecewise-linear data).
    Polyline resampled(const std::vector<double>& grid) const;

    // max_i sup_t |x_i(t) - y_i(t)|; exact because the difference is
    // piecewise linear on the merged grid.
    static double distance(const Polyline& x, const Polyline& y);

    // Union of breakpoint grids.
    static std::vector<double> merge_grids(const std::vector<double>& a,
                                           const std::vector<double>& b);

    // Drop interior breakpoints whose values are exactly collinear with
    // their neighbours in every coordinate.
    void simplify();

private:
    std::size_t locate(double t) const;

    std::vector<double> t_;
    std::vector<double> v_;  // row-major size() x dim()
    std::size_t d_;
};

// Exact running maximum of a 1-d polyline, inserting the breakpoints where
// rising segments cross the previous maximum. Output is non-decreasing.
Polyline running_sup(const Polyline& p);

// Componentwise positive part with exact zero-crossing insertion.
Polyline positive_part(const Polyline& p);

} // namespace rbmx
