#pragma once

#include <cstddef>
#include <vector>

#include "rbmx/polyline.hpp"

namespace rbmx {

// Harrison-Reiman reflection data: R = I - Q^T with Q substochastic and
// spectral radius alpha < 1. K = 1/(1 - alpha_upper) is the Lipschitz
// constant of the Skorokhod map in the uniform metric, computed from a
// certified upper bound on alpha.
struct ReflectionSpec {
    std::size_t d = 1;
    std::vector<double> Q;  // row-major d x d
    double alpha = 0.0;
    double alpha_upper = 0.0;
    double K = 1.0;

    double q(std::size_t i, std::size_t j) const { return Q[i * d + j]; }
    bool uncoupled() const;
};

struct SkorokhodSolution {
    Polyline Y;         // reflected path, componentwise >= 0
    Polyline L;         // pushing process, componentwise non-decreasing, L(0)=0
    double err_bound;   // certified sup-norm error on Y (0 for exact solves)
    std::size_t iterations = 0;
};

struct ConditionsReport {
    bool ok = false;
    double worst_negative_y = 0.0;   // most negative Y value seen
    double worst_l_decrease = 0.0;   // largest decrease of any L_i
    double l_at_zero = 0.0;          // |L(0)|
    double complementarity = 0.0;    // max_i integral Y_i dL_i
    double identity_error = 0.0;     // sup |Y - (y0 + X + RL)|
};

// Validates Q (square, nonnegative, row sums <= 1) and computes alpha by
// power iteration plus a certified upper bound from norms of repeated
// squarings. Throws if alpha cannot be certified below 1.
ReflectionSpec validate_spec(const std::vector<double>& Q, std::size_t d);

// Exact one-dimensional reflection: L(t) = sup_{s<=t} (-(y0 + X(s)))^+.
SkorokhodSolution reflect_1d(const Polyline& X, double y0);

// Solves the Skorokhod problem for piecewise-linear X by Picard iteration
//   L_i <- running_sup of (-(y0_i + X_i - (Q^T L)_i))^+,
// stopping when the certified tail bound ((I-Q^T)^{-1} - I) * successive-diff
// puts the sup-norm error on Y below tol. Exact (err_bound = 0) whenever an
// iteration reproduces its predecessor, e.g. d = 1, Q = 0, or nilpotent Q.
SkorokhodSolution reflect(const Polyline& X, const ReflectionSpec& spec,
                          const std::vector<double>& y0, double tol);

// Picard solve without the 1-d shortcut; used to cross-check reflect_1d.
SkorokhodSolution reflect_picard(const Polyline& X, const ReflectionSpec& spec,
                                 const std::vector<double>& y0, double tol);

// Componentwise bound ((I - Q^T)^{-1} - I) diff on the limit of a
// Q^T-contracting iteration whose successive sup-differences are diff.
std::vector<double> picard_tail_bound(const ReflectionSpec& spec,
                                      const std::vector<double>& diff);

// Verifies conditions a)-c) and the defining identity at all breakpoints.
ConditionsReport check_conditions(const SkorokhodSolution& sol, const Polyline& X,
                                  const ReflectionSpec& spec, const std::vector<double>& y0,
                                  double tol);

} // namespace rbmx
