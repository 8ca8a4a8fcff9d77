#pragma once

#include <cstdint>
#include <vector>

#include "rbmx/bridge_math.hpp"
#include "rbmx/layers.hpp"
#include "rbmx/polyline.hpp"
#include "rbmx/rng.hpp"
#include "rbmx/skorokhod.hpp"

namespace rbmx {

struct SamplerCaps {
    int max_level = 22;
    std::uint64_t max_attempts = 1'000'000;
    std::uint64_t decision_budget = 1'000'000;
};

struct SamplerConfig {
    ReflectionSpec spec;
    double T = 1.0 / 3.0;          // query time in (0, 1]
    std::vector<double> y0;        // componentwise >= 0
    std::uint64_t seed = 0;
    SamplerCaps caps;
    double solver_tol_factor = 0.1;  // reflect tol = factor * current layer width
};

enum class SampleStatus { accepted, budget_exhausted };

struct SampleResult {
    std::vector<double> value;      // Y(T) when accepted
    std::uint64_t attempts = 0;     // proposals consumed
    int max_level_reached = 0;
    SampleStatus status = SampleStatus::budget_exhausted;
};

// Internal query time is fixed at tau = 1/3 (never a dyadic endpoint at any
// level); Brownian scaling maps the user time onto it exactly.
struct TimeRescale {
    double c;    // 3 * T_user
    double tau;  // 1/3
};
TimeRescale rescale_time(double T_user);

// Output of the strong-approximation stage (Algorithm "StrongApprox"):
// conditioning layers per coordinate, the level N, the dyadic interval
// around the query time, delta = epsilon_N, the reflected approximation,
// and the per-coordinate increment-density parameters.
struct StrongApproxOutput {
    std::vector<LayerSet> sets;
    int N = 0;
    std::uint64_t J = 0;
    double T_left = 0.0, T_right = 0.0;
    double delta = 0.0;
    Polyline Ydelta;                      // on [0, T_right]
    std::vector<double> Ydelta_Tleft;
    std::vector<double> Ydelta_T;
    std::vector<BandDensityParams> bands;
    std::vector<double> c_rho_eff;        // min(1, c_rho) per coordinate
    double solver_err = 0.0;
    bool exhausted = false;
};

// Runs Algorithm StrongApprox at internal time tau for the internal
// (rescaled) start point. Refinement and epsilon are restricted to
// [0, T_right(n)]; the guard is min_i Y_n(tau) - solver_err > (K+1) delta.
StrongApproxOutput strong_approx(const SamplerConfig& cfg, double tau,
                                 const std::vector<double>& y0_internal, Stream stream);

// Certified enclosure of Y(T_left) from the current layer state: exact
// breakpoint values plus per-layer minimum brackets bound the running
// supremum in the reflection fixed point from both sides.
struct TleftEnclosure {
    std::vector<Interval> Y;
    std::vector<Interval> L_end;
    std::vector<std::vector<std::size_t>> candidates;  // layers binding the sup
};
TleftEnclosure enclose_tleft(const std::vector<LayerSet>& sets, const ReflectionSpec& spec,
                             const std::vector<double>& y0, double t_left);

struct DrawInfo {
    int N = 0;
    double T_left = 0.0, T_right = 0.0, delta = 0.0;
    std::uint64_t guard_violations = 0;
    std::uint64_t refinement_rounds = 0;
    std::vector<BandDensityParams> bands;
    std::vector<double> Ydelta_Tleft;
};

class RbmSampler {
public:
    explicit RbmSampler(SamplerConfig cfg);

    const SamplerConfig& config() const { return cfg_; }

    // Draws sample `sample_index` on its own substream; safe to call
    // concurrently for distinct indices. Bit-reproducible given
    // (config, seed, index).
    SampleResult draw(std::uint64_t sample_index) const { return draw(sample_index, nullptr); }
    SampleResult draw(std::uint64_t sample_index, DrawInfo* info) const;

private:
    SamplerConfig cfg_;
    TimeRescale rescale_;
    std::vector<double> y0_internal_;
    Stream root_;
};

} // namespace rbmx
