#include "rbmx/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbmx {

namespace {

// Zip per-coordinate interpolants over [0, Tr]; the coordinates were refined
// to a common level on that range, so the grids coincide.
Polyline assemble_interpolant(const std::vector<LayerSet>& sets, double t_hi) {
    const std::size_t d = sets.size();
    Polyline first = sets[0].interpolant(t_hi);
    if (d == 1) return first;
    const std::vector<double>& t = first.times();
    std::vector<double> v(t.size() * d);
    for (std::size_t i = 0; i < d; ++i) {
        Polyline pi = sets[i].interpolant(t_hi);
        if (pi.size() != t.size())
            throw std::logic_error("assemble_interpolant: coordinate grids diverged");
        for (std::size_t k = 0; k < t.size(); ++k) v[k * d + i] = pi.value(k, 0);
    }
    return Polyline(t, std::move(v), d);
}

int deepest_level(const std::vector<LayerSet>& sets) {
    int n = 0;
    for (const LayerSet& s : sets)
        for (const IntersectionLayer& L : s.layers()) n = std::max(n, L.level);
    return n;
}

} // namespace

TimeRescale rescale_time(double T_user) {
    if (!(T_user > 0.0 && T_user <= 1.0))
        throw std::invalid_argument("rescale_time: T must lie in (0,1]");
    return {3.0 * T_user, 1.0 / 3.0};
}

StrongApproxOutput strong_approx(const SamplerConfig& cfg, double tau,
                                 const std::vector<double>& y0_internal, Stream stream) {
    const std::size_t d = cfg.spec.d;
    StrongApproxOutput out;
    out.sets.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        LayerSet s = LayerSet::init_root(stream.split(i + 1));
        s.set_budget(DecisionBudget{cfg.caps.decision_budget});
        out.sets.push_back(std::move(s));
    }
    const double K = cfg.spec.K;
    int n = 0;
    while (true) {
        ++n;
        if (n > cfg.caps.max_level) {
            out.exhausted = true;
            out.N = n - 1;
            return out;
        }
        const auto J = static_cast<std::uint64_t>(std::floor(tau * std::exp2(n))) + 1;
        const double Tr = std::ldexp(static_cast<double>(J), -n);
        for (LayerSet& s : out.sets) s.refine_to_level(n, 0.0, Tr);
        double delta = 0.0;
        for (LayerSet& s : out.sets) delta = std::max(delta, s.epsilon(0.0, Tr));

        const Polyline B = assemble_interpolant(out.sets, Tr);
        const double tol = std::max(cfg.solver_tol_factor * delta, 1e-15);
        const SkorokhodSolution sol = reflect(B, cfg.spec, y0_internal, tol);
        double min_y = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d; ++i) min_y = std::min(min_y, sol.Y.eval(tau, i));
        if (min_y - sol.err_bound > (K + 1.0) * delta) {
            out.N = n;
            out.J = J;
            out.T_left = std::ldexp(static_cast<double>(J - 1), -n);
            out.T_right = Tr;
            out.delta = delta;
            out.Ydelta = sol.Y;
            out.solver_err = sol.err_bound;
            out.Ydelta_Tleft = sol.Y.eval(out.T_left);
            out.Ydelta_T = sol.Y.eval(tau);
            out.bands.resize(d);
            out.c_rho_eff.resize(d);
            for (std::size_t i = 0; i < d; ++i) {
                const IntersectionLayer& L = out.sets[i].layers()[out.sets[i].find(tau)];
                BandDensityParams p;
                p.band = Band{L.min_lo - L.b_left, L.min_hi - L.b_left, L.max_lo - L.b_left,
                              L.max_hi - L.b_left};
                p.s = tau - out.T_left;
                p.l = L.h();
                p.v = L.b_right - L.b_left;
                out.bands[i] = p;
                out.c_rho_eff[i] = std::min(1.0, density_constants(p).c_rho);
            }
            return out;
        }
    }
}

TleftEnclosure enclose_tleft(const std::vector<LayerSet>& sets, const ReflectionSpec& spec,
                             const std::vector<double>& y0, double t_left) {
    const std::size_t d = sets.size();
    TleftEnclosure out;
    out.Y.resize(d);
    out.L_end.resize(d);
    out.candidates.assign(d, {});

    struct Coord {
        std::vector<const IntersectionLayer*> ls;
        std::vector<double> tr;
        std::vector<double> Llo, Lhi;
        double b_end = 0.0;
    };
    std::vector<Coord> C(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (const IntersectionLayer& L : sets[i].layers()) {
            if (L.t_right() > t_left) break;
            C[i].ls.push_back(&L);
            C[i].tr.push_back(L.t_right());
        }
        const std::size_t m = C[i].ls.size();
        C[i].Llo.assign(m, 0.0);
        C[i].Lhi.assign(m, 0.0);
        C[i].b_end = m ? C[i].ls.back()->b_right : 0.0;
    }

    // Bounds on L_j at arbitrary t from its breakpoint values (L is
    // non-decreasing, so neighbouring grid values bracket it).
    auto l_lo_at = [&](std::size_t j, double t) {
        const auto& tr = C[j].tr;
        auto it = std::upper_bound(tr.begin(), tr.end(), t);
        if (it == tr.begin()) return 0.0;
        return C[j].Llo[static_cast<std::size_t>(it - tr.begin()) - 1];
    };
    auto l_hi_at = [&](std::size_t j, double t) {
        const auto& tr = C[j].tr;
        if (tr.empty()) return 0.0;
        auto it = std::lower_bound(tr.begin(), tr.end(), t);
        std::size_t k = static_cast<std::size_t>(it - tr.begin());
        if (k >= tr.size()) k = tr.size() - 1;
        return C[j].Lhi[k];
    };
    auto qtl_lo = [&](std::size_t i, double t) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (spec.q(j, i) != 0.0) s += spec.q(j, i) * l_lo_at(j, t);
        return s;
    };
    auto qtl_hi = [&](std::size_t i, double t) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            if (spec.q(j, i) != 0.0) s += spec.q(j, i) * l_hi_at(j, t);
        return s;
    };

    std::vector<double> diff(d, 0.0);
    for (int sweep = 0; sweep < 500; ++sweep) {
        double change = 0.0;
        std::vector<std::vector<double>> newLlo(d), newLhi(d);
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t m = C[i].ls.size();
            newLlo[i].assign(m, 0.0);
            newLhi[i].assign(m, 0.0);
            double lam_lo = -y0[i];
            double lam_hi = -y0[i];
            for (std::size_t k = 0; k < m; ++k) {
                const IntersectionLayer& L = *C[i].ls[k];
                const double t0 = k ? C[i].tr[k - 1] : 0.0;
                const double t1 = C[i].tr[k];
                const double up = -L.min_lo + qtl_hi(i, t1) - y0[i];
                const double lo =
                    std::max(-L.min_hi + qtl_lo(i, t0), -L.b_right + qtl_lo(i, t1)) - y0[i];
                lam_hi = std::max(lam_hi, up);
                lam_lo = std::max(lam_lo, lo);
                newLlo[i][k] = std::max(0.0, lam_lo);
                newLhi[i][k] = std::max(0.0, lam_hi);
            }
            double dmax = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                dmax = std::max(dmax, std::fabs(newLhi[i][k] - C[i].Lhi[k]));
            diff[i] = dmax;
            change = std::max(change, dmax);
        }
        for (std::size_t i = 0; i < d; ++i) {
            C[i].Llo = std::move(newLlo[i]);
            C[i].Lhi = std::move(newLhi[i]);
        }
        if (change <= 1e-17) break;
    }
    // The upper iterate climbs to its fixed point from below; add the
    // certified contraction tail so it dominates the true pushing process.
    const std::vector<double> tail = picard_tail_bound(spec, diff);
    for (std::size_t i = 0; i < d; ++i)
        for (double& v : C[i].Lhi) v += tail[i];

    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t m = C[i].ls.size();
        const double Llo_end = m ? C[i].Llo.back() : 0.0;
        const double Lhi_end = m ? C[i].Lhi.back() : 0.0;
        const double qhi = qtl_hi(i, t_left);
        const double qlo = qtl_lo(i, t_left);
        out.L_end[i] = Interval{Llo_end, Lhi_end};
        out.Y[i] =
            Interval{y0[i] + C[i].b_end + Llo_end - qhi, y0[i] + C[i].b_end + Lhi_end - qlo};

        double lam_lo = -y0[i];
        std::vector<double> ups(m);
        for (std::size_t k = 0; k < m; ++k) {
            const IntersectionLayer& L = *C[i].ls[k];
            const double t0 = k ? C[i].tr[k - 1] : 0.0;
            const double t1 = C[i].tr[k];
            ups[k] = -L.min_lo + qtl_hi(i, t1) - y0[i];
            const double lo =
                std::max(-L.min_hi + qtl_lo(i, t0), -L.b_right + qtl_lo(i, t1)) - y0[i];
            lam_lo = std::max(lam_lo, lo);
        }
        for (std::size_t k = 0; k < m; ++k)
            if (ups[k] >= lam_lo) out.candidates[i].push_back(k);
    }
    return out;
}

RbmSampler::RbmSampler(SamplerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.y0.size() != cfg_.spec.d)
        throw std::invalid_argument("RbmSampler: y0 dimension mismatch");
    for (double v : cfg_.y0)
        if (v < 0.0) throw std::invalid_argument("RbmSampler: y0 must be >= 0");
    if (cfg_.caps.max_level < 1 || cfg_.caps.max_attempts == 0 || cfg_.caps.decision_budget == 0)
        throw std::invalid_argument("RbmSampler: caps must be positive");
    rescale_ = rescale_time(cfg_.T);
    const double root_c = std::sqrt(rescale_.c);
    y0_internal_.resize(cfg_.y0.size());
    for (std::size_t i = 0; i < cfg_.y0.size(); ++i) y0_internal_[i] = cfg_.y0[i] / root_c;
    root_ = Stream(cfg_.seed);
}

SampleResult RbmSampler::draw(std::uint64_t sample_index, DrawInfo* info) const {
    const std::size_t d = cfg_.spec.d;
    const double sqrt_c = std::sqrt(rescale_.c);
    Stream s = root_.split(sample_index + 1);

    SampleResult res;
    std::uint64_t rounds = 0;
    StrongApproxOutput out;
    try {
        out = strong_approx(cfg_, rescale_.tau, y0_internal_, s.split(1));
        if (out.exhausted) {
            res.status = SampleStatus::budget_exhausted;
        } else {
            for (LayerSet& set : out.sets) set.freeze_after(out.T_left);
            Stream prop = s.split(2);
            TleftEnclosure enc = enclose_tleft(out.sets, cfg_.spec, y0_internal_, out.T_left);

            bool done = false;
            while (!done) {
                if (res.attempts >= cfg_.caps.max_attempts) {
                    res.status = SampleStatus::budget_exhausted;
                    break;
                }
                ++res.attempts;

                std::vector<double> zt(d), v1(d), v2(d);
                for (std::size_t i = 0; i < d; ++i) {
                    const Band& b = out.bands[i].band;
                    const double ext =
                        std::max({out.Ydelta_Tleft[i] - enc.Y[i].lo,
                                  enc.Y[i].hi - out.Ydelta_Tleft[i], 0.0});
                    const double lo = b.L_low - ext;
                    const double hi = b.U_up + ext;
                    zt[i] = lo + prop.next_uniform() * (hi - lo);
                    v1[i] = prop.next_uniform();
                    v2[i] = prop.next_uniform();
                }

                // Certify both strict comparisons per coordinate against the
                // true argument, known only through the T_left enclosure.
                enum class Cmp { unknown, yes, no };
                std::vector<Cmp> cpi(d, Cmp::unknown), crho(d, Cmp::unknown);
                std::vector<double> tol_rho(d, 1e-3);
                bool rejected = false, accepted = false, exhausted = false;

                for (std::uint64_t round = 0;; ++round) {
                    bool all_yes = true, box_bound = false;
                    for (std::size_t i = 0; i < d && !rejected; ++i) {
                        const Interval xbox{zt[i] + out.Ydelta_Tleft[i] - enc.Y[i].hi,
                                            zt[i] + out.Ydelta_Tleft[i] - enc.Y[i].lo};
                        if (cpi[i] == Cmp::unknown) {
                            const Interval pb = pi_density_box(xbox, out.bands[i]);
                            if (v1[i] < pb.lo)
                                cpi[i] = Cmp::yes;
                            else if (v1[i] > pb.hi)
                                cpi[i] = Cmp::no;
                            else
                                box_bound = true;
                        }
                        if (crho[i] == Cmp::unknown) {
                            const Interval rb = rho_box(xbox, out.bands[i], tol_rho[i]);
                            const double t = out.c_rho_eff[i] * v2[i];
                            if (t < rb.lo)
                                crho[i] = Cmp::yes;
                            else if (t > rb.hi)
                                crho[i] = Cmp::no;
                            else if (rb.width() > 3.0 * tol_rho[i])
                                box_bound = true;
                        }
                        if (cpi[i] == Cmp::no || crho[i] == Cmp::no) rejected = true;
                        if (cpi[i] != Cmp::yes || crho[i] != Cmp::yes) all_yes = false;
                    }
                    if (rejected) break;
                    if (all_yes) {
                        accepted = true;
                        break;
                    }
                    if (round >= cfg_.caps.decision_budget) {
                        exhausted = true;
                        break;
                    }
                    for (std::size_t i = 0; i < d; ++i)
                        if (crho[i] == Cmp::unknown)
                            tol_rho[i] = std::max(tol_rho[i] / 8.0, 1e-305);
                    if (box_bound) {
                        ++rounds;
                        bool refined = false;
                        for (std::size_t i = 0; i < d; ++i) {
                            for (auto it = enc.candidates[i].rbegin();
                                 it != enc.candidates[i].rend(); ++it) {
                                const std::size_t k = *it;
                                const IntersectionLayer& L = out.sets[i].layers()[k];
                                double coupling = 0.0;
                                for (std::size_t j = 0; j < d; ++j)
                                    coupling += cfg_.spec.q(j, i) * enc.L_end[j].width();
                                if (L.min_width() > std::max(coupling, 1e-13)) {
                                    out.sets[i].halve_min_bracket(k, 0.6 * L.min_width());
                                    refined = true;
                                } else if (L.level < cfg_.caps.max_level) {
                                    out.sets[i].bisect_at(k);
                                    refined = true;
                                }
                            }
                        }
                        if (!refined) {
                            exhausted = true;
                            break;
                        }
                        enc = enclose_tleft(out.sets, cfg_.spec, y0_internal_, out.T_left);
                    }
                }

                if (exhausted) {
                    res.status = SampleStatus::budget_exhausted;
                    done = true;
                } else if (accepted) {
                    res.value.resize(d);
                    for (std::size_t i = 0; i < d; ++i) {
                        const double z = out.Ydelta_Tleft[i] + zt[i];
                        if (z < -1e-9)
                            throw std::logic_error(
                                "sampler: accepted value violates nonnegativity");
                        res.value[i] = sqrt_c * z;
                    }
                    res.status = SampleStatus::accepted;
                    done = true;
                }
            }
        }
    } catch (const BudgetExhausted&) {
        res.status = SampleStatus::budget_exhausted;
    }

    res.max_level_reached = deepest_level(out.sets);
    if (info) {
        info->N = out.N;
        info->T_left = out.T_left;
        info->T_right = out.T_right;
        info->delta = out.delta;
        info->refinement_rounds = rounds;
        info->bands = out.bands;
        info->Ydelta_Tleft = out.Ydelta_Tleft;
        info->guard_violations = 0;
        for (const LayerSet& set : out.sets) info->guard_violations += set.guard_violations();
    }
    return res;
}

} // namespace rbmx
