#pragma once

#include <cmath>
#include <stdexcept>

#include "captrap/barrier.hpp"

// Premium principle, government subsidy present values V(x) and V^(A)(x),
// and the cost-of-social-protection functional.

namespace captrap::welfare {

using model::ModelParams;
using model::SchemeKind;
using model::SchemeSpec;

/// How the constant-subsidy outlay rate is read off the loading gap.
/// LoadingGap takes the rate to be the bare gap beta = theta - theta*;
/// PremiumScaled multiplies by the premium volume (1-kappa) lambda E[Z] so
/// the rate has currency-per-time units consistent with the premium.
enum class SubsidyRateMode { LoadingGap, PremiumScaled };

struct WelfareParams {
    double delta = 0.9;   // force of interest for valuation
    double m_cost = 8.0;  // cost of lifting a trapped household out
    SubsidyRateMode subsidy_rate_mode = SubsidyRateMode::LoadingGap;

    void validate() const {
        if (!(delta > 0.0) || !(m_cost > 0.0))
            throw std::invalid_argument("WelfareParams: need delta > 0, m_cost > 0");
    }
};

/// Expected-value-principle premium rate pi(kappa, theta).
inline double premium(const ModelParams& p, double kappa, double theta) {
    return model::premium_rate(p, kappa, theta);
}

/// Government outlay rate for a SubsidisedInsured scheme under the mode.
inline double subsidy_rate(const ModelParams& p, const SchemeSpec& s,
                           const WelfareParams& w) {
    if (s.kind != SchemeKind::SubsidisedInsured) return 0.0;
    const double beta = s.theta - s.theta_star;
    if (w.subsidy_rate_mode == SubsidyRateMode::LoadingGap) return beta;
    return beta * (1.0 - s.kappa) * p.lambda * p.mean_loss();
}

/// Present value of the constant premium subsidy:
/// V(x) = rate/delta [1 - m_delta(x)] with the subsidised scheme's
/// (r^(kappa,theta*), x^(kappa,theta*)*).
inline double subsidy_value_constant(const ModelParams& p, const SchemeSpec& s,
                                     double x, const WelfareParams& w,
                                     const specfun::SeriesPolicy& pol = {}) {
    if (s.kind != SchemeKind::SubsidisedInsured)
        throw std::invalid_argument("subsidy_value_constant: wrong scheme kind");
    w.validate();
    const double rate = subsidy_rate(p, s, w);
    if (rate == 0.0) return 0.0;
    const double m = analytics::laplace_trapping({p, s, x, w.delta, pol});
    return rate / w.delta * (1.0 - m);
}

/// Present value of the barrier-scheme subsidy: the full premium pi is paid
/// by the government while the capital is below B. Matched like the
/// transform, except the pi-inhomogeneity below B shifts the flux condition:
/// r_k (B-xc) V'(B+) = r (B-xc) V'(B-) + pi.
inline double subsidy_value_barrier(const ModelParams& p, const SchemeSpec& s,
                                    double x, const WelfareParams& w,
                                    const specfun::SeriesPolicy& pol = {}) {
    if (s.kind != SchemeKind::BarrierSubsidised)
        throw std::invalid_argument("subsidy_value_barrier: wrong scheme kind");
    w.validate();
    p.validate();
    s.validate(p);
    const double xc = s.critical_capital();
    const double pi = s.premium(p);
    const double delta = w.delta;
    if (x < xc) return 0.0;  // already trapped, no further subsidies
    if (barrier::detail::barrier_at_critical(s)) {
        // the subsidy region has vanished; the boundary point keeps the
        // first-jump payout convention of the B -> xc limit
        return x <= xc ? pi / (p.lambda + delta) : 0.0;
    }
    if (x == xc) return pi / (p.lambda + delta);

    const auto m = barrier::detail::matching_at_barrier(p, s, delta, pol);
    const double t_k = barrier::detail::coupling_t(m);
    const double r2 = -p.lambda * pi / ((p.lambda + delta) * delta * m.u0_r);
    const double r1 = (r2 * (t_k * m.ey_B * m.ub_r - m.r * m.du_r) + t_k * pi / delta -
                       pi / m.neg_yB) /
                      m.k_term;
    const double w_x = m.alpha_k * (x - xc);
    double v;
    if (x <= s.barrier) {
        v = r1 * m.s_of(w_x, pol) +
            r2 * std::exp(-w_x) * specfun::tricomi_u(m.a_r, m.c_r, w_x, pol) +
            pi / delta;
    } else {
        const double r4 =
            (r1 * m.s_B + r2 * m.ey_B * m.ub_r + pi / delta) / (m.ey_B * m.ub_k);
        v = r4 * std::exp(-w_x) * specfun::tricomi_u(m.a_k, m.c_k, w_x, pol);
    }
    return std::clamp(v, 0.0, pi / delta);
}

/// Trapping probability of the scheme, dispatching to the right module.
inline double scheme_trapping_probability(const ModelParams& p, const SchemeSpec& s,
                                          double x,
                                          const specfun::SeriesPolicy& pol = {}) {
    if (s.kind == SchemeKind::BarrierSubsidised)
        return barrier::barrier_trapping_probability(p, s, x, pol);
    return analytics::trapping_probability({p, s, x, 0.0, pol});
}

/// Cost of social protection V(x) + M psi(x); V = 0 for the uninsured and
/// plain insured schemes (no subsidy flows).
inline double cost_of_social_protection(const ModelParams& p, const SchemeSpec& s,
                                        double x, const WelfareParams& w,
                                        const specfun::SeriesPolicy& pol = {}) {
    w.validate();
    double v = 0.0;
    switch (s.kind) {
        case SchemeKind::Uninsured:
        case SchemeKind::Insured: v = 0.0; break;
        case SchemeKind::SubsidisedInsured:
            v = subsidy_value_constant(p, s, x, w, pol);
            break;
        case SchemeKind::BarrierSubsidised:
            v = subsidy_value_barrier(p, s, x, w, pol);
            break;
    }
    return v + w.m_cost * scheme_trapping_probability(p, s, x, pol);
}

}  // namespace captrap::welfare
