#pragma once

#include <cmath>
#include <stdexcept>

#include "captrap/analytics.hpp"

// Closed forms for the barrier-subsidised scheme: the two-regime Laplace
// transform with its continuity-matched constants, and the trapping
// probability. The companion subsidy present value lives in welfare.hpp and
// shares the matching machinery exposed here.

namespace captrap::barrier {

using model::ModelParams;
using model::SchemeKind;
using model::SchemeSpec;

struct singular_matching_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Coefficients of the matched two-regime transform. Below B the solution
/// basis is {S(x), e^{y}U(a_r,c_r;-y)}, where
///   S(x) = w^{1-c_r} M(lambda/r, 2-c_r; -w),  w = -y(x),
/// the second Frobenius solution at the critical capital. The textbook pair
/// {M(-delta/r,c_r;y), e^{y}U(a_r,c_r;-y)} degenerates whenever lambda/r is
/// a positive integer (U(-n,c;z) is proportional to M(-n,c;z)), which
/// includes the reference figure parameters; S stays independent of U for
/// every admissible parameter set. c1 multiplies S, c2 multiplies e^{y}U
/// below B, c4 multiplies e^{y}U above B, c3 = 0 by boundedness.
struct BarrierConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double d_term = 0.0;
    double k_term = 0.0;
};

namespace detail {

// Shared ingredients of the pasting system at x = B. The drift of the
// process jumps at B (r below, r_k above), so the IDE forces continuity of
// the flux r(x) (x - xc) m'(x) rather than of m' itself: the matching
// conditions are m(B-) = m(B+) and r m'(B-) = r_k m'(B+).
struct Matching {
    double lambda, delta, r, r_k, alpha_k, xc, neg_yB, ey_B;
    double a_r, c_r, a_k, c_k;
    double s_B, sp_B;    // singular solution S and dS/dw at w = -y(B)
    double du_r, du_k;   // d/dw of e^{-w} U(a,c;w) at w = -y(B), each regime
    double u0_r, ub_r, ub_k, u2b_k, u2b_r;
    double d_term, k_term;

    // S(w) = w^{1-c_r} M(lambda/r, 2-c_r; -w) and its w-derivative.
    double s_of(double w, const specfun::SeriesPolicy& pol) const {
        if (w == 0.0) return 0.0;  // 1 - c_r > 0 always
        return std::pow(w, 1.0 - c_r) * specfun::kummer_m(lambda / r, 2.0 - c_r, -w, pol);
    }
    double sp_of(double w, const specfun::SeriesPolicy& pol) const {
        const double q = lambda / r;
        return (1.0 - c_r) * std::pow(w, -c_r) * specfun::kummer_m(q, 2.0 - c_r, -w, pol) -
               std::pow(w, 1.0 - c_r) * q / (2.0 - c_r) *
                   specfun::kummer_m(q + 1.0, 3.0 - c_r, -w, pol);
    }
};

inline Matching matching_at_barrier(const ModelParams& p, const SchemeSpec& s,
                                    double delta, const specfun::SeriesPolicy& pol) {
    if (s.kind != SchemeKind::BarrierSubsidised)
        throw std::invalid_argument("barrier: scheme is not BarrierSubsidised");
    if (!(delta > 0.0)) throw std::invalid_argument("barrier: requires delta > 0");
    p.validate();
    s.validate(p);

    Matching m;
    m.lambda = p.lambda;
    m.delta = delta;
    m.r = p.r;
    m.r_k = s.r_ins;
    m.alpha_k = s.alpha_eff(p);
    m.xc = s.critical_capital();
    m.neg_yB = m.alpha_k * (s.barrier - m.xc);
    m.ey_B = std::exp(-m.neg_yB);
    m.a_r = 1.0 - m.lambda / m.r;
    m.c_r = 1.0 - (m.lambda + delta) / m.r;
    m.a_k = 1.0 - m.lambda / m.r_k;
    m.c_k = 1.0 - (m.lambda + delta) / m.r_k;

    m.s_B = m.s_of(m.neg_yB, pol);
    m.sp_B = m.sp_of(m.neg_yB, pol);
    m.u0_r = specfun::tricomi_u(m.a_r, m.c_r, 0.0, pol);
    m.ub_r = specfun::tricomi_u(m.a_r, m.c_r, m.neg_yB, pol);
    m.ub_k = specfun::tricomi_u(m.a_k, m.c_k, m.neg_yB, pol);
    m.u2b_k = specfun::tricomi_u(m.a_k + 1.0, m.c_k + 1.0, m.neg_yB, pol);
    m.u2b_r = specfun::tricomi_u(m.a_r + 1.0, m.c_r + 1.0, m.neg_yB, pol);
    m.du_r = m.ey_B * (-m.ub_r - m.a_r * m.u2b_r);
    m.du_k = m.ey_B * (-m.ub_k - m.a_k * m.u2b_k);

    m.d_term = m.alpha_k * (m.lambda / m.r_k - 1.0) * m.u2b_k / m.ub_k;
    // K = r S'(wB) - T S(wB), T = r_k [e^{-w}U_k]'(wB) / e^{-wB}U_k(wB)
    const double t_k = m.r_k * m.du_k / (m.ey_B * m.ub_k);
    const double t1 = m.r * m.sp_B;
    const double t2 = -t_k * m.s_B;
    m.k_term = t1 + t2;
    if (std::abs(m.k_term) <= 1e-12 * std::max(std::abs(t1), std::abs(t2)))
        throw singular_matching_error("barrier: matching system is singular (K ~ 0)");
    return m;
}

// Flux-coupling scalar T = r_k [e^{-w}U_k]'(wB) / (e^{-wB} U_k(wB)).
inline double coupling_t(const Matching& m) {
    return m.r_k * m.du_k / (m.ey_B * m.ub_k);
}

}  // namespace detail

/// Matched constants of the two-regime Laplace transform. The boundary value
/// at the critical capital pins c2 = lambda/((lambda+delta) U(a_r,c_r;0));
/// the pasting conditions at B then determine c1 and c4.
inline BarrierConstants barrier_constants(const ModelParams& p, const SchemeSpec& s,
                                          double delta,
                                          const specfun::SeriesPolicy& pol = {}) {
    const auto m = detail::matching_at_barrier(p, s, delta, pol);
    const double level = m.lambda / (m.lambda + m.delta);
    const double t_k = detail::coupling_t(m);
    BarrierConstants k;
    k.d_term = m.d_term;
    k.k_term = m.k_term;
    k.c2 = level / m.u0_r;  // boundary value at the critical capital
    k.c1 = k.c2 * (t_k * m.ey_B * m.ub_r - m.r * m.du_r) / m.k_term;
    k.c4 = (k.c1 * m.s_B + k.c2 * m.ey_B * m.ub_r) / (m.ey_B * m.ub_k);
    return k;
}

namespace detail {

inline bool barrier_at_critical(const SchemeSpec& s) {
    return s.barrier - s.critical_capital() <=
           1e-9 * std::max(1.0, s.critical_capital());
}

inline SchemeSpec as_insured(const SchemeSpec& s) {
    SchemeSpec ins = s;
    ins.kind = SchemeKind::Insured;
    ins.barrier = 0.0;
    ins.label = s.label;
    return ins;
}

}  // namespace detail

inline double barrier_trapping_probability(const ModelParams& p, const SchemeSpec& s,
                                           double x,
                                           const specfun::SeriesPolicy& pol = {});

/// Laplace transform of the trapping time under the barrier scheme,
/// piecewise below/above B with the matched constants. delta = 0 dispatches
/// to the closed-form trapping probability.

inline double barrier_laplace(const ModelParams& p, const SchemeSpec& s, double x,
                              double delta, const specfun::SeriesPolicy& pol = {}) {
    if (delta == 0.0) return barrier_trapping_probability(p, s, x, pol);
    if (x < s.critical_capital()) return 1.0;
    if (detail::barrier_at_critical(s)) {
        // degenerate matching; the household pays the premium everywhere
        return analytics::laplace_trapping(
            {p, detail::as_insured(s), x, delta, pol});
    }
    const auto m = detail::matching_at_barrier(p, s, delta, pol);
    const auto k = barrier_constants(p, s, delta, pol);
    const double neg_y = m.alpha_k * (x - m.xc);
    double v;
    if (x <= s.barrier) {
        v = k.c1 * m.s_of(neg_y, pol) +
            k.c2 * std::exp(-neg_y) * specfun::tricomi_u(m.a_r, m.c_r, neg_y, pol);
    } else {
        v = k.c4 * std::exp(-neg_y) * specfun::tricomi_u(m.a_k, m.c_k, neg_y, pol);
    }
    return std::clamp(v, 0.0, 1.0);
}

/// Trapping probability for the barrier scheme: the two-branch incomplete
/// gamma expression with weight (r/r_k) (-y(B))^{lambda(1/r - 1/r_k)},
/// computed in log space so B near the critical capital cannot overflow.
/// The r/r_k factor comes from the flux pasting at B (the drift jumps
/// there); it is what the Monte Carlo law of the process requires, and it
/// cancels in both the B -> critical and B -> infinity limits.
inline double barrier_trapping_probability(const ModelParams& p, const SchemeSpec& s,
                                           double x, const specfun::SeriesPolicy& pol) {
    if (s.kind != SchemeKind::BarrierSubsidised)
        throw std::invalid_argument("barrier: scheme is not BarrierSubsidised");
    p.validate();
    s.validate(p);
    const double xc = s.critical_capital();
    if (x <= xc) return 1.0;
    if (s.kappa == 0.0) return 0.0;
    if (detail::barrier_at_critical(s)) {
        return analytics::trapping_probability({p, detail::as_insured(s), x, 0.0, pol});
    }
    const double alpha_k = s.alpha_eff(p);
    const double a_r = p.lambda / p.r;
    const double a_k = p.lambda / s.r_ins;
    const double neg_yB = alpha_k * (s.barrier - xc);
    const double neg_yx = alpha_k * (x - xc);

    const double gamma_r = std::tgamma(a_r);
    const double gamma_k = std::tgamma(a_k);
    // Gamma(a_r) - Gamma(a_r; z) = Gamma(a_r) P(a_r, z)
    const double lower_r_B =
        gamma_r * (1.0 - specfun::upper_gamma_regularized(a_r, neg_yB, pol));
    const double upper_k_B = gamma_k * specfun::upper_gamma_regularized(a_k, neg_yB, pol);

    const double log_w = p.lambda * (1.0 / p.r - 1.0 / s.r_ins) * std::log(neg_yB) +
                         std::log(p.r / s.r_ins);
    double value;
    if (log_w >= 0.0) {
        // divide numerator and denominator by w
        const double scale = std::exp(-log_w);
        const double denom = upper_k_B + scale * lower_r_B;
        if (x <= s.barrier) {
            const double lower_r_x =
                gamma_r * (1.0 - specfun::upper_gamma_regularized(a_r, neg_yx, pol));
            value = 1.0 - scale * lower_r_x / denom;
        } else {
            value = gamma_k * specfun::upper_gamma_regularized(a_k, neg_yx, pol) / denom;
        }
    } else {
        const double w = std::exp(log_w);
        const double denom = w * upper_k_B + lower_r_B;
        if (x <= s.barrier) {
            const double lower_r_x =
                gamma_r * (1.0 - specfun::upper_gamma_regularized(a_r, neg_yx, pol));
            value = 1.0 - lower_r_x / denom;
        } else {
            value =
                w * gamma_k * specfun::upper_gamma_regularized(a_k, neg_yx, pol) / denom;
        }
    }
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace captrap::barrier
