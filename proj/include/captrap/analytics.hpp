#pragma once

#include <cmath>
#include <stdexcept>

#include "captrap/model.hpp"
#include "captrap/specfun.hpp"

// Closed-form trapping probability, Laplace transform of the trapping time,
// and expected trapping time for the uninsured and proportionally insured
// capital processes. The barrier scheme has its own closed forms in
// barrier.hpp.

namespace captrap::analytics {

using model::ModelParams;
using model::SchemeKind;
using model::SchemeSpec;

struct TrappingQuery {
    ModelParams params;
    SchemeSpec scheme;
    double x = 0.0;      // initial capital
    double delta = 0.0;  // force of interest
    specfun::SeriesPolicy policy{};
};

namespace detail {

// Scheme-effective growth rate, loss scale was already folded into the
// substitution y(x) = -alpha_eff (x - critical); we carry -y(x) >= 0.
struct Frame {
    double rho;
    double xc;
    double alpha_eff;
    double neg_y;  // -y(x) = alpha_eff (x - xc)
};

inline Frame frame_for(const ModelParams& p, const SchemeSpec& s, double x) {
    if (s.kind == SchemeKind::BarrierSubsidised)
        throw std::invalid_argument(
            "analytics: barrier scheme is handled by the barrier module");
    Frame f;
    f.rho = s.kind == SchemeKind::Uninsured ? p.r : s.r_ins;
    f.xc = s.critical_capital();
    f.alpha_eff = s.alpha_eff(p);
    f.neg_y = f.alpha_eff * (x - f.xc);
    return f;
}

}  // namespace detail

/// Infinite-time trapping probability, evaluated through the regularized
/// upper incomplete gamma ratio (never through U; the U route exists as
/// trapping_probability_via_u for cross-validation only).
/// Below the critical capital the household is already trapped: value 1.
inline double trapping_probability(const TrappingQuery& q) {
    q.params.validate();
    q.scheme.validate(q.params);
    const double xc = q.scheme.critical_capital();
    if (q.x <= xc) return 1.0;
    if (q.scheme.kappa == 0.0) return 0.0;  // full coverage, trapping impossible
    const auto f = detail::frame_for(q.params, q.scheme, q.x);
    return specfun::upper_gamma_regularized(q.params.lambda / f.rho, f.neg_y, q.policy);
}

/// delta -> 0 limit of the Laplace transform through the U route, kept as an
/// independent check of the incomplete-gamma simplification. Exercises the
/// integer-c limit path whenever lambda/rho is an integer.
inline double trapping_probability_via_u(const TrappingQuery& q) {
    q.params.validate();
    q.scheme.validate(q.params);
    const double xc = q.scheme.critical_capital();
    if (q.x <= xc) return 1.0;
    if (q.scheme.kappa == 0.0) return 0.0;
    const auto f = detail::frame_for(q.params, q.scheme, q.x);
    const double a = 1.0 - q.params.lambda / f.rho;
    const double u0 = specfun::tricomi_u(a, a, 0.0, q.policy);
    const double uy = specfun::tricomi_u(a, a, f.neg_y, q.policy);
    return std::exp(-f.neg_y) * uy / u0;
}

/// Laplace transform of the trapping time,
///   m_delta(x) = lambda/((lambda+delta) U(a,c;0)) e^{y} U(a,c;-y),
/// a = 1 - lambda/rho, c = 1 - (lambda+delta)/rho. delta = 0 dispatches to
/// the trapping probability (its zero-interest limit).
inline double laplace_trapping(const TrappingQuery& q) {
    if (q.delta < 0.0) throw std::invalid_argument("laplace_trapping: delta < 0");
    if (q.delta == 0.0) return trapping_probability(q);
    q.params.validate();
    q.scheme.validate(q.params);
    const double xc = q.scheme.critical_capital();
    if (q.x < xc) return 1.0;  // already trapped, unit payment now
    const double lambda = q.params.lambda;
    const double boundary = lambda / (lambda + q.delta);
    if (q.scheme.kappa == 0.0) return q.x > xc ? 0.0 : boundary;
    const auto f = detail::frame_for(q.params, q.scheme, q.x);
    const double a = 1.0 - lambda / f.rho;
    const double c = 1.0 - (lambda + q.delta) / f.rho;
    const double u0 = specfun::tricomi_u(a, c, 0.0, q.policy);
    const double uy = specfun::tricomi_u(a, c, f.neg_y, q.policy);
    const double m = boundary * std::exp(-f.neg_y) * uy / u0;
    return std::clamp(m, 0.0, 1.0);
}

/// Expected trapping time E[tau 1{tau < inf}]:
///   Gamma(l/rho;-y)/(lambda U0) - Gamma(l/rho;-y) U^(c)(0)/(rho U0^2)
///   + e^y U^(c)(-y)/(rho U0),
/// with U0 = U(1-l/rho, 1-l/rho; 0) and U^(c) the derivative of U in its
/// second parameter at the same point. Requires lambda/rho away from the
/// integers (integer_c_error otherwise; callers may perturb rho).
inline double expected_trapping_time(const TrappingQuery& q) {
    q.params.validate();
    q.scheme.validate(q.params);
    const double xc = q.scheme.critical_capital();
    if (q.x < xc) return 0.0;  // tau = 0
    if (q.scheme.kappa == 0.0) return 0.0;
    const auto f = detail::frame_for(q.params, q.scheme, q.x);
    const double lambda = q.params.lambda;
    const double a = 1.0 - lambda / f.rho;
    const double big_g = specfun::upper_inc_gamma(lambda / f.rho, f.neg_y, q.policy);
    const double u0 = specfun::tricomi_u(a, a, 0.0, q.policy);
    const double uc0 = specfun::tricomi_u_dc(a, a, 0.0, q.policy);
    const double ucy = specfun::tricomi_u_dc(a, a, f.neg_y, q.policy);
    return big_g / (lambda * u0) - big_g * uc0 / (f.rho * u0 * u0) +
           std::exp(-f.neg_y) * ucy / (f.rho * u0);
}

}  // namespace captrap::analytics
