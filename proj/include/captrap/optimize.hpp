#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "captrap/welfare.hpp"

// Root-finding for the optimal subsidised loading theta*(x) and the optimal
// barrier B*(x), plus the grid-sweep harness behind the CLI commands.

namespace captrap::optimize {

using model::ModelParams;
using model::SchemeKind;
using model::SchemeSpec;

struct bracket_failure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct monotonicity_violation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RootConfig {
    double abs_tol = 1e-10;         // decision-variable tolerance (theta*)
    double barrier_tol_scale = 1e-8;  // B* tolerance is this times x*
    int max_iter = 200;
    double bracket_expansion = 2.0;  // b_max growth factor before giving up

    void validate() const {
        if (!(abs_tol > 0.0) || max_iter < 1)
            throw std::invalid_argument("RootConfig: need abs_tol > 0, max_iter >= 1");
    }
};

enum class Verdict {
    Interior,
    NoSubsidyNeeded,          // F(theta) < 0: household can pay the full loading
    AllSubsidyInsufficient,   // F(0) > 0: even a free loading does not help
    NoBarrierNeeded,          // G(x^(A)*) <= 0: B* is the critical capital
    BarrierInsufficient,      // G(b_max) > 0: no admissible barrier equalises
};

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Interior: return "interior";
        case Verdict::NoSubsidyNeeded: return "no_subsidy_needed";
        case Verdict::AllSubsidyInsufficient: return "all_subsidy_insufficient";
        case Verdict::NoBarrierNeeded: return "no_barrier_needed";
        case Verdict::BarrierInsufficient: return "barrier_insufficient";
    }
    return "?";
}

struct RootResult {
    double value = 0.0;
    Verdict verdict = Verdict::Interior;
    double residual = 0.0;  // |defining equation| at the returned value
    int iterations = 0;
};

namespace detail {

// Bisection on a monotone increasing bracket f(lo) <= 0 <= f(hi).
template <class F>
RootResult bisect(F f, double lo, double hi, double f_lo, double f_hi, double abs_tol,
                  int max_iter) {
    RootResult out;
    while (hi - lo > abs_tol && out.iterations < max_iter) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        ++out.iterations;
    }
    // pick the bracket end with the smaller residual
    if (std::abs(f_lo) <= std::abs(f_hi)) {
        out.value = lo;
        out.residual = std::abs(f_lo);
    } else {
        out.value = hi;
        out.residual = std::abs(f_hi);
    }
    return out;
}

}  // namespace detail

/// Default premium-adjustment mapping for a subsidised scheme at loading t.
inline SchemeSpec subsidised_at_loading(const ModelParams& p, double kappa,
                                        double theta, double t) {
    return SchemeSpec::subsidised(p, kappa, theta, t);
}

/// Solves psi^(kappa,t)(x) = psi(x) for the subsidised loading t in [0,theta].
/// F(t) = psi^(kappa,t)(x) - psi(x) is increasing in t (a higher loading
/// means a higher premium and a higher trapping probability); the mapping
/// from loading to scheme is pluggable and checked for that monotonicity.
inline RootResult optimal_theta(
    const ModelParams& p, double kappa, double theta, double x,
    const RootConfig& cfg = {},
    const std::function<SchemeSpec(double)>& scheme_at =
        std::function<SchemeSpec(double)>()) {
    cfg.validate();
    auto make = scheme_at ? scheme_at : [&](double t) {
        return subsidised_at_loading(p, kappa, theta, t);
    };
    const double psi_ref =
        analytics::trapping_probability({p, SchemeSpec::uninsured(p), x, 0.0, {}});
    auto f = [&](double t) {
        return analytics::trapping_probability({p, make(t), x, 0.0, {}}) - psi_ref;
    };
    double f0, f1;
    try {
        f0 = f(0.0);
        f1 = f(theta);
    } catch (const std::exception& e) {
        throw bracket_failure_error(std::string("optimal_theta: bracket endpoint: ") +
                                    e.what());
    }
    if (f0 > f1 + 1e-12)
        throw monotonicity_violation_error(
            "optimal_theta: F(0) > F(theta); premium mapping is not monotone");
    RootResult out;
    if (f0 > 0.0) {
        out.verdict = Verdict::AllSubsidyInsufficient;
        out.value = 0.0;
        out.residual = f0;
        return out;
    }
    if (f1 < 0.0) {
        out.verdict = Verdict::NoSubsidyNeeded;
        out.value = theta;
        out.residual = -f1;
        return out;
    }
    out = detail::bisect(f, 0.0, theta, f0, f1, cfg.abs_tol, cfg.max_iter);
    out.verdict = Verdict::Interior;
    return out;
}

/// Solves psi^(A,B)(x) = psi(x) for the barrier B in [x^(A)*, b_max].
/// G(B) is decreasing in B (a higher barrier means more subsidy and a lower
/// trapping probability), so -G is fed to the monotone bisection.
inline RootResult optimal_barrier(const ModelParams& p, double kappa, double theta,
                                  double r_ins, double x_star_ins, double x,
                                  double b_max, const RootConfig& cfg = {}) {
    cfg.validate();
    const double psi_ref =
        analytics::trapping_probability({p, SchemeSpec::uninsured(p), x, 0.0, {}});
    auto g = [&](double b) {
        const SchemeSpec s =
            SchemeSpec::barrier_subsidised(p, kappa, theta, b, r_ins, x_star_ins);
        return barrier::barrier_trapping_probability(p, s, x) - psi_ref;
    };
    double g_lo, g_hi;
    try {
        g_lo = g(x_star_ins);
        g_hi = g(b_max);
    } catch (const std::exception& e) {
        throw bracket_failure_error(std::string("optimal_barrier: bracket endpoint: ") +
                                    e.what());
    }
    RootResult out;
    if (g_lo <= 0.0) {
        out.verdict = Verdict::NoBarrierNeeded;
        out.value = x_star_ins;
        out.residual = -g_lo;
        return out;
    }
    int expansions = 0;
    while (g_hi > 0.0 && cfg.bracket_expansion > 1.0 && expansions < 2) {
        b_max = x_star_ins + (b_max - x_star_ins) * cfg.bracket_expansion;
        g_hi = g(b_max);
        ++expansions;
    }
    if (g_hi > 0.0) {
        out.verdict = Verdict::BarrierInsufficient;
        out.value = b_max;
        out.residual = g_hi;
        return out;
    }
    const double tol = cfg.barrier_tol_scale * p.x_star;
    out = detail::bisect([&](double b) { return -g(b); }, x_star_ins, b_max, -g_lo,
                         -g_hi, tol, cfg.max_iter);
    out.verdict = Verdict::Interior;
    return out;
}

/// One sweep cell: a value and an optional tag (optimizer verdicts).
struct CellValue {
    double value = 0.0;
    std::string tag;
};

struct ColumnSpec {
    std::string label;
    std::function<CellValue(double x)> eval;
};

struct SweepError {
    std::string column;
    double x = 0.0;
    std::string kind;
    std::string message;
};

struct SweepColumn {
    std::string label;
    std::vector<std::optional<double>> values;
    std::vector<std::string> tags;
};

/// Rectangular result grid; failed cells stay empty and are logged, never
/// aborting the sweep.
struct SweepTable {
    std::vector<double> x_grid;
    std::vector<SweepColumn> columns;
    std::vector<SweepError> errors;
};

namespace detail {

inline std::string error_kind_of(const std::exception& e) {
    if (dynamic_cast<const specfun::non_convergence_error*>(&e)) return "NonConvergence";
    if (dynamic_cast<const specfun::pole_at_c_error*>(&e)) return "PoleAtC";
    if (dynamic_cast<const specfun::divergent_at_zero_error*>(&e)) return "DivergentAtZero";
    if (dynamic_cast<const specfun::integer_c_error*>(&e)) return "IntegerC";
    if (dynamic_cast<const specfun::divergent_integral_error*>(&e))
        return "DivergentIntegral";
    if (dynamic_cast<const specfun::digamma_pole_error*>(&e))
        return "PoleAtNonPositiveInteger";
    if (dynamic_cast<const model::invalid_initial_capital_error*>(&e))
        return "InvalidInitialCapital";
    if (dynamic_cast<const barrier::singular_matching_error*>(&e))
        return "SingularMatching";
    if (dynamic_cast<const bracket_failure_error*>(&e)) return "BracketFailure";
    if (dynamic_cast<const monotonicity_violation_error*>(&e))
        return "MonotonicityViolation";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
    return "Error";
}

}  // namespace detail

inline SweepTable sweep(const std::vector<double>& x_grid,
                        const std::vector<ColumnSpec>& cols) {
    SweepTable table;
    table.x_grid = x_grid;
    table.columns.reserve(cols.size());
    for (const auto& col : cols) {
        SweepColumn out;
        out.label = col.label;
        out.values.reserve(x_grid.size());
        out.tags.reserve(x_grid.size());
        for (double x : x_grid) {
            try {
                const CellValue cv = col.eval(x);
                out.values.push_back(cv.value);
                out.tags.push_back(cv.tag);
            } catch (const std::exception& e) {
                out.values.push_back(std::nullopt);
                out.tags.emplace_back();
                table.errors.push_back(
                    {col.label, x, detail::error_kind_of(e), e.what()});
            }
        }
        table.columns.push_back(std::move(out));
    }
    return table;
}

}  // namespace captrap::optimize
