#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

// Domain parameter types, microinsurance scheme definitions, and a Monte
// Carlo simulator of the piecewise-deterministic capital process. The
// simulator is the independent oracle against which every closed form in
// analytics/barrier/welfare is validated.

namespace captrap::model {

struct invalid_initial_capital_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Uninsured-world parameters.
struct ModelParams {
    double r = 0.5;       // capital growth rate per unit time
    double lambda = 1.0;  // Poisson loss intensity per unit time
    double alpha = 1.0;   // inverse mean of the exponential loss size
    double x_star = 1.0;  // poverty line (critical capital)

    double mean_loss() const { return 1.0 / alpha; }

    void validate() const {
        if (!(r > 0.0 && lambda > 0.0 && alpha > 0.0 && x_star > 0.0))
            throw std::invalid_argument("ModelParams: all fields must be positive");
    }
};

/// Expected-value-principle premium rate (1+theta)(1-kappa) lambda E[Z].
inline double premium_rate(const ModelParams& p, double kappa, double theta) {
    if (kappa < 0.0 || kappa > 1.0)
        throw std::invalid_argument("premium_rate: kappa outside [0,1]");
    if (theta < -1.0) throw std::invalid_argument("premium_rate: theta < -1");
    return (1.0 + theta) * (1.0 - kappa) * p.lambda * p.mean_loss();
}

enum class SchemeKind { Uninsured, Insured, SubsidisedInsured, BarrierSubsidised };

inline const char* to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::Uninsured: return "uninsured";
        case SchemeKind::Insured: return "insured";
        case SchemeKind::SubsidisedInsured: return "subsidised";
        case SchemeKind::BarrierSubsidised: return "barrier";
    }
    return "?";
}

/// A microinsurance scheme. The insured growth rate r_ins and critical
/// capital x_star_ins are explicit fields: the convenience constructors
/// fill them with the drift-absorption default (premium paid continuously
/// out of income, r_ins = r and x_star_ins = x* + pi/r), but any mapping
/// can be supplied by assigning the fields directly.
struct SchemeSpec {
    SchemeKind kind = SchemeKind::Uninsured;
    double kappa = 1.0;       // retained-loss proportion
    double theta = 0.0;       // market loading factor
    double theta_star = 0.0;  // subsidised loading (SubsidisedInsured only)
    double barrier = 0.0;     // capital barrier B (BarrierSubsidised only)
    double r_ins = 0.0;       // insured growth rate r^(kappa)
    double x_star_ins = 0.0;  // insured critical capital
    std::string label;

    static SchemeSpec uninsured(const ModelParams& p) {
        SchemeSpec s;
        s.kind = SchemeKind::Uninsured;
        s.kappa = 1.0;
        s.r_ins = p.r;
        s.x_star_ins = p.x_star;
        s.label = "uninsured";
        return s;
    }

    static SchemeSpec insured(const ModelParams& p, double kappa, double theta) {
        SchemeSpec s;
        s.kind = SchemeKind::Insured;
        s.kappa = kappa;
        s.theta = theta;
        s.r_ins = p.r;
        s.x_star_ins = p.x_star + premium_rate(p, kappa, theta) / p.r;
        s.label = "insured";
        return s;
    }

    static SchemeSpec subsidised(const ModelParams& p, double kappa, double theta,
                                 double theta_star) {
        // the household faces the reduced premium pi(kappa, theta_star)
        SchemeSpec s = insured(p, kappa, theta_star);
        s.kind = SchemeKind::SubsidisedInsured;
        s.theta = theta;
        s.theta_star = theta_star;
        s.label = "subsidised";
        return s;
    }

    static SchemeSpec barrier_subsidised([[maybe_unused]] const ModelParams& p,
                                         double kappa, double theta, double barrier,
                                         double r_ins, double x_star_ins) {
        SchemeSpec s;
        s.kind = SchemeKind::BarrierSubsidised;
        s.kappa = kappa;
        s.theta = theta;
        s.barrier = barrier;
        s.r_ins = r_ins;
        s.x_star_ins = x_star_ins;
        s.label = "barrier";
        return s;
    }

    /// Critical capital of the scheme (x*, x^(kappa)* or x^(A)*).
    double critical_capital() const { return x_star_ins; }

    /// Loss scale faced by the household: kappa Z ~ Exp(alpha/kappa).
    double alpha_eff(const ModelParams& p) const {
        return kappa > 0.0 ? p.alpha / kappa : std::numeric_limits<double>::infinity();
    }

    /// Premium the insurer charges for this scheme (market loading).
    double premium(const ModelParams& p) const {
        if (kind == SchemeKind::Uninsured) return 0.0;
        return premium_rate(p, kappa, theta);
    }

    void validate(const ModelParams& p) const {
        if (kappa < 0.0 || kappa > 1.0)
            throw std::invalid_argument("SchemeSpec: kappa outside [0,1]");
        if (theta < 0.0) throw std::invalid_argument("SchemeSpec: theta < 0");
        if (kind == SchemeKind::Uninsured) {
            if (kappa != 1.0 || r_ins != p.r || x_star_ins != p.x_star)
                throw std::invalid_argument(
                    "SchemeSpec: uninsured must have kappa=1, r_ins=r, x_star_ins=x*");
            return;
        }
        if (!(r_ins > 0.0 && r_ins <= p.r))
            throw std::invalid_argument("SchemeSpec: requires 0 < r_ins <= r");
        if (x_star_ins < p.x_star)
            throw std::invalid_argument("SchemeSpec: x_star_ins below x*");
        if (kind == SchemeKind::SubsidisedInsured &&
            (theta_star < 0.0 || theta_star > theta))
            throw std::invalid_argument("SchemeSpec: theta_star outside [0, theta]");
        if (kind == SchemeKind::BarrierSubsidised && barrier < x_star_ins)
            throw std::invalid_argument("SchemeSpec: barrier below critical capital");
    }
};

struct SimConfig {
    std::size_t n_paths = 100000;
    double t_max = 200.0;
    std::uint64_t seed = 1;
    std::optional<double> escape_level;  // disabled by default
    unsigned n_threads = 0;              // 0 = hardware concurrency

    void validate() const {
        if (n_paths < 1 || !(t_max > 0.0))
            throw std::invalid_argument("SimConfig: need n_paths >= 1, t_max > 0");
    }
};

struct PathOutcome {
    bool trapped = false;
    double tau = 0.0;                 // defined only when trapped
    double discounted_subsidy = 0.0;  // scheme-dependent present value
    bool truncated = false;           // horizon reached while undecided
};

struct MCEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n_paths = 0;
    double truncated_fraction = 0.0;

    double z_score(double reference) const {
        return (mean - reference) / (std_err > 0.0 ? std_err : 1e-300);
    }
};

/// Counter-based per-path RNG stream keyed by (seed, path_index): the same
/// (seed, index) pair always yields the same draws, so results cannot depend
/// on how paths are distributed over workers.
class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t path_index)
        : state_(mix64(seed + 0x9E3779B97F4A7C15ull * (path_index + 1)) ^
                 mix64(path_index + 0x632BE59BD9B4E019ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // uniform in (0,1], so the log below is always finite
    double uniform() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

namespace detail {

// Deterministic flow between jumps: X(t0+dt) = (X(t0) - xc) e^{rho dt} + xc.
inline double grow(double x, double rho, double xc, double dt) {
    return (x - xc) * std::exp(rho * dt) + xc;
}

// Present value at time 0 of a unit-rate stream over [t0, t0+dt].
inline double annuity_segment(double delta, double t0, double dt) {
    if (delta == 0.0) return dt;
    return (std::exp(-delta * t0) - std::exp(-delta * (t0 + dt))) / delta;
}

}  // namespace detail

/// Simulates one path of the capital process under the given scheme.
///
/// Between jumps the capital follows the exponential flow around the
/// scheme's critical capital; for the barrier scheme the growth rate is r
/// below B and r_ins above B, with the crossing time computed in closed
/// form. At Poisson(lambda) jump times the capital drops by the retained
/// loss kappa Z, Z ~ Exp(alpha). The path ends trapped as soon as capital
/// falls below the critical capital, or truncated at t_max.
///
/// subsidy_rate is the government outlay rate: for SubsidisedInsured the
/// discounted subsidy is rate * annuity to tau (perpetuity value on
/// survival, the horizon tail added analytically); for BarrierSubsidised
/// the rate accrues only while the capital is below B.
inline PathOutcome simulate_path(const ModelParams& p, const SchemeSpec& s, double x0,
                                 double delta, double subsidy_rate,
                                 const SimConfig& cfg, PathRng& rng) {
    const double xc = s.critical_capital();
    if (x0 < xc)
        throw invalid_initial_capital_error("simulate_path: x0 below critical capital");
    if (delta < 0.0) throw std::invalid_argument("simulate_path: delta < 0");

    const bool is_barrier = s.kind == SchemeKind::BarrierSubsidised;
    const bool accrue_constant = s.kind == SchemeKind::SubsidisedInsured;
    if ((is_barrier || accrue_constant) && subsidy_rate != 0.0 && delta <= 0.0)
        throw std::invalid_argument("simulate_path: subsidy accrual needs delta > 0");

    PathOutcome out;
    double x = x0;
    double t = 0.0;
    while (true) {
        const double dt = rng.exponential(p.lambda);
        const double t_jump = t + dt;
        const double horizon_dt = std::min(dt, cfg.t_max - t);

        if (is_barrier) {
            // advance piecewise across the barrier, accruing subsidy below B
            double seg_t = t;
            double remaining = horizon_dt;
            if (x < s.barrier) {
                double t_cross = std::numeric_limits<double>::infinity();
                if (x > xc) t_cross = std::log((s.barrier - xc) / (x - xc)) / p.r;
                const double below_dt = std::min(remaining, t_cross);
                out.discounted_subsidy +=
                    subsidy_rate * detail::annuity_segment(delta, seg_t, below_dt);
                x = detail::grow(x, p.r, xc, below_dt);
                seg_t += below_dt;
                remaining -= below_dt;
                if (remaining > 0.0) x = s.barrier;
            }
            if (remaining > 0.0) x = detail::grow(x, s.r_ins, xc, remaining);
        } else {
            const double rho = s.kind == SchemeKind::Uninsured ? p.r : s.r_ins;
            x = detail::grow(x, rho, xc, horizon_dt);
        }

        if (t_jump > cfg.t_max) {
            out.truncated = true;
            break;
        }
        t = t_jump;

        const double retained = s.kappa * rng.exponential(p.alpha);
        x -= retained;
        if (x < xc) {
            out.trapped = true;
            out.tau = t;
            break;
        }
        if (cfg.escape_level && x >= *cfg.escape_level) break;  // declared safe
    }

    if (accrue_constant && subsidy_rate != 0.0) {
        // full perpetuity on survival: accrued value through t_max plus the
        // analytic tail (the constant subsidy never stops for the untrapped)
        out.discounted_subsidy =
            out.trapped ? subsidy_rate * (1.0 - std::exp(-delta * out.tau)) / delta
                        : subsidy_rate / delta;
    }
    return out;
}

namespace detail {

// Runs one simulation per path index, parallel over strided index sets.
// Every path writes only its own slots and the reduction is sequential, so
// the estimate is bit-identical for any worker count.
template <class ValueFn>
MCEstimate run_estimate(const ModelParams& p, const SchemeSpec& s, double x0,
                        double delta, double subsidy_rate, const SimConfig& cfg,
                        ValueFn value_of, bool binomial) {
    p.validate();
    s.validate(p);
    cfg.validate();
    if (cfg.escape_level && !(*cfg.escape_level > p.x_star))
        throw std::invalid_argument("SimConfig: escape_level must exceed x*");

    std::vector<double> values(cfg.n_paths);
    std::vector<std::uint8_t> truncated(cfg.n_paths, 0);
    unsigned workers =
        cfg.n_threads ? cfg.n_threads : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, 64));

    auto body = [&](unsigned w) {
        for (std::size_t i = w; i < cfg.n_paths; i += workers) {
            PathRng rng(cfg.seed, i);
            const PathOutcome o = simulate_path(p, s, x0, delta, subsidy_rate, cfg, rng);
            values[i] = value_of(o);
            truncated[i] = o.truncated ? 1 : 0;
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& th : pool) th.join();
    }

    const double n = static_cast<double>(cfg.n_paths);
    double sum = 0.0;
    std::size_t n_trunc = 0;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        sum += values[i];
        n_trunc += truncated[i];
    }
    MCEstimate est;
    est.mean = sum / n;
    est.n_paths = cfg.n_paths;
    est.truncated_fraction = static_cast<double>(n_trunc) / n;
    if (binomial) {
        est.std_err = std::sqrt(std::max(est.mean * (1.0 - est.mean), 0.0) / n);
    } else {
        double ss = 0.0;
        for (double v : values) ss += (v - est.mean) * (v - est.mean);
        const double var = cfg.n_paths > 1 ? ss / (n - 1.0) : 0.0;
        est.std_err = std::sqrt(var / n);
    }
    return est;
}

}  // namespace detail

/// Trapped-path fraction with binomial standard error. Truncated paths count
/// as survivors (downward-biased; the bias shrinks with t_max and is made
/// visible through truncated_fraction).
inline MCEstimate estimate_trapping_probability(const ModelParams& p,
                                                const SchemeSpec& s, double x0,
                                                const SimConfig& cfg) {
    return detail::run_estimate(
        p, s, x0, 0.0, 0.0, cfg, [](const PathOutcome& o) { return o.trapped ? 1.0 : 0.0; },
        /*binomial=*/true);
}

/// Mean of e^{-delta tau} over trapped paths (zero contribution from
/// surviving or truncated paths); truncation bias is bounded by
/// e^{-delta t_max}.
inline MCEstimate estimate_laplace(const ModelParams& p, const SchemeSpec& s, double x0,
                                   double delta, const SimConfig& cfg) {
    if (!(delta > 0.0)) throw std::invalid_argument("estimate_laplace: delta must be > 0");
    return detail::run_estimate(
        p, s, x0, delta, 0.0, cfg,
        [delta](const PathOutcome& o) {
            return o.trapped ? std::exp(-delta * o.tau) : 0.0;
        },
        /*binomial=*/false);
}

/// Mean of tau 1{trapped} over all paths: the defective expectation the
/// closed form computes. Truncation bias is reported, not corrected.
inline MCEstimate estimate_expected_trapping_time(const ModelParams& p,
                                                  const SchemeSpec& s, double x0,
                                                  const SimConfig& cfg) {
    return detail::run_estimate(
        p, s, x0, 0.0, 0.0, cfg,
        [](const PathOutcome& o) { return o.trapped ? o.tau : 0.0; },
        /*binomial=*/false);
}

/// Mean of the path-wise discounted subsidy integral. subsidy_rate is the
/// outlay rate: beta (or its dimensional variant) for SubsidisedInsured,
/// the premium pi for BarrierSubsidised.
inline MCEstimate estimate_subsidy_value(const ModelParams& p, const SchemeSpec& s,
                                         double x0, double delta, double subsidy_rate,
                                         const SimConfig& cfg) {
    if (s.kind != SchemeKind::SubsidisedInsured &&
        s.kind != SchemeKind::BarrierSubsidised)
        throw std::invalid_argument("estimate_subsidy_value: scheme pays no subsidy");
    if (!(delta > 0.0))
        throw std::invalid_argument("estimate_subsidy_value: delta must be > 0");
    return detail::run_estimate(
        p, s, x0, delta, subsidy_rate, cfg,
        [](const PathOutcome& o) { return o.discounted_subsidy; },
        /*binomial=*/false);
}

}  // namespace captrap::model
