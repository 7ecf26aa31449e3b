#include <doctest.h>

#include <cmath>

#include "captrap/barrier.hpp"
#include "test_util.hpp"

using namespace captrap;
using namespace captrap::barrier;

namespace {

ModelParams fig6_params() { return ModelParams{0.5, 1.0, 1.0, 1.0}; }

// Fig-6 style barrier scheme: x^(A)* = 1 with insured rate r/2.
SchemeSpec fig6_scheme(double barrier, const ModelParams& p) {
    return SchemeSpec::barrier_subsidised(p, 0.5, 0.5, barrier, p.r / 2.0, 1.0);
}

double psi_insured(const ModelParams& p, const SchemeSpec& bar, double x) {
    SchemeSpec ins = bar;
    ins.kind = model::SchemeKind::Insured;
    ins.barrier = 0.0;
    return analytics::trapping_probability({p, ins, x, 0.0, {}});
}

}  // namespace

TEST_SUITE("barrier") {

TEST_CASE("boundary values of the transform and probability") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(2.0, p);
    CHECK(barrier_trapping_probability(p, s, 1.0) == 1.0);
    for (double delta : {1.0 / 8.0, 1.0 / 32.0}) {
        CHECK(barrier_laplace(p, s, 1.0, delta) ==
              doctest::Approx(p.lambda / (p.lambda + delta)).epsilon(1e-12));
    }
}

TEST_CASE("value continuity and flux pasting at the barrier") {
    // the drift jumps at B, so the matched solution is continuous with
    // r m'(B-) = r_k m'(B+): the derivative itself has a kink of ratio r/r_k
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(2.0, p);
    const double delta = 1.0 / 8.0;
    const double b = s.barrier;
    const double ratio = p.r / s.r_ins;

    const double left = barrier_laplace(p, s, b - 1e-12, delta);
    const double right = barrier_laplace(p, s, b + 1e-12, delta);
    CHECK(std::abs(left - right) < 1e-8);

    // one-sided second-order derivatives from each side
    const double h = 1e-5;
    auto m = [&](double x) { return barrier_laplace(p, s, x, delta); };
    const double dl = (3.0 * m(b) - 4.0 * m(b - h) + m(b - 2.0 * h)) / (2.0 * h);
    const double dr = (-3.0 * m(b) + 4.0 * m(b + h) - m(b + 2.0 * h)) / (2.0 * h);
    CHECK(std::abs(p.r * dl - s.r_ins * dr) <
          1e-5 * std::max(std::abs(p.r * dl), std::abs(s.r_ins * dr)));
    CHECK(dr / dl == doctest::Approx(ratio).epsilon(1e-4));

    // same for the trapping probability
    auto psi = [&](double x) { return barrier_trapping_probability(p, s, x); };
    CHECK(std::abs(psi(b - 1e-12) - psi(b + 1e-12)) < 1e-8);
    const double pl = (3.0 * psi(b) - 4.0 * psi(b - h) + psi(b - 2.0 * h)) / (2.0 * h);
    const double pr = (-3.0 * psi(b) + 4.0 * psi(b + h) - psi(b + 2.0 * h)) / (2.0 * h);
    CHECK(std::abs(p.r * pl - s.r_ins * pr) <
          1e-5 * std::max(std::abs(p.r * pl), std::abs(s.r_ins * pr)));
}

TEST_CASE("transform limit agrees with the trapping probability") {
    // two independent routes: the delta -> 0 matched transform versus the
    // closed-form incomplete-gamma expression
    const ModelParams p = fig6_params();
    for (double barrier : {1.6, 2.0, 4.0}) {
        const SchemeSpec s = fig6_scheme(barrier, p);
        for (double x : {1.3, 2.0, 3.0, 5.0}) {
            CHECK(barrier_laplace(p, s, x, 1e-8) ==
                  doctest::Approx(barrier_trapping_probability(p, s, x))
                      .epsilon(1e-5));
        }
    }
}

TEST_CASE("identical regimes collapse to the single-regime transform") {
    const ModelParams p = fig6_params();
    // r_ins = r and x^(A)* = x*: both regimes are the uninsured dynamics
    const SchemeSpec s =
        SchemeSpec::barrier_subsidised(p, 1.0, 0.0, 2.5, p.r, p.x_star);
    const double delta = 1.0 / 8.0;
    const auto k = barrier_constants(p, s, delta);
    CHECK(std::abs(k.c1) < 1e-10);
    for (double x : {1.0, 1.7, 2.5, 4.0, 7.0}) {
        const double two_regime = barrier_laplace(p, s, x, delta);
        const double single = analytics::laplace_trapping(
            {p, SchemeSpec::uninsured(p), x, delta, {}});
        CHECK(two_regime == doctest::Approx(single).epsilon(1e-8));
    }
}

TEST_CASE("barrier at the critical capital dispatches to the insured forms") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(1.0 + 1e-10, p);
    for (double x : {1.5, 2.0, 4.0}) {
        CHECK(barrier_trapping_probability(p, s, x) ==
              doctest::Approx(psi_insured(p, s, x)).epsilon(1e-12));
    }
}

TEST_CASE("limits in B recover the insured and uninsured-rate forms") {
    const ModelParams p = fig6_params();
    const double alpha_k = 2.0;
    // B just above the dispatch threshold: the formula itself must reproduce
    // the insured probability
    const SchemeSpec near = fig6_scheme(1.0 + 1e-7, p);
    for (double x : {1.5, 2.0, 3.0, 5.0}) {
        CHECK(std::abs(barrier_trapping_probability(p, near, x) -
                       psi_insured(p, near, x)) < 1e-6);
    }
    // B -> infinity: Gamma(lambda/r; -y^(kappa)(x)) / Gamma(lambda/r)
    const SchemeSpec far = fig6_scheme(1.0 + 60.0 / alpha_k, p);
    for (double x : {1.5, 2.0, 3.0, 5.0}) {
        const double limit = specfun::upper_gamma_regularized(
            p.lambda / p.r, alpha_k * (x - far.x_star_ins));
        CHECK(std::abs(barrier_trapping_probability(p, far, x) - limit) < 1e-6);
    }
}

TEST_CASE("psi^A shape, B-monotonicity and sandwich") {
    const ModelParams p = fig6_params();
    const SchemeSpec s2 = fig6_scheme(2.0, p);
    const SchemeSpec s4 = fig6_scheme(4.0, p);
    double prev = 1.0 + 1e-12;
    for (int i = 0; i <= 60; ++i) {
        const double x = 1.0 + 7.0 * i / 60.0;
        const double v2 = barrier_trapping_probability(p, s2, x);
        const double v4 = barrier_trapping_probability(p, s4, x);
        CHECK(v2 >= 0.0);
        CHECK(v2 <= 1.0);
        CHECK(v2 <= prev + 1e-12);  // decreasing in x
        prev = v2;
        CHECK(v4 <= v2 + 1e-12);  // higher barrier, lower trapping probability
        // sandwich between the two B-limits
        const double hi = psi_insured(p, s2, x);
        const double lo = specfun::upper_gamma_regularized(p.lambda / p.r,
                                                           2.0 * (x - 1.0));
        CHECK(v2 <= hi + 1e-10);
        CHECK(v2 >= lo - 1e-10);
    }
    CHECK(barrier_trapping_probability(p, s2, 30.0) < 1e-6);
}

TEST_CASE("two-regime ODE residuals") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(2.0, p);
    const double delta = 1.0 / 8.0;
    const double alpha_k = 2.0;
    auto m = [&](double x) { return barrier_laplace(p, s, x, delta); };
    const double h = 1e-4;
    for (int i = 0; i < 20; ++i) {
        const double x = 1.05 + 0.2 * i;  // stays clear of B only below/above
        if (std::abs(x - s.barrier) < 3.0 * h) continue;
        const double rho = x < s.barrier ? p.r : s.r_ins;
        const double f0 = m(x), fp = m(x + h), fm = m(x - h);
        const double d1 = (fp - fm) / (2.0 * h);
        const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
        // -(x-xc)/alpha_k m'' + [(lambda+delta-rho)/(alpha_k rho) - (x-xc)] m'
        //   + delta/rho m = 0
        const double t1 = -(x - 1.0) / alpha_k * d2;
        const double t2 =
            ((p.lambda + delta - rho) / (alpha_k * rho) - (x - 1.0)) * d1;
        const double t3 = delta / rho * f0;
        const double residual = t1 + t2 + t3;
        const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
        CHECK(std::abs(residual) < 1e-5 * scale + 1e-10);
    }
}

TEST_CASE("transform matches Monte Carlo at Fig-6 parameters") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(2.0, p);
    const double delta = 1.0 / 32.0;
    model::SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.t_max = 200.0;
    cfg.seed = 606;
    const auto est = model::estimate_laplace(p, s, 3.0, delta, cfg);
    const double closed = barrier_laplace(p, s, 3.0, delta);
    CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_err);
}

TEST_CASE("full coverage makes barrier trapping impossible") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = SchemeSpec::barrier_subsidised(p, 0.0, 0.5, 2.0, 0.25, 1.0);
    CHECK(barrier_trapping_probability(p, s, 1.0) == 1.0);
    CHECK(barrier_trapping_probability(p, s, 1.5) == 0.0);
}

TEST_CASE("trapping probability matches Monte Carlo at Fig-6 parameters") {
    const ModelParams p = fig6_params();
    const SchemeSpec s = fig6_scheme(4.0, p);
    model::SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.t_max = 200.0;
    cfg.seed = 607;
    const auto est = model::estimate_trapping_probability(p, s, 2.0, cfg);
    const double closed = barrier_trapping_probability(p, s, 2.0);
    CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_err);
}

}  // TEST_SUITE
