#include <doctest.h>

#include <cmath>

#include "captrap/welfare.hpp"
#include "test_util.hpp"

using namespace captrap;
using namespace captrap::welfare;

namespace {

ModelParams fig_params() { return ModelParams{0.5, 1.0, 1.0, 1.0}; }

WelfareParams fig_welfare() { return WelfareParams{0.9, 8.0, SubsidyRateMode::LoadingGap}; }

SchemeSpec fig8_barrier(const ModelParams& p, double barrier = 3.0) {
    return SchemeSpec::barrier_subsidised(p, 0.5, 0.5, barrier, p.r / 2.0, 1.0);
}

}  // namespace

TEST_SUITE("welfare") {

TEST_CASE("premium arithmetic") {
    const ModelParams p = fig_params();
    CHECK(premium(p, 1.0, 0.3) == 0.0);
    CHECK(premium(p, 0.5, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
    const ModelParams q{0.5, 2.0, 4.0, 1.0};
    CHECK(premium(q, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("subsidy rate modes") {
    const ModelParams p = fig_params();
    const SchemeSpec s = SchemeSpec::subsidised(p, 0.5, 0.5, 0.0);
    WelfareParams w = fig_welfare();
    CHECK(subsidy_rate(p, s, w) == doctest::Approx(0.5).epsilon(1e-15));
    w.subsidy_rate_mode = SubsidyRateMode::PremiumScaled;
    CHECK(subsidy_rate(p, s, w) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("constant subsidy value: zero gap, perpetuity limit") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec zero_gap = SchemeSpec::subsidised(p, 0.5, 0.5, 0.5);
    CHECK(subsidy_value_constant(p, zero_gap, 3.0, w) == 0.0);
    const SchemeSpec s = SchemeSpec::subsidised(p, 0.5, 0.5, 0.0);
    const double far = subsidy_value_constant(p, s, 80.0, w);
    CHECK(far == doctest::Approx(0.5 / w.delta).epsilon(1e-9));
    // and the value never exceeds the perpetuity
    for (double x : {2.0, 2.5, 4.0, 10.0}) {
        const double v = subsidy_value_constant(p, s, x, w);
        CHECK(v >= 0.0);
        CHECK(v <= 0.5 / w.delta + 1e-12);
    }
}

TEST_CASE("constant subsidy value matches Monte Carlo at Fig-5 parameters") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec s = SchemeSpec::subsidised(p, 0.5, 0.5, 0.0);
    model::SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.t_max = 200.0;
    cfg.seed = 550;
    const double rate = subsidy_rate(p, s, w);
    const auto est = model::estimate_subsidy_value(p, s, 3.0, w.delta, rate, cfg);
    const double closed = subsidy_value_constant(p, s, 3.0, w);
    CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_err);
}

TEST_CASE("barrier subsidy boundary, decay and bounds") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec s = fig8_barrier(p);
    const double pi = s.premium(p);
    CHECK(subsidy_value_barrier(p, s, 1.0, w) ==
          doctest::Approx(pi / (p.lambda + w.delta)).epsilon(1e-12));
    CHECK(subsidy_value_barrier(p, s, 60.0, w) < 1e-8);
    for (double x : {1.2, 2.0, 3.0, 5.0, 9.0}) {
        const double v = subsidy_value_barrier(p, s, x, w);
        CHECK(v >= 0.0);
        CHECK(v <= pi / w.delta + 1e-12);
    }
}

TEST_CASE("barrier subsidy continuity and pi-shifted flux at B") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec s = fig8_barrier(p);
    const double b = s.barrier;
    const double pi = s.premium(p);
    auto v = [&](double x) { return subsidy_value_barrier(p, s, x, w); };
    CHECK(std::abs(v(b - 1e-12) - v(b + 1e-12)) < 1e-8);
    const double h = 1e-5;
    const double dl = (3.0 * v(b) - 4.0 * v(b - h) + v(b - 2.0 * h)) / (2.0 * h);
    const double dr = (-3.0 * v(b) + 4.0 * v(b + h) - v(b + 2.0 * h)) / (2.0 * h);
    const double lhs = s.r_ins * (b - 1.0) * dr;
    const double rhs = p.r * (b - 1.0) * dl + pi;
    CHECK(std::abs(lhs - rhs) < 1e-5 * std::max(std::abs(lhs), std::abs(rhs)));
}

TEST_CASE("barrier subsidy IDE residual below the barrier") {
    // r(x-xc) V' - (lambda+delta) V + lambda int_0^{x-xc} V(x-z) dG(z) + pi = 0
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec s = fig8_barrier(p);
    const double alpha_k = 2.0;
    const double pi = s.premium(p);
    auto v = [&](double x) { return subsidy_value_barrier(p, s, x, w); };
    for (int i = 1; i <= 20; ++i) {
        const double x = 1.0 + (s.barrier - 1.0) * i / 21.0;
        const double h = 1e-5 * std::max(1.0, x);
        const double vd = (v(x + h) - v(x - h)) / (2.0 * h);
        const int n = 2000;
        const double width = x - 1.0;
        double integral = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double z = width * k / n;
            const double f = v(x - z) * alpha_k * std::exp(-alpha_k * z);
            integral += (k == 0 || k == n) ? 0.5 * f : f;
        }
        integral *= width / n;
        const double lhs = p.r * (x - 1.0) * vd - (p.lambda + w.delta) * v(x) +
                           p.lambda * integral + pi;
        CHECK(std::abs(lhs) < 1e-5 * std::max((p.lambda + w.delta) * v(x), pi));
    }
}

TEST_CASE("barrier subsidy matches Monte Carlo at Fig-8 parameters") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec s = fig8_barrier(p);
    const double pi = s.premium(p);
    model::SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.t_max = 200.0;
    cfg.seed = 808;
    for (double x : {2.0, 3.5}) {
        const auto est = model::estimate_subsidy_value(p, s, x, w.delta, pi, cfg);
        const double closed = subsidy_value_barrier(p, s, x, w);
        CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_err);
    }
}

TEST_CASE("barrier subsidy vanishes as B collapses to the critical capital") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    model::SimConfig cfg;
    cfg.n_paths = 60000;
    cfg.t_max = 200.0;
    cfg.seed = 809;
    const double x = 2.0;
    double prev = 1e300;
    for (double eps : {0.3, 0.1, 0.03}) {
        const SchemeSpec s = fig8_barrier(p, 1.0 + eps);
        const double closed = subsidy_value_barrier(p, s, x, w);
        CHECK(closed < prev);
        prev = closed;
        const auto est =
            model::estimate_subsidy_value(p, s, x, w.delta, s.premium(p), cfg);
        CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_err + 1e-4);
    }
    CHECK(prev < 0.02);
}

TEST_CASE("cost of social protection: anchors and orderings") {
    const ModelParams p = fig_params();
    const WelfareParams w = fig_welfare();
    const SchemeSpec un = SchemeSpec::uninsured(p);
    // uninsured at the line: cost = M
    CHECK(cost_of_social_protection(p, un, 1.0, w) ==
          doctest::Approx(w.m_cost).epsilon(1e-12));
    // zero-gap subsidised cost equals the plain insured cost
    const SchemeSpec zero_gap = SchemeSpec::subsidised(p, 0.5, 0.5, 0.5);
    SchemeSpec ins = zero_gap;
    ins.kind = model::SchemeKind::Insured;
    for (double x : {2.6, 3.0, 5.0}) {
        CHECK(cost_of_social_protection(p, zero_gap, x, w) ==
              doctest::Approx(cost_of_social_protection(p, ins, x, w)).epsilon(1e-12));
    }
    // Fig-8 ordering: the barrier scheme beats the uninsured cost somewhere,
    // while the subsidised scheme costs more than uninsured near the line
    const SchemeSpec bar = fig8_barrier(p);
    const SchemeSpec sub = SchemeSpec::subsidised(p, 0.5, 0.5, 0.0);
    bool barrier_cheaper_somewhere = false;
    for (double x = 1.0; x <= 10.0; x += 0.25) {
        if (cost_of_social_protection(p, bar, x, w) <
            cost_of_social_protection(p, un, x, w) - 1e-9)
            barrier_cheaper_somewhere = true;
    }
    CHECK(barrier_cheaper_somewhere);
    CHECK(cost_of_social_protection(p, sub, 1.3, w) >
          cost_of_social_protection(p, un, 1.3, w));
    // non-increasing in x for each scheme
    for (const SchemeSpec& s : {un, sub, bar}) {
        double prev = 1e300;
        for (double x = 2.6; x <= 10.0; x += 0.2) {
            const double c = cost_of_social_protection(p, s, x, w);
            CHECK(c <= prev + 1e-9);
            prev = c;
        }
    }
}

}  // TEST_SUITE
