#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

// Shared helpers for the test suites: a tiny deterministic RNG for property
// tests and an adaptive Simpson rule used as an independent quadrature oracle.

namespace testutil {

// splitmix64; deterministic across platforms, good enough for drawing
// property-test samples.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in (0,1]
    double uniform() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

inline double simpson(const std::function<double(double)>& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, 48);
}

// Independent quadrature oracle for the upper incomplete gamma function.
inline double upper_gamma_quadrature(double a, double z) {
    const double cut = z + 60.0 + 10.0 * std::abs(a);
    return integrate([a](double t) { return std::exp(-t) * std::pow(t, a - 1.0); }, z,
                     cut, 1e-14);
}

}  // namespace testutil
