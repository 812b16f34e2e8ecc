#include "cad/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace cad {

namespace {
constexpr double kEulerMascheroni = 0.57721566490153286060651209;
} // namespace

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
    double result = 0.0;
    // psi(x) = psi(x+1) - 1/x until the asymptotic series is accurate.
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // ln x - 1/(2x) - sum B_2k / (2k x^2k), terms through x^-12.
    result += std::log(x) - 0.5 * inv
        - inv2 * (1.0 / 12.0
        - inv2 * (1.0 / 120.0
        - inv2 * (1.0 / 252.0
        - inv2 * (1.0 / 240.0
        - inv2 * (1.0 / 132.0
        - inv2 * (691.0 / 32760.0))))));
    return result;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("trigamma: argument must be positive");
    double result = 0.0;
    while (x < 8.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += inv * (1.0
        + inv * (0.5
        + inv * (1.0 / 6.0
        - inv2 * (1.0 / 30.0
        - inv2 * (1.0 / 42.0
        - inv2 * (1.0 / 30.0
        - inv2 * (5.0 / 66.0
        - inv2 * (691.0 / 2730.0))))))));
    return result;
}

double inv_digamma(double y) {
    // Initializer from the asymptotics of psi: exp(y) + 1/2 for large y,
    // -1/(y + gamma) near the pole at zero.
    double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + kEulerMascheroni);
    for (int i = 0; i < 60; ++i) {
        const double f = digamma(x) - y;
        const double step = f / trigamma(x);
        double next = x - step;
        if (next <= 0.0) next = x * 0.5; // psi is increasing; stay in domain
        if (std::abs(next - x) <= 1e-12 * (1.0 + std::abs(next))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

} // namespace cad
