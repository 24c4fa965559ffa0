#include "quasilog/dual_transform.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace quasilog {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr int max_inversion_steps = 200;

void require_nonnegative(double t, const char* what) {
    if (!(t >= 0.0)) {
        throw DomainError(std::string(what) + " must be nonnegative, got " + std::to_string(t));
    }
}

}  // namespace

DualTransform::DualTransform(double kappa, double p)
    : kappa_(kappa), p_(p), identity_(kappa < kappa_floor), s_(std::sqrt(2.0 * kappa)) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw DomainError("kappa must be finite and nonnegative, got " + std::to_string(kappa));
    }
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw DomainError("exponent p must be finite and > 1, got " + std::to_string(p));
    }
}

double DualTransform::inverse(double u) const {
    require_nonnegative(u, "u");
    if (identity_) {
        return u;
    }
    const double su = s_ * u;
    return 0.5 * u * std::sqrt(1.0 + su * su) + std::asinh(su) / (2.0 * s_);
}

TransformValue DualTransform::evaluate(double t) const {
    require_nonnegative(t, "t");
    if (identity_ || t == 0.0) {
        return {t, 1.0};
    }

    // F is convex and increasing with F(u) ≥ max(u, sqrt(2κ)u²/2), so both
    // t and sqrt(2t/sqrt(2κ)) bound the root from above and Newton started
    // there decreases monotonically. The bracket only guards against rounding.
    double hi = std::min(t, std::sqrt(2.0 * t / s_));
    double lo = 0.0;
    double u = hi;
    double residual = inverse(u) - t;
    for (int step = 0; step < max_inversion_steps; ++step) {
        if (std::abs(residual) <= 2.0 * eps * t) {
            break;
        }
        if (residual > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        const double slope = std::sqrt(1.0 + 2.0 * kappa_ * u * u);
        double next = u - residual / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double change = std::abs(next - u);
        u = next;
        residual = inverse(u) - t;
        if (change <= 2.0 * eps * u) {
            break;
        }
    }
    if (!(std::abs(residual) <= 1e-13 * std::max(1.0, t))) {
        throw ConvergenceError("inversion of f_kappa^{-1} did not converge at t=" + std::to_string(t),
                               residual);
    }
    return {u, 1.0 / std::sqrt(1.0 + 2.0 * kappa_ * u * u)};
}

double DualTransform::second_derivative(double t) const {
    const auto [fv, fp] = evaluate(t);
    const double fp2 = fp * fp;
    return -2.0 * kappa_ * fv * fp2 * fp2;
}

double DualTransform::second_derivative_alt(double t) const {
    if (!(t > 0.0)) {
        throw DomainError("second_derivative_alt requires t > 0");
    }
    const auto [fv, fp] = evaluate(t);
    const double fp2 = fp * fp;
    // (f')² - 1 = -2κf²/(1+2κf²); written this way to avoid cancellation near t = 0.
    const double x = 2.0 * kappa_ * fv * fv;
    const double fp2_minus_one = -x / (1.0 + x);
    return fp2 * fp2_minus_one / fv;
}

double DualTransform::h(double t) const {
    require_nonnegative(t, "t");
    if (t == 0.0) {
        return 1.0;
    }
    const auto [fv, fp] = evaluate(t);
    return (fv / t) * fp;
}

double DualTransform::h_inverse(double y) const {
    if (!(y > 0.0 && y < 1.0)) {
        throw DomainError("h_inverse requires y in (0,1), got " + std::to_string(y));
    }
    if (identity_) {
        throw DomainError("h_inverse requires kappa > 0 (h is identically 1 at kappa = 0)");
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int grow = 0; h(hi) > y; ++grow) {
        if (grow > 2000) {
            throw ConvergenceError("h_inverse bracket did not close", h(hi) - y);
        }
        lo = hi;
        hi *= 2.0;
    }
    // h is strictly decreasing: h(lo) > y ≥ h(hi).
    for (int step = 0; step < 400; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (h(mid) > y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double t = 0.5 * (lo + hi);
    const double miss = h(t) - y;
    if (!(std::abs(miss) <= 1e-10)) {
        throw ConvergenceError("h_inverse bisection failed", miss);
    }
    return t;
}

double DualTransform::reaction(double lambda, double b, double t) const {
    if (t <= 0.0) {
        return 0.0;
    }
    const auto [fv, fp] = evaluate(t);
    const double absorption = b == 0.0 ? 0.0 : b * std::pow(fv, p_) * fp;
    return lambda * fv * fp - absorption;
}

double DualTransform::reaction_derivative(double lambda, double b, double t) const {
    const auto [fv, fp] = evaluate(std::max(t, 0.0));
    const double fp2 = fp * fp;
    const double fp4 = fp2 * fp2;
    const double absorption = b == 0.0 ? 0.0 : b * std::pow(fv, p_ - 1.0) * ((p_ - 1.0) * fp2 + fp4);
    return lambda * fp4 - absorption;
}

namespace {

// Free-function evaluators do not depend on p; any admissible exponent works.
DualTransform transform_for(double kappa) {
    return DualTransform(kappa, 2.0);
}

}  // namespace

double inverse_transform(double kappa, double u) {
    return transform_for(kappa).inverse(u);
}

double f(double kappa, double t) {
    return transform_for(kappa).value(t);
}

double f_prime(double kappa, double t) {
    return transform_for(kappa).derivative(t);
}

double f_second(double kappa, double t) {
    return transform_for(kappa).second_derivative(t);
}

double h(double kappa, double t) {
    if (!(kappa > 0.0)) {
        throw DomainError("h requires kappa > 0");
    }
    return transform_for(kappa).h(t);
}

double h_inverse(double kappa, double y) {
    return transform_for(kappa).h_inverse(y);
}

double g(double p, double t) {
    require_nonnegative(t, "t");
    const DualTransform unit(1.0, p);
    if (t == 0.0) {
        return 0.0;
    }
    const double fv = unit.value(t);
    return std::pow(fv, p + 1.0) / t;
}

double reaction(double kappa, double p, double lambda, double b, double t) {
    return DualTransform(kappa, p).reaction(lambda, b, t);
}

double reaction_derivative(double kappa, double p, double lambda, double b, double t) {
    return DualTransform(kappa, p).reaction_derivative(lambda, b, t);
}

}  // namespace quasilog
