#include "oracles.hpp"

#include "quasilog/dual_transform.hpp"
#include "quasilog/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace quasilog;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("inverse transform", "[dual_transform]") {
    CHECK(inverse_transform(1.0, 0.0) == 0.0);
    CHECK(inverse_transform(0.0, 2.5) == 2.5);
    CHECK_THAT(inverse_transform(1.0, 1.0), WithinRel(oracle::dual_inverse(1.0, 1.0), 1e-12));
    for (double kappa : {1e-3, 0.3, 7.0}) {
        for (double u : {0.01, 0.7, 5.0, 40.0}) {
            CHECK_THAT(inverse_transform(kappa, u), WithinRel(oracle::dual_inverse(kappa, u), 1e-11));
        }
    }
    CHECK_THROWS_AS(inverse_transform(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(DualTransform(-1.0, 3.0), DomainError);
    CHECK_THROWS_AS(DualTransform(1.0, 1.0), DomainError);
}

TEST_CASE("f and its derivatives", "[dual_transform]") {
    CHECK(f(1.0, 0.0) == 0.0);
    CHECK(f(0.0, 7.0) == 7.0);
    CHECK_THAT(f(1.0, 1.0), WithinAbs(oracle::dual_value(1.0, 1.0), 1e-12));

    CHECK(f_prime(1.0, 0.0) == 1.0);
    CHECK(f_prime(0.0, 3.0) == 1.0);
    const double step = 1e-5;
    const double fd1 = (f(1.0, 2.0 + step) - f(1.0, 2.0 - step)) / (2.0 * step);
    CHECK_THAT(f_prime(1.0, 2.0), WithinAbs(fd1, 1e-6));

    CHECK(f_second(1.0, 0.0) == 0.0);
    CHECK(f_second(0.0, 4.0) == 0.0);
    const double s2 = 1e-4;
    const double fd2 = (f(1.0, 1.0 + s2) - 2.0 * f(1.0, 1.0) + f(1.0, 1.0 - s2)) / (s2 * s2);
    CHECK_THAT(f_second(1.0, 1.0), WithinAbs(fd2, 1e-5));

    const DualTransform tr(0.8, 3.0);
    for (double t : {1e-6, 0.2, 3.0, 500.0}) {
        CHECK_THAT(tr.second_derivative_alt(t), WithinRel(tr.second_derivative(t), 1e-10));
    }
}

TEST_CASE("h and its inverse", "[dual_transform]") {
    CHECK_THAT(h(1.0, 1e-12), WithinAbs(1.0, 1e-6));
    CHECK(h(1.0, 10.0) < h(1.0, 1.0));
    CHECK_THAT(h(1.0, 1.0), WithinRel(f(1.0, 1.0) * f_prime(1.0, 1.0), 1e-12));
    CHECK(h(1.0, 0.0) == 1.0);

    for (double t0 : {0.1, 1.0, 10.0}) {
        CHECK_THAT(h_inverse(1.0, h(1.0, t0)), WithinRel(t0, 1e-8));
    }
    CHECK(h_inverse(1.0, 1.0 - 1e-8) < 1e-3);

    // Bisection on h written out from the oracle f.
    double lo = 0.0;
    double hi = 100.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = oracle::dual_value(1.0, mid);
        const double hm = fm / std::sqrt(1.0 + 2.0 * fm * fm) / mid;
        (hm > 0.5 ? lo : hi) = mid;
    }
    CHECK_THAT(h_inverse(1.0, 0.5), WithinAbs(0.5 * (lo + hi), 1e-10));

    CHECK_THROWS_AS(h_inverse(1.0, 1.5), DomainError);
    CHECK_THROWS_AS(h_inverse(0.0, 0.5), DomainError);
}

TEST_CASE("large-solution absorption g", "[dual_transform]") {
    CHECK(g(4.0, 1e-12) < 1e-6);
    CHECK(g(4.0, 0.0) == 0.0);
    CHECK(g(4.0, 2.0) > g(4.0, 1.0));
    CHECK(g(4.0, 9.0) >= g(4.0, 1.0) * std::pow(9.0, 1.5));
}

TEST_CASE("reaction and its derivative", "[dual_transform]") {
    CHECK(reaction(1.0, 3.0, 5.0, 2.0, 0.0) == 0.0);
    CHECK(reaction(1.0, 3.0, 5.0, 2.0, -1.0) == 0.0);
    CHECK_THAT(reaction(0.0, 3.0, 5.0, 2.0, 1.5), WithinRel(5.0 * 1.5 - 2.0 * std::pow(1.5, 3.0), 1e-14));
    const double fv = f(1.0, 2.0);
    const double fp = f_prime(1.0, 2.0);
    CHECK_THAT(reaction(1.0, 3.0, 10.0, 1.0, 2.0), WithinAbs(10.0 * fv * fp - fv * fv * fv * fp, 1e-12));

    CHECK_THAT(reaction_derivative(0.0, 3.0, 5.0, 2.0, 1.5), WithinRel(5.0 - 3.0 * 2.0 * 1.5 * 1.5, 1e-14));
    CHECK(reaction_derivative(1.0, 3.0, 5.0, 2.0, 0.0) == 5.0);
    const double step = 1e-6;
    const double fd = (reaction(1.0, 3.0, 10.0, 1.0, 1.5 + step) - reaction(1.0, 3.0, 10.0, 1.0, 1.5 - step)) /
                      (2.0 * step);
    CHECK_THAT(reaction_derivative(1.0, 3.0, 10.0, 1.0, 1.5), WithinAbs(fd, 1e-6));
}

TEST_CASE("pointwise bounds on sampled arguments", "[dual_transform][property]") {
    oracle::Sampler sample(11);
    for (int trial = 0; trial < 400; ++trial) {
        const double kappa = sample.log_uniform(1e-4, 1e2);
        const DualTransform tr(kappa, 3.0);
        const double t = sample.log_uniform(1e-6, 1e3);
        const TransformValue v = tr.evaluate(t);
        INFO("kappa=" << kappa << " t=" << t);
        CHECK(v.f >= 0.0);
        CHECK(v.f <= t);
        CHECK(v.fp > 0.0);
        CHECK(v.fp <= 1.0);
        CHECK(v.f * v.fp <= 1.0 / std::sqrt(2.0 * kappa) + 1e-12);
        CHECK(t * v.fp >= 0.5 * v.f * (1.0 - 1e-14));
        CHECK(t * v.fp <= v.f * (1.0 + 1e-14));
        const double t2 = t * sample.uniform(1.0, 10.0);
        CHECK(tr.value(t2) / std::sqrt(t2) >= v.f / std::sqrt(t) * (1.0 - 1e-14));
    }
}

TEST_CASE("round trip through the closed-form inverse", "[dual_transform][property]") {
    oracle::Sampler sample(12);
    for (double kappa : {1e-3, 1e-1, 1.0, 10.0}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double t = sample.log_uniform(1e-8, 1e6);
            CHECK_THAT(inverse_transform(kappa, f(kappa, t)), WithinRel(t, 1e-12));
        }
    }
}

TEST_CASE("monotonicity in kappa and in t", "[dual_transform][property]") {
    oracle::Sampler sample(13);
    for (int trial = 0; trial < 300; ++trial) {
        const double k1 = sample.log_uniform(1e-4, 10.0);
        const double k2 = k1 * sample.uniform(1.01, 5.0);
        const double t = sample.log_uniform(1e-2, 1e3);
        CHECK(f(k2, t) < f(k1, t));

        const double t1 = sample.log_uniform(1e-4, 1e3);
        const double t2 = t1 * sample.uniform(1.01, 3.0);
        CHECK(h(k1, t2) < h(k1, t1));
        for (double p : {3.0, 4.5}) {
            const DualTransform tr(k1, p);
            const auto q = [&](double s) {
                const TransformValue v = tr.evaluate(s);
                return std::pow(v.f, p) * v.fp / s;
            };
            CHECK(q(t2) > q(t1));
        }
        const double p = sample.uniform(3.1, 6.0);
        CHECK(g(p, t2) / t2 > g(p, t1) / t1);
    }
    const DualTransform tr(1.0, 3.0);
    const TransformValue tiny = tr.evaluate(1e-8);
    CHECK(std::pow(tiny.f, 3.0) * tiny.fp / 1e-8 < 1e-12);
}

TEST_CASE("reaction derivative against finite differences", "[dual_transform][property]") {
    oracle::Sampler sample(14);
    for (int trial = 0; trial < 100; ++trial) {
        const double kappa = sample.log_uniform(1e-3, 10.0);
        const double p = sample.uniform(1.5, 5.0);
        const double lambda = sample.uniform(0.0, 100.0);
        const double b = sample.uniform(0.0, 10.0);
        const double t = sample.log_uniform(1e-2, 50.0);
        const DualTransform tr(kappa, p);
        const double step = 1e-6 * std::max(1.0, t);
        const double fd = (tr.reaction(lambda, b, t + step) - tr.reaction(lambda, b, t - step)) / (2.0 * step);
        const double exact = tr.reaction_derivative(lambda, b, t);
        INFO("kappa=" << kappa << " p=" << p << " t=" << t);
        CHECK_THAT(exact, WithinAbs(fd, 1e-6 * std::max(1.0, std::abs(exact))));
    }
}
