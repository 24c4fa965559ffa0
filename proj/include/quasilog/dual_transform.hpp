#pragma once

// Change of variables u = f_κ(v) that turns the quasilinear logistic operator
// -Δu - κΔ(u²)u into the semilinear problem -Δv = λ f f' - b f^p f'.
//
// f_κ solves f' = 1/sqrt(1 + 2κ f²), f(0) = 0. Its inverse has the closed form
//   F(u) = u sqrt(1+2κu²)/2 + asinh(sqrt(2κ) u) / (2 sqrt(2κ)),
// so f is evaluated by inverting F with a safeguarded Newton iteration.

namespace quasilog {

/// Values of f and f' at one point; most callers need both and the inversion dominates cost.
struct TransformValue {
    double f = 0.0;
    double fp = 1.0;
};

class DualTransform {
public:
    /// Couplings below this are treated as exactly zero (identity transform).
    static constexpr double kappa_floor = 1e-14;

    DualTransform(double kappa, double p);

    double kappa() const noexcept { return kappa_; }
    double p() const noexcept { return p_; }
    bool is_identity() const noexcept { return identity_; }

    /// F(u) = ∫_0^u sqrt(1+2κs²) ds.
    double inverse(double u) const;
    TransformValue evaluate(double t) const;
    double value(double t) const { return evaluate(t).f; }
    double derivative(double t) const { return evaluate(t).fp; }

    /// f'' = -2κ f (f')⁴.
    double second_derivative(double t) const;
    /// f'' = [(f')⁴ - (f')²]/f, the second closed form; requires t > 0.
    double second_derivative_alt(double t) const;

    /// h(t) = f f'/t, extended by h(0) = 1.
    double h(double t) const;
    /// Unique t > 0 with h(t) = y for y ∈ (0,1); requires κ > 0.
    double h_inverse(double y) const;

    /// λ f f' - b f^p f'; extended by 0 for t ≤ 0.
    double reaction(double lambda, double b, double t) const;
    /// d/dt of reaction: λ(f')⁴ - b f^{p-1}[(p-1)(f')² + (f')⁴].
    double reaction_derivative(double lambda, double b, double t) const;

private:
    double kappa_;
    double p_;
    bool identity_;
    double s_;  // sqrt(2κ)
};

double inverse_transform(double kappa, double u);
double f(double kappa, double t);
double f_prime(double kappa, double t);
double f_second(double kappa, double t);
double h(double kappa, double t);
double h_inverse(double kappa, double y);

/// g(t) = f_1(t)^{p+1}/t with g(0) = 0: the κ-uniform absorption used for large solutions.
double g(double p, double t);

double reaction(double kappa, double p, double lambda, double b, double t);
double reaction_derivative(double kappa, double p, double lambda, double b, double t);

}  // namespace quasilog
