#include "quasilog/eigensolver.hpp"

#include "quasilog/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace quasilog {

namespace {

// (A x)·x / x·x with the products accumulated in long double.
double rayleigh_quotient(const LinearOperator& op, const std::vector<double>& x) {
    const SparseMatrix& a = op.stencil();
    std::vector<long double> ax(x.size(), 0.0L);
    for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            ax[static_cast<std::size_t>(it.row())] +=
                static_cast<long double>(it.value()) * x[static_cast<std::size_t>(col)];
        }
    }
    long double num = 0.0L;
    long double den = 0.0L;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!op.potential().empty()) {
            ax[k] += static_cast<long double>(op.potential()[k]) * x[k];
        }
        num += ax[k] * x[k];
        den += static_cast<long double>(x[k]) * x[k];
    }
    return static_cast<double>(num / den);
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace

EigenResult principal_eigen(const LinearOperator& op, EigenOptions options) {
    if (!(options.tol > 0.0)) {
        throw DomainError("eigen tolerance must be positive");
    }
    const std::size_t n = op.size();
    if (n == 0) {
        throw DomainError("eigenproblem on an empty operator");
    }
    double scale = 0.0;
    for (Eigen::Index col = 0; col < op.stencil().outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(op.stencil(), col); it; ++it) {
            scale = std::max(scale, std::abs(it.value()));
        }
    }
    if (!op.is_symmetric(1e-12 * scale)) {
        throw DomainError("principal_eigen requires a symmetric operator");
    }

    const double shift = op.gershgorin_lower_bound() - 1.0;
    const SparseSolver solver(op.assembled(-shift));

    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    EigenResult result;
    double lambda = rayleigh_quotient(op, x);
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= options.max_iter; ++it) {
        std::vector<double> y = solver.solve(x);
        const double ny = norm2(y);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = y[k] / ny;
        }
        lambda = rayleigh_quotient(op, x);
        const std::vector<double> ax = op.apply(x);
        double r2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = ax[k] - lambda * x[k];
            r2 += r * r;
        }
        residual = std::sqrt(r2);
        result.iterations = it;
        if (residual <= options.tol * std::max(1.0, std::abs(lambda))) {
            break;
        }
        if (it == options.max_iter) {
            throw ConvergenceError("inverse power iteration exhausted its iteration budget", residual);
        }
    }

    double sum = 0.0;
    for (double v : x) {
        sum += v;
    }
    const double sign = sum < 0.0 ? -1.0 : 1.0;
    double peak = 0.0;
    for (double v : x) {
        peak = std::max(peak, sign * v);
    }
    result.phi.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        result.phi[k] = sign * x[k] / peak;
    }
    if (!(*std::min_element(result.phi.begin(), result.phi.end()) > 0.0)) {
        throw NumericError("principal eigenvector is not strictly positive");
    }
    result.lambda1 = lambda;
    result.residual = residual;
    return result;
}

EigenResult principal_eigen(const Grid& grid, const std::vector<double>& potential, EigenOptions options) {
    return principal_eigen(assemble_laplacian(grid).with_potential(potential), options);
}

RefugeEigen refuge_eigenvalue(const Grid& grid, const WeightField& weight, EigenOptions options) {
    const RestrictedOperator refuge = refuge_operator(grid, weight);
    const EigenResult eig = principal_eigen(refuge.op, options);
    GridFunction phi(grid);
    for (std::size_t k = 0; k < refuge.nodes.size(); ++k) {
        phi[refuge.nodes[k]] = eig.phi[k];
    }
    return {eig.lambda1, std::move(phi), eig.iterations, eig.residual};
}

double discrete_laplacian_lambda1(const Grid& grid) {
    const auto axis = [](double h, double length) {
        const double s = std::sin(std::numbers::pi * h / (2.0 * length));
        return 4.0 / (h * h) * s * s;
    };
    double value = axis(grid.hx(), grid.x_extent().length());
    if (grid.dimension() == 2) {
        value += axis(grid.hy(), grid.y_extent().length());
    }
    return value;
}

}  // namespace quasilog
