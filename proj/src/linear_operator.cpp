#include "quasilog/linear_operator.hpp"

#include "quasilog/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace quasilog {

using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;

LinearOperator::LinearOperator(SparseMatrix stencil, std::vector<double> potential)
    : stencil_(std::move(stencil)), potential_(std::move(potential)) {
    if (stencil_.rows() != stencil_.cols()) {
        throw DomainError("operator must be square");
    }
    if (!potential_.empty() && potential_.size() != size()) {
        throw DomainError("potential length does not match operator size");
    }
    stencil_.makeCompressed();
}

LinearOperator LinearOperator::with_potential(std::vector<double> potential) const {
    return LinearOperator(stencil_, std::move(potential));
}

SparseMatrix LinearOperator::assembled(double shift) const {
    SparseMatrix m = stencil_;
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        const double v = potential_.empty() ? 0.0 : potential_[static_cast<std::size_t>(k)];
        m.coeffRef(k, k) += v + shift;
    }
    m.makeCompressed();
    return m;
}

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
    if (x.size() != size()) {
        throw DomainError("operator applied to vector of wrong length");
    }
    const Eigen::Map<const Vector> in(x.data(), static_cast<Eigen::Index>(x.size()));
    Vector out = stencil_ * in;
    if (!potential_.empty()) {
        for (std::size_t k = 0; k < size(); ++k) {
            out[static_cast<Eigen::Index>(k)] += potential_[k] * x[k];
        }
    }
    return {out.data(), out.data() + out.size()};
}

double LinearOperator::entry(std::size_t row, std::size_t col) const {
    double v = stencil_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    if (row == col && !potential_.empty()) {
        v += potential_[row];
    }
    return v;
}

bool LinearOperator::is_symmetric(double tolerance) const {
    const SparseMatrix transpose = stencil_.transpose();
    const SparseMatrix diff = stencil_ - transpose;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
            if (std::abs(it.value()) > tolerance) {
                return false;
            }
        }
    }
    return true;
}

double LinearOperator::gershgorin_lower_bound() const {
    std::vector<double> diagonal(size(), 0.0);
    std::vector<double> off(size(), 0.0);
    for (Eigen::Index k = 0; k < stencil_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(stencil_, k); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            if (it.row() == it.col()) {
                diagonal[r] += it.value();
            } else {
                off[r] += std::abs(it.value());
            }
        }
    }
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < size(); ++r) {
        const double v = potential_.empty() ? 0.0 : potential_[r];
        bound = std::min(bound, diagonal[r] + v - off[r]);
    }
    return bound;
}

LinearOperator assemble_laplacian(const Grid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * (grid.dimension() == 1 ? 3 : 5));
    const double cx = 1.0 / (grid.hx() * grid.hx());
    const double cy = grid.dimension() == 2 ? 1.0 / (grid.hy() * grid.hy()) : 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto [i, j] = grid.lattice(node);
        const auto row = static_cast<Eigen::Index>(node);
        triplets.emplace_back(row, row, 2.0 * cx + 2.0 * cy);
        if (i > 0) triplets.emplace_back(row, static_cast<Eigen::Index>(grid.index(i - 1, j)), -cx);
        if (i + 1 < grid.nx()) triplets.emplace_back(row, static_cast<Eigen::Index>(grid.index(i + 1, j)), -cx);
        if (grid.dimension() == 2) {
            if (j > 0) triplets.emplace_back(row, static_cast<Eigen::Index>(grid.index(i, j - 1)), -cy);
            if (j + 1 < grid.ny()) triplets.emplace_back(row, static_cast<Eigen::Index>(grid.index(i, j + 1)), -cy);
        }
    }
    SparseMatrix stencil(n, n);
    stencil.setFromTriplets(triplets.begin(), triplets.end());
    return LinearOperator(std::move(stencil));
}

RestrictedOperator refuge_operator(const Grid& grid, const WeightField& weight) {
    if (!(weight.grid() == grid)) {
        throw ConfigurationError("weight field lives on a different grid");
    }
    if (weight.refuge_count() == 0) {
        throw ConfigurationError("refuge is empty: b > 0 at every node");
    }
    if (!weight.refuge_connected()) {
        throw ConfigurationError("refuge is disconnected: the zero set of b must be connected");
    }
    std::vector<std::size_t> nodes;
    std::vector<Eigen::Index> local(grid.size(), -1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (weight.in_refuge(k)) {
            local[k] = static_cast<Eigen::Index>(nodes.size());
            nodes.push_back(k);
        }
    }
    const LinearOperator full = assemble_laplacian(grid);
    const SparseMatrix& a = full.stencil();
    std::vector<Triplet> triplets;
    for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const Eigen::Index r = local[static_cast<std::size_t>(it.row())];
            const Eigen::Index c = local[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) {
                triplets.emplace_back(r, c, it.value());
            }
        }
    }
    const auto m = static_cast<Eigen::Index>(nodes.size());
    SparseMatrix sub(m, m);
    sub.setFromTriplets(triplets.begin(), triplets.end());
    return {LinearOperator(std::move(sub)), std::move(nodes)};
}

struct SparseSolver::Impl {
    using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
    using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
    using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                        Eigen::IncompleteCholesky<double>>;

    SparseMatrix matrix;
    std::optional<Ldlt> ldlt;
    std::unique_ptr<Lu> lu;
    std::optional<Cg> cg;

    void factor_lu() {
        ldlt.reset();
        lu = std::make_unique<Lu>();
        lu->compute(matrix);
        if (lu->info() != Eigen::Success) {
            throw NumericError("sparse LU factorization failed (singular system)");
        }
    }
};

SparseSolver::SparseSolver(const SparseMatrix& matrix, bool positive_definite)
    : impl_(std::make_unique<Impl>()) {
    impl_->matrix = matrix;
    impl_->matrix.makeCompressed();
    const auto n = static_cast<std::size_t>(matrix.rows());
    if (positive_definite && n >= direct_limit) {
        impl_->cg.emplace();
        impl_->cg->setTolerance(1e-14);
        impl_->cg->setMaxIterations(static_cast<Eigen::Index>(4 * n));
        impl_->cg->compute(impl_->matrix);
        if (impl_->cg->info() != Eigen::Success) {
            throw NumericError("incomplete Cholesky preconditioner failed");
        }
        return;
    }
    impl_->ldlt.emplace();
    impl_->ldlt->compute(impl_->matrix);
    if (impl_->ldlt->info() != Eigen::Success) {
        impl_->factor_lu();
    }
}

SparseSolver::~SparseSolver() = default;
SparseSolver::SparseSolver(SparseSolver&&) noexcept = default;
SparseSolver& SparseSolver::operator=(SparseSolver&&) noexcept = default;

std::vector<double> SparseSolver::solve(std::span<const double> rhs) const {
    const Eigen::Map<const Vector> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Vector x;
    if (impl_->cg) {
        x = impl_->cg->solve(b);
        if (impl_->cg->info() != Eigen::Success) {
            throw NumericError("conjugate gradient did not converge");
        }
    } else if (impl_->ldlt) {
        x = impl_->ldlt->solve(b);
        // Unpivoted LDLᵀ on an indefinite matrix can lose accuracy without reporting it.
        const double scale = b.norm() + 1e-300;
        if (!x.allFinite() || (impl_->matrix * x - b).norm() > 1e-8 * scale) {
            impl_->factor_lu();
            x = impl_->lu->solve(b);
        }
    } else {
        x = impl_->lu->solve(b);
    }
    if (!x.allFinite()) {
        throw NumericError("linear solve produced non-finite values");
    }
    return {x.data(), x.data() + x.size()};
}

double default_enlargement(const Grid& grid) {
    double longest = grid.x_extent().length();
    if (grid.dimension() == 2) {
        longest = std::max(longest, grid.y_extent().length());
    }
    return 0.25 * longest;
}

GridFunction auxiliary_supersolution_field(const Grid& grid, double enlargement) {
    if (!(enlargement > 0.0)) {
        throw DomainError("enlargement must be positive");
    }
    // Pad by a whole number of cells so the enlarged grid keeps the same mesh width.
    const int pad_x = std::max(1, static_cast<int>(std::ceil(enlargement / grid.hx() - 1e-9)));
    const Interval big_x{grid.x_extent().lo - pad_x * grid.hx(), grid.x_extent().hi + pad_x * grid.hx()};
    int pad_y = 0;
    Grid big = Grid::interval(big_x, grid.nx() + 2 * pad_x);
    if (grid.dimension() == 2) {
        pad_y = std::max(1, static_cast<int>(std::ceil(enlargement / grid.hy() - 1e-9)));
        const Interval big_y{grid.y_extent().lo - pad_y * grid.hy(), grid.y_extent().hi + pad_y * grid.hy()};
        big = Grid::rectangle(big_x, big_y, grid.nx() + 2 * pad_x, grid.ny() + 2 * pad_y);
    }
    const LinearOperator laplacian = assemble_laplacian(big);
    const SparseSolver solver(laplacian.stencil());
    const std::vector<double> ones(big.size(), 1.0);
    const std::vector<double> e_big = solver.solve(ones);

    GridFunction e(grid);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto [i, j] = grid.lattice(node);
        e[node] = e_big[big.index(i + pad_x, j + pad_y)];
    }
    if (!(e.min() > 0.0)) {
        throw NumericError("auxiliary field is not strictly positive on the domain");
    }
    return e;
}

}  // namespace quasilog
