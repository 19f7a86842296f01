#include "qest/qlin.hpp"

#include <cmath>

namespace qest {

Matrix tensor_all(std::span<const Matrix> factors) {
    Matrix out = Matrix::Identity(1, 1);
    for(const auto &f : factors) out = tensor(out, f);
    return out;
}

HermitianEig eig_hermitian(const Matrix &h, double tol) {
    if(h.rows() != h.cols()) throw std::invalid_argument("eig_hermitian: matrix is not square");
    const double scale = std::max(1.0, h.norm());
    if(hermiticity_defect(h) > tol * scale)
        throw std::invalid_argument("eig_hermitian: input is not Hermitian (defect " + std::to_string(hermiticity_defect(h)) + ")");
    const Matrix                                  sym = (h + h.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if(solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix &h) {
    const Matrix sym = (h + h.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

namespace pauli {
    Matrix2 I() { return Matrix2::Identity(); }
    Matrix2 X() {
        Matrix2 m;
        m << 0, 1, 1, 0;
        return m;
    }
    Matrix2 Y() {
        Matrix2 m;
        m << 0, Complex(0, -1), Complex(0, 1), 0;
        return m;
    }
    Matrix2 Z() {
        Matrix2 m;
        m << 1, 0, 0, -1;
        return m;
    }
    Matrix2 sigma(int i) {
        switch(i) {
            case 0: return I();
            case 1: return X();
            case 2: return Y();
            case 3: return Z();
            default: throw std::invalid_argument("pauli::sigma: index must be 0..3");
        }
    }
} // namespace pauli

DensityOperator::DensityOperator(Matrix m) : matrix_(std::move(m)) {
    if(matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) throw std::invalid_argument("DensityOperator: matrix must be square and nonempty");
    if(hermiticity_defect(matrix_) > hermitian_tol)
        throw std::invalid_argument("DensityOperator: not Hermitian (defect " + std::to_string(hermiticity_defect(matrix_)) + ")");
    const Complex tr = matrix_.trace();
    if(std::abs(tr - 1.0) > trace_tol) throw std::invalid_argument("DensityOperator: trace " + std::to_string(tr.real()) + " is not 1");
    if(min_eigenvalue(matrix_) < psd_tol)
        throw std::invalid_argument("DensityOperator: negative eigenvalue " + std::to_string(min_eigenvalue(matrix_)));
}

DensityOperator DensityOperator::from_ket(const Vector &psi) {
    const double n = psi.norm();
    if(n == 0.0) throw std::invalid_argument("DensityOperator::from_ket: zero vector");
    const Vector u = psi / n;
    return DensityOperator(u * u.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(dim));
}

DensityOperator DensityOperator::basis(std::size_t dim, std::size_t i) {
    if(i >= dim) throw std::invalid_argument("DensityOperator::basis: index out of range");
    Vector v                           = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return from_ket(v);
}

Povm::Povm(std::vector<Matrix> elements) : elements_(std::move(elements)) {
    if(elements_.empty()) throw std::invalid_argument("Povm: no elements");
    dim_             = static_cast<std::size_t>(elements_.front().rows());
    const auto d     = elements_.front().rows();
    Matrix     total = Matrix::Zero(d, d);
    for(std::size_t i = 0; i < elements_.size(); ++i) {
        const auto &e = elements_[i];
        if(e.rows() != d || e.cols() != d) throw std::invalid_argument("Povm: element " + std::to_string(i) + " has the wrong shape");
        if(hermiticity_defect(e) > tol || min_eigenvalue(e) < -tol)
            throw std::invalid_argument("Povm: element " + std::to_string(i) + " is not positive semidefinite");
        total += e;
    }
    if(frobenius_distance(total, Matrix::Identity(d, d)) > tol) throw std::invalid_argument("Povm: elements do not sum to the identity");
}

Povm Povm::computational(std::size_t dim) { return from_basis(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))); }

Povm Povm::hadamard() {
    Matrix h(2, 2);
    h << 1, 1, 1, -1;
    return from_basis(h / std::sqrt(2.0));
}

Povm Povm::from_basis(const Matrix &unitary) {
    std::vector<Matrix> elements;
    for(Eigen::Index c = 0; c < unitary.cols(); ++c) elements.emplace_back(unitary.col(c) * unitary.col(c).adjoint());
    return Povm(std::move(elements));
}

RealVector outcome_probabilities(const Povm &m, const Matrix &rho) {
    if(static_cast<std::size_t>(rho.rows()) != m.dim()) throw std::invalid_argument("outcome_probabilities: dimension mismatch");
    RealVector p(static_cast<Eigen::Index>(m.size()));
    for(std::size_t i = 0; i < m.size(); ++i) p(static_cast<Eigen::Index>(i)) = (m.elements()[i] * rho).trace().real();
    return p;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if(n == 0) return {};
    if(n == 1) return {lo};
    std::vector<double> out(n);
    for(std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

} // namespace qest
