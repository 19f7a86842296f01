#pragma once

// Dense complex linear algebra and quantum-state primitives.
//
// Every space is an explicit tensor product of small factors. Composite
// indices use the convention that the leftmost factor is the most
// significant digit, so tensor(A, B)(i*dB + k, j*dB + l) = A(i,j) B(k,l).

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qest {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix2    = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

/// Kronecker product, left factor most significant.
template<typename DerivedA, typename DerivedB>
auto tensor(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b) {
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = Eigen::kroneckerProduct(a.eval(), b.eval());
    return out;
}

/// Tensor product of a list of factors (empty list gives the 1x1 identity).
Matrix tensor_all(std::span<const Matrix> factors);

/// Frobenius norm of a - b.
template<typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar frobenius_distance(const Eigen::MatrixBase<DerivedA> &a, const Eigen::MatrixBase<DerivedB> &b) {
    if(a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("frobenius_distance: shape mismatch (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
    return (a - b).norm();
}

/// ‖A − A†‖_F
template<typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived> &a) {
    return (a - a.adjoint()).norm();
}

/// Trace over every subsystem not listed in `keep`. Kept factors appear in
/// ascending index order in the result.
template<typename Derived>
auto partial_trace(const Eigen::MatrixBase<Derived> &m, std::span<const std::size_t> dims, std::span<const std::size_t> keep) {
    using Scalar  = typename Derived::Scalar;
    using MatType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    if(m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != total)
        throw std::invalid_argument("partial_trace: dims multiply to " + std::to_string(total) + " but matrix is " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));

    std::vector<bool> kept(dims.size(), false);
    for(auto k : keep) {
        if(k >= dims.size()) throw std::invalid_argument("partial_trace: keep index " + std::to_string(k) + " out of range");
        kept[k] = true;
    }

    std::size_t keep_dim = 1, trace_dim = 1;
    for(std::size_t s = 0; s < dims.size(); ++s) (kept[s] ? keep_dim : trace_dim) *= dims[s];

    // Split each composite index into its kept and traced parts.
    std::vector<std::size_t> kept_part(total), traced_part(total);
    for(std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx, kp = 0, tp = 0, kscale = 1, tscale = 1;
        for(std::size_t s = dims.size(); s-- > 0;) {
            const std::size_t digit = rem % dims[s];
            rem /= dims[s];
            if(kept[s]) {
                kp += digit * kscale;
                kscale *= dims[s];
            } else {
                tp += digit * tscale;
                tscale *= dims[s];
            }
        }
        kept_part[idx]   = kp;
        traced_part[idx] = tp;
    }

    MatType out = MatType::Zero(static_cast<Eigen::Index>(keep_dim), static_cast<Eigen::Index>(keep_dim));
    for(std::size_t r = 0; r < total; ++r)
        for(std::size_t c = 0; c < total; ++c)
            if(traced_part[r] == traced_part[c]) out(kept_part[r], kept_part[c]) += m(r, c);
    return out;
}

inline Matrix partial_trace(const Matrix &m, std::initializer_list<std::size_t> dims, std::initializer_list<std::size_t> keep) {
    return partial_trace(m, std::span<const std::size_t>(dims.begin(), dims.size()), std::span<const std::size_t>(keep.begin(), keep.size()));
}

struct HermitianEig {
    RealVector values;  // ascending
    Matrix     vectors; // orthonormal columns
};

/// Spectral decomposition of a Hermitian matrix. The input is symmetrized
/// as (H + H†)/2 first; inputs with ‖H − H†‖_F > tol·max(1, ‖H‖_F) are rejected.
HermitianEig eig_hermitian(const Matrix &h, double tol = 1e-10);

/// Smallest eigenvalue of the Hermitian part of h.
double min_eigenvalue(const Matrix &h);

namespace pauli {
    Matrix2 I();
    Matrix2 X();
    Matrix2 Y();
    Matrix2 Z();
    /// σ_0..σ_3
    Matrix2 sigma(int i);
} // namespace pauli

/// Unit-trace positive semidefinite operator.
class DensityOperator {
    public:
    static constexpr double hermitian_tol = 1e-12;
    static constexpr double trace_tol     = 1e-12;
    static constexpr double psd_tol       = -1e-10;

    /// Validates the invariants; throws std::invalid_argument naming the violation.
    explicit DensityOperator(Matrix m);

    static DensityOperator from_ket(const Vector &psi);
    static DensityOperator maximally_mixed(std::size_t dim);
    /// |i⟩⟨i|
    static DensityOperator basis(std::size_t dim, std::size_t i);

    [[nodiscard]] std::size_t   dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    [[nodiscard]] const Matrix &matrix() const { return matrix_; }

    private:
    Matrix matrix_;
};

/// Positive-operator valued measure.
class Povm {
    public:
    static constexpr double tol = 1e-10;

    explicit Povm(std::vector<Matrix> elements);

    static Povm computational(std::size_t dim);
    /// {|+⟩⟨+|, |−⟩⟨−|}
    static Povm hadamard();
    /// Projectors onto the columns of a unitary.
    static Povm from_basis(const Matrix &unitary);

    [[nodiscard]] std::size_t                dim() const { return dim_; }
    [[nodiscard]] std::size_t                size() const { return elements_.size(); }
    [[nodiscard]] const std::vector<Matrix> &elements() const { return elements_; }

    private:
    std::vector<Matrix> elements_;
    std::size_t         dim_ = 0;
};

/// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// Outcome probabilities tr(M_i ρ).
RealVector outcome_probabilities(const Povm &m, const Matrix &rho);

} // namespace qest
