#pragma once

// Reproducible random objects for property tests, drawn from Philox streams.

#include "qest/fisher.hpp"
#include "qest/rng.hpp"

#include <cmath>

namespace qest::testing {

inline double normal(RngStream &rng) {
    // Box-Muller on two uniforms; 1 − u keeps the logarithm finite.
    const double u = 1.0 - rng.uniform(), v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
}

inline Matrix random_complex(RngStream &rng, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for(Eigen::Index i = 0; i < rows; ++i)
        for(Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    return m;
}

inline Matrix random_unitary(RngStream &rng, Eigen::Index d) {
    Eigen::HouseholderQR<Matrix> qr(random_complex(rng, d, d));
    return qr.householderQ() * Matrix::Identity(d, d);
}

inline DensityOperator random_density(RngStream &rng, Eigen::Index d) {
    const Matrix g   = random_complex(rng, d, d);
    Matrix       rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityOperator((rho + rho.adjoint()) / 2.0);
}

/// Qubit family ρ(θ) = (I + r(θ)·σ)/2 where r(θ) has length ℓ₀ + ℓ₁θ and is
/// rotated about a random axis at angular speed ω.
inline ParamStateFamily random_qubit_family(RngStream &rng) {
    Eigen::Vector3d axis(normal(rng), normal(rng), normal(rng)), start(normal(rng), normal(rng), normal(rng));
    axis.normalize();
    start.normalize();
    const double l0 = 0.2 + 0.6 * rng.uniform();
    const double l1 = 0.3 * (rng.uniform() - 0.5);
    const double w  = 0.5 + 3.0 * rng.uniform();
    ParamStateFamily f;
    f.dim       = 2;
    f.theta_min = 0.0;
    f.theta_max = 1.0;
    f.state     = [=](double t) {
        const Eigen::Vector3d r = (l0 + l1 * t) * Eigen::AngleAxisd(w * t, axis).toRotationMatrix() * start;
        Matrix                rho = Matrix::Identity(2, 2);
        for(int i = 0; i < 3; ++i) rho += r(i) * Matrix(pauli::sigma(i + 1));
        return DensityOperator(rho / 2.0);
    };
    return f;
}

/// POVM with `count` elements S^{-1/2} A_i S^{-1/2} built from random PSD A_i.
inline Povm random_povm(RngStream &rng, Eigen::Index d, int count) {
    std::vector<Matrix> a;
    Matrix              s = Matrix::Zero(d, d);
    for(int i = 0; i < count; ++i) {
        const Matrix g = random_complex(rng, d, d);
        a.push_back(g * g.adjoint());
        s += a.back();
    }
    const auto eig      = eig_hermitian(s);
    Matrix     inv_sqrt = eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.vectors.adjoint();
    std::vector<Matrix> elements;
    for(const auto &x : a) {
        Matrix e = inv_sqrt * x * inv_sqrt;
        elements.push_back((e + e.adjoint()) / 2.0);
    }
    return Povm(std::move(elements));
}

} // namespace qest::testing
