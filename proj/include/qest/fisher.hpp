#pragma once

// Classical, measurement-restricted and quantum Fisher information.

#include "qest/channels.hpp"
#include "qest/qlin.hpp"

#include <functional>
#include <limits>
#include <string>

namespace qest {

/// θ ↦ probability vector over a fixed outcome set.
struct ParamDistribution {
    std::size_t                          outcomes = 0;
    std::function<RealVector(double)>    probabilities;
    std::function<RealVector(double)>    derivative; // optional
};

/// θ ↦ ρ(θ) over [theta_min, theta_max].
struct ParamStateFamily {
    std::size_t                            dim       = 2;
    double                                 theta_min = 0.0;
    double                                 theta_max = 1.0;
    std::function<DensityOperator(double)> state;
    std::function<Matrix(double)>          derivative; // optional, Hermitian and traceless
};

struct StateDerivative {
    Matrix value;
    bool   analytic   = false;
    bool   one_sided  = false; // θ within h of the boundary
};

inline constexpr double kCentralStep   = 1e-5;
inline constexpr double kOneSidedStep  = 1e-6;
inline constexpr double kSldCutoff     = 1e-12;

/// ρ′(θ): the analytic derivative when the family has one and θ is interior,
/// otherwise a symmetrized central difference with step 1e-5 (one-sided with
/// step 1e-6 near the boundary).
StateDerivative state_derivative(const ParamStateFamily &f, double theta);

/// L_ρ(O): in the eigenbasis of ρ, entry (j,k) becomes 2 O_jk / (p_j + p_k)
/// when p_j + p_k > tau and 0 otherwise.
Matrix sld_apply(const DensityOperator &rho, const Matrix &o, double tau = kSldCutoff);

/// tr(ρ′ L_ρ(ρ′)). Values in [−1e-8, 0) are clamped to 0; anything lower is a numerical failure.
double quantum_fisher(const ParamStateFamily &f, double theta, double tau = kSldCutoff);

/// Σ_x (p′_x)² / p_x over outcomes with p_x > 1e-12.
double classical_fisher(const ParamDistribution &d, double theta);

/// Σ_i tr(M_i ρ′)² / tr(M_i ρ) over elements with tr(M_i ρ) > 1e-12.
double povm_fisher(const ParamStateFamily &f, const Povm &m, double theta);

/// 1/(n j); +∞ when j ≤ 0.
double cramer_rao_bound(double j, std::size_t n);

enum class FisherMethod { classical, povm, quantum };
std::string to_string(FisherMethod m);

struct FisherReport {
    double       theta   = 0.0;
    double       j_value = 0.0;
    FisherMethod method  = FisherMethod::quantum;
    std::size_t  n       = 1;
    double       bound   = std::numeric_limits<double>::infinity();
    bool         one_sided = false;
};

FisherReport quantum_fisher_report(const ParamStateFamily &f, double theta, std::size_t n);
FisherReport povm_fisher_report(const ParamStateFamily &f, const Povm &m, double theta, std::size_t n);

/// Bernoulli(θ) on [0, 1] with analytic derivative.
ParamDistribution bernoulli_distribution();

/// Outcome distribution of a POVM applied to a state family.
ParamDistribution measured_distribution(const ParamStateFamily &f, const Povm &m);

/// ρ(θ) = E_θ(probe), with ρ′ from the family's analytic map derivative when present.
ParamStateFamily channel_output_family(const ParamChannelFamily &family, const DensityOperator &probe);

/// ρ(θ) = (I ⊗ E_θ)(|Ψ⟩⟨Ψ|), the normalized Choi state.
ParamStateFamily choi_state_family(const ParamChannelFamily &family);

/// ρ(θ) = σ(θ) ⊗ τ(θ), derivative by the product rule.
ParamStateFamily product_family(const ParamStateFamily &a, const ParamStateFamily &b);

/// n-fold tensor power of a family.
ParamStateFamily tensor_power_family(const ParamStateFamily &f, std::size_t n);

} // namespace qest
