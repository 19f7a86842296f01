#pragma once

// Estimation strategies for phase-type and projector-class channel families:
// the entangled parallel Fourier strategy, its mixed-register equivalent,
// amplified Bernoulli experiments, parity experiments and the bitwise
// mixed-radix estimator.

#include "qest/channels.hpp"
#include "qest/qlin.hpp"
#include "qest/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qest {

// ---------------------------------------------------------------------------
// Parallel strategy

struct ParallelPlan {
    std::size_t         n = 1;       // channel uses
    std::vector<double> amplitudes;  // a_0..a_N, a_0 = 0
    double              lambda_min = 0.0;
};

/// The N×N tridiagonal matrix with unit diagonal and −1/2 off the diagonal.
Eigen::MatrixXd fourier_cost_matrix(std::size_t n);

/// a_k = √(2/(N+1)) sin(kπ/(N+1)); λ_min from the eigensolver, checked against 2 sin²(π/(2N+2)).
ParallelPlan parallel_plan(std::size_t n);

/// Pr(l) for l = 0..N.
std::vector<double> parallel_distribution(const ParallelPlan &plan, double theta);

/// 1 − Σ_{k≥2} a_{k−1} a_k
double parallel_w_closed_form(const ParallelPlan &plan);

/// E[1 − cos 2π(θ − l/(N+1))] from the distribution; throws if it differs
/// from the closed form by more than 1e-10.
double parallel_w(const ParallelPlan &plan, double theta);

/// One draw of l/(N+1).
double parallel_sample(const ParallelPlan &plan, double theta, RngStream &rng);

/// `count` draws of l/(N+1) sharing one evaluation of the distribution; the
/// sequence equals `count` successive parallel_sample calls on the same stream.
std::vector<double> parallel_samples(const ParallelPlan &plan, double theta, std::size_t count, RngStream &rng);

/// Register of n qubits prepared in Σ a_x|x⟩; qubit j (weight 2^{j−1}) sees
/// diag(1, e^{2πiθ}) applied 2^{j−1} times, followed by an inverse QFT.
std::vector<double> mixed_register_distribution(std::size_t n_qubits, const std::vector<double> &amplitudes, double theta);

// ---------------------------------------------------------------------------
// Amplified Bernoulli experiments

enum class Quadrature { cosine, sine };

/// Sampler contract for the bitwise estimator. probability(m, q) is the
/// success probability at multiplier m; one sample costs cost(m) channel uses.
/// The normalized parameter φ = θ / period lies in [0, 1/2].
struct AmplifiableExperiment {
    std::string                                     family;
    double                                          theta  = 0.0;
    double                                          period = 1.0;
    std::function<double(long long, Quadrature)>    probability;
    std::function<long long(long long)>             cost;

    [[nodiscard]] double normalized() const { return theta / period; }
};

/// cos²(πmφ) or (1 − sin 2πmφ)/2.
double ideal_phase_probability(double phi, long long m, Quadrature q);

/// (1 − (1−ε)^m)/2 + (1−ε)^m · ideal_phase_probability.
double noisy_phase_probability(double theta, double eps, long long m, Quadrature q);

/// Sequential sampler: |+⟩, m applications of the channel, optional S gate, X-basis measurement.
double sequential_phase_probability(const ParamChannelFamily &family, double theta, long long m, Quadrature q);

/// GHZ sampler: m-qubit GHZ state, one channel use per qubit, optional S gate
/// on the first qubit, then measurement of the X-parity.
double ghz_phase_probability(const ParamChannelFamily &family, double theta, long long m, Quadrature q);

/// Experiment for phase_unitary or depolarized_unitary (phase convention, maximally mixed ρ₀).
AmplifiableExperiment phase_experiment(const ParamChannelFamily &family, double theta);

/// Pr(even) for |Ψ_n⟩ with each qubit pre-rotated by E(α) then sent through the
/// projector-class channel. Simulated for n ≤ 8, closed form cos²(n(θ+α)) above.
double parity_probability(double theta, const std::function<double(double)> &eta, std::size_t n, double alpha);

/// Explicit simulation regardless of n.
double parity_probability_simulated(double theta, const std::function<double(double)> &eta, std::size_t n, double alpha);

/// Parity experiment with m qubits at multiplier m; the sine quadrature uses α = π/(4m).
AmplifiableExperiment parity_experiment(double theta, const std::function<double(double)> &eta);

// ---------------------------------------------------------------------------
// Bitwise estimator

/// ⌈ln(2k/ε) / (2 δ²)⌉
long long step_sample_size(int k, double epsilon, double delta_p);

/// How the final estimate is read out of the step records. `digits` is the
/// plain mixed-radix sum Σ ν_i / Π_{j≤i} r_j; `residual` also appends the last
/// step's estimate of the remaining fraction, (r_k t_k − ν_k) / Π_{j≤k} r_j.
enum class BitwiseReadout { residual, digits };

struct BitwiseConfig {
    int            k          = 4;
    double         epsilon    = 0.0; // 0 selects 3^{−2k}
    double         delta_p    = 0.125;
    long long      n_per_step = 0; // 0 selects step_sample_size
    BitwiseReadout readout    = BitwiseReadout::residual;

    /// Fills defaults and validates.
    [[nodiscard]] BitwiseConfig resolved() const;
};

struct BitwiseStep {
    long long multiplier = 1;
    int       radix      = 2;
    int       digit      = 0;   // ν_i from the case table
    int       carry      = 0;   // integer part of the unwrapped estimate
    double    raw        = 0.0; // θ̄_i ∈ [0, 1)
    double    cos_freq   = 0.0;
    double    sin_freq   = 0.0;
};

struct EstimationResult {
    double                   theta_hat  = 0.0; // in units of the experiment's θ
    double                   phi_hat    = 0.0; // normalized, in [0, 1/2], per config.readout
    double                   phi_digits = 0.0; // mixed-radix digit sum, folded to [0, 1/2]
    long long                total_uses = 0;
    std::vector<BitwiseStep> steps;
    BitwiseConfig            config;

    /// Π r_i
    [[nodiscard]] double radix_product() const;
};

/// Step i (1-based) runs at multiplier Π_{j<i} r_j in both quadratures.
EstimationResult bitwise_estimate(const AmplifiableExperiment &exp, const BitwiseConfig &cfg, RngStream &rng);

/// Same trace driven by exact probabilities (no sampling noise).
EstimationResult bitwise_estimate_exact(const AmplifiableExperiment &exp, const BitwiseConfig &cfg);

} // namespace qest
