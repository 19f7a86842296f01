#pragma once

// Quantum channels in Kraus and Choi form, and the catalog of parameterized
// channel families.
//
// Choi convention: C = (I ⊗ E)(|Ψ⟩⟨Ψ|) with |Ψ⟩ = Σ_i |ii⟩/√d, the reference
// system being the first (most significant) factor. C therefore has unit
// trace and tr_out C = I/d for a trace-preserving E.

#include "qest/qlin.hpp"
#include "qest/record.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qest {

class KrausChannel {
    public:
    static constexpr double completeness_tol = 1e-10;

    /// Each operator is out_dim x in_dim; Σ E_i†E_i must equal I within completeness_tol.
    KrausChannel(std::size_t in_dim, std::size_t out_dim, std::vector<Matrix> operators);

    static KrausChannel identity(std::size_t dim);
    static KrausChannel unitary(const Matrix &u);

    [[nodiscard]] std::size_t                in_dim() const { return in_dim_; }
    [[nodiscard]] std::size_t                out_dim() const { return out_dim_; }
    [[nodiscard]] const std::vector<Matrix> &operators() const { return operators_; }

    /// Σ E_i X E_i† for an arbitrary (not necessarily normalized) operator X.
    [[nodiscard]] Matrix apply(const Matrix &x) const;

    private:
    std::size_t         in_dim_;
    std::size_t         out_dim_;
    std::vector<Matrix> operators_;
};

class ChoiMatrix {
    public:
    static constexpr double tol = 1e-10;

    /// Validates complete positivity and trace preservation to within `check_tol`.
    ChoiMatrix(std::size_t in_dim, std::size_t out_dim, Matrix matrix, double check_tol = tol);

    [[nodiscard]] std::size_t   in_dim() const { return in_dim_; }
    [[nodiscard]] std::size_t   out_dim() const { return out_dim_; }
    [[nodiscard]] const Matrix &matrix() const { return matrix_; }

    private:
    std::size_t in_dim_;
    std::size_t out_dim_;
    Matrix      matrix_;
};

/// Row-stochastic transition matrix q(y|x) of a discrete memoryless channel.
class StochasticMatrix {
    public:
    static constexpr double tol = 1e-12;

    explicit StochasticMatrix(Eigen::MatrixXd q);

    [[nodiscard]] std::size_t            inputs() const { return static_cast<std::size_t>(q_.rows()); }
    [[nodiscard]] std::size_t            outputs() const { return static_cast<std::size_t>(q_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd &matrix() const { return q_; }
    [[nodiscard]] double                 operator()(std::size_t x, std::size_t y) const {
        return q_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }

    private:
    Eigen::MatrixXd q_;
};

DensityOperator apply_channel(const KrausChannel &c, const DensityOperator &rho);

/// Channel outer ∘ inner, operators {F_j E_i}.
KrausChannel compose(const KrausChannel &outer, const KrausChannel &inner);

/// m-fold self-composition (m ≥ 1). Operators with Frobenius norm ≤ 1e-14 are
/// dropped, and the set is re-factorized through the Choi matrix whenever it
/// grows past in_dim·out_dim.
KrausChannel power(const KrausChannel &c, std::size_t m);

ChoiMatrix choi(const KrausChannel &c);

/// Minimal Kraus set from the spectral decomposition of the Choi matrix.
KrausChannel kraus_from_choi(const ChoiMatrix &c);

/// Action of a channel given by its Choi matrix: d · tr_ref[(ρᵀ ⊗ I) C].
Matrix apply_choi(const ChoiMatrix &c, const Matrix &rho);

/// Frobenius distance between Choi matrices.
double channel_distance(const KrausChannel &a, const KrausChannel &b);
double channel_distance(const ChoiMatrix &a, const ChoiMatrix &b);

/// Representation-independent equality, compared on Choi matrices.
bool channels_equal(const KrausChannel &a, const KrausChannel &b, double tol);

// Fixed matrices used by the catalog.

/// diag(1, e^{2πiθ})
Matrix2 phase_unitary_matrix(double theta);
/// diag(e^{iθ}, e^{−iθ})
Matrix2 symmetric_phase_matrix(double theta);
/// E(θ) = cos θ I + i sin θ Y = [[cos, sin], [−sin, cos]]
Matrix2 rotation_matrix(double theta);
/// |0⟩⟨θ₀| + |1⟩⟨θ₁| with |θ₀⟩ = cos θ|0⟩ + sin θ|1⟩, |θ₁⟩ = sin θ|0⟩ − cos θ|1⟩
Matrix2 basis_theta_unitary(double theta);

/// A map θ ↦ channel over the bounded set [theta_min, theta_max].
struct ParamChannelFamily {
    std::string kind;
    std::string spec; // serialized record, empty for families built in code
    double      theta_min = 0.0;
    double      theta_max = 1.0;
    std::size_t in_dim    = 2;
    std::size_t out_dim   = 2;

    std::function<KrausChannel(double)> evaluator;
    /// Optional analytic derivative of the map: (θ, X) ↦ d/dθ E_θ(X). Valid on the open interval.
    std::function<Matrix(double, const Matrix &)> derivative;

    /// Evaluates the channel, rejecting θ outside [theta_min, theta_max].
    [[nodiscard]] KrausChannel operator()(double theta) const;
    [[nodiscard]] bool         contains(double theta) const;
};

namespace families {
    ParamChannelFamily identity(std::size_t dim = 2);
    ParamChannelFamily phase_unitary();
    ParamChannelFamily symmetric_phase();
    ParamChannelFamily depolarizing();
    /// p(θ) must be a probability vector on [theta_min, theta_max]; dp is optional.
    ParamChannelFamily pauli(std::function<std::array<double, 4>(double)> p, std::function<std::array<double, 4>(double)> dp,
                             double theta_min = 0.0, double theta_max = 1.0);
    ParamChannelFamily amplitude_damping();
    ParamChannelFamily generalized_amplitude_damping(double p);
    /// eta maps [0, π/2] into [0, 1]; deta is optional.
    ParamChannelFamily projector_class(std::function<double(double)> eta, std::function<double(double)> deta = {});
    /// Q(θ) = (1−θ) Q0 + θ Q1 over θ ∈ [0, 1].
    ParamChannelFamily dmc(const StochasticMatrix &q0, const StochasticMatrix &q1);
    ParamChannelFamily dmc(const StochasticMatrix &q);

    enum class PhaseConvention { phase, symmetric };
    /// ε ρ₀ tr(ρ) + (1 − ε) U_θ ρ U_θ†
    ParamChannelFamily depolarized_unitary(double epsilon, const DensityOperator &rho0, PhaseConvention unitary = PhaseConvention::phase);
    /// {|0⟩⟨0|, |1⟩⟨1|}, constant in θ.
    ParamChannelFamily computational_measurement();
    /// {|0⟩⟨θ₀|, |1⟩⟨θ₁|}
    ParamChannelFamily basis_measurement();
} // namespace families

/// Kraus channel of the Pauli mixture Σ p_i σ_i ρ σ_i.
KrausChannel pauli_channel(const std::array<double, 4> &p);
/// Kraus channel {√q_xy |y⟩⟨x|}.
KrausChannel dmc_channel(const StochasticMatrix &q);

/// Row-major list of `rows` rows into a validated stochastic matrix; `key` names the source in diagnostics.
StochasticMatrix stochastic_from_list(const std::vector<double> &values, std::size_t rows, const std::string &key);

/// Parses a named density operator: mixed, zero, one, plus, minus.
DensityOperator named_state(const std::string &name, std::size_t dim = 2);

/// Builds a catalog family from a key=value record (see README for keys).
/// Every family is checked on a 33-point grid before it is returned.
ParamChannelFamily make_family(const KeyValueRecord &spec);
ParamChannelFamily make_family(std::string_view spec);

/// Throws if the family's evaluator violates channel invariants on an n-point grid.
void validate_family(const ParamChannelFamily &family, std::size_t points = 33);

struct DepolarizingComponent {
    double                    epsilon = 0.0;
    std::optional<ChoiMatrix> residual; // Choi of U with E = ε ρ₀ + (1−ε) U, present when 0 < ε < 1
};

/// Largest ε such that choi(c) − ε·(I/d ⊗ ρ₀) stays PSD (eigenvalue floor −1e-10),
/// found by bisection to 1e-9. ε below the bisection tolerance is reported as 0.
DepolarizingComponent max_depolarizing_component(const KrausChannel &c, const DensityOperator &rho0);

} // namespace qest
