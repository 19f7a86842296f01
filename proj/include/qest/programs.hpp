#pragma once

// Programmable channels: a θ-dependent program state fed with the data into
// a fixed measure-and-condition circuit. The induced channel on the data is
// extracted exactly by enumerating every measurement branch.

#include "qest/channels.hpp"
#include "qest/qlin.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace qest {

using Variables = std::map<std::string, long long>;
using Predicate = std::function<bool(const Variables &)>;

struct Instruction;

namespace op {
    /// Unitary on the listed qubits, first listed qubit most significant.
    struct Gate {
        Matrix           unitary;
        std::vector<int> qubits;
    };
    /// Computational-basis measurement; the result (first qubit most significant) is stored in `var`.
    struct Measure {
        std::vector<int> qubits;
        std::string      var;
    };
    struct Swap {
        int a;
        int b;
    };
    struct Discard {
        std::vector<int> qubits;
    };
    struct If {
        Predicate                condition;
        std::vector<Instruction> body;
    };
    /// Runs `body` as a subroutine; a Return inside it stores its value in `var`.
    struct Call {
        std::string              var;
        std::vector<Instruction> body;
    };
    /// Ends the innermost Call (or the whole circuit at top level).
    struct Return {
        long long value;
    };
} // namespace op

struct Instruction {
    std::variant<op::Gate, op::Measure, op::Swap, op::Discard, op::If, op::Call, op::Return> op;
};

// Instruction builders.
Instruction gate(Matrix u, std::vector<int> qubits);
Instruction measure(std::vector<int> qubits, std::string var);
Instruction swap(int a, int b);
Instruction discard(std::vector<int> qubits);
Instruction when(Predicate condition, std::vector<Instruction> body);
Instruction call(std::string var, std::vector<Instruction> body);
Instruction ret(long long value);

/// Register layout and instruction list. Qubits 0..program_qubits−1 hold the
/// program; the next data_qubits hold the data input.
class ProgramCircuit {
    public:
    ProgramCircuit(int program_qubits, int data_qubits, std::vector<Instruction> instructions, std::vector<int> outputs);

    [[nodiscard]] int                              program_qubits() const { return program_qubits_; }
    [[nodiscard]] int                              data_qubits() const { return data_qubits_; }
    [[nodiscard]] int                              total_qubits() const { return program_qubits_ + data_qubits_; }
    [[nodiscard]] int                              data_qubit(int i) const { return program_qubits_ + i; }
    [[nodiscard]] const std::vector<Instruction> &instructions() const { return instructions_; }
    [[nodiscard]] const std::vector<int>          &outputs() const { return outputs_; }

    private:
    int                      program_qubits_;
    int                      data_qubits_;
    std::vector<Instruction> instructions_;
    std::vector<int>         outputs_;
};

/// Program state as a product of consecutive factors over the program qubits.
struct ProgramState {
    std::vector<DensityOperator> factors;

    [[nodiscard]] DensityOperator density() const;
};

struct ProgrammableImplementation {
    std::string                         kind;
    std::function<ProgramState(double)> program;
    ProgramCircuit                      circuit;
    std::size_t                         data_dim   = 2;
    std::size_t                         output_dim = 2;
};

struct BranchRecord {
    std::vector<long long> measurements; // in execution order
    Variables              variables;
    double                 probability = 0.0;
    Matrix                 output; // unnormalized operator on reference ⊗ outputs
};

/// Every branch of the circuit with the data half of |Ψ⟩ = Σ|ii⟩/√d as input.
/// Branches with identical measurement histories are merged; order is deterministic.
std::vector<BranchRecord> run_branches(const ProgrammableImplementation &impl, double theta);

/// Choi matrix of the induced channel on the data system.
ChoiMatrix induced_channel(const ProgrammableImplementation &impl, double theta);

struct ConditionalChoi {
    double weight = 0.0;
    Matrix choi;  // normalized by weight, zero when weight is 0
};

/// Sum over branches whose variables satisfy `select`.
ConditionalChoi induced_channel_if(const ProgrammableImplementation &impl, double theta, const Predicate &select);

namespace programs {
    /// Probabilistic diag(e^{iθ}, e^{−iθ}) with k program qubits; variable "success".
    ProgrammableImplementation prob_unitary(int k);
    ProgrammableImplementation depolarizing();
    /// p(θ) is the probability vector loaded into the two program qubits.
    ProgrammableImplementation pauli(std::function<std::array<double, 4>(double)> p);
    /// Q(θ) = (1−θ)Q0 + θQ1; input and output alphabet sizes must be powers of two.
    ProgrammableImplementation dmc(const StochasticMatrix &q0, const StochasticMatrix &q1);
    /// ε ρ₀ + (1−ε) U_θ ρ U_θ† with U_θ = diag(e^{iθ}, e^{−iθ}); requires ε ≥ 2^{−k}.
    ProgrammableImplementation dnoise(double epsilon, const DensityOperator &rho0, int k);
} // namespace programs

/// Builds a program by name from a key=value record of parameters.
ProgrammableImplementation make_program(const std::string &kind, const KeyValueRecord &params);
/// The catalog family a named program is meant to realize.
ParamChannelFamily target_family(const std::string &kind, const KeyValueRecord &params);

struct VerificationReport {
    std::vector<double> thetas;
    std::vector<double> distances;
    double              max_distance = 0.0;
    double              tol          = 0.0;
    bool                pass         = false;
};

VerificationReport verify_programmable(const ProgrammableImplementation &impl, const ParamChannelFamily &family, const std::vector<double> &grid,
                                       double tol);

/// Total probability of the success branches of a prob_unitary program.
double success_probability(const ProgrammableImplementation &impl, double theta);

} // namespace qest
