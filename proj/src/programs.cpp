#include "qest/programs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qest {

Instruction gate(Matrix u, std::vector<int> qubits) { return {op::Gate{std::move(u), std::move(qubits)}}; }
Instruction measure(std::vector<int> qubits, std::string var) { return {op::Measure{std::move(qubits), std::move(var)}}; }
Instruction swap(int a, int b) { return {op::Swap{a, b}}; }
Instruction discard(std::vector<int> qubits) { return {op::Discard{std::move(qubits)}}; }
Instruction when(Predicate condition, std::vector<Instruction> body) { return {op::If{std::move(condition), std::move(body)}}; }
Instruction call(std::string var, std::vector<Instruction> body) { return {op::Call{std::move(var), std::move(body)}}; }
Instruction ret(long long value) { return {op::Return{value}}; }

namespace {

    void check_qubits(const std::vector<Instruction> &list, int total) {
        auto check = [total](int q) {
            if(q < 0 || q >= total) throw std::invalid_argument("ProgramCircuit: qubit " + std::to_string(q) + " is outside the register");
        };
        for(const auto &ins : list) {
            std::visit(
                [&](const auto &o) {
                    using T = std::decay_t<decltype(o)>;
                    if constexpr(std::is_same_v<T, op::Gate>) {
                        for(int q : o.qubits) check(q);
                        const auto dim = Eigen::Index{1} << o.qubits.size();
                        if(o.unitary.rows() != dim || o.unitary.cols() != dim) throw std::invalid_argument("ProgramCircuit: gate size does not match its qubits");
                    } else if constexpr(std::is_same_v<T, op::Measure> || std::is_same_v<T, op::Discard>) {
                        for(int q : o.qubits) check(q);
                    } else if constexpr(std::is_same_v<T, op::Swap>) {
                        check(o.a);
                        check(o.b);
                    } else if constexpr(std::is_same_v<T, op::If> || std::is_same_v<T, op::Call>) {
                        check_qubits(o.body, total);
                    }
                },
                ins.op);
        }
    }

} // namespace

ProgramCircuit::ProgramCircuit(int program_qubits, int data_qubits, std::vector<Instruction> instructions, std::vector<int> outputs)
    : program_qubits_(program_qubits), data_qubits_(data_qubits), instructions_(std::move(instructions)), outputs_(std::move(outputs)) {
    if(program_qubits < 0 || data_qubits < 1) throw std::invalid_argument("ProgramCircuit: need at least one data qubit");
    check_qubits(instructions_, total_qubits());
    std::set<int> seen;
    for(int q : outputs_) {
        if(q < 0 || q >= total_qubits()) throw std::invalid_argument("ProgramCircuit: output qubit " + std::to_string(q) + " is outside the register");
        if(!seen.insert(q).second) throw std::invalid_argument("ProgramCircuit: output qubit listed twice");
    }
    if(outputs_.empty()) throw std::invalid_argument("ProgramCircuit: no output qubits");
}

DensityOperator ProgramState::density() const {
    Matrix out = Matrix::Identity(1, 1);
    for(const auto &f : factors) out = tensor(out, f.matrix());
    return DensityOperator(out);
}

namespace {

    // Pure-state branch over the register [reference | program | data].
    struct Branch {
        Vector                 psi; // unnormalized, squared norm is the branch weight
        std::vector<long long> history;
        Variables              vars;
        std::vector<bool>      discarded;
        bool                   returning = false;
        long long              value     = 0;
    };

    class Simulator {
        public:
        Simulator(int reference, int circuit_qubits) : offset_(reference), n_(reference + circuit_qubits) {}

        std::vector<Branch> run(const std::vector<Instruction> &list, std::vector<Branch> branches) const {
            for(const auto &ins : list) {
                std::vector<Branch> next;
                next.reserve(branches.size());
                std::vector<Branch> active;
                for(auto &b : branches) (b.returning ? next : active).push_back(std::move(b));
                if(!active.empty()) {
                    auto produced = step(ins, std::move(active));
                    for(auto &b : produced) next.push_back(std::move(b));
                }
                branches = std::move(next);
            }
            return branches;
        }

        private:
        int offset_;
        int n_;

        [[nodiscard]] std::size_t bit(int q) const { return static_cast<std::size_t>(n_ - 1 - (offset_ + q)); }

        void require_live(const Branch &b, int q) const {
            if(b.discarded[static_cast<std::size_t>(q)]) throw std::invalid_argument("program circuit: qubit " + std::to_string(q) + " used after discard");
        }

        void apply_gate(Branch &b, const op::Gate &g) const {
            for(int q : g.qubits) require_live(b, q);
            const std::size_t m    = g.qubits.size();
            const std::size_t dim  = std::size_t{1} << m;
            std::size_t       mask = 0;
            std::vector<std::size_t> shifts(m);
            for(std::size_t i = 0; i < m; ++i) {
                shifts[i] = bit(g.qubits[i]);
                mask |= std::size_t{1} << shifts[i];
            }
            std::vector<std::size_t> offsets(dim, 0);
            for(std::size_t s = 0; s < dim; ++s)
                for(std::size_t i = 0; i < m; ++i)
                    if((s >> (m - 1 - i)) & 1U) offsets[s] |= std::size_t{1} << shifts[i];
            Vector local(static_cast<Eigen::Index>(dim));
            const std::size_t total = std::size_t{1} << n_;
            for(std::size_t base = 0; base < total; ++base) {
                if(base & mask) continue;
                for(std::size_t s = 0; s < dim; ++s) local(static_cast<Eigen::Index>(s)) = b.psi(static_cast<Eigen::Index>(base | offsets[s]));
                const Vector out = g.unitary * local;
                for(std::size_t s = 0; s < dim; ++s) b.psi(static_cast<Eigen::Index>(base | offsets[s])) = out(static_cast<Eigen::Index>(s));
            }
        }

        std::vector<Branch> apply_measure(Branch &b, const op::Measure &m) const {
            for(int q : m.qubits) require_live(b, q);
            const std::size_t k     = m.qubits.size();
            const std::size_t total = std::size_t{1} << n_;
            std::vector<Branch> out;
            for(std::size_t r = 0; r < (std::size_t{1} << k); ++r) {
                Branch nb = b;
                for(std::size_t idx = 0; idx < total; ++idx) {
                    std::size_t got = 0;
                    for(std::size_t i = 0; i < k; ++i) got = (got << 1) | ((idx >> bit(m.qubits[i])) & 1U);
                    if(got != r) nb.psi(static_cast<Eigen::Index>(idx)) = 0.0;
                }
                if(nb.psi.squaredNorm() == 0.0) continue;
                nb.history.push_back(static_cast<long long>(r));
                nb.vars[m.var] = static_cast<long long>(r);
                out.push_back(std::move(nb));
            }
            return out;
        }

        void apply_swap(Branch &b, const op::Swap &s) const {
            require_live(b, s.a);
            require_live(b, s.b);
            if(s.a == s.b) return;
            const std::size_t ba = bit(s.a), bb = bit(s.b);
            const std::size_t total = std::size_t{1} << n_;
            for(std::size_t idx = 0; idx < total; ++idx) {
                const std::size_t va = (idx >> ba) & 1U, vb = (idx >> bb) & 1U;
                if(va == 1 && vb == 0) {
                    const std::size_t other = (idx & ~(std::size_t{1} << ba)) | (std::size_t{1} << bb);
                    std::swap(b.psi(static_cast<Eigen::Index>(idx)), b.psi(static_cast<Eigen::Index>(other)));
                }
            }
        }

        std::vector<Branch> step(const Instruction &ins, std::vector<Branch> branches) const {
            return std::visit(
                [&](const auto &o) -> std::vector<Branch> {
                    using T = std::decay_t<decltype(o)>;
                    if constexpr(std::is_same_v<T, op::Gate>) {
                        for(auto &b : branches) apply_gate(b, o);
                        return branches;
                    } else if constexpr(std::is_same_v<T, op::Measure>) {
                        std::vector<Branch> out;
                        for(auto &b : branches)
                            for(auto &nb : apply_measure(b, o)) out.push_back(std::move(nb));
                        return out;
                    } else if constexpr(std::is_same_v<T, op::Swap>) {
                        for(auto &b : branches) apply_swap(b, o);
                        return branches;
                    } else if constexpr(std::is_same_v<T, op::Discard>) {
                        for(auto &b : branches)
                            for(int q : o.qubits) {
                                require_live(b, q);
                                b.discarded[static_cast<std::size_t>(q)] = true;
                            }
                        return branches;
                    } else if constexpr(std::is_same_v<T, op::If>) {
                        std::vector<Branch> taken, out;
                        for(auto &b : branches) (o.condition(b.vars) ? taken : out).push_back(std::move(b));
                        for(auto &b : run(o.body, std::move(taken))) out.push_back(std::move(b));
                        return out;
                    } else if constexpr(std::is_same_v<T, op::Call>) {
                        auto out = run(o.body, std::move(branches));
                        for(auto &b : out)
                            if(b.returning) {
                                b.vars[o.var] = b.value;
                                b.returning   = false;
                            }
                        return out;
                    } else {
                        for(auto &b : branches) {
                            b.returning = true;
                            b.value     = o.value;
                        }
                        return branches;
                    }
                },
                ins.op);
        }
    };

    struct EnsembleMember {
        double weight;
        Vector ket;
    };

    std::vector<EnsembleMember> ensemble(const ProgramState &state) {
        std::vector<EnsembleMember> out{{1.0, Vector::Ones(1)}};
        for(const auto &f : state.factors) {
            const auto eig = eig_hermitian(f.matrix());
            std::vector<EnsembleMember> next;
            for(const auto &m : out)
                for(Eigen::Index i = 0; i < eig.values.size(); ++i) {
                    if(eig.values(i) <= 1e-15) continue;
                    next.push_back({m.weight * eig.values(i), tensor(m.ket, eig.vectors.col(i))});
                }
            out = std::move(next);
        }
        return out;
    }

} // namespace

std::vector<BranchRecord> run_branches(const ProgrammableImplementation &impl, double theta) {
    const auto &c     = impl.circuit;
    const int   R     = c.data_qubits();
    const auto  d     = std::size_t{1} << R;
    if(impl.data_dim != d) throw std::invalid_argument("run_branches: declared data dimension does not match the data qubits");

    const ProgramState program = impl.program(theta);
    std::size_t        pdim    = 1;
    for(const auto &f : program.factors) pdim *= f.dim();
    if(pdim != std::size_t{1} << c.program_qubits())
        throw std::invalid_argument("run_branches: program state dimension " + std::to_string(pdim) + " does not match " +
                                    std::to_string(c.program_qubits()) + " program qubits");

    Simulator             sim(R, c.total_qubits());
    std::map<std::vector<long long>, BranchRecord> merged;
    const int             n      = R + c.total_qubits();
    const std::size_t     dprog  = pdim;

    // Kept qubits for the reduced output: reference first, then the declared outputs.
    std::vector<int> kept_global;
    for(int q = 0; q < R; ++q) kept_global.push_back(q);
    for(int q : c.outputs()) kept_global.push_back(R + q);

    for(const auto &member : ensemble(program)) {
        Branch start;
        start.psi = Vector::Zero(Eigen::Index{1} << n);
        for(std::size_t i = 0; i < d; ++i)
            for(std::size_t p = 0; p < dprog; ++p) {
                const std::size_t index = (i * dprog + p) * d + i;
                start.psi(static_cast<Eigen::Index>(index)) = member.ket(static_cast<Eigen::Index>(p)) * std::sqrt(member.weight / static_cast<double>(d));
            }
        start.discarded.assign(static_cast<std::size_t>(c.total_qubits()), false);

        auto finished = sim.run(c.instructions(), {std::move(start)});
        for(auto &b : finished) {
            if(b.returning) {
                b.vars["return"] = b.value;
                b.returning      = false;
            }
            std::vector<int> live;
            for(int q = 0; q < c.total_qubits(); ++q)
                if(!b.discarded[static_cast<std::size_t>(q)]) live.push_back(q);
            std::vector<int> expected = c.outputs();
            std::sort(expected.begin(), expected.end());
            if(live != expected) throw std::invalid_argument("run_branches: undiscarded qubits do not match the declared outputs");

            // Reshape into (kept, traced) and form M M†.
            const std::size_t kdim = std::size_t{1} << kept_global.size();
            const std::size_t tdim = (std::size_t{1} << n) / kdim;
            std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
            for(int g : kept_global) is_kept[static_cast<std::size_t>(g)] = true;
            Matrix m = Matrix::Zero(static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(tdim));
            for(std::size_t idx = 0; idx < (std::size_t{1} << n); ++idx) {
                std::size_t kp = 0, tp = 0;
                for(int g : kept_global) kp = (kp << 1) | ((idx >> (n - 1 - g)) & 1U);
                for(int g = 0; g < n; ++g)
                    if(!is_kept[static_cast<std::size_t>(g)]) tp = (tp << 1) | ((idx >> (n - 1 - g)) & 1U);
                m(static_cast<Eigen::Index>(kp), static_cast<Eigen::Index>(tp)) = b.psi(static_cast<Eigen::Index>(idx));
            }
            const Matrix out = m * m.adjoint();

            auto it = merged.find(b.history);
            if(it == merged.end()) {
                BranchRecord rec;
                rec.measurements = b.history;
                rec.variables    = b.vars;
                rec.probability  = b.psi.squaredNorm();
                rec.output       = out;
                merged.emplace(b.history, std::move(rec));
            } else {
                it->second.probability += b.psi.squaredNorm();
                it->second.output += out;
            }
        }
    }

    std::vector<BranchRecord> records;
    double                    total = 0.0;
    for(auto &[key, rec] : merged) {
        if(static_cast<std::size_t>(rec.output.rows()) != d * impl.output_dim)
            throw std::invalid_argument("run_branches: circuit output dimension does not match the declared output dimension");
        total += rec.probability;
        records.push_back(std::move(rec));
    }
    if(std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("run_branches: branch probabilities sum to " + std::to_string(total));
    return records;
}

ChoiMatrix induced_channel(const ProgrammableImplementation &impl, double theta) {
    const auto records = run_branches(impl, theta);
    const auto dim     = static_cast<Eigen::Index>(impl.data_dim * impl.output_dim);
    Matrix     sum     = Matrix::Zero(dim, dim);
    for(const auto &r : records) sum += r.output;
    return ChoiMatrix(impl.data_dim, impl.output_dim, (sum + sum.adjoint()) / 2.0, 1e-9);
}

ConditionalChoi induced_channel_if(const ProgrammableImplementation &impl, double theta, const Predicate &select) {
    const auto      records = run_branches(impl, theta);
    const auto      dim     = static_cast<Eigen::Index>(impl.data_dim * impl.output_dim);
    ConditionalChoi out;
    out.choi = Matrix::Zero(dim, dim);
    for(const auto &r : records)
        if(select(r.variables)) {
            out.weight += r.probability;
            out.choi += r.output;
        }
    if(out.weight > 0.0) out.choi /= out.weight;
    return out;
}

namespace {

    Matrix cnot() {
        Matrix m = Matrix::Zero(4, 4);
        m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
        return m;
    }

    Predicate equals(const std::string &var, long long value) {
        return [var, value](const Variables &v) {
            auto it = v.find(var);
            return it != v.end() && it->second == value;
        };
    }

    // Rounds of data-controlled NOT, measure, succeed on 0.
    std::vector<Instruction> prob_unitary_body(int first, int k, int data) {
        std::vector<Instruction> body;
        for(int i = 0; i < k; ++i) {
            const std::string r = "r" + std::to_string(i + 1);
            body.push_back(gate(cnot(), {data, first + i}));
            body.push_back(measure({first + i}, r));
            body.push_back(when(equals(r, 0), {ret(1)}));
        }
        body.push_back(ret(0));
        return body;
    }

    DensityOperator prob_unitary_qubit(double theta, int m) {
        const double phi = std::ldexp(theta, m - 1);
        Vector       v(2);
        v << std::polar(1.0, phi), std::polar(1.0, -phi);
        return DensityOperator::from_ket(v / std::sqrt(2.0));
    }

    int log2_exact(std::size_t n, const std::string &what) {
        if(n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument(what + " must be a power of two");
        int b = 0;
        while((std::size_t{1} << b) < n) ++b;
        return b;
    }

    std::vector<int> range(int first, int count) {
        std::vector<int> v(static_cast<std::size_t>(count));
        for(int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = first + i;
        return v;
    }

} // namespace

namespace programs {

    ProgrammableImplementation prob_unitary(int k) {
        if(k < 1 || k > 12) throw std::invalid_argument("prob_unitary: k must lie in 1..12");
        std::vector<Instruction> ins;
        ins.push_back(call("success", prob_unitary_body(0, k, k)));
        ins.push_back(discard(range(0, k)));
        ProgramCircuit circuit(k, 1, std::move(ins), {k});
        auto           program = [k](double theta) {
            ProgramState s;
            for(int m = 1; m <= k; ++m) s.factors.push_back(prob_unitary_qubit(theta, m));
            return s;
        };
        return {"prob_unitary", program, std::move(circuit), 2, 2};
    }

    ProgrammableImplementation depolarizing() {
        std::vector<Instruction> ins;
        ins.push_back(measure({0}, "r"));
        ins.push_back(when(equals("r", 1), {swap(1, 3)}));
        ins.push_back(discard({0, 1, 2}));
        ProgramCircuit circuit(3, 1, std::move(ins), {3});
        auto           program = [](double theta) {
            if(theta < 0.0 || theta > 1.0) throw std::invalid_argument("depolarizing program: theta must lie in [0, 1]");
            ProgramState s;
            Vector       q(2);
            q << std::sqrt(1.0 - theta), std::sqrt(theta);
            Vector bell = Vector::Zero(4);
            bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
            s.factors.push_back(DensityOperator::from_ket(q));
            s.factors.push_back(DensityOperator::from_ket(bell));
            return s;
        };
        return {"depolarizing", program, std::move(circuit), 2, 2};
    }

    ProgrammableImplementation pauli(std::function<std::array<double, 4>(double)> p) {
        std::vector<Instruction> ins;
        ins.push_back(measure({0, 1}, "r"));
        for(int i = 1; i <= 3; ++i) ins.push_back(when(equals("r", i), {gate(qest::pauli::sigma(i), {2})}));
        ins.push_back(discard({0, 1}));
        ProgramCircuit circuit(2, 1, std::move(ins), {2});
        auto           program = [p](double theta) {
            const auto probs = p(theta);
            Vector     v(4);
            for(int i = 0; i < 4; ++i) {
                if(probs[static_cast<std::size_t>(i)] < -1e-15) throw std::invalid_argument("pauli program: negative probability");
                v(i) = std::sqrt(std::max(0.0, probs[static_cast<std::size_t>(i)]));
            }
            if(std::abs(v.squaredNorm() - 1.0) > 1e-12) throw std::invalid_argument("pauli program: probabilities do not sum to 1");
            ProgramState s;
            s.factors.push_back(DensityOperator::from_ket(v));
            return s;
        };
        return {"pauli", program, std::move(circuit), 2, 2};
    }

    ProgrammableImplementation dmc(const StochasticMatrix &q0, const StochasticMatrix &q1) {
        if(q0.inputs() != q1.inputs() || q0.outputs() != q1.outputs()) throw std::invalid_argument("dmc program: Q0 and Q1 shapes differ");
        const int a = log2_exact(q0.inputs(), "dmc program: input alphabet size");
        const int b = log2_exact(q0.outputs(), "dmc program: output alphabet size");
        if(a == 0 || b == 0) throw std::invalid_argument("dmc program: alphabets need at least two symbols");
        const int blocks = 1 << a;
        const int out0   = blocks * b;
        const int prog   = out0 + b;
        const int data0  = prog;

        std::vector<Instruction> ins;
        ins.push_back(measure(range(data0, a), "x"));
        for(int x = 0; x < blocks; ++x) {
            std::vector<Instruction> body;
            body.push_back(measure(range(x * b, b), "y"));
            for(int j = 0; j < b; ++j) body.push_back(swap(x * b + j, out0 + j));
            ins.push_back(when(equals("x", x), std::move(body)));
        }
        std::vector<int> gone = range(0, out0);
        for(int j = 0; j < a; ++j) gone.push_back(data0 + j);
        ins.push_back(discard(std::move(gone)));
        ProgramCircuit circuit(prog, a, std::move(ins), range(out0, b));

        auto program = [q0, q1, blocks, b](double theta) {
            if(theta < 0.0 || theta > 1.0) throw std::invalid_argument("dmc program: theta must lie in [0, 1]");
            ProgramState s;
            const auto   ny = std::size_t{1} << b;
            for(int x = 0; x < blocks; ++x) {
                Vector v(static_cast<Eigen::Index>(ny));
                for(std::size_t y = 0; y < ny; ++y)
                    v(static_cast<Eigen::Index>(y)) = std::sqrt(std::max(0.0, (1.0 - theta) * q0(static_cast<std::size_t>(x), y) + theta * q1(static_cast<std::size_t>(x), y)));
                s.factors.push_back(DensityOperator::from_ket(v));
            }
            s.factors.push_back(DensityOperator::basis(ny, 0));
            return s;
        };
        return {"dmc", program, std::move(circuit), q0.inputs(), q0.outputs()};
    }

    ProgrammableImplementation dnoise(double epsilon, const DensityOperator &rho0, int k) {
        if(k < 1 || k > 10) throw std::invalid_argument("dnoise: k must lie in 1..10");
        if(rho0.dim() != 2) throw std::invalid_argument("dnoise: rho0 must be a qubit state");
        if(!(epsilon <= 1.0) || epsilon < std::ldexp(1.0, -k))
            throw std::invalid_argument("dnoise: epsilon must lie in [2^-k, 1] (got " + std::to_string(epsilon) + " with k=" + std::to_string(k) + ")");
        const double q = (1.0 - epsilon) / (1.0 - std::ldexp(1.0, -k));

        // Layout: flag | k probabilistic-unitary qubits | rho0 | data
        const int flag = 0, fallback = k + 1, data = k + 2;
        std::vector<Instruction> ins;
        ins.push_back(measure({flag}, "flag"));
        ins.push_back(call("pu", prob_unitary_body(1, k, data)));
        ins.push_back(when([](const Variables &v) { return v.at("pu") == 0 || v.at("flag") == 0; }, {swap(fallback, data)}));
        ins.push_back(discard(range(0, k + 2)));
        ProgramCircuit circuit(k + 2, 1, std::move(ins), {data});

        auto program = [q, k, rho0](double theta) {
            ProgramState s;
            Matrix       f = Matrix::Zero(2, 2);
            f(0, 0)        = 1.0 - q;
            f(1, 1)        = q;
            s.factors.emplace_back(f);
            for(int m = 1; m <= k; ++m) s.factors.push_back(prob_unitary_qubit(theta, m));
            s.factors.push_back(rho0);
            return s;
        };
        return {"dnoise", program, std::move(circuit), 2, 2};
    }

} // namespace programs

namespace {

    std::array<double, 4> to_array(const std::vector<double> &v, const std::string &key) {
        if(v.size() != 4) throw std::invalid_argument("pauli: '" + key + "' must have 4 entries");
        return {v[0], v[1], v[2], v[3]};
    }

    std::function<std::array<double, 4>(double)> pauli_probabilities(const KeyValueRecord &params) {
        const auto a = to_array(params.has("p") ? params.numbers("p") : params.numbers("a"), params.has("p") ? "p" : "a");
        const auto b = params.has("b") ? to_array(params.numbers("b"), "b") : std::array<double, 4>{};
        return [a, b](double t) {
            std::array<double, 4> p{};
            for(std::size_t i = 0; i < 4; ++i) p[i] = a[i] + b[i] * t;
            return p;
        };
    }

} // namespace

ProgrammableImplementation make_program(const std::string &kind, const KeyValueRecord &params) {
    if(kind == "prob_unitary") return programs::prob_unitary(static_cast<int>(params.integer("k", 4)));
    if(kind == "depolarizing") return programs::depolarizing();
    if(kind == "pauli") {
        if(!params.has("p") && !params.has("a")) {
            // Depolarizing parameterization p = (1 − 3θ/4, θ/4, θ/4, θ/4).
            return programs::pauli([](double t) { return std::array<double, 4>{1.0 - 0.75 * t, 0.25 * t, 0.25 * t, 0.25 * t}; });
        }
        return programs::pauli(pauli_probabilities(params));
    }
    if(kind == "dmc") {
        const auto rows = static_cast<std::size_t>(params.integer("rows", 2));
        if(!params.has("q0")) {
            const StochasticMatrix bsc((Eigen::MatrixXd(2, 2) << 0.7, 0.3, 0.3, 0.7).finished());
            return programs::dmc(bsc, StochasticMatrix((Eigen::MatrixXd(2, 2) << 0.2, 0.8, 0.6, 0.4).finished()));
        }
        const auto q0 = stochastic_from_list(params.numbers("q0"), rows, "q0");
        const auto q1 = params.has("q1") ? stochastic_from_list(params.numbers("q1"), rows, "q1") : q0;
        return programs::dmc(q0, q1);
    }
    if(kind == "dnoise")
        return programs::dnoise(params.number("eps", 0.25), named_state(params.get("rho0", "mixed")), static_cast<int>(params.integer("k", 4)));
    throw std::invalid_argument("make_program: unknown kind '" + kind + "' (expected prob_unitary, depolarizing, pauli, dmc, dnoise)");
}

ParamChannelFamily target_family(const std::string &kind, const KeyValueRecord &params) {
    KeyValueRecord spec;
    if(kind == "prob_unitary") {
        spec.set("kind", "symmetric_phase");
    } else if(kind == "depolarizing") {
        spec.set("kind", "depolarizing");
    } else if(kind == "pauli") {
        spec.set("kind", "pauli");
        if(!params.has("p") && !params.has("a")) {
            spec.set("a", "1,0,0,0");
            spec.set("b", "-0.75,0.25,0.25,0.25");
        } else {
            for(const auto *key : {"p", "a", "b"})
                if(params.has(key)) spec.set(key, params.get(key));
        }
    } else if(kind == "dmc") {
        spec.set("kind", "dmc");
        if(!params.has("q0")) {
            spec.set("q0", "0.7,0.3,0.3,0.7");
            spec.set("q1", "0.2,0.8,0.6,0.4");
        } else {
            for(const auto *key : {"rows", "q0", "q1"})
                if(params.has(key)) spec.set(key, params.get(key));
        }
    } else if(kind == "dnoise") {
        spec.set("kind", "depolarized_unitary");
        spec.set("unitary", "symmetric");
        spec.set("eps", params.get("eps", "0.25"));
        spec.set("rho0", params.get("rho0", "mixed"));
    } else {
        throw std::invalid_argument("target_family: unknown kind '" + kind + "'");
    }
    return make_family(spec);
}

VerificationReport verify_programmable(const ProgrammableImplementation &impl, const ParamChannelFamily &family, const std::vector<double> &grid,
                                       double tol) {
    if(impl.data_dim != family.in_dim || impl.output_dim != family.out_dim) throw std::invalid_argument("verify_programmable: dimension mismatch");
    VerificationReport r;
    r.tol = tol;
    const bool conditional = impl.kind == "prob_unitary";
    for(double t : grid) {
        double dist = 0.0;
        if(conditional) {
            const auto c = induced_channel_if(impl, t, equals("success", 1));
            dist         = frobenius_distance(c.choi, choi(family(t)).matrix());
        } else {
            dist = channel_distance(induced_channel(impl, t), choi(family(t)));
        }
        r.thetas.push_back(t);
        r.distances.push_back(dist);
        r.max_distance = std::max(r.max_distance, dist);
    }
    r.pass = r.max_distance <= tol;
    return r;
}

double success_probability(const ProgrammableImplementation &impl, double theta) {
    if(impl.kind != "prob_unitary") throw std::invalid_argument("success_probability: program kind must be prob_unitary");
    double p = 0.0;
    for(const auto &r : run_branches(impl, theta)) {
        auto it = r.variables.find("success");
        if(it != r.variables.end() && it->second == 1) p += r.probability;
    }
    return p;
}

} // namespace qest
