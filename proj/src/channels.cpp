#include "qest/channels.hpp"

#include <cmath>

namespace qest {

namespace {
    Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

    Matrix kraus_map_derivative(const std::vector<Matrix> &ops, const std::vector<Matrix> &dops, const Matrix &x) {
        Matrix out = Matrix::Zero(ops.front().rows(), ops.front().rows());
        for(std::size_t i = 0; i < ops.size(); ++i) {
            out += dops[i] * x * ops[i].adjoint() + ops[i] * x * dops[i].adjoint();
        }
        return out;
    }
} // namespace

KrausChannel::KrausChannel(std::size_t in_dim, std::size_t out_dim, std::vector<Matrix> operators)
    : in_dim_(in_dim), out_dim_(out_dim), operators_(std::move(operators)) {
    if(operators_.empty()) throw std::invalid_argument("KrausChannel: empty operator set");
    Matrix total = Matrix::Zero(idx(in_dim_), idx(in_dim_));
    for(std::size_t i = 0; i < operators_.size(); ++i) {
        const auto &e = operators_[i];
        if(e.rows() != idx(out_dim_) || e.cols() != idx(in_dim_))
            throw std::invalid_argument("KrausChannel: operator " + std::to_string(i) + " is " + std::to_string(e.rows()) + "x" +
                                        std::to_string(e.cols()) + ", expected " + std::to_string(out_dim_) + "x" + std::to_string(in_dim_));
        total.noalias() += e.adjoint() * e;
    }
    const double defect = frobenius_distance(total, Matrix::Identity(idx(in_dim_), idx(in_dim_)));
    if(defect > completeness_tol) throw std::invalid_argument("KrausChannel: completeness violated (‖ΣE†E − I‖ = " + std::to_string(defect) + ")");
}

KrausChannel KrausChannel::identity(std::size_t dim) { return KrausChannel(dim, dim, {Matrix::Identity(idx(dim), idx(dim))}); }

KrausChannel KrausChannel::unitary(const Matrix &u) {
    const auto d = static_cast<std::size_t>(u.rows());
    return KrausChannel(d, d, {u});
}

Matrix KrausChannel::apply(const Matrix &x) const {
    if(x.rows() != idx(in_dim_) || x.cols() != idx(in_dim_)) throw std::invalid_argument("KrausChannel::apply: dimension mismatch");
    Matrix out = Matrix::Zero(idx(out_dim_), idx(out_dim_));
    for(const auto &e : operators_) out.noalias() += e * x * e.adjoint();
    return out;
}

ChoiMatrix::ChoiMatrix(std::size_t in_dim, std::size_t out_dim, Matrix matrix, double check_tol)
    : in_dim_(in_dim), out_dim_(out_dim), matrix_(std::move(matrix)) {
    const auto n = idx(in_dim_ * out_dim_);
    if(matrix_.rows() != n || matrix_.cols() != n) throw std::invalid_argument("ChoiMatrix: matrix dimension does not equal in_dim*out_dim");
    if(hermiticity_defect(matrix_) > check_tol) throw std::invalid_argument("ChoiMatrix: not Hermitian");
    const double lmin = min_eigenvalue(matrix_);
    if(lmin < -check_tol) throw std::invalid_argument("ChoiMatrix: not completely positive (eigenvalue " + std::to_string(lmin) + ")");
    const std::array<std::size_t, 2> dims{in_dim_, out_dim_};
    const std::array<std::size_t, 1> keep{0};
    const Matrix                     ref = partial_trace(matrix_, dims, keep);
    const Matrix target = Matrix::Identity(idx(in_dim_), idx(in_dim_)) / static_cast<double>(in_dim_);
    if(frobenius_distance(ref, target) > check_tol)
        throw std::invalid_argument("ChoiMatrix: not trace preserving (defect " + std::to_string(frobenius_distance(ref, target)) + ")");
}

StochasticMatrix::StochasticMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
    if(q_.rows() == 0 || q_.cols() == 0) throw std::invalid_argument("StochasticMatrix: empty matrix");
    if((q_.array() < 0.0).any()) throw std::invalid_argument("StochasticMatrix: negative transition probability");
    for(Eigen::Index x = 0; x < q_.rows(); ++x)
        if(std::abs(q_.row(x).sum() - 1.0) > tol) throw std::invalid_argument("StochasticMatrix: row " + std::to_string(x) + " does not sum to 1");
}

DensityOperator apply_channel(const KrausChannel &c, const DensityOperator &rho) {
    if(rho.dim() != c.in_dim())
        throw std::invalid_argument("apply_channel: state dimension " + std::to_string(rho.dim()) + " does not match channel input " +
                                    std::to_string(c.in_dim()));
    const Matrix out = c.apply(rho.matrix());
    return DensityOperator((out + out.adjoint()) / 2.0);
}

KrausChannel compose(const KrausChannel &outer, const KrausChannel &inner) {
    if(inner.out_dim() != outer.in_dim()) throw std::invalid_argument("compose: inner output dimension does not match outer input");
    std::vector<Matrix> ops;
    ops.reserve(outer.operators().size() * inner.operators().size());
    for(const auto &f : outer.operators())
        for(const auto &e : inner.operators()) ops.emplace_back(f * e);
    return KrausChannel(inner.in_dim(), outer.out_dim(), std::move(ops));
}

KrausChannel power(const KrausChannel &c, std::size_t m) {
    if(m == 0) throw std::invalid_argument("power: exponent must be at least 1");
    const std::size_t max_ops = c.in_dim() * c.out_dim();
    KrausChannel      acc     = c;
    for(std::size_t step = 1; step < m; ++step) {
        const KrausChannel  next = compose(c, acc);
        std::vector<Matrix> kept;
        for(const auto &e : next.operators())
            if(e.norm() > 1e-14) kept.push_back(e);
        acc = KrausChannel(next.in_dim(), next.out_dim(), std::move(kept));
        if(acc.operators().size() > max_ops) acc = kraus_from_choi(choi(acc));
    }
    return acc;
}

ChoiMatrix choi(const KrausChannel &c) {
    const std::size_t din = c.in_dim(), dout = c.out_dim();
    const auto        n   = idx(din * dout);
    Matrix            out = Matrix::Zero(n, n);
    Vector            v(n);
    const double      scale = 1.0 / std::sqrt(static_cast<double>(din));
    for(const auto &e : c.operators()) {
        for(std::size_t i = 0; i < din; ++i)
            for(std::size_t o = 0; o < dout; ++o) v(idx(i * dout + o)) = e(idx(o), idx(i)) * scale;
        out.noalias() += v * v.adjoint();
    }
    return ChoiMatrix(din, dout, std::move(out));
}

KrausChannel kraus_from_choi(const ChoiMatrix &c) {
    const std::size_t din = c.in_dim(), dout = c.out_dim();
    const auto        eig = eig_hermitian(c.matrix());
    std::vector<Matrix> ops;
    for(Eigen::Index k = eig.values.size(); k-- > 0;) {
        const double lambda = eig.values(k);
        if(lambda <= 1e-15) continue;
        const double s = std::sqrt(lambda * static_cast<double>(din));
        Matrix       e(idx(dout), idx(din));
        for(std::size_t i = 0; i < din; ++i)
            for(std::size_t o = 0; o < dout; ++o) e(idx(o), idx(i)) = s * eig.vectors(idx(i * dout + o), k);
        ops.push_back(std::move(e));
    }
    return KrausChannel(din, dout, std::move(ops));
}

Matrix apply_choi(const ChoiMatrix &c, const Matrix &rho) {
    const std::size_t din = c.in_dim(), dout = c.out_dim();
    if(rho.rows() != idx(din) || rho.cols() != idx(din)) throw std::invalid_argument("apply_choi: dimension mismatch");
    Matrix out = Matrix::Zero(idx(dout), idx(dout));
    for(std::size_t i = 0; i < din; ++i)
        for(std::size_t j = 0; j < din; ++j)
            out += rho(idx(i), idx(j)) * c.matrix().block(idx(i * dout), idx(j * dout), idx(dout), idx(dout));
    return out * static_cast<double>(din);
}

double channel_distance(const ChoiMatrix &a, const ChoiMatrix &b) {
    if(a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim()) throw std::invalid_argument("channel_distance: dimension mismatch");
    return frobenius_distance(a.matrix(), b.matrix());
}

double channel_distance(const KrausChannel &a, const KrausChannel &b) { return channel_distance(choi(a), choi(b)); }

bool channels_equal(const KrausChannel &a, const KrausChannel &b, double tol) { return channel_distance(a, b) <= tol; }

Matrix2 phase_unitary_matrix(double theta) {
    Matrix2 u = Matrix2::Zero();
    u(0, 0)   = 1.0;
    u(1, 1)   = std::polar(1.0, 2.0 * kPi * theta);
    return u;
}

Matrix2 symmetric_phase_matrix(double theta) {
    Matrix2 u = Matrix2::Zero();
    u(0, 0)   = std::polar(1.0, theta);
    u(1, 1)   = std::polar(1.0, -theta);
    return u;
}

Matrix2 rotation_matrix(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix2      e;
    e << c, s, -s, c;
    return e;
}

Matrix2 basis_theta_unitary(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix2      u;
    u << c, s, s, -c;
    return u;
}

bool ParamChannelFamily::contains(double theta) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(theta_max - theta_min));
    return theta >= theta_min - slack && theta <= theta_max + slack;
}

KrausChannel ParamChannelFamily::operator()(double theta) const {
    if(!contains(theta))
        throw std::invalid_argument(kind + ": theta " + std::to_string(theta) + " outside [" + std::to_string(theta_min) + ", " +
                                    std::to_string(theta_max) + "]");
    return evaluator(theta);
}

KrausChannel pauli_channel(const std::array<double, 4> &p) {
    std::vector<Matrix> ops;
    for(int i = 0; i < 4; ++i) {
        if(p[i] < -1e-15) throw std::invalid_argument("pauli: negative probability p" + std::to_string(i));
        ops.emplace_back(std::sqrt(std::max(0.0, p[i])) * pauli::sigma(i));
    }
    return KrausChannel(2, 2, std::move(ops));
}

KrausChannel dmc_channel(const StochasticMatrix &q) {
    std::vector<Matrix> ops;
    for(std::size_t x = 0; x < q.inputs(); ++x)
        for(std::size_t y = 0; y < q.outputs(); ++y) {
            if(q(x, y) <= 0.0) continue;
            Matrix e            = Matrix::Zero(idx(q.outputs()), idx(q.inputs()));
            e(idx(y), idx(x)) = std::sqrt(q(x, y));
            ops.push_back(std::move(e));
        }
    return KrausChannel(q.inputs(), q.outputs(), std::move(ops));
}

namespace families {

    ParamChannelFamily identity(std::size_t dim) {
        ParamChannelFamily f;
        f.kind      = "identity";
        f.in_dim    = dim;
        f.out_dim   = dim;
        f.evaluator = [dim](double) { return KrausChannel::identity(dim); };
        f.derivative = [dim](double, const Matrix &) { return Matrix::Zero(idx(dim), idx(dim)).eval(); };
        return f;
    }

    ParamChannelFamily phase_unitary() {
        ParamChannelFamily f;
        f.kind      = "phase_unitary";
        f.evaluator = [](double t) { return KrausChannel::unitary(phase_unitary_matrix(t)); };
        f.derivative = [](double t, const Matrix &x) {
            Matrix du = Matrix::Zero(2, 2);
            du(1, 1)  = Complex(0, 2.0 * kPi) * std::polar(1.0, 2.0 * kPi * t);
            return kraus_map_derivative({phase_unitary_matrix(t)}, {du}, x);
        };
        return f;
    }

    ParamChannelFamily symmetric_phase() {
        ParamChannelFamily f;
        f.kind      = "symmetric_phase";
        f.theta_max = kPi;
        f.evaluator = [](double t) { return KrausChannel::unitary(symmetric_phase_matrix(t)); };
        f.derivative = [](double t, const Matrix &x) {
            const Matrix u  = symmetric_phase_matrix(t);
            const Matrix du = Complex(0, 1) * Matrix(pauli::Z()) * u;
            return kraus_map_derivative({u}, {du}, x);
        };
        return f;
    }

    ParamChannelFamily depolarizing() {
        ParamChannelFamily f;
        f.kind      = "depolarizing";
        f.theta_max = 4.0 / 3.0;
        f.evaluator = [](double t) { return pauli_channel({1.0 - 3.0 * t / 4.0, t / 4.0, t / 4.0, t / 4.0}); };
        f.derivative = [](double, const Matrix &x) { return (Matrix::Identity(2, 2) * x.trace() / 2.0 - x).eval(); };
        return f;
    }

    ParamChannelFamily pauli(std::function<std::array<double, 4>(double)> p, std::function<std::array<double, 4>(double)> dp, double theta_min,
                             double theta_max) {
        ParamChannelFamily f;
        f.kind      = "pauli";
        f.theta_min = theta_min;
        f.theta_max = theta_max;
        f.evaluator = [p](double t) { return pauli_channel(p(t)); };
        if(dp) {
            f.derivative = [dp](double t, const Matrix &x) {
                const auto d   = dp(t);
                Matrix     out = Matrix::Zero(2, 2);
                for(int i = 0; i < 4; ++i) out += d[i] * pauli::sigma(i) * x * pauli::sigma(i);
                return out;
            };
        }
        return f;
    }

    ParamChannelFamily amplitude_damping() {
        ParamChannelFamily f;
        f.kind      = "amplitude_damping";
        f.evaluator = [](double t) {
            Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
            e0(0, 0) = 1.0;
            e0(1, 1) = std::sqrt(1.0 - t);
            e1(0, 1) = std::sqrt(t);
            return KrausChannel(2, 2, {e0, e1});
        };
        f.derivative = [](double t, const Matrix &x) {
            const double s = 2.0 * std::sqrt(1.0 - t);
            Matrix       d(2, 2);
            d << x(1, 1), -x(0, 1) / s, -x(1, 0) / s, -x(1, 1);
            return d;
        };
        return f;
    }

    ParamChannelFamily generalized_amplitude_damping(double p) {
        if(!(p > 0.0 && p < 1.0)) throw std::invalid_argument("generalized_amplitude_damping: p must lie in (0,1)");
        ParamChannelFamily f;
        f.kind      = "generalized_amplitude_damping";
        f.evaluator = [p](double t) {
            const double sp = std::sqrt(p), sq = std::sqrt(1.0 - p);
            Matrix       e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2), e2 = Matrix::Zero(2, 2), e3 = Matrix::Zero(2, 2);
            e0(0, 0) = sp;
            e0(1, 1) = sp * std::sqrt(1.0 - t);
            e1(0, 1) = sp * std::sqrt(t);
            e2(0, 0) = sq * std::sqrt(1.0 - t);
            e2(1, 1) = sq;
            e3(1, 0) = sq * std::sqrt(t);
            return KrausChannel(2, 2, {e0, e1, e2, e3});
        };
        f.derivative = [p](double t, const Matrix &x) {
            const double s = 2.0 * std::sqrt(1.0 - t);
            Matrix       d(2, 2);
            d << p * x(1, 1) - (1.0 - p) * x(0, 0), -x(0, 1) / s, -x(1, 0) / s, -p * x(1, 1) + (1.0 - p) * x(0, 0);
            return d;
        };
        return f;
    }

    ParamChannelFamily projector_class(std::function<double(double)> eta, std::function<double(double)> deta) {
        ParamChannelFamily f;
        f.kind      = "projector_class";
        f.theta_max = kPi / 2.0;
        f.evaluator = [eta](double t) {
            const double e = eta(t);
            if(e < -1e-15 || e > 1.0 + 1e-15) throw std::invalid_argument("projector_class: eta(theta) outside [0,1]");
            const Matrix r = rotation_matrix(t);
            return KrausChannel(2, 2, {std::sqrt(std::clamp(e, 0.0, 1.0)) * r, std::sqrt(std::clamp(1.0 - e, 0.0, 1.0)) * Matrix(pauli::Z()) * r});
        };
        if(deta) {
            f.derivative = [eta, deta](double t, const Matrix &x) {
                const Matrix r = rotation_matrix(t);
                Matrix       dr(2, 2);
                dr << -std::sin(t), std::cos(t), -std::cos(t), -std::sin(t);
                const Matrix z     = pauli::Z();
                const Matrix base  = r * x * r.adjoint();
                const Matrix dbase = dr * x * r.adjoint() + r * x * dr.adjoint();
                const double e = eta(t);
                return (deta(t) * (base - z * base * z) + e * dbase + (1.0 - e) * z * dbase * z).eval();
            };
        }
        return f;
    }

    ParamChannelFamily dmc(const StochasticMatrix &q0, const StochasticMatrix &q1) {
        if(q0.inputs() != q1.inputs() || q0.outputs() != q1.outputs()) throw std::invalid_argument("dmc: Q0 and Q1 shapes differ");
        ParamChannelFamily f;
        f.kind      = "dmc";
        f.in_dim    = q0.inputs();
        f.out_dim   = q0.outputs();
        f.evaluator = [q0, q1](double t) { return dmc_channel(StochasticMatrix((1.0 - t) * q0.matrix() + t * q1.matrix())); };
        f.derivative = [q0, q1](double, const Matrix &x) {
            const Eigen::MatrixXd dq  = q1.matrix() - q0.matrix();
            Matrix                out = Matrix::Zero(dq.cols(), dq.cols());
            for(Eigen::Index a = 0; a < dq.rows(); ++a)
                for(Eigen::Index b = 0; b < dq.cols(); ++b) out(b, b) += dq(a, b) * x(a, a);
            return out;
        };
        return f;
    }

    ParamChannelFamily dmc(const StochasticMatrix &q) { return dmc(q, q); }

    ParamChannelFamily depolarized_unitary(double epsilon, const DensityOperator &rho0, PhaseConvention unitary) {
        if(!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("depolarized_unitary: eps must lie in [0,1]");
        if(rho0.dim() != 2) throw std::invalid_argument("depolarized_unitary: rho0 must be a qubit state");
        ParamChannelFamily f;
        f.kind      = "depolarized_unitary";
        f.theta_max = unitary == PhaseConvention::phase ? 1.0 : kPi;
        auto u_of   = [unitary](double t) -> Matrix { return unitary == PhaseConvention::phase ? phase_unitary_matrix(t) : symmetric_phase_matrix(t); };
        auto du_of  = [unitary](double t) -> Matrix {
            if(unitary == PhaseConvention::phase) {
                Matrix du = Matrix::Zero(2, 2);
                du(1, 1)  = Complex(0, 2.0 * kPi) * std::polar(1.0, 2.0 * kPi * t);
                return du;
            }
            return Complex(0, 1) * Matrix(pauli::Z()) * symmetric_phase_matrix(t);
        };
        // ε ρ₀ tr(ρ) has Kraus operators √(ε λ_j) |φ_j⟩⟨i| over eigenpairs of ρ₀ and basis states i.
        const auto          eig = eig_hermitian(rho0.matrix());
        std::vector<Matrix> fixed;
        for(Eigen::Index j = 0; j < 2; ++j) {
            if(eig.values(j) <= 1e-15) continue;
            for(Eigen::Index i = 0; i < 2; ++i) {
                Matrix e = Matrix::Zero(2, 2);
                e.col(i) = std::sqrt(epsilon * eig.values(j)) * eig.vectors.col(j);
                fixed.push_back(std::move(e));
            }
        }
        f.evaluator = [epsilon, fixed, u_of](double t) {
            std::vector<Matrix> ops;
            if(epsilon < 1.0) ops.push_back(std::sqrt(1.0 - epsilon) * u_of(t));
            if(epsilon > 0.0) ops.insert(ops.end(), fixed.begin(), fixed.end());
            return KrausChannel(2, 2, std::move(ops));
        };
        f.derivative = [epsilon, u_of, du_of](double t, const Matrix &x) {
            return ((1.0 - epsilon) * kraus_map_derivative({u_of(t)}, {du_of(t)}, x)).eval();
        };
        return f;
    }

    ParamChannelFamily computational_measurement() {
        ParamChannelFamily f;
        f.kind      = "computational_measurement";
        f.evaluator = [](double) {
            Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
            p0(0, 0) = 1.0;
            p1(1, 1) = 1.0;
            return KrausChannel(2, 2, {p0, p1});
        };
        f.derivative = [](double, const Matrix &) { return Matrix::Zero(2, 2).eval(); };
        return f;
    }

    ParamChannelFamily basis_measurement() {
        ParamChannelFamily f;
        f.kind      = "basis_measurement";
        f.theta_max = kPi / 2.0;
        f.evaluator = [](double t) {
            const Matrix u  = basis_theta_unitary(t);
            Matrix       k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
            k0.row(0) = u.row(0);
            k1.row(1) = u.row(1);
            return KrausChannel(2, 2, {k0, k1});
        };
        f.derivative = [](double t, const Matrix &x) {
            const Matrix u = basis_theta_unitary(t);
            Matrix       du(2, 2);
            du << -std::sin(t), std::cos(t), std::cos(t), std::sin(t);
            Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2), d0 = Matrix::Zero(2, 2), d1 = Matrix::Zero(2, 2);
            k0.row(0) = u.row(0);
            k1.row(1) = u.row(1);
            d0.row(0) = du.row(0);
            d1.row(1) = du.row(1);
            return kraus_map_derivative({k0, k1}, {d0, d1}, x);
        };
        return f;
    }

} // namespace families

DensityOperator named_state(const std::string &name, std::size_t dim) {
    if(name == "mixed") return DensityOperator::maximally_mixed(dim);
    if(name == "zero") return DensityOperator::basis(dim, 0);
    if(name == "one") return DensityOperator::basis(dim, 1);
    if(name == "plus" || name == "minus") {
        Vector v = Vector::Ones(idx(dim));
        if(name == "minus") {
            if(dim != 2) throw std::invalid_argument("named_state: 'minus' is defined for qubits only");
            v(1) = -1.0;
        }
        return DensityOperator::from_ket(v);
    }
    throw std::invalid_argument("named_state: unknown state '" + name + "' (expected mixed, zero, one, plus, minus)");
}

StochasticMatrix stochastic_from_list(const std::vector<double> &values, std::size_t rows, const std::string &key) {
    if(rows == 0 || values.size() % rows != 0) throw std::invalid_argument("dmc: " + key + " length is not a multiple of rows");
    const auto      cols = values.size() / rows;
    Eigen::MatrixXd q(idx(rows), idx(cols));
    for(std::size_t r = 0; r < rows; ++r)
        for(std::size_t c = 0; c < cols; ++c) q(idx(r), idx(c)) = values[r * cols + c];
    try {
        return StochasticMatrix(q);
    } catch(const std::invalid_argument &e) { throw std::invalid_argument("dmc: " + key + " is not row-stochastic (" + e.what() + ")"); }
}

ParamChannelFamily make_family(const KeyValueRecord &spec) {
    const std::string  kind = spec.get("kind");
    ParamChannelFamily f;
    if(kind == "identity") {
        f = families::identity(static_cast<std::size_t>(spec.integer("dim", 2)));
    } else if(kind == "phase_unitary") {
        f = families::phase_unitary();
    } else if(kind == "symmetric_phase") {
        f = families::symmetric_phase();
    } else if(kind == "depolarizing") {
        f = families::depolarizing();
    } else if(kind == "pauli") {
        std::vector<double> a = spec.has("p") ? spec.numbers("p") : spec.numbers("a");
        std::vector<double> b = spec.has("b") ? spec.numbers("b") : std::vector<double>(4, 0.0);
        if(a.size() != 4 || b.size() != 4) throw std::invalid_argument("pauli: coefficient lists must have 4 entries");
        double sa = 0, sb = 0;
        for(int i = 0; i < 4; ++i) {
            sa += a[i];
            sb += b[i];
        }
        if(std::abs(sa - 1.0) > 1e-12 || std::abs(sb) > 1e-12) throw std::invalid_argument("pauli: p(theta) must sum to 1 for every theta");
        std::array<double, 4> aa{}, bb{};
        std::copy(a.begin(), a.end(), aa.begin());
        std::copy(b.begin(), b.end(), bb.begin());
        f = families::pauli(
            [aa, bb](double t) {
                std::array<double, 4> p{};
                for(int i = 0; i < 4; ++i) p[i] = aa[i] + bb[i] * t;
                return p;
            },
            [bb](double) { return bb; }, spec.number("theta_min", 0.0), spec.number("theta_max", 1.0));
    } else if(kind == "amplitude_damping") {
        f = families::amplitude_damping();
    } else if(kind == "generalized_amplitude_damping" || kind == "gad") {
        f = families::generalized_amplitude_damping(spec.number("p"));
    } else if(kind == "projector_class") {
        const double eta = spec.number("eta", 0.5);
        if(eta < 0.0 || eta > 1.0) throw std::invalid_argument("projector_class: eta must lie in [0,1]");
        f = families::projector_class([eta](double) { return eta; }, [](double) { return 0.0; });
    } else if(kind == "dmc") {
        const auto rows = static_cast<std::size_t>(spec.integer("rows", 2));
        const auto q0   = stochastic_from_list(spec.numbers("q0"), rows, "q0");
        const auto q1   = spec.has("q1") ? stochastic_from_list(spec.numbers("q1"), rows, "q1") : q0;
        f               = families::dmc(q0, q1);
    } else if(kind == "depolarized_unitary") {
        const std::string u = spec.get("unitary", "phase");
        if(u != "phase" && u != "symmetric") throw std::invalid_argument("depolarized_unitary: unitary must be 'phase' or 'symmetric'");
        f = families::depolarized_unitary(spec.number("eps"), named_state(spec.get("rho0", "mixed")),
                                          u == "phase" ? families::PhaseConvention::phase : families::PhaseConvention::symmetric);
    } else if(kind == "computational_measurement") {
        f = families::computational_measurement();
    } else if(kind == "basis_measurement") {
        f = families::basis_measurement();
    } else {
        throw std::invalid_argument("make_family: unknown kind '" + kind + "'");
    }
    f.spec = spec.to_string();
    validate_family(f);
    return f;
}

ParamChannelFamily make_family(std::string_view spec) { return make_family(KeyValueRecord::parse(spec)); }

void validate_family(const ParamChannelFamily &family, std::size_t points) {
    for(std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? family.theta_min
                                     : family.theta_min + (family.theta_max - family.theta_min) * static_cast<double>(i) / static_cast<double>(points - 1);
        try {
            const auto c = family(t);
            if(c.in_dim() != family.in_dim || c.out_dim() != family.out_dim) throw std::invalid_argument("declared dimensions do not match");
            (void) choi(c);
        } catch(const std::invalid_argument &e) {
            throw std::invalid_argument(family.kind + ": invalid channel at theta=" + std::to_string(t) + ": " + e.what());
        }
    }
}

DepolarizingComponent max_depolarizing_component(const KrausChannel &c, const DensityOperator &rho0) {
    if(c.in_dim() != c.out_dim()) throw std::invalid_argument("max_depolarizing_component: channel must be square");
    if(rho0.dim() != c.out_dim()) throw std::invalid_argument("max_depolarizing_component: rho0 dimension mismatch");
    constexpr double floor = -1e-10;
    constexpr double tol   = 1e-9;

    const std::size_t d = c.in_dim();
    const Matrix      C = choi(c).matrix();
    // Choi matrix of the constant channel ρ ↦ ρ₀.
    const Matrix S = tensor(Matrix(Matrix::Identity(idx(d), idx(d)) / static_cast<double>(d)), rho0.matrix());

    auto feasible = [&](double eps) { return min_eigenvalue(C - eps * S) >= floor; };

    double lo = 0.0, hi = 1.0;
    if(feasible(1.0)) {
        lo = 1.0;
    } else {
        while(hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
    }

    DepolarizingComponent out;
    out.epsilon = lo <= tol ? 0.0 : lo;
    if(out.epsilon > 0.0 && out.epsilon < 1.0) out.residual.emplace(d, d, Matrix((C - out.epsilon * S) / (1.0 - out.epsilon)), -floor / (1.0 - out.epsilon) + 1e-10);
    return out;
}

} // namespace qest
