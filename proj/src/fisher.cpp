#include "qest/fisher.hpp"

#include <cmath>

namespace qest {

namespace {
    Matrix symmetrize(const Matrix &m) { return (m + m.adjoint()) / 2.0; }
} // namespace

StateDerivative state_derivative(const ParamStateFamily &f, double theta) {
    StateDerivative out;
    const bool      interior = theta - kCentralStep >= f.theta_min && theta + kCentralStep <= f.theta_max;
    const bool      open     = theta > f.theta_min && theta < f.theta_max;
    if(f.derivative && open) {
        out.value    = symmetrize(f.derivative(theta));
        out.analytic = true;
        return out;
    }
    if(interior) {
        out.value = symmetrize((f.state(theta + kCentralStep).matrix() - f.state(theta - kCentralStep).matrix()) / (2.0 * kCentralStep));
        return out;
    }
    out.one_sided = true;
    if(theta + kOneSidedStep <= f.theta_max)
        out.value = symmetrize((f.state(theta + kOneSidedStep).matrix() - f.state(theta).matrix()) / kOneSidedStep);
    else
        out.value = symmetrize((f.state(theta).matrix() - f.state(theta - kOneSidedStep).matrix()) / kOneSidedStep);
    return out;
}

Matrix sld_apply(const DensityOperator &rho, const Matrix &o, double tau) {
    if(o.rows() != static_cast<Eigen::Index>(rho.dim()) || o.cols() != o.rows()) throw std::invalid_argument("sld_apply: dimension mismatch");
    const auto   eig = eig_hermitian(rho.matrix());
    Matrix       ob  = eig.vectors.adjoint() * o * eig.vectors;
    const auto   n   = ob.rows();
    for(Eigen::Index j = 0; j < n; ++j)
        for(Eigen::Index k = 0; k < n; ++k) {
            const double s = eig.values(j) + eig.values(k);
            ob(j, k)       = s > tau ? ob(j, k) * (2.0 / s) : Complex(0.0);
        }
    return eig.vectors * ob * eig.vectors.adjoint();
}

double quantum_fisher(const ParamStateFamily &f, double theta, double tau) {
    const DensityOperator rho = f.state(theta);
    const Matrix          d   = state_derivative(f, theta).value;
    const double          j   = (d * sld_apply(rho, d, tau)).trace().real();
    if(j < -1e-8) throw std::runtime_error("quantum_fisher: negative value " + std::to_string(j) + " indicates numerical failure");
    return std::max(0.0, j);
}

double classical_fisher(const ParamDistribution &d, double theta) {
    const RealVector p = d.probabilities(theta);
    RealVector       dp;
    if(d.derivative) {
        dp = d.derivative(theta);
    } else {
        dp = (d.probabilities(theta + kCentralStep) - d.probabilities(theta - kCentralStep)) / (2.0 * kCentralStep);
    }
    double j = 0.0;
    for(Eigen::Index x = 0; x < p.size(); ++x)
        if(p(x) > 1e-12) j += dp(x) * dp(x) / p(x);
    return j;
}

double povm_fisher(const ParamStateFamily &f, const Povm &m, double theta) {
    if(m.dim() != f.dim) throw std::invalid_argument("povm_fisher: POVM dimension " + std::to_string(m.dim()) + " does not match state dimension " + std::to_string(f.dim));
    const Matrix rho = f.state(theta).matrix();
    const Matrix d   = state_derivative(f, theta).value;
    double       j   = 0.0;
    for(const auto &e : m.elements()) {
        const double p = (e * rho).trace().real();
        if(p <= 1e-12) continue;
        const double dp = (e * d).trace().real();
        j += dp * dp / p;
    }
    return j;
}

double cramer_rao_bound(double j, std::size_t n) {
    if(n == 0) throw std::invalid_argument("cramer_rao_bound: n must be at least 1");
    if(!(j > 0.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / (static_cast<double>(n) * j);
}

std::string to_string(FisherMethod m) {
    switch(m) {
        case FisherMethod::classical: return "classical";
        case FisherMethod::povm: return "povm";
        case FisherMethod::quantum: return "quantum";
    }
    return "unknown";
}

FisherReport quantum_fisher_report(const ParamStateFamily &f, double theta, std::size_t n) {
    FisherReport r;
    r.theta     = theta;
    r.method    = FisherMethod::quantum;
    r.n         = n;
    r.j_value   = quantum_fisher(f, theta);
    r.bound     = cramer_rao_bound(r.j_value, n);
    r.one_sided = state_derivative(f, theta).one_sided;
    return r;
}

FisherReport povm_fisher_report(const ParamStateFamily &f, const Povm &m, double theta, std::size_t n) {
    FisherReport r;
    r.theta     = theta;
    r.method    = FisherMethod::povm;
    r.n         = n;
    r.j_value   = povm_fisher(f, m, theta);
    r.bound     = cramer_rao_bound(r.j_value, n);
    r.one_sided = state_derivative(f, theta).one_sided;
    return r;
}

ParamDistribution bernoulli_distribution() {
    ParamDistribution d;
    d.outcomes      = 2;
    d.probabilities = [](double t) {
        RealVector p(2);
        p << 1.0 - t, t;
        return p;
    };
    d.derivative = [](double) {
        RealVector p(2);
        p << -1.0, 1.0;
        return p;
    };
    return d;
}

ParamDistribution measured_distribution(const ParamStateFamily &f, const Povm &m) {
    ParamDistribution d;
    d.outcomes      = m.size();
    d.probabilities = [f, m](double t) { return outcome_probabilities(m, f.state(t).matrix()); };
    d.derivative    = [f, m](double t) { return outcome_probabilities(m, state_derivative(f, t).value); };
    return d;
}

ParamStateFamily channel_output_family(const ParamChannelFamily &family, const DensityOperator &probe) {
    if(probe.dim() != family.in_dim) throw std::invalid_argument("channel_output_family: probe dimension mismatch");
    ParamStateFamily f;
    f.dim       = family.out_dim;
    f.theta_min = family.theta_min;
    f.theta_max = family.theta_max;
    f.state     = [family, probe](double t) { return apply_channel(family(t), probe); };
    if(family.derivative) f.derivative = [family, probe](double t) { return family.derivative(t, probe.matrix()); };
    return f;
}

ParamStateFamily choi_state_family(const ParamChannelFamily &family) {
    ParamStateFamily f;
    f.dim       = family.in_dim * family.out_dim;
    f.theta_min = family.theta_min;
    f.theta_max = family.theta_max;
    f.state     = [family](double t) { return DensityOperator(choi(family(t)).matrix()); };
    if(family.derivative) {
        f.derivative = [family](double t) {
            const auto din = static_cast<Eigen::Index>(family.in_dim), dout = static_cast<Eigen::Index>(family.out_dim);
            Matrix     out = Matrix::Zero(din * dout, din * dout);
            for(Eigen::Index i = 0; i < din; ++i)
                for(Eigen::Index j = 0; j < din; ++j) {
                    Matrix unit   = Matrix::Zero(din, din);
                    unit(i, j)    = 1.0;
                    out.block(i * dout, j * dout, dout, dout) = family.derivative(t, unit) / static_cast<double>(din);
                }
            return out;
        };
    }
    return f;
}

ParamStateFamily product_family(const ParamStateFamily &a, const ParamStateFamily &b) {
    ParamStateFamily f;
    f.dim       = a.dim * b.dim;
    f.theta_min = std::max(a.theta_min, b.theta_min);
    f.theta_max = std::min(a.theta_max, b.theta_max);
    f.state     = [a, b](double t) { return DensityOperator(tensor(a.state(t).matrix(), b.state(t).matrix())); };
    if(a.derivative && b.derivative) {
        f.derivative = [a, b](double t) {
            return (tensor(a.derivative(t), b.state(t).matrix()) + tensor(a.state(t).matrix(), b.derivative(t))).eval();
        };
    }
    return f;
}

ParamStateFamily tensor_power_family(const ParamStateFamily &f, std::size_t n) {
    if(n == 0) throw std::invalid_argument("tensor_power_family: n must be at least 1");
    ParamStateFamily out = f;
    for(std::size_t i = 1; i < n; ++i) out = product_family(out, f);
    return out;
}

} // namespace qest
