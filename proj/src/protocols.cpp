#include "qest/protocols.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace qest {

namespace {
    Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

    // Σ_K K_q ρ K_q† with K acting on qubit q of an n-qubit density matrix.
    Matrix apply_local(const Matrix &rho, std::size_t n, std::size_t q, const std::vector<Matrix> &kraus) {
        const std::size_t dim   = std::size_t{1} << n;
        const std::size_t shift = n - 1 - q;
        const std::size_t mask  = std::size_t{1} << shift;
        Matrix            out   = Matrix::Zero(idx(dim), idx(dim));
        for(const auto &k : kraus) {
            // Left multiplication on the row index.
            Matrix left(idx(dim), idx(dim));
            for(std::size_t i = 0; i < dim; ++i) {
                const std::size_t bi = (i >> shift) & 1U, i0 = i & ~mask, i1 = i | mask;
                left.row(idx(i)) = k(idx(bi), 0) * rho.row(idx(i0)) + k(idx(bi), 1) * rho.row(idx(i1));
            }
            // Right multiplication by K† on the column index.
            for(std::size_t j = 0; j < dim; ++j) {
                const std::size_t bj = (j >> shift) & 1U, j0 = j & ~mask, j1 = j | mask;
                out.col(idx(j)) += std::conj(k(idx(bj), 0)) * left.col(idx(j0)) + std::conj(k(idx(bj), 1)) * left.col(idx(j1));
            }
        }
        return out;
    }

    Matrix2 s_gate() {
        Matrix2 s = Matrix2::Identity();
        s(1, 1)   = Complex(0, 1);
        return s;
    }

    double wrap_unit(double x) {
        x -= std::floor(x);
        return x >= 1.0 ? 0.0 : x;
    }
} // namespace

// ---------------------------------------------------------------------------

Eigen::MatrixXd fourier_cost_matrix(std::size_t n) {
    if(n == 0) throw std::invalid_argument("fourier_cost_matrix: n must be at least 1");
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(idx(n), idx(n));
    for(std::size_t i = 0; i + 1 < n; ++i) a(idx(i), idx(i + 1)) = a(idx(i + 1), idx(i)) = -0.5;
    return a;
}

ParallelPlan parallel_plan(std::size_t n) {
    if(n == 0) throw std::invalid_argument("parallel_plan: n must be at least 1");
    ParallelPlan plan;
    plan.n = n;
    plan.amplitudes.assign(n + 1, 0.0);
    const double np1 = static_cast<double>(n + 1);
    for(std::size_t k = 1; k <= n; ++k) plan.amplitudes[k] = std::sqrt(2.0 / np1) * std::sin(static_cast<double>(k) * kPi / np1);

    const Matrix a     = fourier_cost_matrix(n).cast<Complex>();
    plan.lambda_min    = eig_hermitian(a).values(0);
    const double s     = std::sin(kPi / (2.0 * np1));
    const double exact = 2.0 * s * s;
    if(std::abs(plan.lambda_min - exact) > 1e-9)
        throw std::runtime_error("parallel_plan: eigensolver minimum " + std::to_string(plan.lambda_min) + " disagrees with 2 sin^2(pi/(2N+2))");
    return plan;
}

std::vector<double> parallel_distribution(const ParallelPlan &plan, double theta) {
    const std::size_t   n   = plan.n;
    const double        np1 = static_cast<double>(n + 1);
    std::vector<double> p(n + 1);
    for(std::size_t l = 0; l <= n; ++l) {
        Complex amp = 0.0;
        for(std::size_t k = 0; k <= n; ++k)
            amp += plan.amplitudes[k] * std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * (theta - static_cast<double>(l) / np1));
        p[l] = std::norm(amp) / np1;
    }
    return p;
}

double parallel_w_closed_form(const ParallelPlan &plan) {
    double w = 1.0;
    for(std::size_t k = 2; k <= plan.n; ++k) w -= plan.amplitudes[k - 1] * plan.amplitudes[k];
    return w;
}

double parallel_w(const ParallelPlan &plan, double theta) {
    const auto   p   = parallel_distribution(plan, theta);
    const double np1 = static_cast<double>(plan.n + 1);
    double       w   = 0.0;
    for(std::size_t l = 0; l < p.size(); ++l) w += p[l] * (1.0 - std::cos(2.0 * kPi * (theta - static_cast<double>(l) / np1)));
    const double closed = parallel_w_closed_form(plan);
    if(std::abs(w - closed) > 1e-10)
        throw std::runtime_error("parallel_w: distribution average " + std::to_string(w) + " disagrees with closed form " + std::to_string(closed));
    return w;
}

double parallel_sample(const ParallelPlan &plan, double theta, RngStream &rng) {
    const auto l = rng.categorical(parallel_distribution(plan, theta));
    return static_cast<double>(l) / static_cast<double>(plan.n + 1);
}

std::vector<double> parallel_samples(const ParallelPlan &plan, double theta, std::size_t count, RngStream &rng) {
    const auto          p = parallel_distribution(plan, theta);
    std::vector<double> out(count);
    for(auto &x : out) x = static_cast<double>(rng.categorical(p)) / static_cast<double>(plan.n + 1);
    return out;
}

std::vector<double> mixed_register_distribution(std::size_t n_qubits, const std::vector<double> &amplitudes, double theta) {
    if(n_qubits == 0 || n_qubits > 12) throw std::invalid_argument("mixed_register_distribution: register size must lie in 1..12");
    const std::size_t dim = std::size_t{1} << n_qubits;
    if(amplitudes.size() != dim) throw std::invalid_argument("mixed_register_distribution: expected 2^n amplitudes");
    Vector psi(idx(dim));
    for(std::size_t x = 0; x < dim; ++x) psi(idx(x)) = amplitudes[x];
    if(std::abs(psi.norm() - 1.0) > 1e-12) throw std::invalid_argument("mixed_register_distribution: amplitudes are not normalized");

    // Qubit j (weight 2^{j−1}) receives U^{2^{j−1}}, U = diag(1, e^{2πiθ}).
    for(std::size_t j = 0; j < n_qubits; ++j) {
        const Complex phase = std::polar(1.0, 2.0 * kPi * theta * std::ldexp(1.0, static_cast<int>(j)));
        for(std::size_t x = 0; x < dim; ++x)
            if((x >> j) & 1U) psi(idx(x)) *= phase;
    }

    // Inverse QFT: |x⟩ ↦ Σ_l e^{−2πixl/M}|l⟩/√M.
    Matrix qft_inv(idx(dim), idx(dim));
    const double md = static_cast<double>(dim);
    for(std::size_t l = 0; l < dim; ++l)
        for(std::size_t x = 0; x < dim; ++x)
            qft_inv(idx(l), idx(x)) = std::polar(1.0 / std::sqrt(md), -2.0 * kPi * static_cast<double>((x * l) % dim) / md);
    const Vector out = qft_inv * psi;

    std::vector<double> p(dim);
    for(std::size_t l = 0; l < dim; ++l) p[l] = std::norm(out(idx(l)));
    return p;
}

// ---------------------------------------------------------------------------

double ideal_phase_probability(double phi, long long m, Quadrature q) {
    const double a = 2.0 * kPi * static_cast<double>(m) * phi;
    return q == Quadrature::cosine ? 0.5 * (1.0 + std::cos(a)) : 0.5 * (1.0 - std::sin(a));
}

double noisy_phase_probability(double theta, double eps, long long m, Quadrature q) {
    if(!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("noisy_phase_probability: eps must lie in [0,1]");
    if(m < 1) throw std::invalid_argument("noisy_phase_probability: m must be at least 1");
    const double decay = std::pow(1.0 - eps, static_cast<double>(m));
    return 0.5 * (1.0 - decay) + decay * ideal_phase_probability(theta, m, q);
}

double sequential_phase_probability(const ParamChannelFamily &family, double theta, long long m, Quadrature q) {
    if(m < 1) throw std::invalid_argument("sequential_phase_probability: m must be at least 1");
    Vector plus(2);
    plus << 1.0, 1.0;
    plus /= std::sqrt(2.0);
    const auto channel = family(theta);
    Matrix     rho     = plus * plus.adjoint();
    for(long long i = 0; i < m; ++i) rho = channel.apply(rho);
    if(q == Quadrature::sine) rho = s_gate() * rho * s_gate().adjoint();
    return (plus.adjoint() * rho * plus)(0, 0).real();
}

double ghz_phase_probability(const ParamChannelFamily &family, double theta, long long m, Quadrature q) {
    if(m < 1 || m > 10) throw std::invalid_argument("ghz_phase_probability: m must lie in 1..10");
    const auto        n   = static_cast<std::size_t>(m);
    const std::size_t dim = std::size_t{1} << n;
    Vector            ghz = Vector::Zero(idx(dim));
    ghz(0) = ghz(idx(dim - 1)) = 1.0 / std::sqrt(2.0);
    Matrix rho = ghz * ghz.adjoint();

    const KrausChannel channel = family(theta);
    const auto        &kraus   = channel.operators();
    for(std::size_t j = 0; j < n; ++j) rho = apply_local(rho, n, j, kraus);
    if(q == Quadrature::sine) rho = apply_local(rho, n, 0, {Matrix(s_gate())});

    // Even X-parity: (1 + tr(ρ X^{⊗n}))/2, and X^{⊗n}|i⟩ = |~i⟩.
    Complex corr = 0.0;
    for(std::size_t i = 0; i < dim; ++i) corr += rho(idx(i), idx((dim - 1) ^ i));
    return 0.5 * (1.0 + corr.real());
}

AmplifiableExperiment phase_experiment(const ParamChannelFamily &family, double theta) {
    if(!family.contains(theta)) throw std::invalid_argument("phase_experiment: theta outside the family's parameter set");
    if(theta < 0.0 || theta > 0.5) throw std::invalid_argument("phase_experiment: theta must lie in [0, 1/2]");
    double eps = 0.0;
    if(family.kind == "depolarized_unitary") {
        if(family.spec.empty()) throw std::invalid_argument("phase_experiment: depolarized_unitary family needs its spec record");
        const auto rec = KeyValueRecord::parse(family.spec);
        if(rec.get("unitary", "phase") != "phase") throw std::invalid_argument("phase_experiment: only the phase convention diag(1, e^{2 pi i theta}) is supported");
        if(rec.get("rho0", "mixed") != "mixed") throw std::invalid_argument("phase_experiment: noise state rho0 must be the maximally mixed state");
        eps = rec.number("eps");
    } else if(family.kind != "phase_unitary") {
        throw std::invalid_argument("phase_experiment: family must be phase_unitary or depolarized_unitary, got '" + family.kind + "'");
    }
    AmplifiableExperiment e;
    e.family      = family.spec.empty() ? family.kind : family.spec;
    e.theta       = theta;
    e.period      = 1.0;
    e.probability = [theta, eps](long long m, Quadrature q) { return noisy_phase_probability(theta, eps, m, q); };
    e.cost        = [](long long m) { return m; };
    return e;
}

double parity_probability_simulated(double theta, const std::function<double(double)> &eta, std::size_t n, double alpha) {
    if(n == 0 || n > 12) throw std::invalid_argument("parity_probability_simulated: n must lie in 1..12");
    const auto        family = families::projector_class(eta);
    const std::size_t dim    = std::size_t{1} << n;

    // |Ψ_n⟩ = Σ_{even i} (−1)^{w(i)/2} |i⟩ / √2^{n−1}
    Vector psi = Vector::Zero(idx(dim));
    for(std::size_t i = 0; i < dim; ++i) {
        const int w = std::popcount(i);
        if(w % 2 == 0) psi(idx(i)) = ((w / 2) % 2 == 0 ? 1.0 : -1.0);
    }
    psi.normalize();
    Matrix rho = psi * psi.adjoint();

    std::vector<Matrix> kraus;
    const Matrix        pre = rotation_matrix(alpha);
    const KrausChannel  channel = family(theta);
    for(const auto &k : channel.operators()) kraus.emplace_back(k * pre);
    for(std::size_t j = 0; j < n; ++j) rho = apply_local(rho, n, j, kraus);

    double even = 0.0;
    for(std::size_t i = 0; i < dim; ++i)
        if(std::popcount(i) % 2 == 0) even += rho(idx(i), idx(i)).real();
    return even;
}

double parity_probability(double theta, const std::function<double(double)> &eta, std::size_t n, double alpha) {
    if(theta < 0.0 || theta > kPi / 2.0) throw std::invalid_argument("parity_probability: theta must lie in [0, pi/2]");
    if(n == 0) throw std::invalid_argument("parity_probability: n must be at least 1");
    if(n <= 8) return parity_probability_simulated(theta, eta, n, alpha);
    const double c = std::cos(static_cast<double>(n) * (theta + alpha));
    return c * c;
}

AmplifiableExperiment parity_experiment(double theta, const std::function<double(double)> &eta) {
    if(theta < 0.0 || theta > kPi / 2.0) throw std::invalid_argument("parity_experiment: theta must lie in [0, pi/2]");
    auto alpha_for = [](long long m, Quadrature q) { return q == Quadrature::cosine ? 0.0 : kPi / (4.0 * static_cast<double>(m)); };

    // Small multipliers are simulated once up front; larger ones use the closed form.
    std::array<std::array<double, 2>, 9> table{};
    for(long long m = 1; m <= 8; ++m)
        for(auto q : {Quadrature::cosine, Quadrature::sine})
            table[static_cast<std::size_t>(m)][q == Quadrature::cosine ? 0 : 1] = parity_probability(theta, eta, static_cast<std::size_t>(m), alpha_for(m, q));

    AmplifiableExperiment e;
    e.family      = "projector_class";
    e.theta       = theta;
    e.period      = kPi;
    e.probability = [theta, table, alpha_for](long long m, Quadrature q) {
        if(m < 1) throw std::invalid_argument("parity experiment: m must be at least 1");
        if(m <= 8) return table[static_cast<std::size_t>(m)][q == Quadrature::cosine ? 0 : 1];
        const double c = std::cos(static_cast<double>(m) * (theta + alpha_for(m, q)));
        return c * c;
    };
    e.cost = [](long long m) { return m; };
    return e;
}

// ---------------------------------------------------------------------------

long long step_sample_size(int k, double epsilon, double delta_p) {
    if(k < 1) throw std::invalid_argument("step_sample_size: k must be at least 1");
    if(!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("step_sample_size: epsilon must lie in (0,1)");
    if(!(delta_p > 0.0 && delta_p <= 0.5)) throw std::invalid_argument("step_sample_size: delta_p must lie in (0,1/2]");
    const double v = std::log(2.0 * k / epsilon) / (2.0 * delta_p * delta_p);
    // Guard against values like 4.0000000000000009 from rounding in the logarithm.
    const double r = std::round(v);
    return static_cast<long long>(std::abs(v - r) < 1e-9 * std::max(1.0, r) ? r : std::ceil(v));
}

BitwiseConfig BitwiseConfig::resolved() const {
    BitwiseConfig c = *this;
    if(c.k < 1 || c.k > 30) throw std::invalid_argument("BitwiseConfig: k must lie in 1..30");
    if(c.epsilon == 0.0) c.epsilon = std::pow(3.0, -2.0 * c.k);
    const long long minimum = step_sample_size(c.k, c.epsilon, c.delta_p);
    if(c.n_per_step == 0) c.n_per_step = minimum;
    if(c.n_per_step < minimum)
        throw std::invalid_argument("BitwiseConfig: n_per_step " + std::to_string(c.n_per_step) + " is below the required " + std::to_string(minimum));
    return c;
}

double EstimationResult::radix_product() const {
    double p = 1.0;
    for(const auto &s : steps) p *= s.radix;
    return p;
}

namespace {

    template<typename Draw>
    EstimationResult bitwise_core(const AmplifiableExperiment &exp, const BitwiseConfig &cfg_in, Draw &&draw) {
        EstimationResult res;
        res.config = cfg_in.resolved();
        const auto &cfg = res.config;

        // Prior for the current residual y: center c, half-width ≤ 1/4.
        double    center     = 0.25;
        long long multiplier = 1;
        long long uses       = 0;
        for(int i = 0; i < cfg.k; ++i) {
            BitwiseStep s;
            s.multiplier = multiplier;
            s.cos_freq   = draw(multiplier, Quadrature::cosine);
            s.sin_freq   = draw(multiplier, Quadrature::sine);
            uses += 2 * cfg.n_per_step * exp.cost(multiplier);

            const double c_hat = 2.0 * s.cos_freq - 1.0;
            const double s_hat = 1.0 - 2.0 * s.sin_freq;
            s.raw              = wrap_unit(std::atan2(s_hat, c_hat) / (2.0 * kPi));

            const double y_hat = s.raw + std::round(center - s.raw);
            double       whole = std::floor(y_hat);
            double       t     = y_hat - whole;
            if(t < 1.0 / 12.0) {
                s.radix = 3;
                s.digit = 0;
            } else if(t < 5.0 / 12.0) {
                s.radix = 2;
                s.digit = 0;
            } else if(t < 7.0 / 12.0) {
                s.radix = 3;
                s.digit = 1;
            } else if(t < 11.0 / 12.0) {
                s.radix = 2;
                s.digit = 1;
            } else {
                s.radix = 3;
                s.digit = 0;
                t -= 1.0;
                whole += 1.0;
            }
            s.carry = static_cast<int>(whole);
            center  = s.radix * t - s.digit;
            multiplier *= s.radix;
            res.steps.push_back(s);
        }

        // φ = n₁ + Σ_i (ν_i + n_{i+1}) / Π_{j≤i} r_j, optionally plus the final residual.
        double digits = res.steps.front().carry;
        double scale  = 1.0;
        for(std::size_t i = 0; i < res.steps.size(); ++i) {
            scale *= res.steps[i].radix;
            const int next_carry = i + 1 < res.steps.size() ? res.steps[i + 1].carry : 0;
            digits += (res.steps[i].digit + next_carry) / scale;
        }
        auto fold = [](double x) {
            x = wrap_unit(x);
            return std::min(x, 1.0 - x);
        };
        res.phi_digits = fold(digits);
        res.phi_hat    = cfg.readout == BitwiseReadout::residual ? fold(digits + center / scale) : res.phi_digits;
        res.theta_hat  = res.phi_hat * exp.period;
        res.total_uses = uses;
        return res;
    }

} // namespace

EstimationResult bitwise_estimate(const AmplifiableExperiment &exp, const BitwiseConfig &cfg, RngStream &rng) {
    const long long n = cfg.resolved().n_per_step;
    return bitwise_core(exp, cfg, [&](long long m, Quadrature q) {
        const double p = std::clamp(exp.probability(m, q), 0.0, 1.0);
        return static_cast<double>(rng.binomial(n, p)) / static_cast<double>(n);
    });
}

EstimationResult bitwise_estimate_exact(const AmplifiableExperiment &exp, const BitwiseConfig &cfg) {
    return bitwise_core(exp, cfg, [&](long long m, Quadrature q) { return std::clamp(exp.probability(m, q), 0.0, 1.0); });
}

} // namespace qest
