#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qest/protocols.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

using namespace qest;

namespace {

// Brute-force Pr(l) from the definition of the Fourier-basis measurement.
std::vector<double> dft_oracle(const std::vector<double> &a, double theta) {
    const std::size_t m = a.size();
    std::vector<double> p(m);
    for(std::size_t l = 0; l < m; ++l) {
        Complex s = 0.0;
        for(std::size_t k = 0; k < m; ++k)
            s += a[k] * std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * (theta - static_cast<double>(l) / static_cast<double>(m)));
        p[l] = std::norm(s) / static_cast<double>(m);
    }
    return p;
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double circ(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1.0 - d);
}

Vector plus_ket() {
    Vector v(2);
    v << 1.0, 1.0;
    return v / std::sqrt(2.0);
}

// ⟨+|S^s ρ S^s†|+⟩ for s ∈ {0, 1}.
double x_measurement(const Matrix &rho, bool quarter) {
    Matrix s = Matrix::Identity(2, 2);
    if(quarter) s(1, 1) = Complex(0, 1);
    const Vector p = plus_ket();
    return (p.adjoint() * s * rho * s.adjoint() * p)(0, 0).real();
}

const std::function<double(double)> kEtaHalf = [](double) { return 0.5; };

} // namespace

TEST_CASE("parallel_plan examples") {
    const auto p1 = parallel_plan(1);
    CHECK(p1.amplitudes.size() == 2);
    CHECK(p1.amplitudes[0] == 0.0);
    CHECK(std::abs(p1.amplitudes[1] - 1.0) < 1e-15);
    CHECK(std::abs(p1.lambda_min - 1.0) < 1e-12);

    const auto p2 = parallel_plan(2);
    CHECK(std::abs(p2.amplitudes[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(p2.amplitudes[2] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(p2.lambda_min - 0.5) < 1e-12);

    const double s = std::sin(kPi / 32.0);
    CHECK(std::abs(parallel_plan(15).lambda_min - 2.0 * s * s) < 1e-9);

    for(std::size_t n = 1; n <= 64; ++n) {
        const auto   plan = parallel_plan(n);
        const double norm = std::inner_product(plan.amplitudes.begin(), plan.amplitudes.end(), plan.amplitudes.begin(), 0.0);
        CHECK(std::abs(norm - 1.0) < 1e-12);
        CHECK(plan.amplitudes.front() == 0.0);
    }
    CHECK(fourier_cost_matrix(3)(0, 1) == -0.5);
}

TEST_CASE("parallel_distribution examples") {
    for(double t : {0.0, 0.17, 0.5, 0.91}) {
        const auto p = parallel_distribution(parallel_plan(1), t);
        CHECK(std::abs(p[0] - 0.5) < 1e-14);
        CHECK(std::abs(p[1] - 0.5) < 1e-14);
    }
    const auto p2 = parallel_plan(2);
    CHECK(max_abs_diff(parallel_distribution(p2, 0.0), dft_oracle(p2.amplitudes, 0.0)) < 1e-14);

    const auto p4   = parallel_distribution(parallel_plan(4), 0.2);
    const auto best = std::max_element(p4.begin(), p4.end()) - p4.begin();
    CHECK(best == 1);
    CHECK(p4[1] > 0.5);

    for(std::size_t n : {1, 5, 16, 64})
        for(double t : linear_grid(0.0, 1.0, 33)) {
            const auto plan = parallel_plan(n);
            const auto p    = parallel_distribution(plan, t);
            CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
            CHECK(max_abs_diff(p, dft_oracle(plan.amplitudes, t)) < 1e-12);
        }
}

TEST_CASE("parallel_w is theta-independent and matches the eigenvalue") {
    CHECK(std::abs(parallel_w(parallel_plan(1), 0.3) - 1.0) < 1e-12);
    CHECK(std::abs(parallel_w(parallel_plan(2), 0.3) - 0.5) < 1e-12);
    for(std::size_t n : {3, 8, 31, 64}) {
        const auto plan = parallel_plan(n);
        const double s  = std::sin(kPi / (2.0 * static_cast<double>(n) + 2.0));
        double lo = 10.0, hi = -10.0;
        for(double t : linear_grid(0.0, 1.0, 33)) {
            const double w = parallel_w(plan, t);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        CHECK(hi - lo <= 1e-10);
        CHECK(std::abs(hi - 2.0 * s * s) < 1e-10);
        CHECK(std::abs(parallel_w_closed_form(plan) - plan.lambda_min) < 1e-10);
    }
}

TEST_CASE("parallel_sample") {
    auto rng = rng_stream(7, {"plan1"});
    int  zeros = 0, halves = 0;
    for(int i = 0; i < 2000; ++i) {
        const double x = parallel_sample(parallel_plan(1), 0.3, rng);
        zeros += x == 0.0;
        halves += x == 0.5;
    }
    CHECK(zeros + halves == 2000);
    CHECK(std::abs(zeros - 1000) < 3 * std::sqrt(500.0));

    const auto plan = parallel_plan(4);
    auto       a = rng_stream(99, {"det"}), b = rng_stream(99, {"det"});
    for(int i = 0; i < 50; ++i) CHECK(parallel_sample(plan, 0.2, a) == parallel_sample(plan, 0.2, b));
    const auto batch = parallel_samples(plan, 0.2, 50, a);
    for(double x : batch) CHECK(x == parallel_sample(plan, 0.2, b));

    const int    draws = 100000;
    auto         mc    = rng_stream(2026, {"w"});
    double       sum = 0.0, sum2 = 0.0;
    for(int i = 0; i < draws; ++i) {
        const double v = 1.0 - std::cos(2.0 * kPi * (parallel_sample(plan, 0.2, mc) - 0.2));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / draws;
    const double se   = std::sqrt((sum2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean - parallel_w(plan, 0.2)) <= 3.0 * se);
}

TEST_CASE("mixed register equals the parallel strategy") {
    for(std::size_t q : {2, 3, 4}) {
        const std::size_t n    = (std::size_t{1} << q) - 1;
        const auto        plan = parallel_plan(n);
        for(double t : linear_grid(0.0, 1.0, 9)) CHECK(max_abs_diff(mixed_register_distribution(q, plan.amplitudes, t), parallel_distribution(plan, t)) < 1e-12);
    }
    const std::vector<double> uniform(8, 1.0 / std::sqrt(8.0));
    const auto p0 = mixed_register_distribution(3, uniform, 0.0);
    CHECK(std::abs(p0[0] - 1.0) < 1e-12);
    const auto p = mixed_register_distribution(3, uniform, 0.37);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    CHECK_THROWS_AS(mixed_register_distribution(3, std::vector<double>(4, 0.5), 0.1), std::invalid_argument);
}

TEST_CASE("phase experiment examples") {
    const auto fam = families::phase_unitary();
    CHECK(std::abs(phase_experiment(fam, 0.0).probability(1, Quadrature::cosine) - 1.0) < 1e-15);
    CHECK(std::abs(phase_experiment(fam, 0.125).probability(2, Quadrature::cosine) - 0.5) < 1e-15);

    // State-vector oracle: |+⟩, phase e^{2πiθ} on |1⟩, quarter-phase, then ⟨+|.
    const Complex e   = std::polar(1.0, 2.0 * kPi * 0.125);
    const double  sin1 = std::norm((1.0 + Complex(0, 1) * e) / 2.0);
    CHECK(std::abs(phase_experiment(fam, 0.125).probability(1, Quadrature::sine) - sin1) < 1e-15);
    CHECK(std::abs(sin1 - (1.0 - std::sqrt(2.0) / 2.0) / 2.0) < 1e-15);
    CHECK(phase_experiment(fam, 0.3).cost(5) == 5);
    CHECK_THROWS_AS(phase_experiment(families::amplitude_damping(), 0.3), std::invalid_argument);
}

TEST_CASE("GHZ and sequential samplers agree") {
    const std::vector<ParamChannelFamily> fams{families::phase_unitary(),
                                               families::depolarized_unitary(0.1, DensityOperator::maximally_mixed(2))};
    for(const auto &fam : fams)
        for(long long m = 1; m <= 8; ++m)
            for(double t : {0.0, 0.11, 0.3, 0.47})
                for(auto q : {Quadrature::cosine, Quadrature::sine}) {
                    const double seq = sequential_phase_probability(fam, t, m, q);
                    CHECK(std::abs(seq - ghz_phase_probability(fam, t, m, q)) < 1e-12);
                }
}

TEST_CASE("noisy_phase_probability matches channel simulation") {
    const DensityOperator plus = DensityOperator::from_ket(plus_ket());
    for(double eps : {0.0, 0.05, 0.3})
        for(double t : {0.0, 0.13, 0.4})
            for(auto q : {Quadrature::cosine, Quadrature::sine}) {
                const auto fam = families::depolarized_unitary(eps, DensityOperator::maximally_mixed(2));
                const Matrix one = apply_channel(fam(t), plus).matrix();
                CHECK(std::abs(noisy_phase_probability(t, eps, 1, q) - x_measurement(one, q == Quadrature::sine)) < 1e-12);
                const Matrix three = apply_channel(power(fam(t), 3), plus).matrix();
                CHECK(std::abs(noisy_phase_probability(t, eps, 3, q) - x_measurement(three, q == Quadrature::sine)) < 1e-10);
            }
    CHECK(noisy_phase_probability(0.2, 0.0, 4, Quadrature::cosine) == doctest::Approx(ideal_phase_probability(0.2, 4, Quadrature::cosine)).epsilon(1e-15));
}

TEST_CASE("parity law") {
    for(double t : linear_grid(0.0, kPi / 2.0, 7)) {
        CHECK(std::abs(parity_probability_simulated(t, kEtaHalf, 1, 0.0) - std::pow(std::cos(t), 2)) < 1e-12);
        CHECK(std::abs(parity_probability_simulated(t, kEtaHalf, 2, 0.0) - std::pow(std::cos(2 * t), 2)) < 1e-12);
    }
    for(std::size_t n = 1; n <= 8; ++n) CHECK(std::abs(parity_probability_simulated(0.0, kEtaHalf, n, 0.0) - 1.0) < 1e-12);

    const std::vector<std::function<double(double)>> etas{[](double) { return 0.0; }, [](double) { return 1.0; }, kEtaHalf,
                                                          [](double t) { return std::sin(t) * std::sin(t); }};
    for(std::size_t n = 1; n <= 6; ++n)
        for(double t : linear_grid(0.0, kPi / 2.0, 5))
            for(double alpha : {0.0, kPi / (4.0 * static_cast<double>(n)), 0.3}) {
                const double law = std::pow(std::cos(static_cast<double>(n) * (t + alpha)), 2);
                for(const auto &eta : etas) CHECK(std::abs(parity_probability_simulated(t, eta, n, alpha) - law) < 1e-12);
            }
    CHECK(std::abs(parity_probability(0.3, kEtaHalf, 20, 0.0) - std::pow(std::cos(6.0), 2)) < 1e-12);
    CHECK_THROWS_AS(parity_experiment(2.0, kEtaHalf), std::invalid_argument);

    const auto exp = parity_experiment(0.4, kEtaHalf);
    CHECK(exp.period == doctest::Approx(kPi));
    for(long long m = 1; m <= 12; ++m) {
        CHECK(std::abs(exp.probability(m, Quadrature::cosine) - ideal_phase_probability(0.4 / kPi, m, Quadrature::cosine)) < 1e-12);
        CHECK(std::abs(exp.probability(m, Quadrature::sine) - ideal_phase_probability(0.4 / kPi, m, Quadrature::sine)) < 1e-12);
        CHECK(exp.cost(m) == m);
    }
}

TEST_CASE("step_sample_size") {
    CHECK(step_sample_size(1, 2.0 / std::exp(2.0), 0.5) == 4);
    const long long base = step_sample_size(3, 0.01, 0.2), half = step_sample_size(3, 0.01, 0.1);
    CHECK(std::abs(half - 4 * base) <= 4);
    const double independent = (std::log(20.0) + 20.0 * std::log(3.0)) * 32.0;
    CHECK(step_sample_size(10, std::pow(3.0, -20), 0.125) == static_cast<long long>(std::ceil(independent)));
    CHECK_THROWS_AS(step_sample_size(0, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(step_sample_size(2, 0.1, 0.6), std::invalid_argument);

    BitwiseConfig cfg;
    cfg.k = 3;
    const auto r = cfg.resolved();
    CHECK(r.epsilon == doctest::Approx(std::pow(3.0, -6)));
    CHECK(r.n_per_step == step_sample_size(3, r.epsilon, 0.125));
    cfg.n_per_step = 5;
    CHECK_THROWS_AS((void)cfg.resolved(), std::invalid_argument);
}

TEST_CASE("quadrature deviations of 1/8 keep the angle within 1/12 turn") {
    const double bound = std::asin(std::sqrt(2.0) / 4.0);
    CHECK(bound / (2.0 * kPi) < 1.0 / 12.0);
    double worst = 0.0;
    for(double a : linear_grid(0.0, 2.0 * kPi, 721))
        for(double dc : linear_grid(-0.25, 0.25, 41))
            for(double ds : linear_grid(-0.25, 0.25, 41)) {
                const double est = std::atan2(std::sin(a) + ds, std::cos(a) + dc);
                double       d   = std::fmod(std::abs(est - a), 2.0 * kPi);
                d                = std::min(d, 2.0 * kPi - d);
                worst            = std::max(worst, d);
            }
    CHECK(worst <= bound + 1e-12);
    CHECK(worst / (2.0 * kPi) < 1.0 / 12.0);
}

TEST_CASE("bitwise estimator with exact probabilities") {
    const auto fam = families::phase_unitary();
    BitwiseConfig cfg;
    cfg.k = 4;
    CHECK(bitwise_estimate_exact(phase_experiment(fam, 0.0), cfg).phi_hat == doctest::Approx(0.0).epsilon(1e-12));
    const auto third = bitwise_estimate_exact(phase_experiment(fam, 1.0 / 3.0), cfg);
    CHECK(circ(third.phi_hat, 1.0 / 3.0) <= 1.0 / third.radix_product());

    cfg.k = 9;
    for(double phi : linear_grid(0.0, 0.5, 101)) {
        const auto r = bitwise_estimate_exact(phase_experiment(fam, phi), cfg);
        CAPTURE(phi);
        CHECK(r.phi_hat >= 0.0);
        CHECK(r.phi_hat <= 0.5);
        CHECK(circ(r.phi_digits, phi) <= 1.0 / r.radix_product() + 1e-12);
        // Exact probabilities make the final residual exact as well.
        CHECK(circ(r.phi_hat, phi) <= 1e-9);
    }
    cfg.readout = BitwiseReadout::digits;
    const auto digits = bitwise_estimate_exact(phase_experiment(fam, 0.3), cfg);
    CHECK(digits.phi_hat == digits.phi_digits);
}

TEST_CASE("bitwise use-count identity") {
    const auto exp = phase_experiment(families::phase_unitary(), 0.29);
    BitwiseConfig cfg;
    cfg.k    = 7;
    auto rng = rng_stream(5, {"uses"});
    const auto r = bitwise_estimate(exp, cfg, rng);
    REQUIRE(r.steps.size() == 7);
    long long multipliers = 0, prod = 1;
    for(const auto &s : r.steps) {
        CHECK(s.multiplier == prod);
        CHECK((s.radix == 2 || s.radix == 3));
        multipliers += s.multiplier;
        prod *= s.radix;
    }
    CHECK(r.total_uses == 2 * r.config.n_per_step * multipliers);
    CHECK(multipliers <= prod);
    CHECK(static_cast<double>(prod) == r.radix_product());
}

TEST_CASE("residual readout stays within the step-k resolution") {
    const auto fam = families::phase_unitary();
    BitwiseConfig cfg;
    cfg.k = 6;
    for(int t = 0; t < 200; ++t) {
        const double phi = 0.5 * (t + 0.5) / 200.0;
        auto         rng = rng_stream(12, {"residual", static_cast<std::uint64_t>(t)});
        const auto   r   = bitwise_estimate(phase_experiment(fam, phi), cfg, rng);
        const double previous = r.radix_product() / r.steps.back().radix;
        CAPTURE(phi);
        CHECK(circ(r.phi_hat, phi) <= 1.0 / (12.0 * previous));
    }
}

TEST_CASE("bitwise coverage on the noiseless phase family") {
    const auto fam = families::phase_unitary();
    BitwiseConfig cfg;
    cfg.k            = 6;
    const auto res   = cfg.resolved();
    const int trials = 100;
    for(double phi : {0.05, 0.13, 0.25, 0.37, 0.45}) {
        int hits = 0;
        for(int t = 0; t < trials; ++t) {
            auto       rng = rng_stream(11, {"coverage", std::bit_cast<std::uint64_t>(phi), static_cast<std::uint64_t>(t)});
            const auto r   = bitwise_estimate(phase_experiment(fam, phi), cfg, rng);
            hits += circ(r.phi_hat, phi) <= 1.0 / r.radix_product();
        }
        const double p     = 1.0 - res.epsilon;
        const double sigma = std::sqrt(p * (1 - p) / trials);
        CAPTURE(phi);
        CHECK(static_cast<double>(hits) / trials >= p - 3.0 * sigma);
    }
}
