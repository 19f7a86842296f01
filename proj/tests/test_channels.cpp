#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qest/channels.hpp"
#include "support/random_families.hpp"

#include <algorithm>

using namespace qest;

namespace {

Matrix ket_dm(const Vector &v) { return v * v.adjoint(); }

Vector ket(Complex a, Complex b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Choi matrix assembled directly from the action of a map on |i⟩⟨j|.
template<typename Map>
Matrix choi_of_map(std::size_t d, Map &&map) {
    const auto di = static_cast<Eigen::Index>(d);
    Matrix     c  = Matrix::Zero(di * di, di * di);
    for(Eigen::Index i = 0; i < di; ++i)
        for(Eigen::Index j = 0; j < di; ++j) {
            Matrix e   = Matrix::Zero(di, di);
            e(i, j)    = 1.0;
            c.block(i * di, j * di, di, di) = map(e) / static_cast<double>(d);
        }
    return c;
}

std::vector<double> sorted_eigenvalues(const Matrix &m) {
    const auto e = eig_hermitian(m);
    return {e.values.data(), e.values.data() + e.values.size()};
}

} // namespace

TEST_CASE("KrausChannel and ChoiMatrix validation") {
    CHECK_THROWS_AS(KrausChannel(2, 2, {Matrix(Matrix::Identity(2, 2) * 0.9)}), std::invalid_argument);
    CHECK_THROWS_AS(KrausChannel(2, 2, {Matrix(Matrix::Identity(3, 3))}), std::invalid_argument);
    CHECK_THROWS_AS(ChoiMatrix(2, 2, Matrix(Matrix::Identity(4, 4) / 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(StochasticMatrix((Eigen::MatrixXd(2, 2) << 0.5, 0.6, 0.5, 0.5).finished()), std::invalid_argument);
    CHECK_THROWS_AS(StochasticMatrix((Eigen::MatrixXd(1, 2) << 1.5, -0.5).finished()), std::invalid_argument);
}

TEST_CASE("apply_channel examples") {
    auto       rng = rng_stream(21, {"apply"});
    const auto rho = testing::random_density(rng, 2);
    CHECK(frobenius_distance(apply_channel(KrausChannel::identity(2), rho).matrix(), rho.matrix()) < 1e-15);

    const auto dep = families::depolarizing();
    CHECK(frobenius_distance(apply_channel(dep(1.0), DensityOperator::basis(2, 0)).matrix(), Matrix(Matrix::Identity(2, 2) / 2.0)) < 1e-15);
    CHECK_THROWS_AS(apply_channel(dep(0.5), DensityOperator::maximally_mixed(3)), std::invalid_argument);

    // η = 1/2 projector-class channel equals measuring in the θ-rotated basis.
    const auto pc = families::projector_class([](double) { return 0.5; });
    for(double theta : {0.0, 0.3, 0.9, kPi / 2}) {
        const Vector t0 = ket(std::cos(theta), std::sin(theta)), t1 = ket(std::sin(theta), -std::cos(theta));
        const Matrix r  = rho.matrix();
        Matrix       expected = Matrix::Zero(2, 2);
        expected(0, 0) = (t0.adjoint() * r * t0)(0, 0);
        expected(1, 1) = (t1.adjoint() * r * t1)(0, 0);
        CHECK(frobenius_distance(apply_channel(pc(theta), rho).matrix(), expected) < 1e-12);
    }
}

TEST_CASE("compose and power") {
    auto       rng = rng_stream(22, {"compose"});
    const auto dep = families::depolarizing();
    const auto ad  = families::amplitude_damping();
    CHECK(channels_equal(compose(KrausChannel::identity(2), ad(0.3)), ad(0.3), 1e-14));
    CHECK_THROWS_AS(compose(KrausChannel::identity(3), ad(0.3)), std::invalid_argument);

    for(int trial = 0; trial < 10; ++trial) {
        const auto   rho = testing::random_density(rng, 2);
        const auto   a = ad(0.37), b = dep(0.6);
        const Matrix seq = b.apply(a.apply(rho.matrix()));
        CHECK(frobenius_distance(compose(b, a).apply(rho.matrix()), seq) < 1e-10);
    }

    // power(depolarized_unitary, 3) against the closed form.
    const double eps = 0.1, theta = 0.23;
    const auto   du  = families::depolarized_unitary(eps, DensityOperator::maximally_mixed(2));
    const auto   p3  = power(du(theta), 3);
    const double keep = std::pow(1.0 - eps, 3);
    const Matrix u3   = phase_unitary_matrix(3 * theta);
    const Matrix closed = choi_of_map(2, [&](const Matrix &x) { return ((1.0 - keep) * x.trace() * Matrix::Identity(2, 2) / 2.0 + keep * u3 * x * u3.adjoint()).eval(); });
    CHECK(frobenius_distance(choi(p3).matrix(), closed) < 1e-10);

    const auto ph = families::phase_unitary();
    for(std::size_t m : {1, 2, 5, 17}) CHECK(channel_distance(power(ph(0.11), m), ph(std::fmod(0.11 * m, 1.0))) < 1e-10);

    // Operator count stays bounded by d² after re-factorization.
    CHECK(power(families::generalized_amplitude_damping(0.3)(0.4), 12).operators().size() <= 4);
}

TEST_CASE("choi examples") {
    const Matrix id = choi(KrausChannel::identity(2)).matrix();
    const auto   ev = sorted_eigenvalues(id);
    CHECK(std::abs(ev[3] - 1.0) < 1e-14);
    for(int i = 0; i < 3; ++i) CHECK(std::abs(ev[static_cast<std::size_t>(i)]) < 1e-14);
    CHECK(frobenius_distance(choi(families::depolarizing()(1.0)).matrix(), Matrix(Matrix::Identity(4, 4) / 4.0)) < 1e-15);

    // Reference system is the first factor: tracing the output leaves I/d.
    const auto c = choi(families::amplitude_damping()(0.4));
    CHECK(frobenius_distance(partial_trace(c.matrix(), {2, 2}, {0}), Matrix(Matrix::Identity(2, 2) / 2.0)) < 1e-14);
}

TEST_CASE("generalized amplitude damping Choi eigenvalues") {
    for(double p : {0.1, 0.4, 0.75})
        for(double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
            const auto   got  = sorted_eigenvalues(choi(families::generalized_amplitude_damping(p)(t)).matrix());
            const double disc = std::sqrt((2 - t) * (2 - t) - 4 * p * (1 - p) * t * t);
            std::vector<double> expected{p * t / 2, (t - p * t) / 2, (2 - t + disc) / 4, (2 - t - disc) / 4};
            std::sort(expected.begin(), expected.end());
            for(std::size_t i = 0; i < 4; ++i) CHECK(std::abs(got[i] - expected[i]) < 1e-10);
        }
}

TEST_CASE("kraus_from_choi and apply_choi round trip") {
    auto rng = rng_stream(23, {"kraus-choi"});
    for(const auto &fam : {families::generalized_amplitude_damping(0.3), families::depolarizing(), families::amplitude_damping()}) {
        const auto c  = fam(0.45);
        const auto cc = choi(c);
        CHECK(channels_equal(kraus_from_choi(cc), c, 1e-10));
        const auto rho = testing::random_density(rng, 2);
        CHECK(frobenius_distance(apply_choi(cc, rho.matrix()), c.apply(rho.matrix())) < 1e-12);
    }
}

TEST_CASE("channels_equal examples") {
    // Projector-class at η = 1/2 versus its projective two-operator form.
    const auto pc = families::projector_class([](double) { return 0.5; });
    for(double theta : {0.1, 0.7, 1.3}) {
        const Matrix       u = basis_theta_unitary(theta);
        Matrix             k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
        k0.row(0) = u.row(0);
        k1.row(1) = u.row(1);
        const KrausChannel projective(2, 2, {k0, k1});
        CHECK(channels_equal(pc(theta), projective, 1e-10));
    }

    // Pauli Kraus set of the depolarizing channel versus the mixture θ I/2 + (1−θ)ρ.
    for(double theta : {0.0, 0.25, 0.8, 1.0}) {
        const Matrix mixture = choi_of_map(2, [&](const Matrix &x) { return (theta * x.trace() * Matrix::Identity(2, 2) / 2.0 + (1.0 - theta) * x).eval(); });
        CHECK(frobenius_distance(choi(families::depolarizing()(theta)).matrix(), mixture) < 1e-14);
    }

    const auto ph = families::phase_unitary();
    CHECK_FALSE(channels_equal(ph(0.1), ph(0.2), 1e-6));
}

TEST_CASE("catalog families are channels on their grids") {
    const std::vector<std::string> specs{
        "kind=identity",
        "kind=phase_unitary",
        "kind=symmetric_phase",
        "kind=depolarizing",
        "kind=pauli;a=1,0,0,0;b=-0.75,0.25,0.25,0.25",
        "kind=amplitude_damping",
        "kind=gad;p=0.3",
        "kind=projector_class;eta=0.25",
        "kind=dmc;rows=2;q0=0.7,0.3,0.3,0.7;q1=0.2,0.8,0.6,0.4",
        "kind=depolarized_unitary;eps=0.2;rho0=plus",
        "kind=computational_measurement",
        "kind=basis_measurement",
    };
    for(const auto &s : specs) {
        INFO(s);
        const auto f = make_family(s);
        for(double t : linear_grid(f.theta_min, f.theta_max, 33)) {
            const auto c = f(t);
            Matrix     total = Matrix::Zero(static_cast<Eigen::Index>(c.in_dim()), static_cast<Eigen::Index>(c.in_dim()));
            for(const auto &e : c.operators()) total += e.adjoint() * e;
            CHECK(frobenius_distance(total, Matrix(Matrix::Identity(total.rows(), total.cols()))) <= 1e-10);
            CHECK(min_eigenvalue(choi(c).matrix()) >= -1e-10);
        }
        CHECK_THROWS_AS(static_cast<void>(f(f.theta_max + 0.01)), std::invalid_argument);
    }
}

TEST_CASE("make_family examples and rejections") {
    CHECK(channels_equal(make_family("kind=depolarizing")(0.0), KrausChannel::identity(2), 1e-14));
    const auto pauli = make_family("kind=pauli;a=1,0,0,0;b=-0.75,0.25,0.25,0.25");
    for(double t : {0.0, 0.3, 1.0}) CHECK(channels_equal(pauli(t), families::depolarizing()(t), 1e-14));

    const auto dmc = make_family("kind=dmc;rows=2;q0=1,0,0,1");
    Matrix     rho = Matrix::Zero(2, 2);
    rho(0, 0)      = 0.3;
    rho(1, 1)      = 0.7;
    CHECK(frobenius_distance(dmc(0.5).apply(rho), rho) < 1e-15);

    CHECK_THROWS_AS(make_family("kind=gad;p=1.5"), std::invalid_argument);
    CHECK_THROWS_AS(make_family("kind=dmc;rows=2;q0=0.5,0.6,0.5,0.5"), std::invalid_argument);
    CHECK_THROWS_AS(make_family("kind=projector_class;eta=2"), std::invalid_argument);
    CHECK_THROWS_AS(make_family("kind=pauli;a=0.5,0,0,0"), std::invalid_argument);
    CHECK_THROWS_AS(make_family("kind=nonesuch"), std::invalid_argument);
    CHECK_THROWS_AS(make_family("kind=depolarized_unitary;eps=-0.1"), std::invalid_argument);
}

TEST_CASE("dmc families keep diagonal inputs diagonal") {
    const auto f = make_family("kind=dmc;rows=2;q0=0.7,0.3,0.3,0.7;q1=0.2,0.8,0.6,0.4");
    auto       rng = rng_stream(24, {"dmc-diag"});
    for(double t : linear_grid(0, 1, 9)) {
        const double a   = rng.uniform();
        Matrix       rho = Matrix::Zero(2, 2);
        rho(0, 0)        = a;
        rho(1, 1)        = 1 - a;
        const Matrix out = f(t).apply(rho);
        CHECK(std::abs(out(0, 1)) <= 1e-12);
        CHECK(std::abs(out(1, 0)) <= 1e-12);
        // Output distribution is p Q(θ).
        const double q00 = (1 - t) * 0.7 + t * 0.2, q10 = (1 - t) * 0.3 + t * 0.6;
        CHECK(std::abs(out(0, 0).real() - (a * q00 + (1 - a) * q10)) < 1e-12);
    }
}

TEST_CASE("depolarized unitary matches its mixture form") {
    auto       rng = rng_stream(25, {"dnoise-form"});
    const auto f   = families::depolarized_unitary(0.3, DensityOperator::maximally_mixed(2));
    for(double t : linear_grid(0, 1, 7)) {
        const auto   rho = testing::random_density(rng, 2);
        const Matrix u   = phase_unitary_matrix(t);
        const Matrix expected = 0.3 * Matrix::Identity(2, 2) / 2.0 + 0.7 * u * rho.matrix() * u.adjoint();
        CHECK(frobenius_distance(apply_channel(f(t), rho).matrix(), expected) <= 1e-12);
    }
}

TEST_CASE("measurement after projector-class channel is independent of eta") {
    const auto meas = families::computational_measurement()(0.0);
    for(double t : linear_grid(0, kPi / 2, 9)) {
        const Matrix reference = choi(compose(meas, families::projector_class([](double) { return 0.0; })(t))).matrix();
        for(double eta : {0.25, 0.5, 1.0}) {
            const Matrix c = choi(compose(meas, families::projector_class([eta](double) { return eta; })(t))).matrix();
            CHECK(frobenius_distance(c, reference) <= 1e-12);
        }
    }
}

TEST_CASE("max_depolarizing_component examples") {
    const auto mixed = DensityOperator::maximally_mixed(2);
    const auto zero  = DensityOperator::basis(2, 0);

    // Constant channel ρ ↦ |0⟩⟨0|.
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(0, 1) = 1.0;
    const KrausChannel constant(2, 2, {a, b});
    CHECK(max_depolarizing_component(constant, zero).epsilon == doctest::Approx(1.0));

    CHECK(max_depolarizing_component(families::amplitude_damping()(0.3), mixed).epsilon == 0.0);

    const auto gad = max_depolarizing_component(families::generalized_amplitude_damping(0.4)(0.5), mixed);
    CHECK(gad.epsilon > 0.0);
    REQUIRE(gad.residual.has_value());
    // ε ρ₀ + (1−ε) residual reproduces the channel.
    const Matrix s = tensor(Matrix(Matrix::Identity(2, 2) / 2.0), mixed.matrix());
    CHECK(frobenius_distance(gad.epsilon * s + (1 - gad.epsilon) * gad.residual->matrix(), choi(families::generalized_amplitude_damping(0.4)(0.5)).matrix()) < 1e-12);

    // Depolarized unitary contains exactly its noise level (to bisection accuracy).
    const auto du = max_depolarizing_component(families::depolarized_unitary(0.2, mixed)(0.3), mixed);
    CHECK(std::abs(du.epsilon - 0.2) < 2e-9);
}
