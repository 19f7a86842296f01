#include "qest/channels.hpp"
#include "qest/fisher.hpp"
#include "qest/harness.hpp"
#include "qest/programs.hpp"
#include "qest/protocols.hpp"

#include <CLI11.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <thread>

using namespace qest;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DensityOperator probe_state(const std::string &name) {
    if(name == "plus" || name == "zero" || name == "one" || name == "minus" || name == "mixed") return named_state(name);
    throw std::invalid_argument("unknown probe '" + name + "' (expected plus, minus, zero, one, mixed, choi)");
}

Povm povm_by_name(const std::string &name, std::size_t dim) {
    if(name == "computational") return Povm::computational(dim);
    if(name == "hadamard") {
        if(dim != 2) throw std::invalid_argument("the hadamard POVM acts on a qubit, but the probe state has dimension " + std::to_string(dim));
        return Povm::hadamard();
    }
    throw std::invalid_argument("unknown POVM '" + name + "' (expected computational, hadamard)");
}

struct FisherArgs {
    std::string         family;
    std::vector<double> thetas;
    std::string         povm;
    std::string         probe = "plus";
    std::size_t         n     = 1;
};

void run_fisher(const FisherArgs &a) {
    const auto family = make_family(a.family);
    const auto states = a.probe == "choi" ? choi_state_family(family) : channel_output_family(family, probe_state(a.probe));
    const std::optional<Povm> povm = a.povm.empty() ? std::nullopt : std::optional<Povm>(povm_by_name(a.povm, states.dim));
    std::vector<FisherReport> rows;
    for(double t : a.thetas) rows.push_back(povm ? povm_fisher_report(states, *povm, t, a.n) : quantum_fisher_report(states, t, a.n));
    std::cout << "theta,method,n,j,crb,one_sided\n";
    for(const auto &r : rows) {
        std::cout << g17(r.theta) << ',' << to_string(r.method) << ',' << r.n << ',' << g17(r.j_value) << ',' << g17(r.bound) << ','
                  << (r.one_sided ? 1 : 0) << '\n';
    }
}

void run_choi(const std::string &spec, double theta) {
    const auto   family = make_family(spec);
    const Matrix c      = choi(family(theta)).matrix();
    std::cout << "row,col,re,im\n";
    for(Eigen::Index i = 0; i < c.rows(); ++i)
        for(Eigen::Index j = 0; j < c.cols(); ++j) std::cout << i << ',' << j << ',' << g17(c(i, j).real()) << ',' << g17(c(i, j).imag()) << '\n';
}

int run_verify(const std::string &kind, const std::string &params, std::size_t grid, double tol) {
    if(grid < 2) throw std::invalid_argument("--grid must be at least 2");
    if(!(tol >= 0.0)) throw std::invalid_argument("--tol must be nonnegative");
    const auto rec    = params.empty() ? KeyValueRecord{} : KeyValueRecord::parse(params);
    const auto impl   = make_program(kind, rec);
    const auto family = target_family(kind, rec);
    const auto report = verify_programmable(impl, family, linear_grid(family.theta_min, family.theta_max, grid), tol);
    std::cout << "theta,distance\n";
    for(std::size_t i = 0; i < report.thetas.size(); ++i) std::cout << g17(report.thetas[i]) << ',' << g17(report.distances[i]) << '\n';
    if(!report.pass) {
        std::cerr << "qest: verification failed: max distance " << g17(report.max_distance) << " exceeds tolerance " << g17(tol) << '\n';
        return 1;
    }
    return 0;
}

void run_parallel(std::size_t n, double theta, long long samples, std::uint64_t seed) {
    if(n < 1) throw std::invalid_argument("--n must be at least 1");
    if(samples < 0) throw std::invalid_argument("--samples must be nonnegative");
    const auto plan = parallel_plan(n);
    std::cout << "# lambda_min=" << g17(plan.lambda_min) << " w=" << g17(parallel_w(plan, theta)) << '\n';
    if(samples == 0) {
        const auto p = parallel_distribution(plan, theta);
        std::cout << "l,estimate,probability\n";
        for(std::size_t l = 0; l < p.size(); ++l) std::cout << l << ',' << g17(static_cast<double>(l) / static_cast<double>(n + 1)) << ',' << g17(p[l]) << '\n';
        return;
    }
    auto   rng = rng_stream(seed, {"cli-parallel", static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(theta)});
    double w = 0.0, sq = 0.0;
    for(long long s = 0; s < samples; ++s) {
        const double est = parallel_sample(plan, theta, rng);
        w += 1.0 - std::cos(2.0 * kPi * (est - theta));
        const double e = circular_error(est, theta, 1.0);
        sq += e * e;
    }
    std::cout << "samples,w_empirical,rmse\n" << samples << ',' << g17(w / static_cast<double>(samples)) << ',' << g17(std::sqrt(sq / static_cast<double>(samples))) << '\n';
}

struct BitwiseArgs {
    std::string   family = "kind=phase_unitary";
    int           k      = 4;
    double        eps    = 0.0;
    double        delta_p = 0.125;
    long long     trials = 1;
    double        theta  = 0.13;
    std::uint64_t seed   = 1;
    unsigned      workers = 1;
    std::string   readout = "residual";
};

void run_bitwise(const BitwiseArgs &a) {
    SweepConfig cfg;
    const auto  kind = KeyValueRecord::parse(a.family).get("kind");
    cfg.protocol     = kind == "projector_class" ? SweepProtocol::parity : SweepProtocol::bitwise;
    cfg.family       = a.family;
    cfg.thetas       = {a.theta};
    cfg.sizes        = {a.k};
    cfg.trials       = a.trials;
    cfg.seed         = a.seed;
    cfg.epsilon      = a.eps;
    cfg.delta_p      = a.delta_p;
    if(a.readout == "digits") cfg.readout = BitwiseReadout::digits;
    else if(a.readout != "residual") throw std::invalid_argument("--readout must be residual or digits");
    write_csv(std::cout, run_sweep(cfg, a.workers));
}

void run_parity(std::size_t n, double theta, double alpha, double eta) {
    if(n < 1) throw std::invalid_argument("--n must be at least 1");
    if(!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("--eta must lie in [0,1]");
    const double p   = parity_probability(theta, [eta](double) { return eta; }, n, alpha);
    const double law = std::pow(std::cos(static_cast<double>(n) * (theta + alpha)), 2);
    std::cout << "n,theta,alpha,pr_even,closed_form,simulated\n"
              << n << ',' << g17(theta) << ',' << g17(alpha) << ',' << g17(p) << ',' << g17(law) << ',' << (n <= 8 ? 1 : 0) << '\n';
}

void run_sweep_cmd(const std::string &config, const std::string &out, std::uint64_t seed, unsigned workers) {
    SweepConfig cfg = load_sweep_config(config);
    cfg.seed        = seed;
    if(!out.empty()) cfg.out = out;
    if(cfg.out.empty()) throw std::invalid_argument("no output path: pass --out or set 'out' in the config");
    const auto records = run_sweep(cfg, workers);

    const std::filesystem::path path(cfg.out);
    if(path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if(!os) throw std::invalid_argument("cannot write '" + cfg.out + "'");
    write_csv(os, records);
    if(!os) throw std::invalid_argument("write to '" + cfg.out + "' failed");
    std::cerr << "qest: wrote " << records.size() << " records to " << cfg.out << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Channel-parameter estimation toolkit"};
    app.require_subcommand(1);
    app.failure_message([](const CLI::App *, const CLI::Error &e) { return std::string("qest: error: ") + e.what() + "\n"; });
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());

    FisherArgs fa;
    auto      *fisher = app.add_subcommand("fisher", "Fisher information of a channel family's output states");
    fisher->add_option("--family", fa.family, "family spec, e.g. kind=amplitude_damping")->required();
    fisher->add_option("--theta", fa.thetas, "comma-separated parameter values")->required()->delimiter(',');
    fisher->add_option("--povm", fa.povm, "computational or hadamard (quantum Fisher when omitted)");
    fisher->add_option("--n", fa.n, "number of independent copies for the Cramér-Rao bound")->check(CLI::PositiveNumber);
    fisher->add_option("--probe", fa.probe, "input state: plus, minus, zero, one, mixed or choi")->capture_default_str();

    auto       *channels = app.add_subcommand("channels", "Channel inspection");
    channels->require_subcommand(1);
    std::string choi_family;
    double      choi_theta = 0.0;
    auto       *choi_cmd   = channels->add_subcommand("choi", "Print the Choi matrix as row,col,re,im");
    choi_cmd->add_option("--family", choi_family, "family spec")->required();
    choi_cmd->add_option("--theta", choi_theta, "parameter value")->required();

    auto       *program = app.add_subcommand("program", "Programmable channel constructions");
    program->require_subcommand(1);
    std::string kind, params;
    std::size_t grid = 9;
    double      tol  = 1e-9;
    auto       *verify = program->add_subcommand("verify", "Compare an induced channel with its target family on a grid");
    verify->add_option("--kind", kind, "prob_unitary, depolarizing, pauli, dmc or dnoise")->required();
    verify->add_option("--params", params, "key=value;... parameters of the construction");
    verify->add_option("--grid", grid, "number of grid points")->required();
    verify->add_option("--tol", tol, "Choi-distance tolerance")->required();

    auto *protocol = app.add_subcommand("protocol", "Estimation protocols");
    protocol->require_subcommand(1);

    std::size_t   par_n = 1;
    double        par_theta = 0.0;
    long long     par_samples = 0;
    std::uint64_t par_seed = 1;
    auto         *parallel = protocol->add_subcommand("parallel", "Entangled parallel Fourier strategy");
    parallel->add_option("--n", par_n, "channel uses")->required();
    parallel->add_option("--theta", par_theta, "phase in [0,1)")->required();
    parallel->add_option("--samples", par_samples, "Monte Carlo draws (distribution only when 0)");
    parallel->add_option("--seed", par_seed, "master seed")->capture_default_str();

    BitwiseArgs ba;
    ba.workers    = hw;
    auto *bitwise = protocol->add_subcommand("bitwise", "Bitwise mixed-radix estimator");
    bitwise->add_option("--family", ba.family, "phase_unitary, depolarized_unitary or projector_class spec")->required();
    bitwise->add_option("--k", ba.k, "number of steps")->required();
    bitwise->add_option("--eps", ba.eps, "failure budget (0 selects 3^-2k)");
    bitwise->add_option("--delta-p", ba.delta_p, "per-quadrature deviation bound")->capture_default_str();
    bitwise->add_option("--trials", ba.trials, "independent estimations")->required();
    bitwise->add_option("--theta", ba.theta, "true parameter")->capture_default_str();
    bitwise->add_option("--seed", ba.seed, "master seed")->capture_default_str();
    bitwise->add_option("--workers", ba.workers, "worker threads");
    bitwise->add_option("--readout", ba.readout, "residual or digits")->capture_default_str();

    std::size_t pty_n = 1;
    double      pty_theta = 0.0, pty_alpha = 0.0, pty_eta = 0.5;
    auto       *parity = protocol->add_subcommand("parity", "Parity experiment on a projector-class channel");
    parity->add_option("--n", pty_n, "number of qubits")->required();
    parity->add_option("--theta", pty_theta, "angle in [0, pi/2]")->required();
    parity->add_option("--alpha", pty_alpha, "known pre-rotation angle");
    parity->add_option("--eta", pty_eta, "constant eta of the channel")->capture_default_str();

    std::string   sweep_config, sweep_out;
    std::uint64_t sweep_seed = 0;
    unsigned      sweep_workers = hw;
    auto         *sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep to CSV");
    sweep->add_option("--config", sweep_config, "key = value config file")->required();
    sweep->add_option("--out", sweep_out, "output CSV path")->required();
    sweep->add_option("--seed", sweep_seed, "master seed")->required();
    sweep->add_option("--workers", sweep_workers, "worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if(*fisher) run_fisher(fa);
        else if(*choi_cmd) run_choi(choi_family, choi_theta);
        else if(*verify) return run_verify(kind, params, grid, tol);
        else if(*parallel) run_parallel(par_n, par_theta, par_samples, par_seed);
        else if(*bitwise) run_bitwise(ba);
        else if(*parity) run_parity(pty_n, pty_theta, pty_alpha, pty_eta);
        else if(*sweep) run_sweep_cmd(sweep_config, sweep_out, sweep_seed, sweep_workers);
    } catch(const std::exception &e) {
        std::cerr << "qest: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
