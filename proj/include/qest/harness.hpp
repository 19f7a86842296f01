#pragma once

// Monte Carlo sweeps over estimation protocols, RMSE aggregation, CSV I/O
// and log-log scaling fits.

#include "qest/protocols.hpp"
#include "qest/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qest {

/// Distance on a circle of circumference `period`, in [0, period/2].
double circular_error(double a, double b, double period);
/// a − b wrapped into [−period/2, period/2).
double circular_difference(double a, double b, double period);

enum class SweepProtocol { parallel, bitwise, parity };
std::string   to_string(SweepProtocol p);
SweepProtocol parse_protocol(const std::string &name);

struct SweepConfig {
    SweepProtocol          protocol = SweepProtocol::bitwise;
    std::string            family   = "kind=phase_unitary";
    std::vector<double>    thetas;
    std::vector<long long> sizes; // N for parallel, k for bitwise and parity
    long long              trials = 100;
    std::uint64_t          seed   = 1;
    /// Depolarizing noise for bitwise runs on the phase family. A negative
    /// value requests ε = 1/N_max per cell with N_max = n (3^k − 1).
    std::optional<double> noise_eps;
    double                delta_p = 0.125;
    double                epsilon = 0.0; // 0 selects 3^{−2k}
    BitwiseReadout        readout = BitwiseReadout::residual;
    std::string           out;

    /// Throws std::invalid_argument on any inconsistency, before work starts.
    void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment.
SweepConfig parse_sweep_config(const std::string &text);
SweepConfig load_sweep_config(const std::string &path);

struct RmseRecord {
    std::string   protocol;
    std::string   family;
    double        theta  = 0.0;
    long long     n_uses = 0; // mean over trials, rounded
    long long     trials = 0;
    double        rmse   = 0.0;
    double        bias   = 0.0;
    std::uint64_t seed   = 0;

    bool operator==(const RmseRecord &) const = default;
};

/// Per-trial outcome used for aggregation and coverage statistics.
struct TrialOutcome {
    long long trial  = 0;
    double    error  = 0.0; // signed circular difference estimate − truth
    long long n_uses = 0;
    double    radix_product = 0.0; // bitwise only
};

/// Runs every trial of one (θ, size) cell. Trial t draws from
/// rng_stream(seed, {protocol, family, θ bits, size, t}).
std::vector<TrialOutcome> run_cell(const SweepConfig &cfg, double theta, long long size, unsigned workers = 1);

RmseRecord aggregate(const SweepConfig &cfg, double theta, const std::vector<TrialOutcome> &outcomes);

/// All cells in config order (θ outer, size inner).
std::vector<RmseRecord> run_sweep(const SweepConfig &cfg, unsigned workers = 1);

inline const char *kCsvHeader = "protocol,family,theta,n_uses,trials,rmse,bias,seed";

void                    write_csv(std::ostream &os, const std::vector<RmseRecord> &records);
std::string             to_csv(const std::vector<RmseRecord> &records);
std::vector<RmseRecord> parse_csv(const std::string &text);

struct ScalingFit {
    double slope     = 0.0;
    double intercept = 0.0;
    double r2        = 0.0;
};

/// OLS of ln rmse on ln N; needs at least three distinct N.
ScalingFit fit_scaling(const std::vector<RmseRecord> &records);
ScalingFit fit_loglog(const std::vector<double> &n, const std::vector<double> &y);

/// Pools the records of a sweep across θ: record i belongs to size index
/// i % n_sizes. RMSE is pooled as a trial-weighted RMS and N as the weighted
/// geometric mean, the natural centre on a log axis.
std::vector<RmseRecord> pool_across_theta(const std::vector<RmseRecord> &records, std::size_t n_sizes);

} // namespace qest
