#include "qest/harness.hpp"

#include "qest/record.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace qest {

double circular_error(double a, double b, double period) {
    if(!(period > 0.0)) throw std::invalid_argument("circular_error: period must be positive");
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

double circular_difference(double a, double b, double period) {
    if(!(period > 0.0)) throw std::invalid_argument("circular_difference: period must be positive");
    double d = std::fmod(a - b, period);
    if(d < -period / 2.0) d += period;
    if(d >= period / 2.0) d -= period;
    return d;
}

std::string to_string(SweepProtocol p) {
    switch(p) {
        case SweepProtocol::parallel: return "parallel";
        case SweepProtocol::bitwise: return "bitwise";
        case SweepProtocol::parity: return "parity";
    }
    return "unknown";
}

SweepProtocol parse_protocol(const std::string &name) {
    if(name == "parallel") return SweepProtocol::parallel;
    if(name == "bitwise") return SweepProtocol::bitwise;
    if(name == "parity") return SweepProtocol::parity;
    throw std::invalid_argument("unknown protocol '" + name + "' (expected parallel, bitwise, parity)");
}

namespace {

    // Family after applying the optional noise override for one size.
    std::string effective_family(const SweepConfig &cfg, long long size, long long n_per_step) {
        if(cfg.protocol != SweepProtocol::bitwise || !cfg.noise_eps) return cfg.family;
        double eps = *cfg.noise_eps;
        if(eps < 0.0) eps = 1.0 / (static_cast<double>(n_per_step) * (std::pow(3.0, static_cast<double>(size)) - 1.0));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", eps);
        return std::string("kind=depolarized_unitary;eps=") + buf + ";rho0=mixed;unitary=phase";
    }

    BitwiseConfig bitwise_config(const SweepConfig &cfg, long long size) {
        BitwiseConfig b;
        b.k       = static_cast<int>(size);
        b.epsilon = cfg.epsilon;
        b.delta_p = cfg.delta_p;
        b.readout = cfg.readout;
        return b.resolved();
    }

    double period_of(SweepProtocol p) { return p == SweepProtocol::parity ? kPi : 1.0; }

} // namespace

void SweepConfig::validate() const {
    if(trials < 1) throw std::invalid_argument("sweep config: trials must be at least 1");
    if(thetas.empty()) throw std::invalid_argument("sweep config: theta grid is empty");
    if(sizes.empty()) throw std::invalid_argument("sweep config: sizes list is empty");
    for(long long s : sizes) {
        if(protocol == SweepProtocol::parallel && (s < 1 || s > 4096)) throw std::invalid_argument("sweep config: parallel sizes must lie in 1..4096");
        if(protocol != SweepProtocol::parallel && (s < 1 || s > 20)) throw std::invalid_argument("sweep config: k must lie in 1..20");
    }
    if(noise_eps && protocol != SweepProtocol::bitwise) throw std::invalid_argument("sweep config: noise_eps applies to the bitwise protocol only");
    if(noise_eps && *noise_eps > 1.0) throw std::invalid_argument("sweep config: noise_eps must lie in [0,1]");
    if(protocol != SweepProtocol::parallel) (void) bitwise_config(*this, sizes.front());

    const auto family_spec = KeyValueRecord::parse(family);
    const auto kind        = family_spec.get("kind");
    switch(protocol) {
        case SweepProtocol::parallel:
            if(kind != "phase_unitary") throw std::invalid_argument("sweep config: the parallel protocol needs kind=phase_unitary");
            for(double t : thetas)
                if(t < 0.0 || t >= 1.0) throw std::invalid_argument("sweep config: theta must lie in [0,1) for the parallel protocol");
            break;
        case SweepProtocol::bitwise: {
            for(long long s : sizes) {
                const auto f = make_family(effective_family(*this, s, bitwise_config(*this, s).n_per_step));
                for(double t : thetas) (void) phase_experiment(f, t);
            }
            break;
        }
        case SweepProtocol::parity:
            if(kind != "projector_class") throw std::invalid_argument("sweep config: the parity protocol needs kind=projector_class");
            (void) make_family(family_spec);
            for(double t : thetas)
                if(t < 0.0 || t > kPi / 2.0) throw std::invalid_argument("sweep config: theta must lie in [0, pi/2] for the parity protocol");
            break;
    }
}

SweepConfig parse_sweep_config(const std::string &text) {
    SweepConfig        cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string        line;
    int                lineno = 0;
    while(std::getline(in, line)) {
        ++lineno;
        if(auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if(line.empty()) continue;
        const auto eq = line.find('=');
        if(eq == std::string::npos) throw std::invalid_argument("sweep config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key   = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if(!seen.insert(key).second) throw std::invalid_argument("sweep config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        const std::string where = "sweep config key '" + key + "'";
        if(key == "protocol") {
            cfg.protocol = parse_protocol(value);
        } else if(key == "family") {
            cfg.family = value;
        } else if(key == "theta" || key == "thetas") {
            cfg.thetas = parse_number_list(value, where);
        } else if(key == "sizes" || key == "k" || key == "n") {
            cfg.sizes.clear();
            for(double v : parse_number_list(value, where)) {
                if(v != std::floor(v)) throw std::invalid_argument(where + ": sizes must be integers");
                cfg.sizes.push_back(static_cast<long long>(v));
            }
        } else if(key == "trials") {
            cfg.trials = parse_integer(value, where);
        } else if(key == "seed") {
            const long long s = parse_integer(value, where);
            if(s < 0) throw std::invalid_argument(where + ": seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if(key == "noise_eps") {
            cfg.noise_eps = value == "inverse_n" ? -1.0 : parse_double(value, where);
        } else if(key == "delta_p") {
            cfg.delta_p = parse_double(value, where);
        } else if(key == "epsilon") {
            cfg.epsilon = parse_double(value, where);
        } else if(key == "readout") {
            if(value == "residual") cfg.readout = BitwiseReadout::residual;
            else if(value == "digits") cfg.readout = BitwiseReadout::digits;
            else throw std::invalid_argument(where + ": readout must be residual or digits");
        } else if(key == "out") {
            cfg.out = value;
        } else {
            throw std::invalid_argument("sweep config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

SweepConfig load_sweep_config(const std::string &path) {
    std::ifstream in(path);
    if(!in) throw std::invalid_argument("cannot open sweep config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_config(ss.str());
}

std::vector<TrialOutcome> run_cell(const SweepConfig &cfg, double theta, long long size, unsigned workers) {
    const double period = period_of(cfg.protocol);
    const auto   trials = static_cast<std::size_t>(cfg.trials);

    std::function<TrialOutcome(RngStream &)> one;
    std::string                              family = cfg.family;
    if(cfg.protocol == SweepProtocol::parallel) {
        const auto   dist  = parallel_distribution(parallel_plan(static_cast<std::size_t>(size)), theta);
        const double slots = static_cast<double>(size + 1);
        one                = [dist, slots, theta, size, period](RngStream &rng) {
            TrialOutcome o;
            o.error  = circular_difference(static_cast<double>(rng.categorical(dist)) / slots, theta, period);
            o.n_uses = size;
            return o;
        };
    } else {
        const BitwiseConfig   bc = bitwise_config(cfg, size);
        AmplifiableExperiment exp;
        if(cfg.protocol == SweepProtocol::bitwise) {
            family = effective_family(cfg, size, bc.n_per_step);
            exp    = phase_experiment(make_family(family), theta);
        } else {
            const auto   rec = KeyValueRecord::parse(cfg.family);
            const double eta = rec.number("eta", 0.5);
            exp              = parity_experiment(theta, [eta](double) { return eta; });
        }
        one = [exp, bc, theta, period](RngStream &rng) {
            const auto   r = bitwise_estimate(exp, bc, rng);
            TrialOutcome o;
            o.error         = circular_difference(r.theta_hat, theta, period);
            o.n_uses        = r.total_uses;
            o.radix_product = r.radix_product();
            return o;
        };
    }

    const std::vector<StreamLabel> base{to_string(cfg.protocol), family, std::bit_cast<std::uint64_t>(theta), static_cast<std::uint64_t>(size)};
    std::vector<TrialOutcome>      out(trials);
    auto                           work = [&](std::size_t begin, std::size_t step) {
        for(std::size_t t = begin; t < trials; t += step) {
            auto labels = base;
            labels.emplace_back(static_cast<std::uint64_t>(t));
            auto rng    = rng_stream(cfg.seed, labels);
            out[t]      = one(rng);
            out[t].trial = static_cast<long long>(t);
        }
    };
    const unsigned w = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(trials)));
    if(w == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(w);
        for(unsigned i = 0; i < w; ++i)
            pool.emplace_back([&, i] {
                try {
                    work(i, w);
                } catch(...) { errors[i] = std::current_exception(); }
            });
        for(auto &th : pool) th.join();
        for(auto &e : errors)
            if(e) std::rethrow_exception(e);
    }
    return out;
}

RmseRecord aggregate(const SweepConfig &cfg, double theta, const std::vector<TrialOutcome> &outcomes) {
    if(outcomes.empty()) throw std::invalid_argument("aggregate: no outcomes");
    std::vector<TrialOutcome> sorted = outcomes;
    std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.trial < b.trial; });
    double sq = 0.0, sum = 0.0, uses = 0.0;
    for(const auto &o : sorted) {
        sq += o.error * o.error;
        sum += o.error;
        uses += static_cast<double>(o.n_uses);
    }
    const double n = static_cast<double>(sorted.size());
    RmseRecord   r;
    r.protocol = to_string(cfg.protocol);
    r.family   = cfg.family;
    r.theta    = theta;
    r.n_uses   = std::llround(uses / n);
    r.trials   = static_cast<long long>(sorted.size());
    r.rmse     = std::sqrt(sq / n);
    r.bias     = sum / n;
    r.seed     = cfg.seed;
    return r;
}

std::vector<RmseRecord> run_sweep(const SweepConfig &cfg, unsigned workers) {
    cfg.validate();
    std::vector<RmseRecord> records;
    for(double theta : cfg.thetas)
        for(long long size : cfg.sizes) {
            auto rec = aggregate(cfg, theta, run_cell(cfg, theta, size, workers));
            if(cfg.protocol == SweepProtocol::bitwise && cfg.noise_eps) rec.family = effective_family(cfg, size, bitwise_config(cfg, size).n_per_step);
            records.push_back(std::move(rec));
        }
    return records;
}

namespace {

    std::string csv_field(const std::string &s) {
        if(s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for(char c : s) {
            if(c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }

    std::string g17(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::vector<std::string> split_csv_line(const std::string &line) {
        std::vector<std::string> fields;
        std::string              cur;
        bool                     quoted = false;
        for(std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if(quoted) {
                if(c == '"') {
                    if(i + 1 < line.size() && line[i + 1] == '"') {
                        cur += '"';
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    cur += c;
                }
            } else if(c == '"') {
                quoted = true;
            } else if(c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if(quoted) throw std::invalid_argument("parse_csv: unterminated quote");
        fields.push_back(std::move(cur));
        return fields;
    }

} // namespace

void write_csv(std::ostream &os, const std::vector<RmseRecord> &records) {
    os << kCsvHeader << '\n';
    for(const auto &r : records)
        os << csv_field(r.protocol) << ',' << csv_field(r.family) << ',' << g17(r.theta) << ',' << r.n_uses << ',' << r.trials << ',' << g17(r.rmse)
           << ',' << g17(r.bias) << ',' << r.seed << '\n';
}

std::string to_csv(const std::vector<RmseRecord> &records) {
    std::ostringstream os;
    write_csv(os, records);
    return os.str();
}

std::vector<RmseRecord> parse_csv(const std::string &text) {
    std::istringstream in(text);
    std::string        line;
    if(!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: missing or wrong header");
    std::vector<RmseRecord> out;
    while(std::getline(in, line)) {
        if(line.empty()) continue;
        const auto f = split_csv_line(line);
        if(f.size() != 8) throw std::invalid_argument("parse_csv: expected 8 fields, got " + std::to_string(f.size()));
        RmseRecord r;
        r.protocol = f[0];
        r.family   = f[1];
        r.theta    = parse_double(f[2], "theta");
        r.n_uses   = parse_integer(f[3], "n_uses");
        r.trials   = parse_integer(f[4], "trials");
        r.rmse     = parse_double(f[5], "rmse");
        r.bias     = parse_double(f[6], "bias");
        r.seed     = static_cast<std::uint64_t>(std::stoull(f[7]));
        out.push_back(std::move(r));
    }
    return out;
}

ScalingFit fit_loglog(const std::vector<double> &n, const std::vector<double> &y) {
    if(n.size() != y.size()) throw std::invalid_argument("fit_loglog: length mismatch");
    std::set<double> distinct(n.begin(), n.end());
    if(distinct.size() < 3) throw std::invalid_argument("fit_loglog: need at least three distinct N");
    const std::size_t m = n.size();
    Eigen::MatrixXd   a(static_cast<Eigen::Index>(m), 2);
    Eigen::VectorXd   b(static_cast<Eigen::Index>(m));
    for(std::size_t i = 0; i < m; ++i) {
        if(!(n[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: N and rmse must be positive");
        a(static_cast<Eigen::Index>(i), 0) = std::log(n[i]);
        a(static_cast<Eigen::Index>(i), 1) = 1.0;
        b(static_cast<Eigen::Index>(i))    = std::log(y[i]);
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    ScalingFit            fit;
    fit.slope           = coef(0);
    fit.intercept       = coef(1);
    const double mean   = b.mean();
    const double ss_tot = (b.array() - mean).square().sum();
    const double ss_res = (a * coef - b).squaredNorm();
    fit.r2              = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

ScalingFit fit_scaling(const std::vector<RmseRecord> &records) {
    std::vector<double> n, y;
    for(const auto &r : records) {
        n.push_back(static_cast<double>(r.n_uses));
        y.push_back(r.rmse);
    }
    return fit_loglog(n, y);
}

std::vector<RmseRecord> pool_across_theta(const std::vector<RmseRecord> &records, std::size_t n_sizes) {
    if(n_sizes == 0 || records.size() % n_sizes != 0) throw std::invalid_argument("pool_across_theta: record count is not a multiple of the size count");
    std::vector<RmseRecord> out(n_sizes);
    std::vector<double>     sq(n_sizes, 0.0), uses(n_sizes, 0.0), bias(n_sizes, 0.0);
    for(std::size_t i = 0; i < records.size(); ++i) {
        const auto &r = records[i];
        const auto  s = i % n_sizes;
        const auto  t = static_cast<double>(r.trials);
        sq[s] += t * r.rmse * r.rmse;
        uses[s] += t * std::log(static_cast<double>(r.n_uses));
        bias[s] += t * r.bias;
        out[s].trials += r.trials;
        out[s].protocol = r.protocol;
        out[s].family   = r.family;
        out[s].seed     = r.seed;
    }
    for(std::size_t s = 0; s < n_sizes; ++s) {
        const auto t  = static_cast<double>(out[s].trials);
        out[s].theta  = std::numeric_limits<double>::quiet_NaN();
        out[s].rmse   = std::sqrt(sq[s] / t);
        out[s].bias   = bias[s] / t;
        out[s].n_uses = std::llround(std::exp(uses[s] / t));
    }
    return out;
}

} // namespace qest
