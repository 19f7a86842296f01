#include "qest/rng.hpp"

#include <stdexcept>

namespace qest {

namespace {

    constexpr std::uint32_t kM0 = 0xD2511F53U;
    constexpr std::uint32_t kM1 = 0xCD9E8D57U;
    constexpr std::uint32_t kW0 = 0x9E3779B9U;
    constexpr std::uint32_t kW1 = 0xBB67AE85U;

    std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t fnv1a(const std::string &s) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for(unsigned char c : s) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

} // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for(int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        const auto          hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto          hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

std::uint32_t RngStream::next_u32() {
    if(used_ == 4) {
        block_ = philox4x32_10(counter_, key_);
        for(auto &w : counter_)
            if(++w != 0) break;
        used_ = 0;
    }
    return block_[static_cast<std::size_t>(used_++)];
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

long long RngStream::binomial(long long n, double p) {
    if(n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
    long long k = 0;
    for(long long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
}

std::size_t RngStream::categorical(const std::vector<double> &weights) {
    if(weights.empty()) throw std::invalid_argument("categorical: no weights");
    double total = 0.0;
    for(double w : weights) {
        if(w < 0.0) throw std::invalid_argument("categorical: negative weight");
        total += w;
    }
    const double u   = uniform() * total;
    double       acc = 0.0;
    for(std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if(u < acc) return i;
    }
    for(std::size_t i = weights.size(); i-- > 0;)
        if(weights[i] > 0.0) return i;
    return weights.size() - 1;
}

RngStream rng_stream(std::uint64_t seed, const std::vector<StreamLabel> &labels) {
    std::uint64_t h = splitmix64(seed);
    for(const auto &label : labels) {
        const std::uint64_t v = std::holds_alternative<std::uint64_t>(label) ? splitmix64(std::get<std::uint64_t>(label)) : fnv1a(std::get<std::string>(label));
        h                     = splitmix64(h ^ v);
    }
    return RngStream({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)});
}

} // namespace qest
