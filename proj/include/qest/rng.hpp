#pragma once

// Counter-based random streams built on Philox4x32-10 as defined in the
// Random123 suite. A stream is identified by a 64-bit key
// derived from a master seed and a list of labels; draws are produced by
// encrypting an incrementing 128-bit counter. Output is bit-identical on every
// platform because no standard-library distribution is involved.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace qest {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey     = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

class RngStream {
    public:
    explicit RngStream(PhiloxKey key) : key_(key) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// 1 with probability p.
    bool bernoulli(double p) { return uniform() < p; }
    /// Number of successes in n Bernoulli(p) draws.
    long long binomial(long long n, double p);
    /// Index drawn from a discrete distribution (weights need not be normalized).
    std::size_t categorical(const std::vector<double> &weights);

    [[nodiscard]] const PhiloxKey &key() const { return key_; }

    private:
    PhiloxKey     key_;
    PhiloxCounter counter_{0, 0, 0, 0};
    PhiloxCounter block_{};
    int           used_ = 4;
};

using StreamLabel = std::variant<std::uint64_t, std::string>;

/// Stream for (seed, labels). Equal inputs give equal streams; any change of
/// seed or label gives an unrelated key.
RngStream rng_stream(std::uint64_t seed, const std::vector<StreamLabel> &labels = {});

} // namespace qest
