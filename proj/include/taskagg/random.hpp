#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace taskagg {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key and a 64-bit stream id; the
/// remaining 64 counter bits index blocks within the stream. Every
/// (key, stream, block) triple maps to the same four words on every
/// platform, so draws do not depend on scheduling.
class PhiloxEngine {
  public:
    using result_type = std::uint32_t;

    PhiloxEngine(std::uint64_t key, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t stream() const noexcept { return stream_; }
    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key) noexcept;

  private:
    void refill() noexcept;

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned index_ = 4;
};

/// Purpose tags keep streams used by different subsystems disjoint.
enum class StreamDomain : std::uint64_t {
    bootstrap = 1,
    mcmc_chain = 2,
    predictive = 3,
    rank_noise = 4,
    synthesis = 5,
    simulation = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream id for (domain, a, b, c): folded through mix64 in that order.
///   id = mix64(mix64(mix64(mix64(domain) ^ a) ^ b) ^ c)
/// The engine key is mix64(master_seed). Both derivations are frozen;
/// changing them changes every stored regression value.
constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t a, std::uint64_t b = 0,
                                  std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(domain));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return mix64(h ^ c);
}

inline PhiloxEngine make_stream(std::uint64_t seed, StreamDomain domain, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
    return PhiloxEngine(mix64(seed), stream_id(domain, a, b, c));
}

/// Uniform double in the open interval (0,1) from 53 random bits.
double uniform_open(PhiloxEngine& rng) noexcept;
double standard_normal(PhiloxEngine& rng);
/// Binomial(n, p); exact for p in {0,1}.
std::int64_t binomial(PhiloxEngine& rng, std::int64_t n, double p);
/// Beta(a, b) through two gamma variates.
double beta_variate(PhiloxEngine& rng, double a, double b);

}  // namespace taskagg
