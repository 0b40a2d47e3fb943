#include "taskagg/random.hpp"

#include <cmath>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace taskagg {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> PhiloxEngine::block(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

PhiloxEngine::PhiloxEngine(std::uint64_t key, std::uint64_t stream) noexcept
    : key_(key), stream_(stream) {}

void PhiloxEngine::refill() noexcept {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(key_),
                                            static_cast<std::uint32_t>(key_ >> 32)};
    buffer_ = block(ctr, k);
    ++block_;
    index_ = 0;
}

PhiloxEngine::result_type PhiloxEngine::operator()() noexcept {
    if (index_ == 4) refill();
    return buffer_[index_++];
}

double uniform_open(PhiloxEngine& rng) noexcept {
    const std::uint64_t hi = rng() >> 5;  // 27 bits
    const std::uint64_t lo = rng() >> 6;  // 26 bits
    const std::uint64_t bits = (hi << 26) | lo;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal(PhiloxEngine& rng) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

std::int64_t binomial(PhiloxEngine& rng, std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    boost::random::binomial_distribution<std::int64_t, double> dist(n, p);
    return dist(rng);
}

namespace {

// log of a Gamma(shape, 1) variate; shapes below 1 use the boost
// Gamma(shape+1) * U^(1/shape) identity in log space so tiny draws keep
// their magnitude instead of underflowing to zero.
double log_gamma_variate(PhiloxEngine& rng, double shape) {
    if (shape >= 1.0) {
        boost::random::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(rng));
    }
    boost::random::gamma_distribution<double> g(shape + 1.0, 1.0);
    const double lg = std::log(g(rng));
    return lg + std::log(uniform_open(rng)) / shape;
}

}  // namespace

double beta_variate(PhiloxEngine& rng, double a, double b) {
    const double lx = log_gamma_variate(rng, a);
    const double ly = log_gamma_variate(rng, b);
    // x / (x + y) = 1 / (1 + exp(ly - lx))
    return 1.0 / (1.0 + std::exp(ly - lx));
}

}  // namespace taskagg
