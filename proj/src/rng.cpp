#include "rct/rng.hpp"

#include "rct/errors.hpp"

#include <cmath>

namespace rct {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed ^ kGolden)) {}

Rng::Rng(std::uint64_t key, int) : key_(key) {}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
    double u1 = 1.0 - next_double(); // (0, 1], keeps the log finite
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::next_exponential(double rate) {
    if (!(rate > 0.0)) {
        throw DomainError("exponential rate must be positive");
    }
    return -std::log(1.0 - next_double()) / rate;
}

double Rng::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

Rng Rng::stream(std::string_view label) const {
    return Rng(mix64(key_ ^ mix64(fnv1a(label))), 0);
}

Rng Rng::stream(std::uint64_t index) const {
    return Rng(mix64(key_ ^ mix64((index + 1) * kGolden)), 0);
}

} // namespace rct
