#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

// Counter-based random streams. A stream is a (key, counter) pair; the key is
// derived from the run seed and a list of stream ids, so replication r of a
// plan always sees the same numbers no matter which worker executes it.

namespace ustat::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key), ctr_(0) {}

    static Stream derive(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> ids) {
        std::uint64_t key = mix64(seed);
        for (std::uint64_t id : ids) key = mix64(key ^ mix64(id));
        return Stream(key);
    }

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(ctr_++)); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1], safe as a log argument
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform_pos();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double rademacher() { return (next_u64() & 1) ? 1.0 : -1.0; }

    // index into a probability vector by CDF inversion
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform();
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return k;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ustat::rng
