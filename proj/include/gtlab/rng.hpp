#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gtlab/common.hpp"

namespace gtlab {

// Seeded random stream. mt19937_64 gives identical raw output on every
// platform; the distributions below are hand-rolled because the standard
// library's distribution objects are implementation-defined and would break
// byte-identical reruns across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed), root_(seed) {}

    // Independent child stream addressed by name. Streams derived from the
    // same root with different names are decorrelated; the derivation is pure
    // so the same (root, name) always yields the same stream.
    Rng substream(const std::string& name) const {
        std::uint64_t h = fnv1a64(name, root_ ^ 0x9e3779b97f4a7c15ull);
        Rng child(h);
        child.root_ = h;
        return child;
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the spare value is cached, so draws come in deterministic
    // pairs.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n).
    std::uint64_t randint(std::uint64_t n) {
        require(n > 0, "randint: n must be positive");
        // Rejection sampling to avoid modulo bias.
        std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    int randint(int lo, int hi_inclusive) {
        require(hi_inclusive >= lo, "randint: empty range");
        return lo + static_cast<int>(randint(
                        static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(randint(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in draw order.
    std::vector<int> sample_indices(int n, int k) {
        require(k >= 0 && k <= n, "sample_indices: k out of range");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out;
        out.reserve(k);
        for (int i = 0; i < k; ++i) {
            std::size_t j = static_cast<std::size_t>(randint(pool.size() - i)) + i;
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
    std::uint64_t root_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gtlab
