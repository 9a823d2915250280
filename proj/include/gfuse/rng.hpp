#pragma once

#include <cstdint>
#include <vector>

namespace gfuse {

// splitmix64 generator. <random> distributions are implementation-defined,
// so seeded runs would not replay across standard libraries; this does.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0,n); modulo bias is negligible at the sizes used here
    uint64_t below(uint64_t n) { return next() % n; }

private:
    uint64_t state_;
};

// Derives independent streams (init, per-epoch shuffles, ...) from one seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    Rng r(seed ^ (0x632be59bd9b4e019ull * (tag + 1)));
    return r.next();
}

// Fisher-Yates with the deterministic generator above.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace gfuse
