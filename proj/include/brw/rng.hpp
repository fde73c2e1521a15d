#pragma once

#include <cstdint>
#include <cmath>

namespace brw {

// Counter-based splittable generator. A stream is keyed by
// (master_seed, trial, generation, particle); draws are produced by mixing
// the key with an incrementing counter, so any particle's stream can be
// reconstructed independently of scheduling order.
class Rng {
public:
    Rng(std::uint64_t master, std::uint64_t trial = 0, std::uint64_t generation = 0,
        std::uint64_t particle = 0)
    {
        std::uint64_t k = mix(master + 0x9e3779b97f4a7c15ULL);
        k = mix(k ^ (trial + 0xbf58476d1ce4e5b9ULL));
        k = mix(k ^ (generation + 0x94d049bb133111ebULL));
        k = mix(k ^ (particle + 0xd6e8feb86659fd93ULL));
        key_ = k;
    }

    static std::uint64_t mix(std::uint64_t z)
    {
        z ^= z >> 33;
        z *= 0xff51afd7ed558ccdULL;
        z ^= z >> 33;
        z *= 0xc4ceb9fe1a85ec53ULL;
        z ^= z >> 33;
        return z;
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

    // uniform on [0,1)
    double uniform()
    {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform on (0,1], handy for log()
    double uniform_pos()
    {
        return ((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // index into a discrete cdf given as cumulative weights summing to ~1
    template <class Vec>
    std::size_t pick(const Vec& cdf)
    {
        double u = uniform();
        std::size_t i = 0;
        while (i + 1 < cdf.size() && u >= cdf[i]) ++i;
        return i;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace brw
