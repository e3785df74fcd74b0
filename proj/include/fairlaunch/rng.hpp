#pragma once

// Counter-based pseudo-random source (Philox 4x64, 10 rounds).
//
// Chosen over the <random> engines because the run results must be
// reproducible bit-for-bit across platforms and because Monte-Carlo
// replicates need independent streams: two RandomSources with different
// keys run through unrelated permutations of the counter space, so child
// streams never overlap regardless of how many values each consumes.
// Round function and constants follow Salmon et al., "Parallel Random
// Numbers: As Easy as 1, 2, 3" (SC'11); outputs are cross-checked against
// numpy.random.Philox in the unit tests.

#include <array>
#include <cstdint>

namespace fairlaunch {

namespace detail {

// splitmix64 finalizer; used for seed/key expansion only.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed)
        : key_{detail::mix64(seed), detail::mix64(seed ^ 0xBB67AE8584CAA73Bull)},
          seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent stream; derivation does not advance this source.
    RandomSource child(std::uint64_t stream) const {
        RandomSource c(*this);
        c.key_[0] = detail::mix64(key_[0] ^ detail::mix64(stream));
        c.key_[1] = detail::mix64(key_[1] + stream);
        c.ctr_ = {0, 0, 0, 0};
        c.buf_pos_ = 4;
        return c;
    }

    std::uint64_t next_u64() {
        if (buf_pos_ == 4) {
            buf_ = block(ctr_, key_);
            increment(ctr_);
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Name recorded in run metadata so outputs are self-describing.
    static constexpr const char* generator_name() { return "philox4x64-10"; }

    // Raw block function, exposed for the known-answer tests.
    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const Hilo p0 = mulhilo(0xD2E7470EE14C6C93ull, ctr[0]);
            const Hilo p1 = mulhilo(0xCA5A826395121157ull, ctr[2]);
            ctr = {p1.hi ^ ctr[1] ^ key[0], p1.lo, p0.hi ^ ctr[3] ^ key[1], p0.lo};
            key[0] += 0x9E3779B97F4A7C15ull;
            key[1] += 0xBB67AE8584CAA73Bull;
        }
        return ctr;
    }

private:
    struct Hilo {
        std::uint64_t hi, lo;
    };

    static Hilo mulhilo(std::uint64_t a, std::uint64_t b) {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
    }

    static void increment(std::array<std::uint64_t, 4>& ctr) {
        for (auto& word : ctr) {
            if (++word != 0) {
                break;
            }
        }
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> buf_{};
    int buf_pos_ = 4;
    std::uint64_t seed_;
};

} // namespace fairlaunch
