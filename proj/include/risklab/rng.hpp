#pragma once

#include <cstdint>
#include <random>

namespace risklab {

// Seeded random source addressed by (seed, stream_id). Equal pairs produce
// identical draw sequences on every platform/run; substream derivation uses
// only the pair, never the draw state, so parallel schedules cannot change
// the numbers a replicate sees.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {
        std::uint64_t s = mix64(seed ^ 0x9e3779b97f4a7c15ull);
        std::uint64_t t = mix64(s ^ mix64(stream_id + 0xbf58476d1ce4e5b9ull));
        std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                          static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Child stream addressed by id; derived from (seed, stream_id, id) only.
    RandomStream substream(std::uint64_t id) const {
        return RandomStream(seed_, mix64(stream_id_ + 0x2545f4914f6cdd1dull * (id + 1)));
    }

    double normal() { return normal_(engine_); }

    double uniform() { return uniform_(engine_); }  // U[0, 1)

    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

    static std::uint64_t mix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace risklab
