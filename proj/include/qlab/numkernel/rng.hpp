#pragma once

#include <cstdint>
#include <random>

namespace qlab {

// Independent, reproducible draw sequence keyed by (seed, stream id).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }  // [0,1)
    double exponential(double rate);
    std::uint64_t poisson(double mean);
    std::mt19937_64& engine() { return engine_; }

    // Child stream for a sub-task; deterministic in (seed, stream id, index).
    RngStream child(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qlab
