// Stream builders shared by the engine tests and the acceptance binary.
#ifndef AOMSDA_TEST_FIXTURES_HPP
#define AOMSDA_TEST_FIXTURES_HPP

#include "aomsda/engine.hpp"
#include "aomsda/streams.hpp"

#include <random>
#include <vector>

namespace fixture {

inline std::vector<aomsda::StreamSet> sea_rounds(Eigen::Index samples, int rounds, int sources,
                                                 std::uint64_t seed) {
    aomsda::Rng rng(seed);
    const auto schedule = aomsda::default_sea_schedule(samples);
    return aomsda::make_stream_rounds(aomsda::gen_sea(samples, schedule, 0.0, rng), rounds,
                                      sources);
}

/// SEA stream whose threshold jumps from 4 to 7 at the start of round `flip_round` (1-based).
inline std::vector<aomsda::StreamSet> sea_flip_rounds(Eigen::Index samples, int rounds,
                                                      int sources, int flip_round,
                                                      std::uint64_t seed) {
    aomsda::Rng rng(seed);
    const Eigen::Index per = samples / rounds;
    const std::vector<aomsda::SeaSegment> schedule{{0, 4.0}, {per * (flip_round - 1), 7.0}};
    return aomsda::make_stream_rounds(aomsda::gen_sea(samples, schedule, 0.0, rng), rounds,
                                      sources);
}

inline aomsda::RunOptions replay_options() {
    aomsda::RunOptions o;
    o.record_timing = false;
    return o;
}

} // namespace fixture

#endif
