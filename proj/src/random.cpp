#include "ipvsim/random.h"

namespace ipvsim {

namespace {

std::uint32_t low_word(std::uint64_t value) { return static_cast<std::uint32_t>(value); }
std::uint32_t high_word(std::uint64_t value) { return static_cast<std::uint32_t>(value >> 32); }

} // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_{seed} {}

RandomStream::RandomStream(std::seed_seq &seq) : engine_{seq} {}

RandomStream RandomStream::substream(std::uint64_t seed, std::uint64_t stream_id,
                                     StreamPurpose purpose) {
    const auto tag = static_cast<std::uint64_t>(purpose);
    std::seed_seq seq{low_word(seed),      high_word(seed), low_word(stream_id),
                      high_word(stream_id), low_word(tag),   0x1f3d5b79u};
    return RandomStream{seq};
}

double RandomStream::uniform() { return unit_(engine_); }

double RandomStream::normal() { return normal_(engine_); }

std::uint64_t RandomStream::below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>{0, n - 1}(engine_);
}

} // namespace ipvsim
