#pragma once

#include <cstdint>
#include <random>

namespace ipvsim {

/// Labels for the independent sub-streams drawn inside one Monte Carlo replication.
enum class StreamPurpose : std::uint64_t {
    baseline = 0,
    assignment = 1,
    response_types = 2,
    bootstrap = 3,
    general = 4,
};

/// A seeded pseudo-random stream.
///
/// Streams are addressed by (seed, stream id, purpose) so that every replication of a
/// simulation owns an independent stream whose contents do not depend on which worker
/// thread runs it or in which order replications execute.
class RandomStream {
  public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed);

    static RandomStream substream(std::uint64_t seed, std::uint64_t stream_id,
                                  StreamPurpose purpose = StreamPurpose::general);

    /// Uniform on [0, 1).
    double uniform();

    /// Standard normal.
    double normal();

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);

    engine_type &engine() noexcept { return engine_; }

  private:
    explicit RandomStream(std::seed_seq &seq);

    engine_type engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace ipvsim
