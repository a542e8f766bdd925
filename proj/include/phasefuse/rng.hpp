#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace phasefuse {

/// Reproducible random stream keyed by (master_seed, stream_index).
///
/// Each key seeds its own engine through std::seed_seq, so trial t of a sweep
/// draws the same numbers no matter which worker thread runs it or in what
/// order. `substream(k)` derives a further independent stream under the same
/// key, used to separate e.g. channel draws from rounding draws within a trial.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint64_t substream_index = 0)
      : master_seed_(master_seed),
        stream_index_(stream_index),
        substream_index_(substream_index) {
    std::seed_seq seq{lo(master_seed),  hi(master_seed),    lo(stream_index),
                      hi(stream_index), lo(substream_index), hi(substream_index),
                      0x70686173u};
    engine_.seed(seq);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t substream_index() const { return substream_index_; }

  RngStream substream(std::uint64_t k) const {
    return RngStream(master_seed_, stream_index_, substream_index_ * 1000003u + k + 1);
  }

  // Uniform on [0, 1) with 53 random bits.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi); returns lo exactly when lo == hi.
  double uniform(double lo_value, double hi_value) {
    return lo_value + (hi_value - lo_value) * canonical();
  }

  // Uniform phase on [0, 2*pi).
  double phase() { return 2.0 * std::numbers::pi * canonical(); }

  std::complex<double> unit_phasor() { return std::polar(1.0, phase()); }

  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const double sd = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {sd * re, sd * im};
  }

  engine_type& engine() { return engine_; }

 private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t substream_index_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace phasefuse
