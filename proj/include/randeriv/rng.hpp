#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace randeriv {

/// SplitMix64 finalizer; used only to derive seeds and stream ids.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Purpose tags keep streams for different roles of the same task apart.
enum class StreamPurpose : std::uint64_t {
  Points = 1,
  Weights = 2,
  Directions = 3,
  Reference = 4,
  Unitary = 5,
  Perturbation = 6,
  Removal = 7,
  Tail = 8,
};

constexpr std::uint64_t stream_id(std::uint64_t trial, std::uint64_t stage, StreamPurpose purpose) noexcept {
  std::uint64_t h = mix64(trial);
  h = mix64(h ^ (stage + 0x632BE59BD9B4E019ULL));
  return mix64(h ^ static_cast<std::uint64_t>(purpose));
}

/**
 * @brief Deterministic random stream keyed by (master_seed, stream_id).
 *
 * Backed by std::mt19937_64. Uniforms and normals are derived by hand from
 * the raw 64-bit output so that the sequence does not depend on the standard
 * library's distribution implementations.
 */
class RngStream {
public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id), engine_(seed_for(master_seed, stream_id)) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t id() const noexcept { return stream_id_; }

  /// Independent child stream; (master, id, tag) determines it.
  RngStream child(std::uint64_t tag) const { return RngStream(master_seed_, mix64(stream_id_ ^ mix64(tag + 1))); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); never returns 0.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      const auto m = static_cast<unsigned __int128>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double angle() { return 2.0 * std::numbers::pi * uniform(); }

private:
  static std::seed_seq::result_type word(std::uint64_t x, int half) {
    return static_cast<std::seed_seq::result_type>(half == 0 ? x : x >> 32);
  }

  static std::mt19937_64 seed_for(std::uint64_t master, std::uint64_t id) {
    const std::uint64_t a = mix64(master);
    const std::uint64_t b = mix64(a ^ id);
    const std::uint64_t c = mix64(b);
    std::seed_seq seq{word(a, 0), word(a, 1), word(b, 0), word(b, 1), word(c, 0), word(c, 1)};
    return std::mt19937_64(seq);
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace randeriv
