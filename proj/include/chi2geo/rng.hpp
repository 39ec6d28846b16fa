#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace chi2geo {

/// Counter-based generators. Every (seed, substream, block) triple maps to a
/// fixed 128-bit output, so chunked sampling is identical for any thread count.
enum class Generator {
  Philox4x32_10,
  SplitMix64,
};

inline constexpr Generator kDefaultGenerator = Generator::Philox4x32_10;

/// Versioned identifier recorded in every sample batch and report,
/// e.g. "philox4x32-10/box-muller/v1".
[[nodiscard]] std::string_view generator_id(Generator g) noexcept;

/// Inverse of generator_id(). Throws Error(InvalidArgument) for unknown ids.
[[nodiscard]] Generator parse_generator_id(std::string_view id);

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123 constants).
[[nodiscard]] PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

[[nodiscard]] std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Standard normal variates for one substream, produced two at a time by the
/// Box-Muller transform from one 128-bit counter block. Draw counts never
/// depend on the values drawn.
class NormalStream {
public:
  NormalStream(Generator gen, std::uint64_t seed, std::uint64_t substream) noexcept;

  [[nodiscard]] double next() noexcept;

  /// Two raw 64-bit words for block `block` of this substream.
  [[nodiscard]] std::array<std::uint64_t, 2> block_bits(std::uint64_t block) const noexcept;

private:
  Generator gen_;
  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace chi2geo
