#include "chi2geo/rng.hpp"

#include "chi2geo/error.hpp"

#include <cmath>
#include <numbers>

namespace chi2geo {

namespace {

constexpr std::string_view kPhiloxId = "philox4x32-10/box-muller/v1";
constexpr std::string_view kSplitMixId = "splitmix64/box-muller/v1";

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// 53-bit uniform in (0, 1].
inline double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// 53-bit uniform in [0, 1).
inline double half_open_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::string_view generator_id(Generator g) noexcept {
  switch (g) {
    case Generator::Philox4x32_10: return kPhiloxId;
    case Generator::SplitMix64: return kSplitMixId;
  }
  return kPhiloxId;
}

Generator parse_generator_id(std::string_view id) {
  if (id == kPhiloxId) {
    return Generator::Philox4x32_10;
  }
  if (id == kSplitMixId) {
    return Generator::SplitMix64;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown generator id '" + std::string(id) + "' (known: " +
                  std::string(kPhiloxId) + ", " + std::string(kSplitMixId) + ")");
}

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  ctr = philox_round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    ctr = philox_round(ctr, key);
  }
  return ctr;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NormalStream::NormalStream(Generator gen, std::uint64_t seed, std::uint64_t substream) noexcept
    : gen_(gen), seed_(seed), substream_(substream) {}

std::array<std::uint64_t, 2> NormalStream::block_bits(std::uint64_t block) const noexcept {
  if (gen_ == Generator::Philox4x32_10) {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block),
                            static_cast<std::uint32_t>(block >> 32),
                            static_cast<std::uint32_t>(substream_),
                            static_cast<std::uint32_t>(substream_ >> 32)};
    const PhiloxKey key{static_cast<std::uint32_t>(seed_),
                        static_cast<std::uint32_t>(seed_ >> 32)};
    const PhiloxCounter out = philox4x32_10(ctr, key);
    return {static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32),
            static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32)};
  }
  const std::uint64_t base =
      splitmix64_mix(seed_ ^ splitmix64_mix(substream_ + kGoldenGamma));
  return {splitmix64_mix(base + (2 * block + 1) * kGoldenGamma),
          splitmix64_mix(base + (2 * block + 2) * kGoldenGamma)};
}

double NormalStream::next() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto bits = block_bits(block_++);
  const double radius = std::sqrt(-2.0 * std::log(open_unit(bits[0])));
  const double angle = 2.0 * std::numbers::pi * half_open_unit(bits[1]);
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace chi2geo
