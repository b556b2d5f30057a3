#include "sde.hpp"

#include <cmath>

namespace sqf::sde {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += kGolden;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

IntegrationGrid make_grid(double t0, double t_end, double dt) {
  require(std::isfinite(t0) && std::isfinite(t_end) && std::isfinite(dt),
          ErrorCode::invalid_argument, "grid: t0, t_end, dt must be finite");
  require(dt > 0.0, ErrorCode::invalid_argument, "grid: dt must be positive");
  require(t_end > t0, ErrorCode::invalid_argument, "grid: t_end must exceed t0");
  const double span = t_end - t0;
  const long n = std::lround(span / dt);
  require(n >= 1, ErrorCode::invalid_argument, "grid: fewer than one step");
  require(std::abs(static_cast<double>(n) * dt - span) <= 1e-9 * t_end,
          ErrorCode::invalid_argument,
          "grid: (t_end - t0) is not an integer multiple of dt");
  return IntegrationGrid{t0, t_end, dt, n};
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index) {
  std::uint64_t mix = master_seed ^ ((stream_index + 1) * kGolden);
  for (auto& word : state_) word = splitmix64(mix);
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 1;  // xoshiro must not start from the all-zero state
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

}  // namespace sqf::sde
