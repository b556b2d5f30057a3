#pragma once

#include <array>
#include <cstdint>
#include <cmath>

#include "common.hpp"

namespace sqf::sde {

// Uniform time grid for fixed-step integration. n_steps is derived from
// (t_end - t0) / dt and must reproduce the span to within 1e-9 * t_end so
// that output rows land on exactly representable multiples of dt.
struct IntegrationGrid {
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  long n_steps = 0;

  double time_at(long k) const { return t0 + static_cast<double>(k) * dt; }
};

IntegrationGrid make_grid(double t0, double t_end, double dt);

// Reproducible random stream addressed by (master_seed, stream_index).
//
// Stream derivation: the pair is mixed through splitmix64 (seed state =
// master_seed XOR (stream_index + 1) * 0x9E3779B97F4A7C15), and four
// successive splitmix64 outputs initialise a xoshiro256** generator.
// Distinct indices give statistically independent streams; the same pair
// always reproduces the same sequence on every platform.
//
// Gaussian variates use the Marsaglia polar method (documented, fixed per
// build); uniforms are (x >> 11) * 2^-53 on xoshiro256** outputs.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  // Standard normal variate.
  double normal();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
  return RngStream(master_seed, stream_index);
}

// One classical RK4 step for dx/dt = f(t, x). State must support the usual
// vector-space operations (double, complex, Eigen types).
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, double t, const State& x, double dt) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + 0.5 * dt * k1));
  const State k3 = f(t + 0.5 * dt, State(x + 0.5 * dt * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// One Euler-Maruyama step x + f(t,x) dt + gain_increment, where the caller
// has already contracted diffusion terms with their noise increments.
template <typename State, typename Rhs>
State euler_maruyama_step(const Rhs& f, double t, const State& x, double dt,
                          const State& gain_increment) {
  return State(x + dt * f(t, x) + gain_increment);
}

}  // namespace sqf::sde
