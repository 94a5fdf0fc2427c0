#pragma once

#include <cmath>
#include <cstdint>

namespace ehjb {

/// Counter-based RNG: Philox-4x32-10. A draw is a pure function of
/// (key, counter), so Monte Carlo streams keyed by (seed, path, step) are
/// reproducible regardless of thread count or path scheduling.
struct Philox4x32 {
  uint32_t key0, key1;

  explicit Philox4x32(uint64_t seed)
      : key0(static_cast<uint32_t>(seed)),
        key1(static_cast<uint32_t>(seed >> 32)) {}

  struct Block {
    uint32_t v[4];
  };

  static inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
  }

  /// 10-round block at counter (c0, c1, c2, c3).
  inline Block block(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3) const {
    constexpr uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    uint32_t k0 = key0, k1 = key1;
    for (int round = 0; round < 10; ++round) {
      uint32_t hi0, lo0, hi1, lo1;
      mulhilo(kM0, c0, hi0, lo0);
      mulhilo(kM1, c2, hi1, lo1);
      uint32_t n0 = hi1 ^ c1 ^ k0;
      uint32_t n1 = lo1;
      uint32_t n2 = hi0 ^ c3 ^ k1;
      uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    return Block{{c0, c1, c2, c3}};
  }
};

/// Map two 32-bit words to a uniform double in (0, 1) with 53 random bits.
inline double uniform53(uint32_t hi, uint32_t lo) {
  uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

/// Inverse normal CDF (Wichura's AS 241, double-precision branch).
/// Relative accuracy ~1e-15 over (0, 1); monotone, branch-light in the bulk.
inline double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -x : x;
}

/// Deterministic per-(path, step) Gaussian draws. `stream` separates
/// independent purposes (increments vs control switching) on the same path.
struct GaussianStream {
  Philox4x32 philox;

  explicit GaussianStream(uint64_t seed) : philox(seed) {}

  /// Two standard normals for (path, step). For one-dimensional noise only
  /// z[0] is consumed; the draw is still keyed by the step so halved-dt runs
  /// and reruns stay reproducible.
  inline void normal_pair(uint32_t path, uint32_t step, uint32_t stream,
                          double& z0, double& z1) const {
    auto b = philox.block(path, step, stream, 0u);
    z0 = inverse_normal_cdf(uniform53(b.v[0], b.v[1]));
    z1 = inverse_normal_cdf(uniform53(b.v[2], b.v[3]));
  }

  /// First component of normal_pair without the second inverse CDF.
  inline double normal1(uint32_t path, uint32_t step, uint32_t stream) const {
    auto b = philox.block(path, step, stream, 0u);
    return inverse_normal_cdf(uniform53(b.v[0], b.v[1]));
  }

  inline double uniform(uint32_t path, uint32_t step, uint32_t stream) const {
    auto b = philox.block(path, step, stream, 1u);
    return uniform53(b.v[0], b.v[1]);
  }
};

}  // namespace ehjb
