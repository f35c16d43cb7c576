#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace unrect {

// Exact rational scalar. All geometric predicates in the arrangement and
// construction layers run on these; doubles appear only at the I/O surface
// and in the curve/quadrature code.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_of_double(double x) {
  Rat q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

inline double to_double(const Rat& q) { return mpq_get_d(q.get_mpq_t()); }

// 2^e for possibly negative e.
inline Rat pow2(int e) {
  Rat q;
  if (e >= 0) {
    mpq_set_ui(q.get_mpq_t(), 1, 1);
    mpz_mul_2exp(mpq_numref(q.get_mpq_t()), mpq_numref(q.get_mpq_t()), e);
  } else {
    mpq_set_ui(q.get_mpq_t(), 1, 1);
    mpz_mul_2exp(mpq_denref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()), -e);
  }
  return q;
}

inline Rat rat_pow(const Rat& base, unsigned e) {
  Rat r(1);
  Rat b = base;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline std::string rat_str(const Rat& q) { return q.get_str(); }

inline Rat rat_parse(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  q.canonicalize();
  return q;
}

// Smallest i with i*i >= n (n >= 0).
inline Int isqrt_ceil(const Int& n) {
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  if (r * r < n) r += 1;
  return r;
}

// Rational u >= sqrt(q) with u^2 <= q * (1 + 2^-bits)^2, for q > 0.
// Used to produce certified divisors for distance functions whose exact
// normal norm is irrational.
inline Rat sqrt_upper(const Rat& q, unsigned bits = 48) {
  if (q < 0) throw std::domain_error("sqrt_upper: negative");
  if (q == 0) return Rat(0);
  // sqrt(num/den) = sqrt(num*den)/den; scale by 2^(2*bits) before the
  // integer square root so the result carries `bits` fractional bits.
  Int num = q.get_num() * q.get_den();
  Int scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), num.get_mpz_t(), 2 * bits);
  Int root = isqrt_ceil(scaled);
  Rat u(root, Int(1) << bits);
  u.canonicalize();
  u /= Rat(q.get_den());
  return u;
}

// Rational l <= sqrt(q), same relative tightness as sqrt_upper.
inline Rat sqrt_lower(const Rat& q, unsigned bits = 48) {
  if (q < 0) throw std::domain_error("sqrt_lower: negative");
  if (q == 0) return Rat(0);
  Int num = q.get_num() * q.get_den();
  Int scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), num.get_mpz_t(), 2 * bits);
  Int root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());  // floor sqrt
  Rat l(root, Int(1) << bits);
  l.canonicalize();
  l /= Rat(q.get_den());
  return l;
}

// Exact test of  sqrt(a2) <= c + sqrt(b2)  for nonnegative a2, b2 and
// arbitrary c, without leaving the rationals.  Needed for gradient-norm
// inequalities of the form ||u|| <= c + ||v||.
inline bool norm_le_plus(const Rat& a2, const Rat& c, const Rat& b2) {
  if (c >= 0) {
    // both sides nonnegative; square once: a2 <= c^2 + b2 + 2 c sqrt(b2)
    Rat lhs = a2 - c * c - b2;
    if (lhs <= 0) return true;
    return lhs * lhs <= 4 * c * c * b2;
  }
  // c < 0: need sqrt(a2) + |c| <= sqrt(b2)
  Rat lhs = a2 + c * c - b2;
  if (lhs > 0) return false;
  return lhs * lhs >= 4 * c * c * a2;
}

// sqrt(a2) <= c with c rational.
inline bool norm_le(const Rat& a2, const Rat& c) {
  if (c < 0) return false;
  return a2 <= c * c;
}

// sqrt(a2) > c.
inline bool norm_gt(const Rat& a2, const Rat& c) { return !norm_le(a2, c); }

// Exact 2-vector over Rat.
struct RVec {
  Rat x{0}, y{0};

  RVec() = default;
  RVec(Rat xx, Rat yy) : x(std::move(xx)), y(std::move(yy)) {}

  RVec operator+(const RVec& o) const { return {x + o.x, y + o.y}; }
  RVec operator-(const RVec& o) const { return {x - o.x, y - o.y}; }
  RVec operator*(const Rat& s) const { return {x * s, y * s}; }
  RVec operator-() const { return {-x, -y}; }
  bool operator==(const RVec& o) const { return x == o.x && y == o.y; }

  Rat dot(const RVec& o) const { return x * o.x + y * o.y; }
  Rat cross(const RVec& o) const { return x * o.y - y * o.x; }
  Rat norm2() const { return x * x + y * y; }
  // +90 degree rotation.
  RVec perp() const { return {-y, x}; }
};

inline RVec operator*(const Rat& s, const RVec& v) { return v * s; }

// Deterministic 64-bit generator (splitmix64); used instead of std
// distributions so that identical seeds give identical streams on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1) with 53 random bits
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // uniform dyadic rational in [0,1) with `bits` fractional bits
  Rat uniform_rat(unsigned bits = 30) {
    std::uint64_t mask = (bits >= 64) ? ~0ULL : ((1ULL << bits) - 1);
    Rat q(static_cast<unsigned long>(next() & mask),
          static_cast<unsigned long>(1));
    q /= pow2(int(bits));
    return q;
  }

  Rat uniform_rat(const Rat& lo, const Rat& hi, unsigned bits = 30) {
    return lo + (hi - lo) * uniform_rat(bits);
  }

 private:
  std::uint64_t state_;
};

}  // namespace unrect
