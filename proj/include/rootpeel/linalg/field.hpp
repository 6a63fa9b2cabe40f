#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace rootpeel::linalg {

using Rational = boost::multiprecision::cpp_rational;

// Integers modulo a prime P < 2^32.
template <std::uint32_t P>
class PrimeField {
 public:
  constexpr PrimeField() = default;
  constexpr PrimeField(std::int64_t v)  // NOLINT: implicit like the rationals
      : value_(static_cast<std::uint32_t>(((v % static_cast<std::int64_t>(P)) + P) % P)) {}

  constexpr std::uint32_t value() const noexcept { return value_; }

  friend constexpr PrimeField operator+(PrimeField a, PrimeField b) {
    return from_raw((static_cast<std::uint64_t>(a.value_) + b.value_) % P);
  }
  friend constexpr PrimeField operator-(PrimeField a, PrimeField b) {
    return from_raw((static_cast<std::uint64_t>(a.value_) + P - b.value_) % P);
  }
  friend constexpr PrimeField operator-(PrimeField a) { return PrimeField{} - a; }
  friend constexpr PrimeField operator*(PrimeField a, PrimeField b) {
    return from_raw(static_cast<std::uint64_t>(a.value_) * b.value_ % P);
  }
  friend constexpr PrimeField operator/(PrimeField a, PrimeField b) { return a * b.inverse(); }
  PrimeField& operator+=(PrimeField o) { return *this = *this + o; }
  PrimeField& operator-=(PrimeField o) { return *this = *this - o; }
  PrimeField& operator*=(PrimeField o) { return *this = *this * o; }
  PrimeField& operator/=(PrimeField o) { return *this = *this / o; }
  friend constexpr bool operator==(PrimeField, PrimeField) = default;

  constexpr PrimeField inverse() const {
    // Fermat; zero maps to zero and callers never divide by zero.
    std::uint64_t result = 1, base = value_, e = P - 2;
    while (e) {
      if (e & 1) result = result * base % P;
      base = base * base % P;
      e >>= 1;
    }
    return from_raw(result);
  }

  friend std::ostream& operator<<(std::ostream& os, PrimeField a) { return os << a.value_; }

 private:
  static constexpr PrimeField from_raw(std::uint64_t v) {
    PrimeField f;
    f.value_ = static_cast<std::uint32_t>(v);
    return f;
  }
  std::uint32_t value_ = 0;
};

template <class F>
struct FieldTraits;

template <>
struct FieldTraits<Rational> {
  static constexpr std::uint64_t characteristic = 0;
  static std::string to_string(const Rational& v) { return v.str(); }
  static Rational from_string(const std::string& s) { return Rational(s); }
};

template <std::uint32_t P>
struct FieldTraits<PrimeField<P>> {
  static constexpr std::uint64_t characteristic = P;
  static std::string to_string(PrimeField<P> v) { return std::to_string(v.value()); }
  static PrimeField<P> from_string(const std::string& s) { return PrimeField<P>(std::stoll(s)); }
};

}  // namespace rootpeel::linalg
