#pragma once

#include <compare>
#include <cstdlib>
#include <string>

namespace so4 {

/// Angular-momentum quantum number stored as twice its value, so that j, m
/// comparisons and parity checks stay in exact integer arithmetic.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int v) { return HalfInt(2 * v); }

  [[nodiscard]] constexpr int twice() const { return twice_; }
  [[nodiscard]] constexpr double value() const { return 0.5 * twice_; }
  [[nodiscard]] constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }

  constexpr auto operator<=>(const HalfInt&) const = default;

  [[nodiscard]] std::string str() const {
    return is_integer() ? std::to_string(twice_ / 2) : std::to_string(twice_) + "/2";
  }

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// True when m is a valid projection of j: |m| <= j and j - m integral.
constexpr bool is_projection_of(HalfInt m, HalfInt j) {
  return j.twice() >= 0 && std::abs(m.twice()) <= j.twice() && (j.twice() - m.twice()) % 2 == 0;
}

}  // namespace so4
