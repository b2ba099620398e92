#pragma once

#include <cmath>

namespace vsss {

inline constexpr double kTwoPi = 6.2831853071795864769252867665590058;
inline constexpr double kPi = kTwoPi / 2.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  constexpr double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  constexpr Vec2 perp() const { return {-y, x}; }

  Vec2 normalized_or(const Vec2& fallback) const {
    const double n = norm();
    if (n < 1e-12) return fallback;
    return {x / n, y / n};
  }

  static Vec2 from_angle(double a) { return {std::cos(a), std::sin(a)}; }

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);  // lands in [-pi, pi]
  return a == kPi ? -kPi : a;
}

inline double clamp_abs(double v, double bound) {
  if (v > bound) return bound;
  if (v < -bound) return -bound;
  return v;
}

}  // namespace vsss
