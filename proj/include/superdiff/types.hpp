#pragma once

#include <array>
#include <cmath>
#include <string_view>

namespace superdiff {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// Scalar cross product a×b = a₁b₂ − a₂b₁.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Rotation b ↦ b̃ = (b₂, −b₁).
constexpr Vec2 tilde(Vec2 a) { return {a.y, -a.x}; }

/// Row-major 2×2 real matrix.
using Mat2 = std::array<std::array<double, 2>, 2>;

/// The three tracer models.
enum class Model { SRBP = 0, SRBP_aniso = 1, DCGF = 2 };

std::string_view to_string(Model m) noexcept;
/// Accepts "srbp", "srbp_aniso" (or "srbp-aniso", "aniso"), "dcgf".
Model parse_model(std::string_view name);

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace superdiff
