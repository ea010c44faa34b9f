#pragma once

#include <cmath>

namespace sdiv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }

inline bool is_zero(const Vec2& v) { return v.x == 0.0 && v.y == 0.0; }

inline Vec2 normalized(const Vec2& v) {
    double n = norm(v);
    return n > 0.0 ? Vec2{v.x / n, v.y / n} : Vec2{0.0, 0.0};
}

inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

}  // namespace sdiv
