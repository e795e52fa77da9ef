#pragma once

#include <array>
#include <cmath>
#include <complex>

// Minimal fixed-size vector/matrix types for beam-frame geometry. The
// dimensions never exceed 3, so a dedicated linear-algebra dependency
// would be overkill.

namespace vortion {

using Complex = std::complex<double>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Complex transverse field amplitude (E_x, E_y).
using Complex2 = std::array<Complex, 2>;

// Jacobian of the transverse field: jac[j][i] = dE_j/dq_i with j in {x,y}
// and i in {x,y,z}.
using ComplexJacobian = std::array<std::array<Complex, 3>, 2>;

}  // namespace vortion
