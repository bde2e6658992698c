#pragma once

#include <cmath>

// Closed forms around the stationary state U(r) = 8/(1+r^2)^2 of the
// parabolic-elliptic Keller-Segel model in self-similar variables, plus the
// scaled two-bubble geometry helpers.  Potentials use the free-space
// convolution gauge Phi(z) = -(1/2pi) int log|z-z'| u(z') dz'.

namespace kslab::model {

inline constexpr double kBeta = 0.5;
inline constexpr double kPi = 3.14159265358979323846;

inline double U(double r) {
    double s = 1.0 + r * r;
    return 8.0 / (s * s);
}
inline double dU(double r) {
    double s = 1.0 + r * r;
    return -32.0 * r / (s * s * s);
}
inline double d2U(double r) {
    double s = 1.0 + r * r;
    return (160.0 * r * r - 32.0) / (s * s * s * s);
}
inline double LamU(double r) {
    double s = 1.0 + r * r;
    return 16.0 * (1.0 - r * r) / (s * s * s);
}
inline double dLamU(double r) {
    double s = 1.0 + r * r;
    return 64.0 * r * (r * r - 2.0) / (s * s * s * s);
}
inline double Lam2U(double r) {
    double r2 = r * r, s = 1.0 + r2;
    return 32.0 * (r2 * r2 - 4.0 * r2 + 1.0) / (s * s * s * s);
}
// U + (1/2) Lambda U collapses to 16/(1+r^2)^3
inline double UhalfLamU(double r) {
    double s = 1.0 + r * r;
    return 16.0 / (s * s * s);
}
inline double dUhalfLamU(double r) {
    double s = 1.0 + r * r;
    return -96.0 * r / (s * s * s * s);
}
// partial mass m_f(r) = int_0^r f s ds
inline double massU(double r) {
    double r2 = r * r;
    return 4.0 * r2 / (1.0 + r2);
}
inline double massLamU(double r) { return r * r * U(r); }

inline double PhiU(double r) { return -2.0 * std::log(1.0 + r * r); }
inline double dPhiU(double r) { return -4.0 * r / (1.0 + r * r); }
inline double PhiLamU(double r) { return 4.0 / (1.0 + r * r); }
inline double dPhiLamU(double r) {
    double s = 1.0 + r * r;
    return -8.0 * r / (s * s);
}

// scaled bubble centered at c = (cx, cy):  nu^-2 U(|z-c|/nu)
inline double bubble(double nu, double cx, double cy, double x, double y) {
    double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    double s = nu * nu + d2;
    return 8.0 * nu * nu / (s * s);
}
inline double bubble_potential(double nu, double cx, double cy, double x, double y) {
    double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    return -2.0 * std::log(nu * nu + d2);
}
// gradient of the bubble potential: -4 (z-c) / (nu^2 + |z-c|^2)
inline void bubble_potential_grad(double nu, double cx, double cy, double x, double y,
                                  double* gx, double* gy) {
    double dx = x - cx, dy = y - cy;
    double s = nu * nu + dx * dx + dy * dy;
    *gx = -4.0 * dx / s;
    *gy = -4.0 * dy / s;
}

inline double a_infinity(double beta = kBeta) { return std::sqrt(2.0 / beta); }
inline double alpha_of(double ax, double ay) { return 2.0 / (ax * ax + ay * ay); }

// smooth cutoff: 1 on [0,1], 0 on [2,inf), C^2 monotone in between
inline double cutoff(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double t = s - 1.0;  // in (0,1)
    double t3 = t * t * t;
    return 1.0 - t3 * (10.0 - 15.0 * t + 6.0 * t * t);
}
inline double dcutoff(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    double t = s - 1.0;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}
inline double d2cutoff(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    double t = s - 1.0;
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

}  // namespace kslab::model
