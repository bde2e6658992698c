#pragma once

#include "kslab/numerics.hpp"

namespace kslab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// -- radial and per-harmonic inversions --------------------------------------

// d_r Phi_T = -(1/r) int_0^r T(s) s ds for radial T.  The grid must start
// at r = 0 so the partial mass is anchored there.
RadialProfile radial_gradient_potential(const RadialProfile& T);

// omega with -Delta_l omega = psi, Delta_l = d_rr + d_r/r - l^2/r^2: the
// branch regular at the origin carrying no r^l admixture at infinity,
//   omega(r) = (1/2l) [ r^-l int_0^r s^{l+1} psi ds + r^l int_r^inf s^{1-l} psi ds ].
// The far integral must converge for the requested psi.
RadialProfile harmonic_potential(int ell, const RadialProfile& psi);

// -- far-field Taylor expansion of the partner soliton -----------------------

// grad Phi_U(y +- 2a/nu) = -+ alpha a nu
//                          + sum_{i=1..3} alpha^{(i+1)/2} nu^{i+1} G_{i,+-}(y)
//                          + O(nu^5 <y>^4),
// alpha = 2/|a|^2, stated for a = (|a|, 0) on the positive axis.  G1 and G3
// are shared by both signs; G_{2,+-} = +-G2.
struct TaylorField {
    Vec2 a;
    double nu = 0.0;
    int sign = +1;  // +1 expands the field evaluated at y + 2a/nu

    static Vec2 G1(Vec2 y);
    static Vec2 G2(Vec2 y);
    static Vec2 G3(Vec2 y);

    // partial sum through the given order in {0,1,2,3}
    Vec2 partial_sum(Vec2 y, int order) const;
};

Vec2 taylor_expand_partner(Vec2 a, double nu, Vec2 y, int sign, int order);

// -- 2D free-space Poisson ----------------------------------------------------

enum class Cutoff2D { None, ChiStar };

inline constexpr double kZetaStar = 10.0;

// chi_* factor at radius rho: 1 on rho <= zeta_*, 0 on rho >= 2 zeta_*
double chi_star(double rho);

// Free-space potential with -Delta Phi = (chi) u via zero-padded FFT
// convolution with -(1/2pi) log|x|; the singular cell takes the kernel's
// exact cell average.
Field2D poisson_2d(const Field2D& u, Cutoff2D cutoff = Cutoff2D::None);

// Gradient of the same potential through the vector kernel -(1/2pi) x/|x|^2.
void poisson_gradient_2d(const Field2D& u, Field2D* gx, Field2D* gy,
                         Cutoff2D cutoff = Cutoff2D::None);

// Average of the sampled gradient over m points of the circle |z - c| = rho;
// odd local contributions (such as a soliton's self-field about its own
// center) cancel exactly in the continuum average.
Vec2 ring_average_gradient(const Field2D& gx, const Field2D& gy, Vec2 c, double rho, int m);

// Empirical constant for |grad Phi_f| <= C ||f||_{L^inf_gamma} (|z|^-sigma + <z>^-gamma |z|),
// requiring 1 < gamma < 2 and 0 < sigma < gamma - 1.
struct DecayProbe {
    double constant = 0.0;
    double norm = 0.0;  // ||f||_{L^inf_gamma} over the grid
    double gamma = 0.0;
    double sigma = 0.0;
};

DecayProbe pointwise_decay_probe(const Field2D& f, double gamma, double sigma);

}  // namespace kslab
