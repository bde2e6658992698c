#pragma once

#include <array>
#include <functional>
#include <memory>

#include "kslab/numerics.hpp"

// Radial and harmonic linearized solvers around the stationary state:
// inversion of the partial-mass operator A0 (harmonic 0) and of the coupled
// density/potential system L0_ell (harmonics ell >= 1) by variation of
// parameters over a four-dimensional fundamental basis.

namespace kslab {

struct HarmonicPair {
    int ell = 0;
    RadialProfile psi;    // density component
    RadialProfile omega;  // potential component, -Delta_ell omega = psi
};

struct HomogeneousBasis {
    int ell = 0;
    GridPtr grid;  // strictly positive log grid
    std::array<RadialProfile, 4> h, g;    // density / potential components
    std::array<RadialProfile, 4> dh, dg;  // their r-derivatives (from the integrator)
    double C_l = 0.0;  // far-field constant of the k=4 branch
    double K_l = 0.0;  // far-field constant of the k=3 branch
    double E_l = 0.0;  // Wronskian constant: W_l = E_l / (r^2 (1+r^2)^2)
    double wronskian_rel_spread = 0.0;  // rel std of W_l r^2(1+r^2)^2 on [1,100]
    double c4_origin = 0.0, c4p_origin = 0.0;  // recorded r^-ell coefficients of k=4 at 0
};

double psi0(double r);        // r^2/(1+r^2)^2
double psi0_tilde(double r);  // (r^4 + 4 r^2 ln r - 1)/(1+r^2)^2
void radial_fundamental(double r, double* p0, double* p0t);

// A0 u = g by the two explicit quadratures; u = O(r^2) at the origin.
RadialProfile invert_A0(const RadialProfile& g);

// Apply the discrete radial operator A0 (for residual checks).
RadialProfile apply_A0(const RadialProfile& u);

// Four fundamental solutions of the harmonic system at index ell >= 1.
// k=1,2 closed forms; k=3 integrated outward from an origin power series
// normalized as (8 r^ell, -r^ell); k=4 integrated inward from the far-field
// seed and rescaled to the reference origin normalization, its resulting
// origin coefficients recorded in c4_origin/c4p_origin.
const HomogeneousBasis& homogeneous_basis(int ell);

// 4x4 determinant samples (rows h, g, h', g') and the constant E_l.
std::pair<RadialProfile, double> wronskian(const HomogeneousBasis& basis);

// 3x3 minor with rows (h, g, g') over the three branches other than k.
RadialProfile wronskian_minor(const HomogeneousBasis& basis, int k);

struct SolveOptions {
    // integration base per branch: 0 = from r=0, 1 = from infinity (with
    // one-term tail correction), -1 = automatic.  The automatic choice picks
    // the base that keeps the solution regular at the origin and decaying at
    // infinity: {inf, 0, inf, 0} for ell >= 2 and {0, 0, inf, 0} for ell = 1,
    // where the k=1 branch itself decays and its weight is not integrable at
    // infinity.
    std::array<int, 4> base{-1, -1, -1, -1};
    // additive constants on the per-branch coefficients
    std::array<double, 4> add_const{0.0, 0.0, 0.0, 0.0};
};

// Variation-of-parameters solve of L0_ell(psi, omega) = f, -Delta_ell omega = psi.
HarmonicPair solve_harmonic(int ell, const RadialProfile& f, const SolveOptions& opt = {});

// Discrete application of the harmonic operator: returns
// Delta_ell psi + 4r/(1+r^2) psi' + 32 r/(1+r^2)^3 omega' + 16 psi/(1+r^2)^2.
RadialProfile apply_L0_ell(const HarmonicPair& p);

// Residual of the potential equation: Delta_ell omega + psi.
RadialProfile potential_residual(const HarmonicPair& p);

// Adaptive Dormand-Prince 4(5) integrator for a 4-dimensional first-order
// system y' = rhs(s, y), stepping exactly onto the requested nodes.
using Rhs4 = std::function<void(double, const std::array<double, 4>&, std::array<double, 4>&)>;
void integrate_rk45(const Rhs4& rhs, const std::vector<double>& s_nodes,
                    std::array<double, 4> y0,
                    const std::function<void(std::size_t, const std::array<double, 4>&)>& on_node,
                    double rtol = 1e-10);

}  // namespace kslab
