#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kslab/model.hpp"
#include "kslab/numerics.hpp"
#include "kslab/odekernel.hpp"

using namespace kslab;

namespace {

// Residual of the radial second-order operator applied to a closed-form
// callable, evaluated with five-point stencils in ln r so that smooth
// functions reach ~1e-8 relative accuracy.
template <class F>
void stencil_d(F&& f, double r, double& val, double& d1, double& d2) {
    const double H = 5e-3;  // step in ln r
    double y[5];
    for (int k = -2; k <= 2; ++k) y[k + 2] = f(r * std::exp(k * H));
    val = y[2];
    const double Df = (-y[4] + 8.0 * y[3] - 8.0 * y[1] + y[0]) / (12.0 * H);
    const double D2f = (-y[4] + 16.0 * y[3] - 30.0 * y[2] + 16.0 * y[1] - y[0]) / (12.0 * H * H);
    d1 = Df / r;
    d2 = (D2f - Df) / (r * r);
}

template <class F>
double radial_A0_residual(F&& f, double r) {
    double u, du, d2u;
    stencil_d(f, r, u, du, d2u);
    const double d = 1.0 + r * r;
    const double Q = 4.0 * r * r / d;
    return d2u + (Q - 1.0) / r * du + 8.0 / (d * d) * u;
}

// Residual of the coupled harmonic system for callable pairs.
template <class Fh, class Fg>
double harmonic_residual(int ell, Fh&& fh, Fg&& fg, double r) {
    double h, dh, d2h, g, dg, d2g;
    stencil_d(fh, r, h, dh, d2h);
    stencil_d(fg, r, g, dg, d2g);
    const double d = 1.0 + r * r;
    const double l2 = double(ell) * ell;
    const double res_psi = d2h + dh / r - l2 * h / (r * r) + 4.0 * r / d * dh +
                           32.0 * r / (d * d * d) * dg + 16.0 / (d * d) * h;
    const double res_omg = d2g + dg / r - l2 * g / (r * r) + h;
    // normalize by local scales
    const double sh = std::abs(d2h) + std::abs(dh / r) + l2 * std::abs(h) / (r * r) + 1e-300;
    const double sg = std::abs(d2g) + std::abs(dg / r) + l2 * std::abs(g) / (r * r) +
                      std::abs(h) + 1e-300;
    return std::max(std::abs(res_psi) / sh, std::abs(res_omg) / sg);
}

double rel_l2_window(const RadialProfile& got, const RadialProfile& want, double ra, double rb) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double r = got.grid->r[i];
        if (r < ra || r > rb) continue;
        const double w = want.eval(r);
        num += (got.v[i] - w) * (got.v[i] - w);
        den += w * w;
    }
    return std::sqrt(num / (den + 1e-300));
}

}  // namespace

TEST_CASE("radial fundamental solutions") {
    double p0, p0t;
    radial_fundamental(1.0, &p0, &p0t);
    CHECK(p0 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p0t == doctest::Approx(0.0).epsilon(1e-12));
    radial_fundamental(0.0, &p0, &p0t);
    CHECK(p0 == 0.0);
    CHECK(p0t == -1.0);
    radial_fundamental(1e6, &p0, &p0t);
    CHECK(p0t == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(radial_fundamental(-1.0, &p0, &p0t), Error);

    // both annihilated by A0
    double worst = 0.0;
    for (double r = 1e-2; r <= 1e2; r *= 1.2) {
        worst = std::max(worst, std::abs(radial_A0_residual(psi0, r)) /
                                    (std::abs(psi0(r)) / (r * r) + 1e-300));
        worst = std::max(worst, std::abs(radial_A0_residual(psi0_tilde, r)) /
                                    ((std::abs(psi0_tilde(r)) + 1.0) / (r * r)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("invert_A0 reproduces the partial mass profiles") {
    GridPtr grid = default_profile_grid();

    // zero in, zero out
    RadialProfile zero(grid, 0.0, 0);
    RadialProfile u0 = invert_A0(zero);
    for (double v : u0.v) CHECK(v == 0.0);

    // g = m_{Lambda Lambda U} = r^2 Lambda U  ->  tail -8 ln r + 12
    RadialProfile g1 = sample_fn(grid, [](double r) { return r * r * model::LamU(r); });
    RadialProfile m1 = invert_A0(g1);
    RadialProfile shifted(grid, 0.0, 0);
    for (std::size_t i = 0; i < m1.size(); ++i) {
        const double r = grid->r[i];
        shifted.v[i] = r > 0 ? m1.v[i] + 8.0 * std::log(r) : 0.0;
    }
    AsymptoticFit c1 = fit_coefficient(shifted, {100.0, 1000.0}, 0.0);
    CHECK(c1.c == doctest::Approx(12.0).epsilon(2e-3));

    // g = 2 m_{Lambda U} = 2 r^2 U  ->  tail 8 ln r - 8
    RadialProfile g2 = sample_fn(grid, [](double r) { return 2.0 * r * r * model::U(r); });
    RadialProfile m2 = invert_A0(g2);
    for (std::size_t i = 0; i < m2.size(); ++i) {
        const double r = grid->r[i];
        shifted.v[i] = r > 0 ? m2.v[i] - 8.0 * std::log(r) : 0.0;
    }
    AsymptoticFit c2 = fit_coefficient(shifted, {100.0, 1000.0}, 0.0);
    CHECK(c2.c == doctest::Approx(-8.0).epsilon(2e-3));

    // residual check: A0 applied to the output reproduces the input
    RadialProfile back = apply_A0(m1);
    CHECK(rel_l2_window(back, g1, 1e-2, 1e2) < 1e-3);

    // origin regularity: u = O(r^2)
    for (std::size_t i = 0; i < m1.size(); ++i) {
        const double r = grid->r[i];
        if (r > 0.0 && r < 1e-2) CHECK(std::abs(m1.v[i]) < 10.0 * r * r);
    }
}

TEST_CASE("closed-form homogeneous branches") {
    const HomogeneousBasis& B2 = homogeneous_basis(2);
    // spec examples at r = 1
    const double r1 = 1.0;
    {
        double h, g, dh, dg;
        // reconstruct from stored arrays by direct evaluation
        h = B2.h[0].eval(r1);
        g = B2.g[0].eval(r1);
        CHECK(h == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(g == doctest::Approx(2.0).epsilon(1e-9));
        (void)dh;
        (void)dg;
    }
    const HomogeneousBasis& B1 = homogeneous_basis(1);
    CHECK(B1.h[1].eval(1.0) == doctest::Approx(0.0).epsilon(1e-9));

    // defining ODE residuals of the closed forms, sampled on [1e-2, 1e2]
    for (int ell : {1, 2, 3, 4}) {
        for (int k : {1, 2}) {
            auto fh = [ell, k](double r) {
                double h, g, dh, dg;
                // use module evaluators through the stored basis for coverage,
                // but residuals need smooth callables: recompute closed forms
                const double r2 = r * r, d = 1.0 + r2;
                if (k == 1) {
                    const double P = (ell - 1) * r2 + ell + 1;
                    h = 8.0 * P * std::pow(r, ell) / (d * d * d);
                } else if (ell == 1) {
                    const double N = r2 * r2 + 4.0 * r2 * std::log(r) - 1.0;
                    h = 8.0 * N / (r * d * d * d);
                } else {
                    const double M = (ell + 1) * r2 + ell - 1;
                    h = 8.0 * M * std::pow(r, -ell) / (d * d * d);
                }
                (void)g;
                (void)dh;
                (void)dg;
                return h;
            };
            auto fg = [ell, k](double r) {
                const double r2 = r * r, d = 1.0 + r2;
                if (k == 1) {
                    const double P = (ell - 1) * r2 + ell + 1;
                    return P * std::pow(r, ell) / d;
                }
                if (ell == 1) {
                    const double N = r2 * r2 + 4.0 * r2 * std::log(r) - 1.0;
                    return N / (r * d);
                }
                const double M = (ell + 1) * r2 + ell - 1;
                return M * std::pow(r, -ell) / d;
            };
            double worst = 0.0;
            for (double r = 1e-2; r <= 1e2; r *= 1.3)
                worst = std::max(worst, harmonic_residual(ell, fh, fg, r));
            CAPTURE(ell);
            CAPTURE(k);
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("integrated branches satisfy the system") {
    // The k=3,4 branches scale like r^{-ell-2} near the window edge, so the
    // generic second-order differentiate() would drown the check in its own
    // truncation error; the basis grid is uniform in ln r, which admits
    // five-point stencils at fourth order instead.
    for (int ell : {1, 2, 3}) {
        const HomogeneousBasis& B = homogeneous_basis(ell);
        const RadialGrid& g = *B.grid;
        const std::size_t n = g.size();
        const double ds = std::log(g.r[n - 1] / g.r[0]) / double(n - 1);
        const double l2 = double(ell) * ell;
        for (int k : {2, 3}) {  // indices into arrays: k=3 and k=4 branches
            const auto& h = B.h[k].v;
            const auto& w = B.g[k].v;
            auto d1 = [&](const std::vector<double>& f, std::size_t i) {
                return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * ds);
            };
            auto d2 = [&](const std::vector<double>& f, std::size_t i) {
                return (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) /
                       (12.0 * ds * ds);
            };
            double worst = 0.0;
            for (std::size_t i = 2; i + 2 < n; ++i) {
                const double r = g.r[i];
                if (r < 1e-2 || r > 1e2) continue;
                const double psi_r = d1(h, i) / r;
                const double psi_rr = (d2(h, i) - d1(h, i)) / (r * r);
                const double omg_r = d1(w, i) / r;
                const double omg_rr = (d2(w, i) - d1(w, i)) / (r * r);
                const double d = 1.0 + r * r;
                const double res_psi = psi_rr + psi_r / r - l2 * h[i] / (r * r) +
                                       4.0 * r / d * psi_r + 32.0 * r / (d * d * d) * omg_r +
                                       16.0 / (d * d) * h[i];
                const double res_omg = omg_rr + omg_r / r - l2 * w[i] / (r * r) + h[i];
                const double sh = std::abs(psi_rr) + std::abs(psi_r) / r +
                                  l2 * std::abs(h[i]) / (r * r) + 1e-300;
                const double sg = std::abs(omg_rr) + std::abs(omg_r) / r +
                                  l2 * std::abs(w[i]) / (r * r) + std::abs(h[i]) + 1e-300;
                worst = std::max(worst, std::abs(res_psi) / sh);
                worst = std::max(worst, std::abs(res_omg) / sg);
            }
            CAPTURE(ell);
            CAPTURE(k);
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("Wronskian constants") {
    // E_l = -2^10 (l+1)(l-1) l^2 for l >= 2
    CHECK(homogeneous_basis(2).E_l == doctest::Approx(-12288.0).epsilon(0.01));
    CHECK(homogeneous_basis(3).E_l == doctest::Approx(-73728.0).epsilon(0.01));
    CHECK(homogeneous_basis(4).E_l == doctest::Approx(-245760.0).epsilon(0.01));
    for (int ell : {1, 2, 3, 4}) {
        CAPTURE(ell);
        CHECK(homogeneous_basis(ell).wronskian_rel_spread < 1e-4);
    }
    // E_1 = +128 sqrt(5) K_1.  Direct large-r expansion of the determinant
    // with the branch normalizations fixed above (rows h, g, h', g'; columns
    // k = 1..4): the only r^-6 contributions come from the k=3/k=4 cofactors,
    //   64(s-2)K_1 + 64(s+2)K_1 = 128 s K_1,  s = sqrt(5),
    // and the same value follows at the origin from E_1 = 128(c4 - 8*c4').
    const HomogeneousBasis& B1 = homogeneous_basis(1);
    CHECK(B1.E_l == doctest::Approx(128.0 * std::sqrt(5.0) * B1.K_l).epsilon(0.01));
    CHECK(B1.E_l == doctest::Approx(128.0 * (B1.c4_origin - 8.0 * B1.c4p_origin)).epsilon(0.01));
}

TEST_CASE("far-field pairing C_l K_l = l / sqrt(l^2+4)") {
    for (int ell : {2, 3, 4}) {
        const HomogeneousBasis& B = homogeneous_basis(ell);
        const double want = ell / std::sqrt(double(ell) * ell + 4.0);
        CAPTURE(ell);
        CHECK(B.C_l * B.K_l == doctest::Approx(want).epsilon(0.01));
        CHECK(B.C_l > 0.0);
        CHECK(B.K_l > 0.0);
    }
}

TEST_CASE("minor identity W_{1,2} = -W_1 r^2 / 8") {
    // Both sides are computable in closed form at infinity:
    //   W_{1,2} ~ -16 sqrt(5) K_1 r^-4   (cofactor expansion of the 3x3 minor)
    //   W_1     ~ +128 sqrt(5) K_1 r^-6,
    // so the ratio is -r^2/8; the minor over Wronskian ratio is exactly
    // proportional to r^2, which this check enforces pointwise.
    const HomogeneousBasis& B1 = homogeneous_basis(1);
    RadialProfile W12 = wronskian_minor(B1, 2);
    auto [W1, E1] = wronskian(B1);
    (void)E1;
    double worst = 0.0;
    for (std::size_t i = 0; i < W12.size(); ++i) {
        const double r = B1.grid->r[i];
        if (r < 1e-1 || r > 1e2) continue;
        const double want = -W1.v[i] * r * r / 8.0;
        worst = std::max(worst, std::abs(W12.v[i] - want) / std::abs(want));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("minor tails at infinity") {
    // Leading large-r behavior of the four 3x3 minors (rows h, g, g' of the
    // complementary branches), from cofactor expansion with s = sqrt(5):
    //   W_{1,1} ~  -8 s K_1 r^-2      W_{1,2} ~ -16 s K_1 r^-4
    //   W_{1,3} ~  +4 r^{-s-3}        W_{1,4} ~ +64 K_1 r^{s-3}
    const HomogeneousBasis& B1 = homogeneous_basis(1);
    const double s = std::sqrt(5.0);
    const double K = B1.K_l;
    const FitWindow win{1e2, 1e3};
    struct Row {
        int k;
        double power;
        double want;
    };
    const Row rows[] = {
        {1, -2.0, -8.0 * s * K},
        {2, -4.0, -16.0 * s * K},
        {3, -s - 3.0, 4.0},
        {4, s - 3.0, 64.0 * K},
    };
    for (const Row& row : rows) {
        RadialProfile Wk = wronskian_minor(B1, row.k);
        AsymptoticFit fit = fit_coefficient(Wk, win, row.power);
        CAPTURE(row.k);
        CHECK(fit.c == doctest::Approx(row.want).epsilon(0.02));
    }
}

TEST_CASE("inhomogeneous solve: quadrupole source of the two-bubble expansion") {
    // f = (1/2) r d_r(Lambda U) at ell = 2 produces tails psi -> -4 r^-2, omega -> -1
    GridPtr grid = default_profile_grid();
    RadialProfile f = sample_fn(
        grid, [](double r) { return 0.5 * r * model::dLamU(r); }, 2);
    HarmonicPair sol = solve_harmonic(2, f);

    RadialProfile psir2(sol.psi.grid, 0.0, 2);
    for (std::size_t i = 0; i < psir2.size(); ++i) {
        const double r = sol.psi.grid->r[i];
        psir2.v[i] = sol.psi.v[i] * r * r;
    }
    AsymptoticFit a = fit_coefficient(psir2, {1e3, 1e4}, 0.0);
    CHECK(a.c == doctest::Approx(-4.0).epsilon(0.01));
    AsymptoticFit b = fit_coefficient(sol.omega, {1e3, 1e4}, 0.0);
    CHECK(b.c == doctest::Approx(-1.0).epsilon(0.01));

    // operator applied to the solution reproduces the source
    RadialProfile back = apply_L0_ell(sol);
    CHECK(rel_l2_window(back, f, 1e-2, 1e2) < 1e-3);
    // the residual of -Delta_l omega = psi is measured against the local
    // equation scale (psi changes sign inside the window, so |psi| alone is
    // not a usable denominator)
    RadialProfile pres = potential_residual(sol);
    double worst = 0.0;
    for (std::size_t i = 0; i < pres.size(); ++i) {
        const double r = sol.psi.grid->r[i];
        if (r < 1e-2 || r > 1e2) continue;
        const double scale =
            std::abs(sol.psi.v[i]) + 4.0 * std::abs(sol.omega.v[i]) / (r * r) + 1e-300;
        worst = std::max(worst, std::abs(pres.v[i]) / scale);
    }
    CHECK(worst < 1e-3);

    // origin regularity r^ell
    for (std::size_t i = 0; i < sol.psi.size(); ++i) {
        const double r = sol.psi.grid->r[i];
        if (r > 0.0 && r < 1e-2) {
            CHECK(std::isfinite(sol.psi.v[i]));
            CHECK(std::abs(sol.psi.v[i]) < 100.0 * r * r);
        }
    }
}

TEST_CASE("dipole channel: momentum cancellation forces fast decay") {
    GridPtr grid = default_profile_grid();
    RadialProfile f = sample_fn(
        grid, [](double r) { return model::dLamU(r) / (4.0 * std::sqrt(2.0)); }, 1);

    // the weighted momentum integral vanishes identically over [0, inf);
    // on the truncated grid the leftover is the tail
    //   int_R^inf r^2 f dr = 4 sqrt(2) / R^2 ~ 5.7e-8 at R = 1e4
    std::vector<double> m(grid->size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = f.v[i];
    const double momentum = quad_radial(m, *grid, 2.0);
    CHECK(std::abs(momentum) < 1e-7);

    HarmonicPair sol = solve_harmonic(1, f);
    AsymptoticFit decay = fit_asymptote(sol.psi, {50.0, 500.0}, FitModel::Power);
    CHECK(decay.p < -2.5);

    RadialProfile back = apply_L0_ell(sol);
    CHECK(rel_l2_window(back, f, 1e-2, 1e2) < 1e-3);
}

TEST_CASE("divergent base choices are rejected") {
    GridPtr grid = default_profile_grid();
    RadialProfile f = sample_fn(
        grid, [](double r) { return model::dLamU(r) / (4.0 * std::sqrt(2.0)); }, 1);
    SolveOptions opt;
    opt.base = {1, 0, 1, 0};  // k=1 from infinity: log-divergent for this source
    CHECK_THROWS_AS(solve_harmonic(1, f, opt), Error);
}

TEST_CASE("rk45 integrator sanity") {
    // harmonic oscillator around the circle
    Rhs4 rhs = [](double, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
        dy[2] = 0.0;
        dy[3] = 0.0;
    };
    std::vector<double> nodes;
    const double T = 2.0 * model::kPi;
    for (int i = 0; i <= 64; ++i) nodes.push_back(T * i / 64.0);
    std::array<double, 4> y0 = {1.0, 0.0, 0.0, 0.0};
    double got_c = 0, got_s = 0;
    integrate_rk45(rhs, nodes, y0, [&](std::size_t i, const std::array<double, 4>& y) {
        if (i == 64) {
            got_c = y[0];
            got_s = y[1];
        }
    });
    CHECK(got_c == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(got_s) < 1e-8);
}
