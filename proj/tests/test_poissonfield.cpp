#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kslab/model.hpp"
#include "kslab/odekernel.hpp"
#include "kslab/poissonfield.hpp"

using namespace kslab;

namespace {

template <typename F>
Field2D sample2d(double L, int n, F&& f) {
    Field2D out;
    out.grid = make_grid2d(L, n);
    out.v.resize(out.grid.cells());
    for (int j = 0; j < n; ++j) {
        const double y = out.grid.coord(j);
        for (int i = 0; i < n; ++i)
            out.v[out.grid.idx(i, j)] = f(out.grid.coord(i), y);
    }
    return out;
}

double sq(double x) { return x * x; }

}  // namespace

TEST_CASE("radial gradient potential closed forms") {
    GridPtr g = default_profile_grid();

    RadialProfile u = sample_fn(g, model::U);
    RadialProfile dphi = radial_gradient_potential(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double r = g->r[i];
        if (r < 1e-2 || r > 1e2) continue;
        worst = std::max(worst, std::abs(dphi.v[i] - model::dPhiU(r)) /
                                    std::abs(model::dPhiU(r)));
    }
    CHECK(worst < 1e-5);

    RadialProfile lam = sample_fn(g, model::LamU);
    RadialProfile dlam = radial_gradient_potential(lam);
    CHECK(dlam.eval(1.0) == doctest::Approx(-2.0).epsilon(1e-5));

    RadialProfile zero = sample_fn(g, [](double) { return 0.0; });
    RadialProfile dz = radial_gradient_potential(zero);
    for (double v : dz.v) CHECK(v == 0.0);

    GridPtr bad = share(make_radial_grid(1e-3, 10.0, 64, GridLaw::Log));
    RadialProfile ub = sample_fn(bad, model::U);
    CHECK_THROWS_AS(radial_gradient_potential(ub), Error);
}

TEST_CASE("harmonic potential inverts closed pairs") {
    GridPtr g = default_profile_grid();

    // -Delta_1 (r/(1+r^2)) = 8r/(1+r^2)^3
    RadialProfile psi1 =
        sample_fn(g, [](double r) { return 8.0 * r / std::pow(1.0 + r * r, 3); }, 1);
    RadialProfile w1 = harmonic_potential(1, psi1);
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double r = g->r[i];
        if (r < 1e-2 || r > 1e3) continue;
        const double want = r / (1.0 + r * r);
        worst = std::max(worst, std::abs(w1.v[i] - want) / want);
    }
    CHECK(worst < 1e-4);

    // -Delta_2 (r^2/(1+r^2)^2) = 24r^2/(1+r^2)^4
    RadialProfile psi2 =
        sample_fn(g, [](double r) { return 24.0 * r * r / std::pow(1.0 + r * r, 4); }, 2);
    RadialProfile w2 = harmonic_potential(2, psi2);
    worst = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double r = g->r[i];
        if (r < 1e-2 || r > 1e3) continue;
        const double want = sq(r / (1.0 + r * r));
        worst = std::max(worst, std::abs(w2.v[i] - want) / want);
    }
    CHECK(worst < 1e-4);

    RadialProfile zero = sample_fn(g, [](double) { return 0.0; });
    RadialProfile wz = harmonic_potential(2, zero);
    for (double v : wz.v) CHECK(v == 0.0);

    // outward integrand ~ 1/s for this source: no convergent branch
    RadialProfile slow = sample_fn(g, [](double r) { return r / (1.0 + r * r); }, 1);
    CHECK_THROWS_AS(harmonic_potential(1, slow), Error);
    CHECK_THROWS_AS(harmonic_potential(0, psi1), Error);
}

TEST_CASE("harmonic potential agrees with the system solve") {
    GridPtr g = default_profile_grid();

    // ell = 2 source (1/2) r dLamU: psi -> -4/r^2, omega -> -1
    RadialProfile f2 = sample_fn(g, [](double r) { return 0.5 * r * model::dLamU(r); }, 2);
    HarmonicPair sol2 = solve_harmonic(2, f2);
    RadialProfile w2 = harmonic_potential(2, sol2.psi);
    AsymptoticFit far = fit_coefficient(w2, FitWindow{1e3, 1e4}, 0.0);
    CHECK(far.c == doctest::Approx(-1.0).epsilon(0.01));
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double r = g->r[i];
        if (r < 1e-2 || r > 1e2) continue;
        worst = std::max(worst, std::abs(w2.v[i] - sol2.omega.v[i]) /
                                    (std::abs(sol2.omega.v[i]) + 0.1));
    }
    CHECK(worst < 1e-3);

    // ell = 3 source -(1/(4 sqrt 2)) r^2 dLamU: omega -> r/(6 sqrt 2)
    const double c33 = -1.0 / (4.0 * std::sqrt(2.0));
    RadialProfile f3 =
        sample_fn(g, [c33](double r) { return c33 * r * r * model::dLamU(r); }, 3);
    HarmonicPair sol3 = solve_harmonic(3, f3);
    RadialProfile w3 = harmonic_potential(3, sol3.psi);
    AsymptoticFit lin = fit_coefficient(w3, FitWindow{1e3, 1e4}, 1.0);
    CHECK(lin.c == doctest::Approx(1.0 / (6.0 * std::sqrt(2.0))).epsilon(0.01));
}

TEST_CASE("taylor field coefficients") {
    const double c2 = 1.0 / (4.0 * std::sqrt(2.0));

    Vec2 g1 = TaylorField::G1({1.0, 0.0});
    CHECK(g1.x == doctest::Approx(0.5));
    CHECK(g1.y == doctest::Approx(0.0));

    Vec2 g2 = TaylorField::G2({0.0, 0.0});
    CHECK(g2.x == doctest::Approx(c2));
    CHECK(g2.y == doctest::Approx(0.0));

    Vec2 g3 = TaylorField::G3({0.0, 0.0});
    CHECK(g3.x == doctest::Approx(0.0));
    CHECK(g3.y == doctest::Approx(0.0));
    g3 = TaylorField::G3({1.0, 1.0});
    CHECK(g3.x == doctest::Approx(-5.0 / 16.0));
    CHECK(g3.y == doctest::Approx(-1.0 / 16.0));

    // each pure polynomial part is homogeneous of its degree; G2 carries a
    // constant and G3 a linear part on top, so those are split off first
    const Vec2 y{0.7, -0.4};
    const double t = 3.0;
    const Vec2 yt{t * y.x, t * y.y};
    Vec2 a1 = TaylorField::G1(yt), b1 = TaylorField::G1(y);
    CHECK(a1.x == doctest::Approx(t * b1.x));
    CHECK(a1.y == doctest::Approx(t * b1.y));
    Vec2 a2 = TaylorField::G2(yt), b2 = TaylorField::G2(y), z2 = TaylorField::G2({0, 0});
    CHECK(a2.x - z2.x == doctest::Approx(t * t * (b2.x - z2.x)));
    CHECK(a2.y - z2.y == doctest::Approx(t * t * (b2.y - z2.y)));
    auto cubic = [](Vec2 p) {
        Vec2 u = TaylorField::G3({2.0 * p.x, 2.0 * p.y});
        Vec2 v = TaylorField::G3(p);
        return Vec2{(u.x - 2.0 * v.x) / 6.0, (u.y - 2.0 * v.y) / 6.0};
    };
    Vec2 c3y = cubic(y), c3t = cubic(yt);
    CHECK(c3t.x == doctest::Approx(t * t * t * c3y.x));
    CHECK(c3t.y == doctest::Approx(t * t * t * c3y.y));
    Vec2 l3y{TaylorField::G3(y).x - c3y.x, TaylorField::G3(y).y - c3y.y};
    Vec2 l3t{TaylorField::G3(yt).x - c3t.x, TaylorField::G3(yt).y - c3t.y};
    CHECK(l3t.x == doctest::Approx(t * l3y.x));
    CHECK(l3t.y == doctest::Approx(t * l3y.y));

    // zeroth order is the uniform drift -+ alpha nu a
    Vec2 p0 = taylor_expand_partner({2.0, 0.0}, 0.1, {5.0, 3.0}, +1, 0);
    CHECK(p0.x == doctest::Approx(-0.1));
    CHECK(p0.y == doctest::Approx(0.0));
    Vec2 m0 = taylor_expand_partner({2.0, 0.0}, 0.1, {5.0, 3.0}, -1, 0);
    CHECK(m0.x == doctest::Approx(0.1));

    CHECK_THROWS_AS(taylor_expand_partner({2.0, 0.0}, 0.0, {0, 0}, +1, 3), Error);
    CHECK_THROWS_AS(taylor_expand_partner({0.0, 2.0}, 0.1, {0, 0}, +1, 3), Error);
    CHECK_THROWS_AS(taylor_expand_partner({2.0, 0.0}, 0.1, {0, 0}, +1, 4), Error);
    CHECK_THROWS_AS(taylor_expand_partner({2.0, 0.0}, 0.1, {0, 0}, 0, 3), Error);
}

TEST_CASE("taylor remainder scales like nu^5") {
    const Vec2 a{2.0, 0.0};
    const std::vector<double> nus = {0.04, 0.02, 0.01};
    std::vector<double> worst(nus.size(), 0.0);
    for (std::size_t k = 0; k < nus.size(); ++k) {
        const double nu = nus[k];
        for (int sign : {+1, -1}) {
            for (int ir = 0; ir <= 10; ++ir) {
                for (int it = 0; it < 12; ++it) {
                    const double th = 2.0 * model::kPi * it / 12.0;
                    const Vec2 y{ir * std::cos(th), ir * std::sin(th)};
                    const double px = y.x + sign * 2.0 * a.x / nu;
                    const double py = y.y;
                    const double s = 1.0 + px * px + py * py;
                    const Vec2 exact{-4.0 * px / s, -4.0 * py / s};
                    const Vec2 sum = taylor_expand_partner(a, nu, y, sign, 3);
                    worst[k] = std::max(worst[k], std::hypot(exact.x - sum.x,
                                                             exact.y - sum.y));
                }
            }
        }
    }
    // least-squares slope of log worst against log nu
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < nus.size(); ++k) {
        const double x = std::log(nus[k]), v = std::log(worst[k]);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    const double m = nus.size();
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope > 4.7);
    CHECK(slope < 5.3);
}

TEST_CASE("poisson 2d inverts the laplacian") {
    const int n = 1024;
    const double L = 12.0;
    Field2D u = sample2d(L, n, [](double x, double y) {
        return model::U(std::sqrt(x * x + y * y));
    });
    Field2D phi = poisson_2d(u);
    const double h = u.grid.h();
    double num = 0.0, den = 0.0;
    for (int j = 1; j < n - 1; ++j) {
        const double y = u.grid.coord(j);
        for (int i = 1; i < n - 1; ++i) {
            const double x = u.grid.coord(i);
            if (std::abs(x) > L / 2 || std::abs(y) > L / 2) continue;
            const double lap = (phi.at(i - 1, j) + phi.at(i + 1, j) + phi.at(i, j - 1) +
                                phi.at(i, j + 1) - 4.0 * phi.at(i, j)) /
                               (h * h);
            num += sq(-lap - u.at(i, j));
            den += sq(u.at(i, j));
        }
    }
    CHECK(std::sqrt(num / den) < 1e-3);

    Field2D zero = sample2d(2.0, 32, [](double, double) { return 0.0; });
    Field2D pz = poisson_2d(zero);
    for (double v : pz.v) CHECK(v == 0.0);

    Field2D nf = sample2d(2.0, 32, [](double, double) { return 1.0; });
    nf.v[5] = std::nan("");
    CHECK_THROWS_AS(poisson_2d(nf), Error);
}

TEST_CASE("poisson gradient matches the radial quadrature") {
    const int n = 512;
    const double L = 12.0;
    Field2D u = sample2d(L, n, [](double x, double y) {
        return model::U(std::sqrt(x * x + y * y));
    });
    Field2D gx, gy;
    poisson_gradient_2d(u, &gx, &gy);
    CHECK(gx.eval(1.0, 0.0) == doctest::Approx(-2.0).epsilon(0.02));
    CHECK(std::abs(gy.eval(1.0, 0.0)) < 0.02);

    GridPtr g = default_profile_grid();
    RadialProfile ur = sample_fn(g, model::U);
    RadialProfile dphi = radial_gradient_potential(ur);
    for (double x = 1.0; x <= L / 2; x += 0.5) {
        const double want = dphi.eval(x);
        CHECK(gx.eval(x, 0.0) == doctest::Approx(want).epsilon(0.02));
    }
}

TEST_CASE("partner field at a soliton center") {
    const int n = 1024;
    const double L = 12.0;
    const double nu = 0.05, ax = 2.0;
    Field2D u = sample2d(L, n, [nu, ax](double x, double y) {
        return model::bubble(nu, ax, 0.0, x, y) + model::bubble(nu, -ax, 0.0, x, y);
    });
    Field2D gx, gy;
    poisson_gradient_2d(u, &gx, &gy);
    const double rho = 10.0 * u.grid.h();
    Vec2 mean = ring_average_gradient(gx, gy, {ax, 0.0}, rho, 32);
    const double want = -8.0 * ax / (nu * nu + 4.0 * ax * ax);
    CHECK(mean.x == doctest::Approx(want).epsilon(0.01));
    CHECK(std::abs(mean.y) < 0.01);
}

TEST_CASE("chi star cutoff restricts the source") {
    CHECK(chi_star(5.0) == doctest::Approx(1.0));
    CHECK(chi_star(25.0) == doctest::Approx(0.0));
    CHECK(chi_star(15.0) > 0.0);
    CHECK(chi_star(15.0) < 1.0);

    const int n = 2048;
    const double L = 24.0;
    Field2D u = sample2d(L, n, [](double x, double y) {
        return model::U(std::sqrt(x * x + y * y));
    });
    Field2D phi = poisson_2d(u, Cutoff2D::ChiStar);
    const double h = u.grid.h();
    double num = 0.0, den = 0.0;
    for (int j = 1; j < n - 1; ++j) {
        const double y = u.grid.coord(j);
        for (int i = 1; i < n - 1; ++i) {
            const double x = u.grid.coord(i);
            const double r = std::sqrt(x * x + y * y);
            if (std::abs(x) > 12.0 || std::abs(y) > 12.0) continue;
            const double lap = (phi.at(i - 1, j) + phi.at(i + 1, j) + phi.at(i, j - 1) +
                                phi.at(i, j + 1) - 4.0 * phi.at(i, j)) /
                               (h * h);
            num += sq(-lap - chi_star(r) * u.at(i, j));
            den += sq(chi_star(r) * u.at(i, j));
        }
    }
    CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("pointwise decay probe") {
    const int n = 256;
    const double L = 12.0;
    Field2D f = sample2d(L, n, [](double x, double y) {
        return std::pow(1.0 + x * x + y * y, -0.75);
    });
    DecayProbe probe = pointwise_decay_probe(f, 1.5, 0.25);
    CHECK(std::isfinite(probe.constant));
    CHECK(probe.constant > 0.0);
    CHECK(probe.constant < 100.0);
    CHECK(probe.norm == doctest::Approx(1.0));

    Field2D zero = sample2d(L, 32, [](double, double) { return 0.0; });
    DecayProbe pz = pointwise_decay_probe(zero, 1.5, 0.25);
    CHECK(pz.constant == 0.0);
    CHECK(pz.norm == 0.0);

    CHECK_THROWS_AS(pointwise_decay_probe(f, 2.5, 0.25), Error);
    CHECK_THROWS_AS(pointwise_decay_probe(f, 1.5, 0.6), Error);

    // probe constant is stable under grid refinement for a smooth bump mix
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(-3.0, 3.0), amp(0.5, 2.0);
    std::vector<double> cx, cy, cw;
    for (int b = 0; b < 4; ++b) {
        cx.push_back(pos(rng));
        cy.push_back(pos(rng));
        cw.push_back(amp(rng));
    }
    auto bumps = [&](double x, double y) {
        double v = 0.0;
        for (int b = 0; b < 4; ++b)
            v += cw[b] * std::exp(-(sq(x - cx[b]) + sq(y - cy[b])));
        return v;
    };
    DecayProbe pa = pointwise_decay_probe(sample2d(L, 256, bumps), 1.5, 0.25);
    DecayProbe pb = pointwise_decay_probe(sample2d(L, 512, bumps), 1.5, 0.25);
    CHECK(pa.constant == doctest::Approx(pb.constant).epsilon(0.10));
}
