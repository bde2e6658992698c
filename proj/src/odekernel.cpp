#include "kslab/odekernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace kslab {

namespace {

constexpr double kBasisRmin = 1e-3;
constexpr double kBasisRmax = 1e4;
constexpr std::size_t kBasisN = 4096;

const GridPtr& basis_grid() {
    static GridPtr g = share(make_radial_grid(kBasisRmin, kBasisRmax, kBasisN, GridLaw::Log));
    return g;
}

double sigma_of(int ell) { return std::sqrt(double(ell) * ell + 4.0); }

// Closed-form branches k = 1, 2 with analytic r-derivatives.
void closed_branch(int ell, int k, double r, double& h, double& g, double& dh, double& dg) {
    const double r2 = r * r, d = 1.0 + r2;
    if (k == 1) {
        const double P = (ell - 1) * r2 + ell + 1, dP = 2.0 * (ell - 1) * r;
        const double rl = std::pow(r, ell), drl = ell * std::pow(r, ell - 1);
        h = 8.0 * P * rl / (d * d * d);
        dh = 8.0 * (dP * rl + P * drl) / (d * d * d) - 48.0 * P * rl * r / (d * d * d * d);
        g = P * rl / d;
        dg = (dP * rl + P * drl) / d - 2.0 * P * rl * r / (d * d);
        return;
    }
    if (ell == 1) {  // (h_{1,2}, g_{1,2})
        const double N = r2 * r2 + 4.0 * r2 * std::log(r) - 1.0;
        const double dN = 4.0 * r2 * r + 8.0 * r * std::log(r) + 4.0 * r;
        const double A = r * d * d * d, dA = d * d * (1.0 + 7.0 * r2);
        const double B = r * d, dB = 1.0 + 3.0 * r2;
        h = 8.0 * N / A;
        dh = 8.0 * (dN * A - N * dA) / (A * A);
        g = N / B;
        dg = (dN * B - N * dB) / (B * B);
        return;
    }
    const double M = (ell + 1) * r2 + ell - 1, dM = 2.0 * (ell + 1) * r;
    const double rl = std::pow(r, -ell), drl = -ell * std::pow(r, -ell - 1);
    h = 8.0 * M * rl / (d * d * d);
    dh = 8.0 * (dM * rl + M * drl) / (d * d * d) - 48.0 * M * rl * r / (d * d * d * d);
    g = M * rl / d;
    dg = (dM * rl + M * drl) / d - 2.0 * M * rl * r / (d * d);
}

// Right-hand side of the first-order system in s = ln r for
// y = (psi, D psi, omega, D omega), homogeneous version.
Rhs4 harmonic_rhs(int ell) {
    const double l2 = double(ell) * ell;
    return [l2](double s, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        const double r2 = std::exp(2.0 * s), d = 1.0 + r2;
        dy[0] = y[1];
        dy[1] = l2 * y[0] - (4.0 * r2 / d) * y[1] - (32.0 * r2 / (d * d * d)) * y[3] -
                (16.0 * r2 / (d * d)) * y[0];
        dy[2] = y[3];
        dy[3] = l2 * y[2] - r2 * y[0];
    };
}

// Two-power least-squares fit f ~ a r^p + b r^q over grid nodes in [ra, rb].
std::pair<double, double> fit_two_powers(const std::vector<double>& v, const RadialGrid& g,
                                         double ra, double rb, double p, double q) {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    std::size_t count = 0;
    // scale columns by their value at the geometric window center
    const double rc = std::sqrt(ra * rb);
    const double c1 = std::pow(rc, p), c2 = std::pow(rc, q);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.r[i];
        if (r < ra || r > rb) continue;
        const double f1 = std::pow(r, p) / c1, f2 = std::pow(r, q) / c2;
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        b1 += f1 * v[i];
        b2 += f2 * v[i];
        ++count;
    }
    require(count >= 8, Error::Kind::Domain, "fit_two_powers: window holds fewer than 8 nodes");
    const double det = s11 * s22 - s12 * s12;
    require(std::abs(det) > 1e-14 * s11 * s22, Error::Kind::Rank,
            "fit_two_powers: basis powers indistinguishable on window");
    const double a = (b1 * s22 - b2 * s12) / det;
    const double b = (s11 * b2 - s12 * b1) / det;
    return {a / c1, b / c2};
}

double det4(double m[4][4]) {
    // Gaussian elimination with partial pivoting
    double det = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int k = c + 1; k < 4; ++k)
            if (std::abs(m[k][c]) > std::abs(m[piv][c])) piv = k;
        if (m[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int k = c + 1; k < 4; ++k) {
            const double f = m[k][c] / m[c][c];
            for (int j = c; j < 4; ++j) m[k][j] -= f * m[c][j];
        }
    }
    return det;
}

double det3(double a0, double a1, double a2, double b0, double b1, double b2, double c0, double c1,
            double c2) {
    return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
}

}  // namespace

double psi0(double r) {
    const double d = 1.0 + r * r;
    return r * r / (d * d);
}

double psi0_tilde(double r) {
    if (r == 0.0) return -1.0;
    const double r2 = r * r, d = 1.0 + r2;
    return (r2 * r2 + 4.0 * r2 * std::log(r) - 1.0) / (d * d);
}

void radial_fundamental(double r, double* p0, double* p0t) {
    require(r >= 0.0, Error::Kind::Domain, "radial_fundamental: negative radius");
    if (p0) *p0 = psi0(r);
    if (p0t) *p0t = psi0_tilde(r);
}

RadialProfile invert_A0(const RadialProfile& g) {
    require(g.grid != nullptr && g.size() == g.grid->size(), Error::Kind::Shape,
            "invert_A0: profile has no grid");
    const RadialGrid& gr = *g.grid;
    require(gr.r_min() < 1.0 && gr.r_max() > 1.0, Error::Kind::Domain,
            "invert_A0: grid must straddle r = 1");
    const std::size_t n = gr.size();

    // P(r) = int_{first positive node}^r K(z) g(z) dz with K = (z^4 + 4 z^2 ln z - 1)/z;
    // only differences P(1) - P(r) enter, so the omitted initial sliver is immaterial.
    std::vector<double> kg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = gr.r[i];
        if (r <= 0.0) continue;
        const double r2 = r * r;
        kg[i] = ((r2 * r2 + 4.0 * r2 * std::log(r) - 1.0) / r) * g.v[i];
    }
    std::vector<double> P = cumquad_prefix(kg, gr, 0.0);

    // interpolate P at r = 1 (P is C^1; linear between straddling nodes)
    std::size_t j = gr.bracket(1.0);
    if (j + 1 >= n) j = n - 2;
    const double t = (1.0 - gr.r[j]) / (gr.r[j + 1] - gr.r[j]);
    const double P1 = P[j] + t * (P[j + 1] - P[j]);

    std::vector<double> M = cumquad_prefix(g.v, gr, 1.0);

    RadialProfile u(g.grid, 0.0, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = gr.r[i];
        if (r <= 0.0) {
            u.v[i] = 0.0;
            continue;
        }
        u.v[i] = 0.5 * psi0(r) * (P1 - P[i]) + 0.5 * psi0_tilde(r) * M[i];
    }
    return u;
}

RadialProfile apply_A0(const RadialProfile& u) {
    require(u.grid != nullptr, Error::Kind::Shape, "apply_A0: profile has no grid");
    RadialProfile du = differentiate(u);
    RadialProfile d2u = differentiate(du);
    RadialProfile out(u.grid, 0.0, 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u.grid->r[i];
        if (r <= 0.0) continue;
        const double d = 1.0 + r * r;
        const double Q = 4.0 * r * r / d;
        out.v[i] = d2u.v[i] + (Q - 1.0) / r * du.v[i] + 8.0 / (d * d) * u.v[i];
    }
    return out;
}

void integrate_rk45(const Rhs4& rhs, const std::vector<double>& s_nodes, std::array<double, 4> y,
                    const std::function<void(std::size_t, const std::array<double, 4>&)>& on_node,
                    double rtol) {
    require(s_nodes.size() >= 2, Error::Kind::Parameter, "integrate_rk45: need at least two nodes");
    // Dormand-Prince 5(4) tableau
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double s = s_nodes.front();
    const double dir = (s_nodes.back() > s) ? 1.0 : -1.0;
    on_node(0, y);
    std::array<double, 4> k1, k2, k3, k4, k5, k6, k7, yt, y5;
    rhs(s, y, k1);
    double h = dir * 1e-4;

    for (std::size_t node = 1; node < s_nodes.size(); ++node) {
        const double target = s_nodes[node];
        int guard = 0;
        while (dir * (target - s) > 1e-14 * std::abs(target - s_nodes.front()) + 1e-300) {
            require(++guard < 2000000, Error::Kind::Convergence,
                    "integrate_rk45: step count exceeded");
            if (dir * (s + h - target) > 0.0) h = target - s;
            for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * a21 * k1[i];
            rhs(s + h / 5.0, yt, k2);
            for (int i = 0; i < 4; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(s + 3.0 * h / 10.0, yt, k3);
            for (int i = 0; i < 4; ++i)
                yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(s + 4.0 * h / 5.0, yt, k4);
            for (int i = 0; i < 4; ++i)
                yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(s + 8.0 * h / 9.0, yt, k5);
            for (int i = 0; i < 4; ++i)
                yt[i] = y[i] +
                        h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(s + h, yt, k6);
            for (int i = 0; i < 4; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(s + h, y5, k7);

            double ymax = 0.0;
            for (int i = 0; i < 4; ++i) ymax = std::max(ymax, std::max(std::abs(y[i]), std::abs(y5[i])));
            double errnorm = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                        e6 * k6[i] + e7 * k7[i]);
                // per-component scale: components differ by powers of r, so a
                // shared absolute floor would drown the small ones
                const double scale =
                    rtol * (std::abs(y[i]) + std::abs(y5[i]) + 1e-6 * ymax + 1e-300);
                errnorm += (err / scale) * (err / scale);
            }
            errnorm = std::sqrt(errnorm / 4.0);

            if (errnorm <= 1.0) {
                s += h;
                y = y5;
                k1 = k7;  // first-same-as-last
            }
            const double fac =
                std::clamp(0.9 * std::pow(std::max(errnorm, 1e-10), -0.2), 0.2, 5.0);
            h *= fac;
        }
        s = target;
        on_node(node, y);
    }
}

const HomogeneousBasis& homogeneous_basis(int ell) {
    require(ell >= 1 && ell <= 8, Error::Kind::Parameter,
            "homogeneous_basis: ell out of range [1, 8]");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<HomogeneousBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(ell);
    if (it != cache.end()) return *it->second;

    auto B = std::make_unique<HomogeneousBasis>();
    B->ell = ell;
    B->grid = basis_grid();
    const RadialGrid& g = *B->grid;
    const std::size_t n = g.size();
    const double sig = sigma_of(ell);

    std::vector<double> ss(n);
    for (std::size_t i = 0; i < n; ++i) ss[i] = std::log(g.r[i]);

    for (int k = 0; k < 4; ++k) {
        B->h[k] = RadialProfile(B->grid, 0.0, ell);
        B->g[k] = RadialProfile(B->grid, 0.0, ell);
        B->dh[k] = RadialProfile(B->grid, 0.0, ell);
        B->dg[k] = RadialProfile(B->grid, 0.0, ell);
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 1; k <= 2; ++k) {
            double h, gg, dh, dg;
            closed_branch(ell, k, g.r[i], h, gg, dh, dg);
            B->h[k - 1].v[i] = h;
            B->g[k - 1].v[i] = gg;
            B->dh[k - 1].v[i] = dh;
            B->dg[k - 1].v[i] = dg;
        }
    }

    const Rhs4 rhs = harmonic_rhs(ell);

    {  // k = 3: outward from the origin series (8 r^ell, -r^ell) + next order
        const double r0 = g.r_min();
        const double A0 = 8.0, B0 = -1.0;
        const double A1 = -32.0 / (ell + 1), B1 = -2.0 / (ell + 1);
        const double rl = std::pow(r0, ell), rl2 = std::pow(r0, ell + 2);
        std::array<double, 4> y0 = {A0 * rl + A1 * rl2, ell * A0 * rl + (ell + 2) * A1 * rl2,
                                    B0 * rl + B1 * rl2, ell * B0 * rl + (ell + 2) * B1 * rl2};
        integrate_rk45(rhs, ss, y0, [&](std::size_t i, const std::array<double, 4>& y) {
            B->h[2].v[i] = y[0];
            B->dh[2].v[i] = y[1] / g.r[i];
            B->g[2].v[i] = y[2];
            B->dg[2].v[i] = y[3] / g.r[i];
        });
    }

    {  // k = 4: inward from the far-field seed
        const double r1 = g.r_max();
        const double cpsi = (ell == 1) ? 1.0 : 16.0;
        const double comg = (ell == 1) ? -0.25 : -4.0;
        std::array<double, 4> y0 = {cpsi * std::pow(r1, -sig - 2.0),
                                    -(sig + 2.0) * cpsi * std::pow(r1, -sig - 2.0),
                                    comg * std::pow(r1, -sig), -sig * comg * std::pow(r1, -sig)};
        std::vector<double> srev(ss.rbegin(), ss.rend());
        integrate_rk45(rhs, srev, y0, [&](std::size_t i, const std::array<double, 4>& y) {
            const std::size_t j = n - 1 - i;
            B->h[3].v[j] = y[0];
            B->dh[3].v[j] = y[1] / g.r[j];
            B->g[3].v[j] = y[2];
            B->dg[3].v[j] = y[3] / g.r[j];
        });
    }

    {  // origin coefficients of the k = 4 branch, and its normalization for ell >= 2
        std::vector<double> pr(n, 0.0), om(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double rl = std::pow(g.r[i], ell);
            pr[i] = B->h[3].v[i] * rl;
            om[i] = B->g[3].v[i] * rl;
        }
        const double ra = g.r_min(), rb = 10.0 * g.r_min();
        const double chat = fit_two_powers(pr, g, ra, rb, 0.0, 2.0).first;
        const double chatp = fit_two_powers(om, g, ra, rb, 0.0, 2.0).first;
        if (ell >= 2) {
            const double denom = chat - 8.0 * chatp;
            require(std::abs(denom) > 1e-12 * (std::abs(chat) + 1.0), Error::Kind::Rank,
                    "homogeneous_basis: degenerate origin data for k=4 branch");
            B->C_l = 16.0 / denom;
            for (std::size_t i = 0; i < n; ++i) {
                B->h[3].v[i] *= B->C_l;
                B->g[3].v[i] *= B->C_l;
                B->dh[3].v[i] *= B->C_l;
                B->dg[3].v[i] *= B->C_l;
            }
            B->c4_origin = B->C_l * chat;
            B->c4p_origin = B->C_l * chatp;
        } else {
            B->C_l = 1.0;
            B->c4_origin = chat;
            B->c4p_origin = chatp;
        }
    }

    {  // far-field constant of the k = 3 branch: g_3 ~ -4 K_l r^sigma (+ r^ell admixture)
        const double a =
            fit_two_powers(B->g[2].v, g, 1e3, g.r_max(), sig, double(ell)).first;
        B->K_l = -a / 4.0;
    }

    {  // Wronskian constant and its spread on [1, 100]
        auto [W, E] = wronskian(*B);
        B->E_l = E;
        double mean = 0.0, m2 = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = g.r[i];
            if (r < 1.0 || r > 100.0) continue;
            const double d = 1.0 + r * r;
            const double e = W.v[i] * r * r * d * d;
            mean += e;
            m2 += e * e;
            ++cnt;
        }
        mean /= cnt;
        const double var = std::max(0.0, m2 / cnt - mean * mean);
        B->wronskian_rel_spread = std::sqrt(var) / std::abs(mean);
    }

    auto& ref = *B;
    cache[ell] = std::move(B);
    return ref;
}

std::pair<RadialProfile, double> wronskian(const HomogeneousBasis& basis) {
    const RadialGrid& g = *basis.grid;
    RadialProfile W(basis.grid, 0.0, basis.ell);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double m[4][4];
        for (int k = 0; k < 4; ++k) {
            m[0][k] = basis.h[k].v[i];
            m[1][k] = basis.g[k].v[i];
            m[2][k] = basis.dh[k].v[i];
            m[3][k] = basis.dg[k].v[i];
        }
        W.v[i] = det4(m);
    }
    // E_l from the analytic profile W = E_l / (r^2 (1+r^2)^2), averaged on [1, 100]
    double mean = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.r[i];
        if (r < 1.0 || r > 100.0) continue;
        const double d = 1.0 + r * r;
        mean += W.v[i] * r * r * d * d;
        ++cnt;
    }
    require(cnt > 0, Error::Kind::Domain, "wronskian: grid misses the window [1, 100]");
    mean /= cnt;
    require(std::abs(mean) > 1e-12, Error::Kind::Rank, "wronskian: basis is degenerate");
    return {std::move(W), mean};
}

RadialProfile wronskian_minor(const HomogeneousBasis& basis, int k) {
    require(k >= 1 && k <= 4, Error::Kind::Parameter, "wronskian_minor: k must be in 1..4");
    const RadialGrid& g = *basis.grid;
    int cols[3], c = 0;
    for (int j = 1; j <= 4; ++j)
        if (j != k) cols[c++] = j - 1;
    RadialProfile W(basis.grid, 0.0, basis.ell);
    for (std::size_t i = 0; i < g.size(); ++i) {
        W.v[i] = det3(basis.h[cols[0]].v[i], basis.h[cols[1]].v[i], basis.h[cols[2]].v[i],
                      basis.g[cols[0]].v[i], basis.g[cols[1]].v[i], basis.g[cols[2]].v[i],
                      basis.dg[cols[0]].v[i], basis.dg[cols[1]].v[i], basis.dg[cols[2]].v[i]);
    }
    return W;
}

HarmonicPair solve_harmonic(int ell, const RadialProfile& f, const SolveOptions& opt) {
    const HomogeneousBasis& B = homogeneous_basis(ell);
    const RadialGrid& g = *B.grid;
    const std::size_t n = g.size();

    std::array<int, 4> base = opt.base;
    for (int k = 0; k < 4; ++k) {
        if (base[k] == -1) {
            static constexpr int auto_l1[4] = {0, 0, 1, 0};
            static constexpr int auto_lge2[4] = {1, 0, 1, 0};
            base[k] = (ell == 1) ? auto_l1[k] : auto_lge2[k];
        }
        require(base[k] == 0 || base[k] == 1, Error::Kind::Parameter,
                "solve_harmonic: base entries must be -1, 0 or 1");
    }

    std::vector<double> fv(n);
    for (std::size_t i = 0; i < n; ++i) fv[i] = f.eval(g.r[i]);

    std::vector<std::vector<double>> coef(4, std::vector<double>(n, 0.0));
    for (int k = 0; k < 4; ++k) {
        RadialProfile Wk = wronskian_minor(B, k + 1);
        std::vector<double> integrand(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = g.r[i];
            const double d = 1.0 + r * r;
            const double W = B.E_l / (r * r * d * d);
            integrand[i] = fv[i] * Wk.v[i] / W;
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;  // (-1)^{k+1} with k one-based
        if (base[k] == 0) {
            std::vector<double> P = cumquad_prefix(integrand, g, 0.0);
            for (std::size_t i = 0; i < n; ++i) coef[k][i] = sign * P[i] + opt.add_const[k];
        } else {
            // coefficient must vanish at infinity: the integrand has to decay
            // faster than 1/r, checked before any tail extrapolation
            std::vector<double> S = cumquad_suffix(integrand, g, 0.0);
            const std::size_t imid = g.bracket(g.r_max() / 10.0);
            const double last_decade = std::abs(S[imid]);
            const double total = std::abs(S[0]) + last_decade;
            const double va = integrand[imid], vb = integrand[n - 1];
            if (va * vb > 0.0 && std::abs(vb) > 1e-14 * total / g.r_max() &&
                last_decade > 0.02 * total) {
                const double p_est = std::log(std::abs(vb / va)) / std::log(10.0);
                require(p_est < -1.05, Error::Kind::Convergence,
                        "solve_harmonic: branch integral does not converge at infinity");
            }
            const double tail = tail_correction(integrand, g, 0.0);
            require(std::isfinite(tail), Error::Kind::Convergence,
                    "solve_harmonic: tail extrapolation failed");
            for (std::size_t i = 0; i < n; ++i)
                coef[k][i] = -sign * (S[i] + tail) + opt.add_const[k];
        }
    }

    // assemble on the computation grid, then extend to the standard patched grid
    std::vector<double> psi(n, 0.0), omega(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 4; ++k) {
            psi[i] += coef[k][i] * B.h[k].v[i];
            omega[i] += coef[k][i] * B.g[k].v[i];
        }
    }

    GridPtr out = default_profile_grid();
    HarmonicPair sol;
    sol.ell = ell;
    sol.psi = RadialProfile(out, 0.0, ell);
    sol.omega = RadialProfile(out, 0.0, ell);
    const double r0 = g.r_min();
    for (std::size_t i = 0; i < out->size(); ++i) {
        const double r = out->r[i];
        if (r >= r0) {
            const std::size_t j = g.bracket(r);  // grids share their log sections
            if (std::abs(g.r[j] - r) < 1e-12 * r) {
                sol.psi.v[i] = psi[j];
                sol.omega.v[i] = omega[j];
            } else {
                const std::size_t j1 = std::min(j + 1, n - 1);
                const double t = (r - g.r[j]) / (g.r[j1] - g.r[j] + 1e-300);
                sol.psi.v[i] = psi[j] + t * (psi[j1] - psi[j]);
                sol.omega.v[i] = omega[j] + t * (omega[j1] - omega[j]);
            }
        } else if (r > 0.0) {
            const double scale = std::pow(r / r0, ell);
            sol.psi.v[i] = psi[0] * scale;
            sol.omega.v[i] = omega[0] * scale;
        }
    }
    return sol;
}

RadialProfile apply_L0_ell(const HarmonicPair& p) {
    const double l2 = double(p.ell) * p.ell;
    RadialProfile dpsi = differentiate(p.psi);
    RadialProfile d2psi = differentiate(dpsi);
    RadialProfile domega = differentiate(p.omega);
    RadialProfile out(p.psi.grid, 0.0, p.ell);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = p.psi.grid->r[i];
        if (r <= 0.0) continue;
        const double d = 1.0 + r * r;
        out.v[i] = d2psi.v[i] + dpsi.v[i] / r - l2 * p.psi.v[i] / (r * r) +
                   (4.0 * r / d) * dpsi.v[i] + (32.0 * r / (d * d * d)) * domega.v[i] +
                   (16.0 / (d * d)) * p.psi.v[i];
    }
    return out;
}

RadialProfile potential_residual(const HarmonicPair& p) {
    const double l2 = double(p.ell) * p.ell;
    RadialProfile dom = differentiate(p.omega);
    RadialProfile d2om = differentiate(dom);
    RadialProfile out(p.omega.grid, 0.0, p.ell);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = p.omega.grid->r[i];
        if (r <= 0.0) continue;
        out.v[i] = d2om.v[i] + dom.v[i] / r - l2 * p.omega.v[i] / (r * r) + p.psi.v[i];
    }
    return out;
}

}  // namespace kslab
