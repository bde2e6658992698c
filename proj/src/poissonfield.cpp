#include "kslab/poissonfield.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <list>
#include <memory>
#include <mutex>

#include "kslab/model.hpp"

namespace kslab {

namespace {

// average of log|x| over one unit cell centered at the singularity; the
// square splits into eight triangles, each integrable in polar form
double log_cell_average() {
    static const double value = [] {
        double acc = 0.0;
        const int n = 64;
        const double width = model::kPi / 4.0 / n;
        for (int j = 0; j < n; ++j) {
            const double mid = (j + 0.5) * width;
            for (int q = 0; q < 3; ++q) {
                const double t = mid + 0.5 * width * kGauss3Nodes[q];
                const double w = 0.5 * width * kGauss3Weights[q];
                const double R = 0.5 / std::cos(t);
                acc += w * R * R * (2.0 * std::log(R) - 1.0) / 4.0;
            }
        }
        return 8.0 * acc;
    }();
    return value;
}

enum KernelKind { kLog = 0, kGradX = 1, kGradY = 2 };

// FFT workspace for one padded size; kernel spectra fill in lazily.  All
// FFTW planning and execution stays behind one mutex.
struct ConvWork {
    int m = 0;
    double h = 0.0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    std::vector<std::complex<double>> khat[3];

    ConvWork(int m_, double h_) : m(m_), h(h_) {
        real = fftw_alloc_real(static_cast<std::size_t>(m) * m);
        spec = fftw_alloc_complex(static_cast<std::size_t>(m) * (m / 2 + 1));
        require(real != nullptr && spec != nullptr, Error::Kind::Convergence,
                "poisson_2d: fftw allocation failed");
        fwd = fftw_plan_dft_r2c_2d(m, m, real, spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_2d(m, m, spec, real, FFTW_ESTIMATE);
        require(fwd != nullptr && inv != nullptr, Error::Kind::Convergence,
                "poisson_2d: fftw planning failed");
    }
    ~ConvWork() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
    ConvWork(const ConvWork&) = delete;
    ConvWork& operator=(const ConvWork&) = delete;

    std::size_t nspec() const { return static_cast<std::size_t>(m) * (m / 2 + 1); }

    // signed displacement of wrap index i
    double disp(int i) const { return (i <= m / 2 ? i : i - m) * h; }

    const std::vector<std::complex<double>>& kernel(KernelKind kind) {
        auto& cached = khat[kind];
        if (!cached.empty()) return cached;
        const double c = -1.0 / (2.0 * model::kPi);
        for (int j = 0; j < m; ++j) {
            const double dy = disp(j);
            for (int i = 0; i < m; ++i) {
                const double dx = disp(i);
                const double s = dx * dx + dy * dy;
                double k;
                switch (kind) {
                    case kLog:
                        k = (s == 0.0) ? c * (std::log(h) + log_cell_average())
                                       : 0.5 * c * std::log(s);
                        break;
                    case kGradX:
                        k = (s == 0.0) ? 0.0 : c * dx / s;
                        break;
                    default:
                        k = (s == 0.0) ? 0.0 : c * dy / s;
                        break;
                }
                real[static_cast<std::size_t>(j) * m + i] = k;
            }
        }
        fftw_execute(fwd);
        cached.resize(nspec());
        for (std::size_t i = 0; i < cached.size(); ++i)
            cached[i] = std::complex<double>(spec[i][0], spec[i][1]);
        return cached;
    }
};

std::mutex g_conv_mutex;
std::list<std::unique_ptr<ConvWork>> g_conv_cache;  // most recent first

ConvWork& acquire_work(int m, double h) {
    for (auto it = g_conv_cache.begin(); it != g_conv_cache.end(); ++it) {
        if ((*it)->m == m && (*it)->h == h) {
            g_conv_cache.splice(g_conv_cache.begin(), g_conv_cache, it);
            return *g_conv_cache.front();
        }
    }
    g_conv_cache.emplace_front(std::make_unique<ConvWork>(m, h));
    while (g_conv_cache.size() > 3) g_conv_cache.pop_back();
    return *g_conv_cache.front();
}

// source spectrum of u (optionally cut off), zero-padded to the work size
std::vector<std::complex<double>> source_spectrum(const Field2D& u, Cutoff2D cutoff,
                                                  ConvWork& work) {
    const int n = u.grid.n;
    const int m = work.m;
    std::fill(work.real, work.real + static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < n; ++j) {
        const double y = u.grid.coord(j);
        for (int i = 0; i < n; ++i) {
            double v = u.v[u.grid.idx(i, j)];
            require(std::isfinite(v), Error::Kind::Domain,
                    "poisson_2d: non-finite source sample");
            if (cutoff == Cutoff2D::ChiStar) {
                const double x = u.grid.coord(i);
                v *= chi_star(std::sqrt(x * x + y * y));
            }
            work.real[static_cast<std::size_t>(j) * m + i] = v;
        }
    }
    fftw_execute(work.fwd);
    std::vector<std::complex<double>> shat(work.nspec());
    for (std::size_t i = 0; i < shat.size(); ++i)
        shat[i] = std::complex<double>(work.spec[i][0], work.spec[i][1]);
    return shat;
}

Field2D convolve_back(const Field2D& u, ConvWork& work,
                      const std::vector<std::complex<double>>& shat, KernelKind kind) {
    const auto& khat = work.kernel(kind);
    const int n = u.grid.n;
    const int m = work.m;
    // h^2 is the quadrature weight, 1/m^2 the FFTW round-trip normalization
    const double scale = work.h * work.h / (static_cast<double>(m) * m);
    for (std::size_t i = 0; i < shat.size(); ++i) {
        const std::complex<double> p = shat[i] * khat[i] * scale;
        work.spec[i][0] = p.real();
        work.spec[i][1] = p.imag();
    }
    fftw_execute(work.inv);
    Field2D out;
    out.grid = u.grid;
    out.v.resize(u.v.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out.v[out.grid.idx(i, j)] = work.real[static_cast<std::size_t>(j) * m + i];
    return out;
}

}  // namespace

RadialProfile radial_gradient_potential(const RadialProfile& T) {
    const RadialGrid& g = *T.grid;
    require(g.r_min() == 0.0, Error::Kind::Domain,
            "radial_gradient_potential: grid must start at r = 0");
    std::vector<double> mass = cumquad_prefix(T.v, g, 1.0);
    RadialProfile out;
    out.grid = T.grid;
    out.v.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.r[i];
        out.v[i] = (r == 0.0) ? 0.0 : -mass[i] / r;
    }
    return out;
}

RadialProfile harmonic_potential(int ell, const RadialProfile& psi) {
    require(ell >= 1, Error::Kind::Parameter, "harmonic_potential: ell must be >= 1");
    const RadialGrid& g = *psi.grid;
    require(g.r_min() == 0.0, Error::Kind::Domain,
            "harmonic_potential: grid must start at r = 0");
    const std::size_t n = g.size();

    std::vector<double> inner = cumquad_prefix(psi.v, g, static_cast<double>(ell + 1));

    // the outward branch integrand s^{1-l} psi must decay faster than 1/s
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i)
        integrand[i] = std::pow(g.r[i], 1.0 - ell) * psi.v[i];
    std::vector<double> outer = cumquad_suffix(integrand, g, 0.0);
    const std::size_t imid = g.bracket(g.r_max() / 10.0);
    const double last_decade = std::abs(outer[imid]);
    const double total = std::abs(outer[0]) + last_decade;
    const double va = integrand[imid], vb = integrand[n - 1];
    if (va * vb > 0.0 && std::abs(vb) > 1e-14 * total / g.r_max() &&
        last_decade > 0.02 * total) {
        const double p_est = std::log(std::abs(vb / va)) / std::log(10.0);
        require(p_est < -1.05, Error::Kind::Convergence,
                "harmonic_potential: outward integral does not converge");
    }
    const double tail = tail_correction(integrand, g, 0.0);
    require(std::isfinite(tail), Error::Kind::Convergence,
            "harmonic_potential: tail extrapolation failed");

    RadialProfile out;
    out.grid = psi.grid;
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g.r[i];
        if (r == 0.0) {
            out.v[i] = 0.0;
            continue;
        }
        const double rl = std::pow(r, static_cast<double>(ell));
        out.v[i] = (inner[i] / rl + rl * (outer[i] + tail)) / (2.0 * ell);
    }
    return out;
}

Vec2 TaylorField::G1(Vec2 y) { return {0.5 * y.x, -0.5 * y.y}; }

Vec2 TaylorField::G2(Vec2 y) {
    const double c = 1.0 / (4.0 * std::sqrt(2.0));
    return {c * (1.0 - (y.x * y.x - y.y * y.y)), c * 2.0 * y.x * y.y};
}

Vec2 TaylorField::G3(Vec2 y) {
    const double x = y.x, z = y.y;
    return {(x * x * x - 3.0 * x * z * z - 3.0 * x) / 16.0,
            (z * z * z - 3.0 * x * x * z + z) / 16.0};
}

Vec2 TaylorField::partial_sum(Vec2 y, int order) const {
    require(nu > 0.0, Error::Kind::Domain, "TaylorField: nu must be positive");
    require(a.x > 0.0 && a.y == 0.0, Error::Kind::Domain,
            "TaylorField: a must lie on the positive x-axis");
    require(sign == +1 || sign == -1, Error::Kind::Parameter,
            "TaylorField: sign must be +1 or -1");
    require(order >= 0 && order <= 3, Error::Kind::Parameter,
            "TaylorField: order must be in 0..3");
    const double s = static_cast<double>(sign);
    const double alpha = model::alpha_of(a.x, a.y);
    Vec2 out{-s * alpha * nu * a.x, -s * alpha * nu * a.y};
    if (order >= 1) {
        const Vec2 g = G1(y);
        const double c = alpha * nu * nu;
        out.x += c * g.x;
        out.y += c * g.y;
    }
    if (order >= 2) {
        const Vec2 g = G2(y);
        const double c = s * std::pow(alpha, 1.5) * nu * nu * nu;
        out.x += c * g.x;
        out.y += c * g.y;
    }
    if (order >= 3) {
        const Vec2 g = G3(y);
        const double c = alpha * alpha * nu * nu * nu * nu;
        out.x += c * g.x;
        out.y += c * g.y;
    }
    return out;
}

Vec2 taylor_expand_partner(Vec2 a, double nu, Vec2 y, int sign, int order) {
    TaylorField field{a, nu, sign};
    return field.partial_sum(y, order);
}

double chi_star(double rho) { return model::cutoff(rho / kZetaStar); }

Field2D poisson_2d(const Field2D& u, Cutoff2D cutoff) {
    require(u.grid.n > 0 && u.v.size() == u.grid.cells(), Error::Kind::Shape,
            "poisson_2d: field shape mismatch");
    std::lock_guard<std::mutex> lock(g_conv_mutex);
    ConvWork& work = acquire_work(2 * u.grid.n, u.grid.h());
    const auto shat = source_spectrum(u, cutoff, work);
    return convolve_back(u, work, shat, kLog);
}

void poisson_gradient_2d(const Field2D& u, Field2D* gx, Field2D* gy, Cutoff2D cutoff) {
    require(u.grid.n > 0 && u.v.size() == u.grid.cells(), Error::Kind::Shape,
            "poisson_gradient_2d: field shape mismatch");
    require(gx != nullptr && gy != nullptr, Error::Kind::Parameter,
            "poisson_gradient_2d: null output field");
    std::lock_guard<std::mutex> lock(g_conv_mutex);
    ConvWork& work = acquire_work(2 * u.grid.n, u.grid.h());
    const auto shat = source_spectrum(u, cutoff, work);
    *gx = convolve_back(u, work, shat, kGradX);
    *gy = convolve_back(u, work, shat, kGradY);
}

Vec2 ring_average_gradient(const Field2D& gx, const Field2D& gy, Vec2 c, double rho, int m) {
    require(rho > 0.0, Error::Kind::Parameter, "ring_average_gradient: rho must be positive");
    require(m >= 4, Error::Kind::Parameter, "ring_average_gradient: need at least 4 points");
    Vec2 acc{0.0, 0.0};
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * model::kPi * (k + 0.5) / m;
        const double x = c.x + rho * std::cos(t);
        const double y = c.y + rho * std::sin(t);
        acc.x += gx.eval(x, y);
        acc.y += gy.eval(x, y);
    }
    acc.x /= m;
    acc.y /= m;
    return acc;
}

DecayProbe pointwise_decay_probe(const Field2D& f, double gamma, double sigma) {
    require(gamma > 1.0 && gamma < 2.0, Error::Kind::Parameter,
            "pointwise_decay_probe: gamma must lie in (1, 2)");
    require(sigma > 0.0 && sigma < gamma - 1.0, Error::Kind::Parameter,
            "pointwise_decay_probe: sigma must lie in (0, gamma - 1)");
    DecayProbe probe;
    probe.gamma = gamma;
    probe.sigma = sigma;

    const int n = f.grid.n;
    for (int j = 0; j < n; ++j) {
        const double y = f.grid.coord(j);
        for (int i = 0; i < n; ++i) {
            const double x = f.grid.coord(i);
            const double jap = std::sqrt(1.0 + x * x + y * y);
            probe.norm = std::max(probe.norm,
                                  std::abs(f.v[f.grid.idx(i, j)]) * std::pow(jap, gamma));
        }
    }
    if (probe.norm == 0.0) return probe;

    Field2D gx, gy;
    poisson_gradient_2d(f, &gx, &gy);
    for (int j = 0; j < n; ++j) {
        const double y = f.grid.coord(j);
        for (int i = 0; i < n; ++i) {
            const double x = f.grid.coord(i);
            const double r = std::sqrt(x * x + y * y);
            const double jap = std::sqrt(1.0 + r * r);
            const double bound = std::pow(r, -sigma) + std::pow(jap, -gamma) * r;
            const std::size_t id = f.grid.idx(i, j);
            const double g = std::hypot(gx.v[id], gy.v[id]);
            probe.constant = std::max(probe.constant, g / (probe.norm * bound));
        }
    }
    require(std::isfinite(probe.constant), Error::Kind::Convergence,
            "pointwise_decay_probe: probe constant is not finite");
    return probe;
}

}  // namespace kslab
