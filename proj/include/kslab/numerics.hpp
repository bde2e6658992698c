#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kslab {

// Error taxonomy shared by all modules.  Parameter/Shape/Domain map to CLI
// exit code 2 (configuration), Convergence/Rank/Tolerance to exit code 3
// (numerical failure).
struct Error : std::runtime_error {
    enum class Kind { Parameter, Shape, Domain, Convergence, Rank, Tolerance };
    Kind kind;
    Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    int exit_code() const {
        switch (kind) {
            case Kind::Parameter:
            case Kind::Shape:
            case Kind::Domain: return 2;
            default: return 3;
        }
    }
};

inline void require(bool ok, Error::Kind kind, const std::string& msg) {
    if (!ok) throw Error(kind, msg);
}

enum class GridLaw { Uniform, Log };

struct RadialGrid {
    std::vector<double> r;
    GridLaw law = GridLaw::Uniform;
    std::size_t size() const { return r.size(); }
    double r_min() const { return r.front(); }
    double r_max() const { return r.back(); }
    // index of the last node <= x (clamped to [0, size-2])
    std::size_t bracket(double x) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

RadialGrid make_radial_grid(double r_min, double r_max, std::size_t n, GridLaw law);
GridPtr share(RadialGrid g);

// Workhorse grid: log-spaced on [1e-3, 1e4] with 4096 nodes plus a uniform
// patch on [0, 1e-3] so profiles regular at the origin keep their r -> 0 data.
GridPtr default_profile_grid();
// Same construction with custom extent/size (used by coarser smoke paths).
GridPtr patched_log_grid(double r_match, double r_max, std::size_t n_log, std::size_t n_patch);

// Sampled radial function.  `harmonic` tags the cos(k theta) channel the
// profile lives on when it is part of a bundle.
struct RadialProfile {
    GridPtr grid;
    std::vector<double> v;
    int harmonic = 0;

    RadialProfile() = default;
    RadialProfile(GridPtr g, std::vector<double> vals, int k = 0)
        : grid(std::move(g)), v(std::move(vals)), harmonic(k) {}
    RadialProfile(GridPtr g, double fill = 0.0, int k = 0)
        : grid(std::move(g)), v(grid ? grid->size() : 0, fill), harmonic(k) {}

    std::size_t size() const { return v.size(); }
    double operator()(double r) const { return eval(r); }
    // Cubic (4-point Lagrange) interpolation in the grid's natural coordinate;
    // power-law extrapolation beyond r_max from the last decade's slope.
    double eval(double r) const;
    double eval_linear(double r) const;
};

RadialProfile sample(const GridPtr& g, double (*f)(double), int harmonic = 0);
template <class F>
RadialProfile sample_fn(const GridPtr& g, F&& f, int harmonic = 0) {
    RadialProfile p(g);
    p.harmonic = harmonic;
    for (std::size_t i = 0; i < g->size(); ++i) p.v[i] = f(g->r[i]);
    return p;
}

// d/dr by centered second-order stencils on the (possibly nonuniform) grid;
// one-sided second-order at the ends.
RadialProfile differentiate(const RadialProfile& f);
std::vector<double> differentiate(const std::vector<double>& v, const std::vector<double>& r);

// Composite trapezoid of  integral f(r) r^p dr  over the grid.
double quad_radial(const std::vector<double>& values, const RadialGrid& g, double weight_power);
double quad_radial(const RadialProfile& f, double weight_power);

// Prefix/suffix cumulative trapezoids of f(r) r^p dr.  suffix[i] approximates
// the integral from r_i to r_max; add tail_correction to extend to infinity.
std::vector<double> cumquad_prefix(const std::vector<double>& values, const RadialGrid& g, double weight_power);
std::vector<double> cumquad_suffix(const std::vector<double>& values, const RadialGrid& g, double weight_power);

// One-term tail correction for integral_{r_max}^inf of an integrand that
// behaves like its last sample times (r/r_max)^p with p < -1: returns
// -I_last * r_max / (p + 1).  The decay p is estimated from the last decade
// unless supplied.
double tail_correction(const std::vector<double>& integrand, const RadialGrid& g, double weight_power);
double tail_correction_with_power(double last_value, double r_max, double p);

struct FitWindow {
    double r_a = 0.0;
    double r_b = 0.0;
};

enum class FitModel { Constant, Power, PowerLog };

struct AsymptoticFit {
    double c = 0.0;
    double p = 0.0;
    double q = 0.0;
    double residual = 0.0;  // rms of log-space residuals (abs residuals for Constant)
    FitWindow window;
};

// Least-squares fit of log|f| = log|c| + p log r (+ q log log r) over the
// window.  All samples in the window must share one sign for the log models.
AsymptoticFit fit_asymptote(const RadialProfile& f, FitWindow w, FitModel model);
// Coefficient of a pinned-law  c r^p (ln r)^q  by weighted mean over the window.
AsymptoticFit fit_coefficient(const RadialProfile& f, FitWindow w, double p, double q = 0.0);
// Default fit window: the last decade below r_max/10.
FitWindow default_fit_window(const RadialGrid& g);

// Cell-centered Cartesian grid on [-L, L]^2, n per side (power of two).
struct Grid2D {
    double L = 0.0;
    int n = 0;
    double h() const { return 2.0 * L / n; }
    double coord(int i) const { return -L + (i + 0.5) * h(); }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
    std::size_t cells() const { return static_cast<std::size_t>(n) * n; }
};

Grid2D make_grid2d(double L, int n);

struct Field2D {
    Grid2D grid;
    std::vector<double> v;

    Field2D() = default;
    explicit Field2D(Grid2D g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}
    double& at(int i, int j) { return v[grid.idx(i, j)]; }
    double at(int i, int j) const { return v[grid.idx(i, j)]; }
    // bilinear interpolation; clamps to the boundary cell band
    double eval(double x, double y) const;
};

// 3-point Gauss-Legendre weights on [-1,1] used by small local quadratures.
inline constexpr double kGauss3Nodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr double kGauss3Weights[3] = {0.5555555555555556, 0.8888888888888888, 0.5555555555555556};

}  // namespace kslab
