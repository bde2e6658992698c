#include "kslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kslab {

std::size_t RadialGrid::bracket(double x) const {
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t i = (it == r.begin()) ? 1 : static_cast<std::size_t>(it - r.begin());
    if (i >= r.size()) i = r.size() - 1;
    return i - 1;
}

RadialGrid make_radial_grid(double r_min, double r_max, std::size_t n, GridLaw law) {
    require(r_min >= 0.0 && r_min < r_max, Error::Kind::Parameter,
            "make_radial_grid: need 0 <= r_min < r_max");
    require(n >= 2, Error::Kind::Parameter, "make_radial_grid: need n >= 2");
    if (law == GridLaw::Log)
        require(r_min > 0.0, Error::Kind::Parameter, "make_radial_grid: log law needs r_min > 0");
    RadialGrid g;
    g.law = law;
    g.r.resize(n);
    if (law == GridLaw::Uniform) {
        double h = (r_max - r_min) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) g.r[i] = r_min + h * static_cast<double>(i);
    } else {
        double la = std::log(r_min), lb = std::log(r_max);
        double h = (lb - la) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) g.r[i] = std::exp(la + h * static_cast<double>(i));
    }
    g.r.front() = r_min;
    g.r.back() = r_max;
    return g;
}

GridPtr share(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

GridPtr patched_log_grid(double r_match, double r_max, std::size_t n_log, std::size_t n_patch) {
    RadialGrid logpart = make_radial_grid(r_match, r_max, n_log, GridLaw::Log);
    RadialGrid g;
    g.law = GridLaw::Log;
    g.r.reserve(n_patch + n_log);
    double h = r_match / static_cast<double>(n_patch);
    for (std::size_t i = 0; i < n_patch; ++i) g.r.push_back(h * static_cast<double>(i));
    g.r.insert(g.r.end(), logpart.r.begin(), logpart.r.end());
    return share(std::move(g));
}

GridPtr default_profile_grid() {
    static GridPtr cached = patched_log_grid(1e-3, 1e4, 4096, 32);
    return cached;
}

namespace {

double lagrange4(const double* x, const double* y, double t) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        double num = 1.0, den = 1.0;
        for (int m = 0; m < 4; ++m) {
            if (m == k) continue;
            num *= t - x[m];
            den *= x[k] - x[m];
        }
        s += y[k] * num / den;
    }
    return s;
}

}  // namespace

double RadialProfile::eval_linear(double r) const {
    const auto& xs = grid->r;
    if (r <= xs.front()) return v.front();
    if (r >= xs.back()) return v.back();
    std::size_t i = grid->bracket(r);
    double t = (r - xs[i]) / (xs[i + 1] - xs[i]);
    return v[i] * (1.0 - t) + v[i + 1] * t;
}

double RadialProfile::eval(double r) const {
    const auto& xs = grid->r;
    const std::size_t n = xs.size();
    if (n < 4) return eval_linear(r);
    if (r <= xs.front()) return v.front();
    if (r >= xs.back()) {
        // extrapolate with the power law read from the last decade
        double r1 = xs[n - 1], f1 = v[n - 1];
        if (f1 == 0.0) return 0.0;
        std::size_t j = grid->bracket(r1 / 10.0);
        double r0 = xs[j], f0 = v[j];
        if (f0 == 0.0 || f0 * f1 <= 0.0) return f1;
        double p = std::log(std::fabs(f1 / f0)) / std::log(r1 / r0);
        return f1 * std::pow(r / r1, p);
    }
    std::size_t i = grid->bracket(r);
    std::size_t lo = (i == 0) ? 0 : i - 1;
    if (lo + 3 >= n) lo = n - 4;
    // interpolate in log r whenever the four abscissae are strictly positive
    double xw[4], yw[4];
    bool uselog = xs[lo] > 0.0;
    for (int k = 0; k < 4; ++k) {
        xw[k] = uselog ? std::log(xs[lo + k]) : xs[lo + k];
        yw[k] = v[lo + k];
    }
    return lagrange4(xw, yw, uselog ? std::log(r) : r);
}

RadialProfile sample(const GridPtr& g, double (*f)(double), int harmonic) {
    return sample_fn(g, f, harmonic);
}

std::vector<double> differentiate(const std::vector<double>& v, const std::vector<double>& r) {
    require(v.size() == r.size(), Error::Kind::Shape, "differentiate: length mismatch");
    const std::size_t n = v.size();
    require(n >= 3, Error::Kind::Shape, "differentiate: need at least 3 nodes");
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double hl = r[i] - r[i - 1], hr = r[i + 1] - r[i];
        d[i] = (-hr / (hl * (hl + hr))) * v[i - 1] + ((hr - hl) / (hl * hr)) * v[i] +
               (hl / (hr * (hl + hr))) * v[i + 1];
    }
    {
        double h0 = r[1] - r[0], h1 = r[2] - r[1];
        d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * v[0] + (h0 + h1) / (h0 * h1) * v[1] -
               h0 / (h1 * (h0 + h1)) * v[2];
        double hm = r[n - 1] - r[n - 2], hm1 = r[n - 2] - r[n - 3];
        d[n - 1] = (2.0 * hm + hm1) / (hm * (hm + hm1)) * v[n - 1] -
                   (hm + hm1) / (hm * hm1) * v[n - 2] + hm / (hm1 * (hm + hm1)) * v[n - 3];
    }
    return d;
}

RadialProfile differentiate(const RadialProfile& f) {
    RadialProfile d(f.grid, differentiate(f.v, f.grid->r), f.harmonic);
    return d;
}

double quad_radial(const std::vector<double>& values, const RadialGrid& g, double weight_power) {
    require(values.size() == g.size(), Error::Kind::Shape, "quad_radial: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        double wa = (g.r[i] == 0.0 && weight_power < 0.0) ? 0.0 : std::pow(g.r[i], weight_power);
        double wb = std::pow(g.r[i + 1], weight_power);
        s += 0.5 * (values[i] * wa + values[i + 1] * wb) * (g.r[i + 1] - g.r[i]);
    }
    return s;
}

double quad_radial(const RadialProfile& f, double weight_power) {
    return quad_radial(f.v, *f.grid, weight_power);
}

std::vector<double> cumquad_prefix(const std::vector<double>& values, const RadialGrid& g,
                                   double weight_power) {
    require(values.size() == g.size(), Error::Kind::Shape, "cumquad_prefix: length mismatch");
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        double wa = (g.r[i] == 0.0 && weight_power < 0.0) ? 0.0 : std::pow(g.r[i], weight_power);
        double wb = std::pow(g.r[i + 1], weight_power);
        out[i + 1] = out[i] + 0.5 * (values[i] * wa + values[i + 1] * wb) * (g.r[i + 1] - g.r[i]);
    }
    return out;
}

std::vector<double> cumquad_suffix(const std::vector<double>& values, const RadialGrid& g,
                                   double weight_power) {
    require(values.size() == g.size(), Error::Kind::Shape, "cumquad_suffix: length mismatch");
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = g.size() - 1; i > 0; --i) {
        double wa = (g.r[i - 1] == 0.0 && weight_power < 0.0) ? 0.0 : std::pow(g.r[i - 1], weight_power);
        double wb = std::pow(g.r[i], weight_power);
        out[i - 1] = out[i] + 0.5 * (values[i - 1] * wa + values[i] * wb) * (g.r[i] - g.r[i - 1]);
    }
    return out;
}

double tail_correction_with_power(double last_value, double r_max, double p) {
    if (p >= -1.0) return 0.0;  // caller decides whether that is an error
    return -last_value * r_max / (p + 1.0);
}

double tail_correction(const std::vector<double>& integrand, const RadialGrid& g,
                       double weight_power) {
    const std::size_t n = g.size();
    double r1 = g.r[n - 1];
    std::size_t j = g.bracket(r1 / 10.0);
    double f1 = integrand[n - 1] * std::pow(r1, weight_power);
    double f0 = integrand[j] * std::pow(g.r[j], weight_power);
    if (f1 == 0.0 || f0 * f1 <= 0.0) return 0.0;
    double p = std::log(std::fabs(f1 / f0)) / std::log(r1 / g.r[j]);
    return tail_correction_with_power(f1, r1, p);
}

FitWindow default_fit_window(const RadialGrid& g) {
    double rb = g.r_max() / 10.0;
    return FitWindow{rb / 10.0, rb};
}

namespace {

// solve the 3x3 (or smaller) normal equations of a linear least-squares fit
void solve_normal(int m, double A[3][3], double b[3], double x[3]) {
    int piv[3] = {0, 1, 2};
    for (int c = 0; c < m; ++c) {
        int best = c;
        for (int rr = c + 1; rr < m; ++rr)
            if (std::fabs(A[rr][c]) > std::fabs(A[best][c])) best = rr;
        std::swap(A[c], A[best]);
        std::swap(b[c], b[best]);
        std::swap(piv[c], piv[best]);
        require(std::fabs(A[c][c]) > 1e-14, Error::Kind::Rank, "fit_asymptote: singular normal equations");
        for (int rr = c + 1; rr < m; ++rr) {
            double f = A[rr][c] / A[c][c];
            for (int cc = c; cc < m; ++cc) A[rr][cc] -= f * A[c][cc];
            b[rr] -= f * b[c];
        }
    }
    for (int c = m - 1; c >= 0; --c) {
        double s = b[c];
        for (int cc = c + 1; cc < m; ++cc) s -= A[c][cc] * x[cc];
        x[c] = s / A[c][c];
    }
    (void)piv;
}

}  // namespace

AsymptoticFit fit_asymptote(const RadialProfile& f, FitWindow w, FitModel model) {
    const auto& xs = f.grid->r;
    require(w.r_a < w.r_b, Error::Kind::Parameter, "fit_asymptote: empty window");
    require(w.r_a >= xs.front() && w.r_b <= xs.back(), Error::Kind::Domain,
            "fit_asymptote: window outside grid support");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] >= w.r_a && xs[i] <= w.r_b) idx.push_back(i);
    require(idx.size() >= 8, Error::Kind::Domain, "fit_asymptote: fewer than 8 nodes in window");

    AsymptoticFit out;
    out.window = w;
    if (model == FitModel::Constant) {
        double s = 0.0;
        for (auto i : idx) s += f.v[i];
        out.c = s / static_cast<double>(idx.size());
        double r2 = 0.0;
        for (auto i : idx) r2 += (f.v[i] - out.c) * (f.v[i] - out.c);
        out.residual = std::sqrt(r2 / static_cast<double>(idx.size()));
        return out;
    }

    double sign = (f.v[idx[0]] >= 0.0) ? 1.0 : -1.0;
    for (auto i : idx)
        require(f.v[i] * sign > 0.0, Error::Kind::Domain,
                "fit_asymptote: sign change inside log-fit window");
    if (model == FitModel::PowerLog)
        require(w.r_a > std::exp(1.0), Error::Kind::Domain,
                "fit_asymptote: power-log window must lie above r = e");

    const int m = (model == FitModel::Power) ? 2 : 3;
    double A[3][3] = {{0}}, b[3] = {0}, x[3] = {0};
    for (auto i : idx) {
        double basis[3] = {1.0, std::log(xs[i]),
                           (m == 3) ? std::log(std::log(xs[i])) : 0.0};
        double y = std::log(std::fabs(f.v[i]));
        for (int rr = 0; rr < m; ++rr) {
            for (int cc = 0; cc < m; ++cc) A[rr][cc] += basis[rr] * basis[cc];
            b[rr] += basis[rr] * y;
        }
    }
    solve_normal(m, A, b, x);
    out.c = sign * std::exp(x[0]);
    out.p = x[1];
    out.q = (m == 3) ? x[2] : 0.0;
    double r2 = 0.0;
    for (auto i : idx) {
        double pred = x[0] + x[1] * std::log(xs[i]) + ((m == 3) ? x[2] * std::log(std::log(xs[i])) : 0.0);
        double d = std::log(std::fabs(f.v[i])) - pred;
        r2 += d * d;
    }
    out.residual = std::sqrt(r2 / static_cast<double>(idx.size()));
    return out;
}

AsymptoticFit fit_coefficient(const RadialProfile& f, FitWindow w, double p, double q) {
    const auto& xs = f.grid->r;
    require(w.r_a < w.r_b, Error::Kind::Parameter, "fit_coefficient: empty window");
    require(w.r_a >= xs.front() && w.r_b <= xs.back(), Error::Kind::Domain,
            "fit_coefficient: window outside grid support");
    double s = 0.0, n = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < w.r_a || xs[i] > w.r_b) continue;
        double basis = std::pow(xs[i], p);
        if (q != 0.0) basis *= std::pow(std::log(xs[i]), q);
        s += f.v[i] / basis;
        n += 1.0;
    }
    require(n >= 8.0, Error::Kind::Domain, "fit_coefficient: fewer than 8 nodes in window");
    AsymptoticFit out;
    out.c = s / n;
    out.p = p;
    out.q = q;
    out.window = w;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < w.r_a || xs[i] > w.r_b) continue;
        double basis = std::pow(xs[i], p);
        if (q != 0.0) basis *= std::pow(std::log(xs[i]), q);
        double d = f.v[i] / basis - out.c;
        r2 += d * d;
    }
    out.residual = std::sqrt(r2 / n);
    return out;
}

Grid2D make_grid2d(double L, int n) {
    require(L > 0.0, Error::Kind::Parameter, "make_grid2d: need L > 0");
    require(n >= 2 && (n & (n - 1)) == 0, Error::Kind::Parameter,
            "make_grid2d: n must be a power of two");
    return Grid2D{L, n};
}

double Field2D::eval(double x, double y) const {
    const int n = grid.n;
    double h = grid.h();
    double fx = (x + grid.L) / h - 0.5;
    double fy = (y + grid.L) / h - 0.5;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, n - 2);
    j = std::clamp(j, 0, n - 2);
    double tx = std::clamp(fx - i, 0.0, 1.0);
    double ty = std::clamp(fy - j, 0.0, 1.0);
    return at(i, j) * (1 - tx) * (1 - ty) + at(i + 1, j) * tx * (1 - ty) +
           at(i, j + 1) * (1 - tx) * ty + at(i + 1, j + 1) * tx * ty;
}

}  // namespace kslab
