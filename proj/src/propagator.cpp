#include "skinrelax/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "skinrelax/bessel.hpp"

namespace skin {

const char* to_string(Route r)
{
    switch (r) {
    case Route::Direct: return "direct";
    case Route::Spectral: return "spectral";
    case Route::NoBounce: return "no_bounce";
    case Route::BounceSum: return "bounce_sum";
    case Route::Simplified: return "simplified";
    }
    return "?";
}

PropagatorSample make_sample(int m, int j, double t, const LogComplex& g, Route route)
{
    PropagatorSample s;
    s.m = m;
    s.j = j;
    s.t = t;
    s.logG = g;
    s.route = route;
    s.logP = 2.0 * g.log_abs;
    s.P = std::exp(s.logP);
    s.log_form = !(g.log_abs < 700.0);
    if (!s.log_form)
        s.G = g.is_zero() ? cdouble{0.0} : g.value();
    return s;
}

std::vector<PropagatorSample> propagate_direct(const CMatrix& H_eff, int j, const std::vector<double>& t_grid)
{
    const Eigen::Index n = H_eff.rows();
    if (j < 1 || j > n)
        fail_config("InvalidSite", "propagate_direct(): source site out of range");
    CMatrix x0 = CMatrix::Zero(n, 1);
    x0(j - 1, 0) = 1.0;
    const auto traj = integrate_linear_ode(-kI * H_eff, x0, t_grid);
    std::vector<PropagatorSample> out;
    out.reserve(traj.size() * static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < traj.size(); ++k)
        for (Eigen::Index m = 0; m < n; ++m)
            out.push_back(make_sample(static_cast<int>(m + 1), j, t_grid[k], LogComplex::from(traj[k](m, 0)),
                                      Route::Direct));
    return out;
}

CMatrix propagate_row(const CMatrix& H_eff, int m, const std::vector<double>& t_grid)
{
    const Eigen::Index n = H_eff.rows();
    if (m < 1 || m > n)
        fail_config("InvalidSite", "propagate_row(): target site out of range");
    CMatrix x0 = CMatrix::Zero(n, 1);
    x0(m - 1, 0) = 1.0;
    // Row m of e^{At} obeys g' = A^T g.
    const CMatrix At = (-kI * H_eff).transpose();
    const auto traj = integrate_linear_ode(At, x0, t_grid);
    CMatrix out(static_cast<Eigen::Index>(traj.size()), n);
    for (std::size_t k = 0; k < traj.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = traj[k].col(0).transpose();
    return out;
}

PropagatorSample propagate_spectral(const Spectrum& spectrum, int m, int j, double t)
{
    if (spectrum.nonnormality_log > kCancellationGuard)
        fail_numeric("CancellationGuard", "propagate_spectral(): expansion coefficients reach e^" +
                                              std::to_string(spectrum.nonnormality_log) +
                                              "; the sum cannot be resolved in double precision");
    if (spectrum.biorth_residual > 1e-8)
        fail_numeric("IllConditioned", "propagate_spectral(): biorthonormality residual above 1e-8");
    const Eigen::Index n = spectrum.size();
    if (m < 1 || m > n || j < 1 || j > n)
        fail_config("InvalidSite", "propagate_spectral(): site out of range");
    std::vector<LogComplex> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) {
        const LogComplex r = spectrum.right(m, a);
        const LogComplex l = spectrum.left(j, a);
        const cdouble E = spectrum.eigenvalues[a];
        terms.push_back({r.log_abs + l.log_abs + E.imag() * t, r.phase - l.phase - E.real() * t});
    }
    return make_sample(m, j, t, log_sum(terms), Route::Spectral);
}

cdouble g_infinity(int d, double J, double t)
{
    const double x = J * t;
    const int ad = std::abs(d);
    const int nk = std::max(64, 4 * static_cast<int>(std::ceil(x)) + 4 * ad);
    cdouble acc = 0.0;
    for (int q = 0; q < nk; ++q) {
        const double k = -M_PI + 2.0 * M_PI * q / nk;
        acc += std::polar(1.0, k * d - x * std::cos(k));
    }
    return acc / static_cast<double>(nk);
}

cdouble g_infinity_bessel(int d, double J, double t)
{
    const int ad = std::abs(d);
    const double v = std::cyl_bessel_j(static_cast<double>(ad), J * t);
    return std::polar(1.0, -0.5 * M_PI * ad) * v;
}

LogComplex log_g_infinity(int d, double J, double t)
{
    const int ad = std::abs(d);
    const LogBessel b = log_bessel_j(ad, J * t);
    return {b.log_abs, -0.5 * M_PI * ad + (b.sign < 0 ? M_PI : 0.0)};
}

namespace {

void require_hn(const ModelSpec& spec, const char* fn)
{
    if (spec.kind != ModelKind::HN)
        fail_config("UnsupportedModel", std::string(fn) + ": HN model required");
    if (spec.edge_loss != EdgeLoss::Uniform)
        fail_config("UnsupportedModel", std::string(fn) + ": closed forms need uniform edge loss");
    validate(spec, true);
}

LogComplex image_pair(int m, int j, int b, int L, double J, double t)
{
    const int shift = 2 * (L + 1) * b;
    LogComplex minus = log_g_infinity(m + j + shift, J, t);
    minus.phase += M_PI;
    return log_g_infinity(m - j + shift, J, t) + minus;
}

} // namespace

BounceResult g_obc_bounce(int m, int j, double t, const ModelSpec& spec, int B)
{
    require_hn(spec, "g_obc_bounce()");
    if (spec.kappa >= spec.w)
        fail_numeric("PerfectNonreciprocity", "g_obc_bounce(): needs kappa < w");
    const double J = hn_J(spec.w, spec.kappa);
    const double g = hn_inverse_xi(spec.w, spec.kappa);
    const double delta = dissipative_gap(spec);

    LogComplex sum = image_pair(m, j, 0, spec.L, J, t);
    int b = 0;
    constexpr int kCap = 64;
    for (b = 1;; ++b) {
        const LogComplex added = image_pair(m, j, b, spec.L, J, t) + image_pair(m, j, -b, spec.L, J, t);
        sum = sum + added;
        const bool small = added.is_zero() || (!sum.is_zero() && added.log_abs < sum.log_abs + std::log(1e-16));
        if (b >= B && small)
            break;
        if (b >= kCap)
            fail_numeric("BounceNonConvergence", "g_obc_bounce(): image sum did not converge by B = 64");
    }
    BounceResult res;
    res.B_used = b;
    res.logG = sum.is_zero() ? sum : sum.scaled((m - j) * g - delta * t);
    res.G = (res.logG.is_zero() || res.logG.log_abs > 700.0) ? cdouble{0.0} : res.logG.value();
    return res;
}

double bounce_correction_log10(int m, int j, double t, const ModelSpec& spec)
{
    require_hn(spec, "bounce_correction_log10()");
    const double J = hn_J(spec.w, spec.kappa);
    const LogComplex t0 = image_pair(m, j, 0, spec.L, J, t);
    const LogComplex t1 = image_pair(m, j, 1, spec.L, J, t) + image_pair(m, j, -1, spec.L, J, t);
    return (t1.log_abs - t0.log_abs) / std::log(10.0);
}

namespace {

double log_p_distance(const ModelSpec& spec, int d, double t)
{
    if (spec.kappa >= spec.w)
        return log_p_simplified(spec, d, t);
    const double delta = dissipative_gap(spec);
    if (t == 0.0)
        return d == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    const double J = hn_J(spec.w, spec.kappa);
    const double x = J * t;
    double reduced = 0.0;
    int sign = 1;
    if (d > 0 && log_bessel_reduced(d, x, reduced, sign)) {
        // e^{1/xi} J = w + kappa applied before any exponentiation.
        return 2.0 * d * std::log(0.5 * (spec.w + spec.kappa) * t) + 2.0 * reduced - 2.0 * delta * t;
    }
    const LogBessel bj = log_bessel_j(d, x);
    return 2.0 * d * hn_inverse_xi(spec.w, spec.kappa) + 2.0 * bj.log_abs - 2.0 * delta * t;
}

struct Peak {
    double t_star;
    double t_grid;
    double step;
    double log_height;
    double t_hi;
};

Peak find_peak(const ModelSpec& spec, int d)
{
    const double delta = dissipative_gap(spec);
    if (d < 1 || !(delta > 0.0))
        fail_numeric("FlatPeak", "peak_stats(): need d >= 1 and a positive gap");
    auto f = [&](double t) { return log_p_distance(spec, d, t); };
    const double guess = d / delta;
    const double t_hi = 3.0 * guess + 10.0 / delta;
    const double step = guess / 1000.0;
    const auto n = static_cast<long>(std::ceil(t_hi / step));
    long best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (long k = 0; k <= n; ++k) {
        const double v = f(k * step);
        if (v > best_v) {
            best_v = v;
            best = k;
        }
    }
    if (best == 0 || best == n)
        fail_numeric("FlatPeak", "peak_stats(): maximum sits on the search boundary");
    // Golden-section refinement inside the bracketing grid cells.
    double a = (best - 1) * step, b = (best + 1) * step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), e = a + gr * (b - a);
    double fc = f(c), fe = f(e);
    for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
        if (fc > fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + gr * (b - a);
            fe = f(e);
        }
    }
    const double ts = 0.5 * (a + b);
    return {ts, best * step, step, std::max(f(ts), best_v), t_hi};
}

double solve_level(const std::function<double(double)>& f, double lo, double hi, double level)
{
    // f(lo) and f(hi) straddle level.
    const bool rising = f(lo) < level;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < level) == rising)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double log_p_no_bounce(const ModelSpec& spec, int j, double t)
{
    require_hn(spec, "p_no_bounce()");
    return log_p_distance(spec, spec.L - j, t);
}

double p_no_bounce(const ModelSpec& spec, int j, double t)
{
    return std::exp(log_p_no_bounce(spec, j, t));
}

double log_p_simplified(const ModelSpec& spec, int d, double t)
{
    const double delta = dissipative_gap(spec);
    if (d == 0)
        return -2.0 * delta * t;
    if (t == 0.0)
        return -std::numeric_limits<double>::infinity();
    return 2.0 * d * std::log(spec.w + spec.kappa) - 2.0 * delta * t + 2.0 * d * std::log(t) - d * std::log(4.0) -
           2.0 * std::lgamma(d + 1.0);
}

double p_simplified(const ModelSpec& spec, int d, double t)
{
    return std::exp(log_p_simplified(spec, d, t));
}

PeakStats peak_stats(const ModelSpec& spec, int j)
{
    require_hn(spec, "peak_stats()");
    const int d = spec.L - j;
    const double delta = dissipative_gap(spec);
    const Peak pk = find_peak(spec, d);

    PeakStats ps;
    ps.d = d;
    ps.t_max = pk.t_star;
    ps.t_max_grid = pk.t_grid;
    ps.grid_step = pk.step;
    ps.t_max_formula = d / delta;
    ps.log_height = pk.log_height;
    ps.height = std::exp(pk.log_height);
    ps.sigma = std::sqrt(static_cast<double>(d)) / delta;

    const std::function<double(double)> f = [&](double t) { return log_p_distance(spec, d, t); };
    const double level = pk.log_height - 0.5;
    double hi = pk.t_hi;
    while (f(hi) > level)
        hi *= 2.0;
    const double left = solve_level(f, 0.0, pk.t_star, level);
    const double right = solve_level(f, pk.t_star, hi, level);
    ps.fitted_width = 0.5 * (right - left);
    ps.xi_prop_implied = xi_prop_implied(spec, d);
    return ps;
}

double xi_prop_implied(const ModelSpec& spec, int d)
{
    require_hn(spec, "xi_prop_implied()");
    const double l1 = find_peak(spec, d).log_height + std::log(static_cast<double>(d));
    const double l2 = find_peak(spec, d + 1).log_height + std::log(static_cast<double>(d + 1));
    return 1.0 / std::abs(l2 - l1);
}

LocalityFit locality_order_check(const CMatrix& H_eff, int m, int j, const std::vector<double>& t_list)
{
    const Eigen::Index n = H_eff.rows();
    if (m < 1 || m > n || j < 1 || j > n || m == j)
        fail_config("InvalidSite", "locality_order_check(): need distinct in-range sites");
    if (t_list.size() < 2)
        fail_config("InvalidGrid", "locality_order_check(): need at least two times");
    std::vector<double> xs, ys;
    double g_smallest = 0.0;
    double t_smallest = std::numeric_limits<double>::infinity();
    for (double t : t_list) {
        const CMatrix G = expm_taylor(-kI * H_eff * t);
        const cdouble g = G(m - 1, j - 1);
        if (std::abs(g) < 1e-300)
            continue;
        xs.push_back(std::log(t));
        ys.push_back(std::log(std::abs(g)));
        if (t < t_smallest) {
            t_smallest = t;
            g_smallest = 0.0;
        }
        if (t == t_smallest)
            g_smallest = std::abs(g / t + kI * H_eff(m - 1, j - 1));
    }
    if (xs.size() < 2)
        fail_numeric("Underflow", "locality_order_check(): |G| below 1e-300 at the sampled times");
    const double nx = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k] / nx;
        my += ys[k] / nx;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    LocalityFit fit;
    fit.slope = sxy / sxx;
    const double hm = std::abs(H_eff(m - 1, j - 1));
    fit.coefficient_error = hm > 0.0 ? g_smallest / hm : g_smallest;
    return fit;
}

} // namespace skin
