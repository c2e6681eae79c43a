#include "skinrelax/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>

#include "skinrelax/propagator.hpp"

namespace skin {

namespace {

template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k)
            pool.emplace_back(body);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// Eigenvalues of a tridiagonal matrix with constant diagonal whose hopping products are real and positive.
std::vector<cdouble> tridiagonal_similarity_eigenvalues(const CMatrix& M)
{
    const Eigen::Index n = M.rows();
    if (n == 1)
        return {M(0, 0)};
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const cdouble p = M(j + 1, j) * M(j, j + 1);
        if (p.real() <= 0.0 || std::abs(p.imag()) > 1e-14 * std::abs(p))
            fail_numeric("NotTridiagonal", "localization_extract(): hopping product must be real and positive");
        sub[j] = std::sqrt(p.real());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<cdouble> out;
    for (Eigen::Index k = 0; k < n; ++k)
        out.push_back(M(0, 0) + es.eigenvalues()[k]);
    return out;
}

bool is_tridiagonal(const CMatrix& M)
{
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c)
            if (std::abs(r - c) > 1 && M(r, c) != 0.0)
                return false;
    return true;
}

std::vector<cdouble> model_eigenvalues(const ModelSpec& spec)
{
    const CMatrix H = effective_hamiltonian(spec);
    bool similar = is_tridiagonal(H) && (H.diagonal().array() == H(0, 0)).all();
    for (Eigen::Index j = 0; similar && j + 1 < H.rows(); ++j)
        similar = (H(j + 1, j) * H(j, j + 1)).real() > 0.0;
    if (similar)
        return tridiagonal_similarity_eigenvalues(H);
    const Spectrum s = eig_general(H);
    return {s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size()};
}

} // namespace

FitReport linear_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin, std::size_t end,
                     std::size_t min_points)
{
    if (x.size() != y.size())
        fail_config("Shape", "linear_fit(): x and y differ in length");
    end = std::min(end, x.size());
    if (begin >= end || end - begin < std::max<std::size_t>(min_points, 2))
        fail_numeric("InsufficientPoints", "linear_fit(): not enough points in the window");
    const double n = static_cast<double>(end - begin);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        fail_numeric("InsufficientPoints", "linear_fit(): all x values coincide");
    FitReport r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.window_begin = begin;
    r.window_end = end;
    double ss_res = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double res = y[i] - (r.intercept + r.slope * x[i]);
        r.residuals.push_back(res);
        ss_res += res * res;
    }
    r.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return r;
}

const char* to_string(LengthConvention c)
{
    return c == LengthConvention::UnitCells ? "unit_cells" : "sites";
}

double evec_prediction(const ModelSpec& spec, LengthConvention convention)
{
    validate(spec, true);
    const double delta = dissipative_gap(spec);
    double inv_xi = 0.0;
    double length = spec.L;
    switch (spec.kind) {
    case ModelKind::HN:
        if (spec.kappa >= spec.w)
            fail_numeric("MissingXi", "evec_prediction(): kappa >= w has no finite localization length");
        inv_xi = hn_inverse_xi(spec.w, spec.kappa);
        break;
    case ModelKind::SSH:
        if (spec.kappa >= spec.w || spec.gamma_ssh >= spec.u)
            fail_numeric("MissingXi", "evec_prediction(): SSH hopping ratio out of range");
        inv_xi = std::max(1.0 / ssh_xi1(spec), 1.0 / ssh_xi2(spec));
        if (convention == LengthConvention::Sites)
            length = 2.0 * spec.L;
        break;
    case ModelKind::NNN:
        for (const cdouble& E : model_eigenvalues(spec))
            inv_xi = std::max(inv_xi, 1.0 / localization_extract(spec, E).xi_extracted);
        if (!(inv_xi > 0.0) || !std::isfinite(inv_xi))
            fail_numeric("MissingXi", "evec_prediction(): no localized eigenvector found");
        break;
    }
    return length * inv_xi / delta;
}

void set_parameter(ModelSpec& spec, const std::string& name, double value)
{
    if (name == "L") {
        if (value != std::floor(value) || value < 1.0)
            fail_config("InvalidParameter", "sweep value for L must be a positive integer");
        spec.L = static_cast<int>(value);
    } else if (name == "w")
        spec.w = value;
    else if (name == "kappa")
        spec.kappa = value;
    else if (name == "lambda" || name == "lambda_loss")
        spec.lambda_loss = value;
    else if (name == "Gamma")
        spec.Gamma = value;
    else if (name == "u")
        spec.u = value;
    else if (name == "gamma" || name == "gamma_ssh")
        spec.gamma_ssh = value;
    else if (name == "T" || name == "T_nnn")
        spec.T_nnn = value;
    else if (name == "phi")
        spec.phi = value;
    else
        fail_config("UnknownAxis", "unknown model parameter '" + name + "'");
}

double get_parameter(const ModelSpec& spec, const std::string& name)
{
    if (name == "L")
        return spec.L;
    if (name == "w")
        return spec.w;
    if (name == "kappa")
        return spec.kappa;
    if (name == "lambda" || name == "lambda_loss")
        return spec.lambda_loss;
    if (name == "Gamma")
        return spec.Gamma;
    if (name == "u")
        return spec.u;
    if (name == "gamma" || name == "gamma_ssh")
        return spec.gamma_ssh;
    if (name == "T" || name == "T_nnn")
        return spec.T_nnn;
    if (name == "phi")
        return spec.phi;
    fail_config("UnknownAxis", "unknown model parameter '" + name + "'");
}

SweepResult run_sweep(const ModelSpec& base, const std::string& axis, const std::vector<double>& values,
                      InitialKind init, const std::vector<double>& etas, const RelaxOptions& options, int workers)
{
    SweepResult sweep;
    sweep.axis = axis;
    sweep.spec_base = base;
    sweep.init = init;
    sweep.etas = etas;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<ModelSpec> specs;
    for (double v : sorted) {
        ModelSpec s = base;
        set_parameter(s, axis, v);
        validate(s, true);
        specs.push_back(s);
    }
    sweep.points.resize(sorted.size());
    parallel_for(sorted.size(), workers, [&](std::size_t i) {
        sweep.points[i].value = sorted[i];
        sweep.points[i].run = relax(specs[i], init, etas, options);
    });
    return sweep;
}

FitReport scaling_fit(const SweepResult& sweep, double window_fraction, std::size_t eta_index)
{
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        fail_config("InvalidParameter", "scaling_fit(): window_fraction must lie in (0, 1]");
    const std::size_t n = sweep.points.size();
    const auto count = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n) - 1e-9));
    if (count < 5)
        fail_numeric("InsufficientPoints", "scaling_fit(): fewer than 5 points in the window");
    std::vector<double> x, y;
    for (const auto& p : sweep.points) {
        if (!p.run.results.at(eta_index).sustained)
            fail_numeric("UnsustainedPoint", "scaling_fit(): sweep point without a sustained crossing");
        x.push_back(p.value);
        y.push_back(p.tau(eta_index));
    }
    return linear_fit(x, y, n - count, n, 5);
}

bool has_plateau(const std::vector<double>& taus)
{
    if (taus.size() < 3)
        return false;
    const auto last = taus.end();
    const auto [lo, hi] = std::minmax_element(last - 3, last);
    return (*hi - *lo) < 0.01 * *hi;
}

SaturationStudy saturation_study(const std::vector<double>& gammas, const ModelSpec& spec_base,
                                 const std::vector<double>& etas, const std::vector<double>& L_values, int workers)
{
    if (spec_base.statistics != Statistics::Fermion)
        fail_config("InvalidParameter", "saturation_study(): fermion statistics required");
    SaturationStudy study;
    study.etas = etas;

    std::vector<ModelSpec> tuples;
    for (double g : gammas)
        for (double L : L_values) {
            ModelSpec s = spec_base;
            s.Gamma = g;
            set_parameter(s, "L", L);
            validate(s, true);
            tuples.push_back(s);
        }
    std::vector<RelaxRun> runs(tuples.size());
    parallel_for(tuples.size(), workers, [&](std::size_t i) { runs[i] = relax(tuples[i], InitialKind::Vacuum, etas); });

    const std::size_t nL = L_values.size();
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        SaturationPoint pt;
        pt.Gamma = gammas[gi];
        pt.xi_prop = xi_prop_hn(spec_base.w, gammas[gi], Statistics::Fermion);
        pt.L_values = L_values;
        bool plateau = true;
        for (std::size_t e = 0; e < etas.size(); ++e) {
            std::vector<double> taus;
            for (std::size_t li = 0; li < nL; ++li)
                taus.push_back(runs[gi * nL + li].results[e].tau);
            plateau = plateau && has_plateau(taus);
            pt.tau_sat_times_Delta.push_back(taus.back() * runs[gi * nL + nL - 1].Delta);
        }
        if (plateau)
            study.points.push_back(pt);
        else
            study.dropped_gammas.push_back(gammas[gi]);
    }
    if (gammas.size() > 0 && study.points.empty())
        fail_numeric("NoPlateau", "saturation_study(): no Gamma reached a plateau");
    for (std::size_t e = 0; e < etas.size(); ++e) {
        std::vector<double> x, y;
        for (const auto& p : study.points) {
            x.push_back(p.xi_prop);
            y.push_back(p.tau_sat_times_Delta[e]);
        }
        study.fits.push_back(linear_fit(x, y, 0, x.size(), 3));
    }
    return study;
}

XiPropFit xi_prop_fit(const std::vector<double>& distance, const std::vector<double>& heights, HeightMode mode)
{
    std::vector<double> logs;
    for (double h : heights) {
        if (!(h > 0.0))
            fail_numeric("NonPositiveHeight", "xi_prop_fit(): heights must be positive");
        logs.push_back(std::log(h));
    }
    XiPropFit out;
    out.fit = linear_fit(distance, logs, 0, logs.size(), 5);
    if (mode == HeightMode::Amplifying) {
        if (!(out.fit.slope > 0.0))
            fail_numeric("WrongSignSlope", "xi_prop_fit(): heights do not grow with distance");
        out.xi_est = 1.0 / out.fit.slope;
    } else {
        if (!(out.fit.slope < 0.0))
            fail_numeric("WrongSignSlope", "xi_prop_fit(): heights do not decay with distance");
        out.xi_est = -1.0 / out.fit.slope;
    }
    return out;
}

HeightProfile peak_heights(const ModelSpec& spec, int m, double t_end, double dt)
{
    const CMatrix H = effective_hamiltonian(spec);
    const auto n = static_cast<int>(H.rows());
    if (m < 1 || m > n)
        fail_config("InvalidSite", "peak_heights(): site out of range");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    std::vector<double> grid(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        grid[k] = static_cast<double>(k) * dt;
    const CMatrix row = propagate_row(H, m, grid);

    HeightProfile prof;
    for (int j = 1; j <= n; ++j) {
        Eigen::Index best = 0;
        row.col(j - 1).cwiseAbs2().maxCoeff(&best);
        prof.j.push_back(j);
        prof.peak_time.push_back(grid[static_cast<std::size_t>(best)]);
        prof.height.push_back(std::norm(row(best, j - 1)));
    }
    const double top = *std::max_element(prof.height.begin(), prof.height.end());
    for (double h : prof.height)
        prof.normalized.push_back(top > 0.0 ? h / top : 0.0);
    return prof;
}

std::vector<double> small_gamma_curve(int L, double Delta, const std::vector<double>& t_grid)
{
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid)
        out.push_back(std::max(0.0, 1.0 - std::sqrt(std::max(0.0, Delta * t / L))));
    return out;
}

InterferenceTerms interference_terms(const ModelSpec& spec, int m, int j, double t)
{
    if (spec.kind != ModelKind::HN)
        fail_config("UnsupportedModel", "interference_terms(): HN chains only");
    if (spec.edge_loss != EdgeLoss::Uniform)
        fail_config("UnsupportedModel", "interference_terms(): needs uniform edge loss");
    const int n = spec.L;
    if (m < 1 || m > n || j < 1 || j > n)
        fail_config("InvalidSite", "interference_terms(): site out of range");
    InterferenceTerms out;
    if (n == 1) {
        const cdouble E = effective_hamiltonian(spec)(0, 0);
        out.terms.push_back(LogComplex::from(std::exp(-kI * E * t)));
    } else {
        const Spectrum s = hn_spectral_analytic(spec);
        for (Eigen::Index a = 0; a < s.size(); ++a) {
            const LogComplex r = s.right(m, a);
            const LogComplex l = s.left(j, a);
            const cdouble E = s.eigenvalues[a];
            out.terms.push_back(LogComplex{r.log_abs + l.log_abs + E.imag() * t, r.phase - l.phase - E.real() * t});
        }
    }
    if (t == 0.0) {
        out.stable_sum = LogComplex::from(m == j ? 1.0 : 0.0);
    } else {
        const auto col = propagate_direct(effective_hamiltonian(spec), j, {0.0, t});
        for (const auto& smp : col)
            if (smp.t == t && smp.m == m)
                out.stable_sum = smp.logG;
    }

    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> mags;
    for (const auto& term : out.terms) {
        top = std::max(top, term.log_abs);
        mags.push_back(term.log_abs);
    }
    double acc = 0.0;
    for (double v : mags)
        acc += std::exp(v - top);
    out.abs_sum_log = top + std::log(acc);
    out.max_term_log10 = top / std::log(10.0);
    out.sum_log10 = out.stable_sum.log_abs / std::log(10.0);
    return out;
}

std::vector<cdouble> characteristic_polynomial(const ModelSpec& spec, cdouble E)
{
    const cdouble eps = E + kI * dissipative_gap(spec);
    switch (spec.kind) {
    case ModelKind::HN: {
        const double tR = 0.5 * (spec.w + spec.kappa);
        const double tL = 0.5 * (spec.w - spec.kappa);
        return {tR, -eps, tL};
    }
    case ModelKind::NNN: {
        const cdouble nnn = 0.5 * spec.T_nnn * std::polar(1.0, spec.phi);
        return {nnn, 0.5 * (spec.w + spec.kappa), -eps, 0.5 * (spec.w - spec.kappa), std::conj(nnn)};
    }
    case ModelKind::SSH: {
        // Two-band transfer relation per cell, written in the per-site factor mu with lambda = mu^2.
        const double t1R = 0.5 * (spec.w + spec.kappa), t1L = 0.5 * (spec.w - spec.kappa);
        const double t2R = 0.5 * (spec.u + spec.gamma_ssh), t2L = 0.5 * (spec.u - spec.gamma_ssh);
        return {t1R * t2R, 0.0, t1L * t1R + t2L * t2R - eps * eps, 0.0, t1L * t2L};
    }
    }
    return {};
}

LocalizationReport localization_extract(const ModelSpec& spec, cdouble E)
{
    validate(spec, true);
    const std::vector<cdouble> evs = model_eigenvalues(spec);
    double best = std::numeric_limits<double>::infinity();
    for (const cdouble& ev : evs)
        best = std::min(best, std::abs(ev - E));
    const double scale = std::max(1.0, norm_inf(effective_hamiltonian(spec)));
    if (best > 1e-6 * scale)
        fail_numeric("NotAnEigenvalue", "localization_extract(): E is not in the spectrum");

    std::vector<cdouble> coeffs = characteristic_polynomial(spec, E);
    const double cmax = std::abs(*std::max_element(coeffs.begin(), coeffs.end(),
                                                   [](cdouble a, cdouble b) { return std::abs(a) < std::abs(b); }));
    // Roots pinned at zero or infinity carry no localization information.
    auto negligible = [&](cdouble c) { return std::abs(c) <= 1e-14 * cmax; };
    while (coeffs.size() > 1 && negligible(coeffs.back()))
        coeffs.pop_back();
    std::size_t lead_zeros = 0;
    while (lead_zeros + 1 < coeffs.size() && negligible(coeffs[lead_zeros]))
        ++lead_zeros;
    coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(lead_zeros));
    if (coeffs.size() < 2)
        fail_numeric("DegenerateLeadingCoefficient", "localization_extract(): polynomial has no finite roots");

    const PolyRoots pr = poly_roots(coeffs);
    LocalizationReport rep;
    rep.eigenvalue = E;
    rep.roots = pr.roots;
    rep.max_residual = pr.max_residual;
    const double per_root = spec.kind == ModelKind::SSH ? 2.0 : 1.0; // SSH exponents per unit cell
    double top = -std::numeric_limits<double>::infinity();
    for (const cdouble& r : pr.roots) {
        rep.exponents.push_back(per_root * std::log(std::abs(r)));
        rep.phases.push_back(std::arg(r));
        top = std::max(top, rep.exponents.back());
    }
    rep.xi_extracted = 1.0 / top;
    return rep;
}

} // namespace skin
