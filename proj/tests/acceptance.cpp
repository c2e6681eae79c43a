// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "skinrelax/analysis.hpp"
#include "skinrelax/cli.hpp"
#include "skinrelax/propagator.hpp"
#include "skinrelax/verify.hpp"

using namespace skin;

namespace {

const double kEta = std::exp(-1.0);

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

int workers()
{
    return std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
}

ModelSpec hn(int L, double kappa, double Gamma, Statistics s)
{
    ModelSpec spec;
    spec.L = L;
    spec.w = 1.0;
    spec.kappa = kappa;
    spec.Gamma = Gamma;
    spec.statistics = s;
    return spec;
}

double spread(const std::vector<double>& v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *hi;
}

const char* stat_name(Statistics s) { return to_string(s); }

Verdict a1()
{
    const double xi = derived_scales(hn(10, 0.999, 0.0, Statistics::Fermion)).xi_loc;
    return {std::abs(xi - 0.2631) <= 1e-4, fmt("xi_loc=%.6f target 0.2631 +- 1e-4", xi)};
}

Verdict a2()
{
    const SweepResult sw = run_sweep(hn(100, 0.999, 0.2, Statistics::Boson), "L", {100, 120, 140, 160, 180},
                                     InitialKind::Vacuum, {kEta}, {}, workers());
    const FitReport f = scaling_fit(sw, 1.0);
    const double s = f.slope * sw.points.front().run.Delta;
    return {s >= 0.90 && s <= 1.05, fmt("slope*Delta_b=%.4f (r2=%.6f) window [0.90, 1.05]", s, f.r_squared)};
}

Verdict a3()
{
    const SweepResult sw = run_sweep(hn(150, 0.999, 0.2, Statistics::Fermion), "L", {150, 180}, InitialKind::Vacuum,
                                     {kEta}, {}, workers());
    const double t150 = sw.points[0].tau(), t180 = sw.points[1].tau();
    const double rel = std::abs(t180 - t150) / t180;
    const double xi = xi_prop_hn(1.0, 0.2, Statistics::Fermion);
    // t_max at d = xi_prop is xi_prop / Delta, so the comparison is in units of 1/Delta.
    const double ratio = sw.points[1].tau_times_Delta() / xi;
    const bool pass = rel < 0.01 && ratio >= 0.5 && ratio <= 2.0;
    return {pass, fmt("|tau180-tau150|/tau180=%.2e (<1%%); tau_sat*Delta_f=%.4f vs t_max*Delta_f=%.4f, ratio %.4f "
                      "(within factor 2)",
                      rel, sw.points[1].tau_times_Delta(), xi, ratio)};
}

Verdict a4()
{
    const std::vector<double> etas = {0.2, 0.3, 0.4, 0.5};
    const std::vector<double> target = {0.74, 0.48, 0.31, 0.19};
    const std::vector<double> gammas = {0.015, 0.02, 0.03, 0.04, 0.05, 0.1};
    const std::vector<double> Ls = {120, 140, 160, 180};
    auto study = [&](EdgeLoss e) {
        ModelSpec base = hn(120, 0.999, 0.0, Statistics::Fermion);
        base.edge_loss = e;
        return saturation_study(gammas, base, etas, Ls, workers());
    };
    auto describe = [&](const SaturationStudy& st, bool& ok) {
        std::string out;
        ok = st.fits.size() == etas.size();
        for (std::size_t k = 0; k < st.fits.size(); ++k) {
            const bool good = std::abs(st.fits[k].slope - target[k]) <= 0.05 && st.fits[k].r_squared > 0.999;
            ok = ok && good;
            out += fmt(" eta=%.1f:%.3f(r2=%.4f)", etas[k], st.fits[k].slope, st.fits[k].r_squared);
        }
        if (!st.dropped_gammas.empty())
            out += fmt(" dropped=%zu", st.dropped_gammas.size());
        return out;
    };
    bool ok = false, ok_literal = false;
    const std::string main = describe(study(EdgeLoss::Uniform), ok);
    const std::string literal = describe(study(EdgeLoss::Literal), ok_literal);
    return {ok, "targets 0.74/0.48/0.31/0.19 +-0.05, r2>0.999;" + main + " | literal edge loss:" + literal +
                    (ok_literal ? " (all slopes in range)" : "")};
}

Verdict a5()
{
    std::vector<double> tau, evec;
    for (double k : {0.9, 0.99, 0.999}) {
        const ModelSpec s = hn(100, k, 0.2, Statistics::Boson);
        tau.push_back(relax(s, InitialKind::Vacuum, {kEta}).results[0].tau);
        evec.push_back(evec_prediction(s));
    }
    const double st = spread(tau), se = spread(evec);
    return {st < 0.2 && se > 0.4, fmt("tau=%.2f/%.2f/%.2f spread %.3f (<0.20); tau_evec spread %.3f (>0.40)", tau[0],
                                      tau[1], tau[2], st, se)};
}

Verdict a6()
{
    bool ok = true;
    std::string out;
    for (Statistics st : {Statistics::Boson, Statistics::Fermion}) {
        ModelSpec s = hn(50, 0.999, 0.05, st);
        s.lambda_loss = 10.0;
        const SweepResult sw = run_sweep(s, "L", {50, 100}, InitialKind::Vacuum, {kEta}, {}, 2);
        const double a = sw.points[0].tau_times_Delta(), b = sw.points[1].tau_times_Delta();
        const double rel = std::abs(a - b) / b;
        ok = ok && rel <= 0.1;
        out += fmt("%s: tau*Delta %.4f (L=50) %.4f (L=100) rel %.2e; ", stat_name(st), a, b, rel);
    }
    return {ok, out + "bound 10%"};
}

Verdict a7()
{
    bool ok = true;
    std::string out;
    for (Statistics st : {Statistics::Boson, Statistics::Fermion}) {
        const ModelSpec s = hn(40, 0.999, 0.05, st);
        for (int j : {10, 30}) {
            const double t = peak_stats(s, j).t_max;
            const auto col = propagate_direct(effective_hamiltonian(s), j, {0.0, t});
            const double direct = col.back().P;
            const double rel = std::abs(p_no_bounce(s, j, t) - direct) / direct;
            ok = ok && rel <= 1e-6;
            out += fmt("%s j=%d rel=%.2e; ", stat_name(st), j, rel);
        }
    }
    return {ok, out + "bound 1e-6"};
}

Verdict a8()
{
    const ModelSpec s = hn(50, 0.999, 0.05, Statistics::Fermion);
    const double t = peak_stats(s, 1).t_max;
    const InterferenceTerms it = interference_terms(s, 50, 1, t);
    const double gap = it.max_term_log10 - it.sum_log10;
    return {gap >= 50.0, fmt("t_max=%.3f max term log10=%.2f, stable sum log10=%.2f, gap %.2f decades (>=50)", t,
                             it.max_term_log10, it.sum_log10, gap)};
}

Verdict a9(const std::vector<CheckLine>& lines)
{
    bool ok = true;
    int n = 0;
    double worst = 0.0;
    for (const auto& l : lines)
        if (l.name.rfind("oracle_equivalence", 0) == 0 || l.name.rfind("third_quantization", 0) == 0) {
            ok = ok && l.passed;
            worst = std::max(worst, l.value);
            ++n;
        }
    return {ok && n == 5, fmt("%d oracle/third-quantization checks, worst residual %.2e (<1e-8)", n, worst)};
}

Verdict a10()
{
    bool ok = true;
    std::string out;
    for (Statistics st : {Statistics::Boson, Statistics::Fermion}) {
        const ModelSpec s = hn(100, 1.0, 0.05, st);
        const PeakStats ps = peak_stats(s, 100 - 30);
        const bool time_ok = std::abs(ps.t_max - ps.t_max_formula) <= ps.grid_step;
        const double width_ratio = ps.fitted_width / ps.sigma;
        const bool width_ok = std::abs(width_ratio - 1.0) <= 0.1;

        std::vector<double> d, lh, ldh;
        for (int k = 10; k <= 40; ++k) {
            const PeakStats p = peak_stats(s, 100 - k);
            d.push_back(k);
            lh.push_back(p.log_height);
            ldh.push_back(p.log_height + std::log(static_cast<double>(k)));
        }
        const double expected = (st == Statistics::Fermion ? -1.0 : 1.0) / xi_prop_hn(1.0, 0.05, st);
        const double slope = linear_fit(d, lh).slope;
        const double slope_dh = linear_fit(d, ldh).slope;
        const bool slope_ok = std::abs(slope - expected) <= 0.02;
        ok = ok && time_ok && width_ok && slope_ok;
        out += fmt("%s: t_max=%.4f vs d/Delta=%.4f (step %.1e) %s; width/(sqrt(d)/Delta)=%.4f %s; "
                   "ln h slope=%.4f vs %.4f %s [ln(d h) slope %.4f]; ",
                   stat_name(st), ps.t_max, ps.t_max_formula, ps.grid_step, time_ok ? "ok" : "off", width_ratio,
                   width_ok ? "ok" : "off", slope, expected, slope_ok ? "ok" : "off", slope_dh);
    }
    return {ok, out};
}

Verdict a11()
{
    bool ok = true;
    std::string out;
    for (Statistics st : {Statistics::Boson, Statistics::Fermion}) {
        const ModelSpec s = hn(60, 0.999, 0.001, st);
        RelaxOptions opt;
        opt.keep_curve = true;
        const RelaxRun r = relax(s, InitialKind::Vacuum, {kEta}, opt);
        const auto curve = small_gamma_curve(60, r.Delta, r.t);
        double worst = 0.0;
        for (std::size_t k = 0; k < r.t.size(); ++k)
            if (r.t[k] <= 0.8 * 60.0 / r.Delta)
                worst = std::max(worst, std::abs(r.delta_n[k] - curve[k]));
        ok = ok && worst <= 0.05;
        out += fmt("%s max deviation %.4f; ", stat_name(st), worst);
    }
    return {ok, out + "bound 0.05"};
}

Verdict a12()
{
    const ModelSpec s = hn(40, 0.999, 0.0, Statistics::Fermion);
    const double xi = 1.0 / hn_inverse_xi(1.0, 0.999);
    const Spectrum sp = hn_spectral_analytic(s);
    ModelSpec nnn = s;
    nnn.kind = ModelKind::NNN;
    double worst_hn = 0.0, worst_nnn = 0.0;
    for (Eigen::Index a = 0; a < sp.size(); ++a) {
        worst_hn = std::max(worst_hn, std::abs(localization_extract(s, sp.eigenvalues[a]).xi_extracted - xi));
        worst_nnn = std::max(worst_nnn, std::abs(localization_extract(nnn, sp.eigenvalues[a]).xi_extracted - xi));
    }
    return {worst_hn <= 1e-6 && worst_nnn <= 1e-6,
            fmt("max |xi - xi_loc| HN %.2e, NNN(T=0) %.2e over 40 eigenvalues (<=1e-6)", worst_hn, worst_nnn)};
}

Verdict a13()
{
    bool ok = true;
    std::string out;
    const double targets[] = {5.75, 2.37};
    int k = 0;
    for (double G : {0.1, 0.2}) {
        ModelSpec s;
        s.kind = ModelKind::SSH;
        s.L = 30;
        s.w = 1.0;
        s.u = 1.0;
        s.kappa = 0.5;
        s.gamma_ssh = 0.99;
        s.Gamma = G;
        s.statistics = Statistics::Boson;
        const int n = site_count(s);
        const HeightProfile hp = peak_heights(s, n, 4.0 * n / dissipative_gap(s) + 20.0, 0.02);
        std::vector<double> d, h;
        for (int j = 1; j <= n / 2; ++j) {
            d.push_back(n - j);
            h.push_back(hp.height[static_cast<std::size_t>(j - 1)]);
        }
        const XiPropFit f = xi_prop_fit(d, h, HeightMode::Amplifying);
        const bool good = std::abs(f.xi_est / targets[k] - 1.0) <= 0.15;
        ok = ok && good;
        out += fmt("Gamma=%.1f xi_est=%.3f vs %.2f %s; ", G, f.xi_est, targets[k], good ? "ok" : "off");
        ++k;
    }

    ModelSpec f;
    f.kind = ModelKind::SSH;
    f.L = 60;
    f.w = 1.0;
    f.u = 1.0;
    f.kappa = 0.0;
    f.gamma_ssh = 0.999;
    f.Gamma = 0.1;
    f.statistics = Statistics::Fermion;
    const RelaxRun r = relax(f, InitialKind::Vacuum, {kEta});
    const double tau_evec = evec_prediction(f);
    const bool over = r.results[0].tau < tau_evec;
    ok = ok && over;
    out += fmt("fermion 120 sites: tau=%.2f < tau_evec=%.2f %s", r.results[0].tau, tau_evec, over ? "ok" : "off");
    return {ok, out};
}

Verdict a14(const std::vector<CheckLine>& lines)
{
    RunConfig c;
    c.command = "verify";
    c.out = (std::filesystem::temp_directory_path() / "skinrelax_acceptance_verify.csv").string();
    std::ostringstream log;
    const int code = run(c, log);
    int failed = 0;
    for (const auto& l : lines)
        failed += l.passed ? 0 : 1;
    return {failed == 0 && code == 0,
            fmt("%zu suite checks, %d failed; verify command exit %d", lines.size(), failed, code)};
}

} // namespace

int main()
{
    const std::vector<CheckLine> suite = run_verify_suite();
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"A1", a1},   {"A2", a2},   {"A3", a3},   {"A4", a4},
        {"A5", a5},   {"A6", a6},   {"A7", a7},   {"A8", a8},
        {"A9", [&] { return a9(suite); }},        {"A10", a10},
        {"A11", a11}, {"A12", a12}, {"A13", a13}, {"A14", [&] { return a14(suite); }},
    };
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += v.pass ? 0 : 1;
        std::printf("%-4s %s  %s  [%.1fs]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
