#include "skinrelax/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include <CLI11.hpp>

#include "skinrelax/analysis.hpp"
#include "skinrelax/csv.hpp"
#include "skinrelax/propagator.hpp"
#include "skinrelax/verify.hpp"

namespace skin {

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"spectrum", "eigenvalues of the effective Hamiltonian"},
    {"steady", "steady-state occupations"},
    {"propagator", "single-particle propagator samples or peak profile"},
    {"relax", "relaxation times of one site"},
    {"sweep", "relaxation times across a parameter axis"},
    {"interference", "eigenmode terms of one propagator entry"},
    {"localization", "localization length from the characteristic polynomial"},
    {"verify", "built-in numerical self-checks"},
};

std::string lower_name(ModelKind k)
{
    std::string s = to_string(k);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string itos(long v) { return std::to_string(v); }

// Output of one command: the main table plus anything worth echoing in the sidecar.
struct Artifact {
    explicit Artifact(CsvTable t) : table(std::move(t)) {}
    CsvTable table;
    nlohmann::json results = nlohmann::json::object();
    bool verify_failed = false;
    std::optional<CsvTable> trajectory;
};

int last_site(const RunConfig& c, int requested)
{
    const int n = site_count(c.model);
    const int m = requested == 0 ? n : requested;
    if (m < 1 || m > n)
        fail_config("SiteOutOfRange", "site " + itos(m) + " outside 1.." + itos(n));
    return m;
}

std::vector<double> sorted_unique(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<std::size_t> order_by_energy(const CVector& e)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(e.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const cdouble x = e[static_cast<Eigen::Index>(a)], y = e[static_cast<Eigen::Index>(b)];
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return idx;
}

bool hn_uniform(const ModelSpec& s) { return s.kind == ModelKind::HN && s.edge_loss == EdgeLoss::Uniform; }

std::vector<std::string> relaxation_row(const ModelSpec& s, InitialKind init, double eta, const RelaxationResult& r,
                                        double Delta)
{
    return {lower_name(s.kind),  to_string(s.statistics), itos(s.L),   fmt17(s.w),   fmt17(s.kappa),
            fmt17(s.lambda_loss), fmt17(s.Gamma),         to_string(init), fmt17(eta), fmt17(r.tau),
            fmt17(r.tau * Delta), r.sustained ? "true" : "false"};
}

Artifact cmd_spectrum(const RunConfig& c)
{
    const std::string route = c.route.empty() ? "general" : c.route;
    if (route != "general" && route != "analytic")
        fail_config("UnknownRoute", "spectrum route must be general or analytic, got '" + route + "'");
    const Spectrum sp = route == "analytic" ? hn_spectral_analytic(c.model) : eig_general(effective_hamiltonian(c.model));
    Artifact a{CsvTable({"model", "stat", "L", "alpha", "re_E", "im_E"})};
    std::size_t alpha = 0;
    for (std::size_t i : order_by_energy(sp.eigenvalues)) {
        const cdouble e = sp.eigenvalues[static_cast<Eigen::Index>(i)];
        a.table.add_row({lower_name(c.model.kind), to_string(c.model.statistics), itos(c.model.L), itos(++alpha),
                         fmt17(e.real()), fmt17(e.imag())});
    }
    const Scales sc = derived_scales(c.model);
    a.results = {{"route", route},
                 {"Delta", sc.Delta},
                 {"xi_loc", sc.xi_loc},
                 {"tau_evec", sc.tau_evec},
                 {"biorth_residual", sp.biorth_residual},
                 {"eig_residual", sp.eig_residual}};
    return a;
}

Artifact cmd_steady(const RunConfig& c)
{
    const int n = site_count(c.model);
    const CMatrix S = solve_steady_sylvester(effective_hamiltonian(c.model), c.model.Gamma);
    Artifact a{CsvTable({"model", "stat", "L", "site", "n_inf"})};
    for (int m = 1; m <= n; ++m)
        a.table.add_row({lower_name(c.model.kind), to_string(c.model.statistics), itos(c.model.L), itos(m),
                         fmt17(S(m - 1, m - 1).real())});
    if (c.verify) {
        double worst = 0.0;
        for (int m = n <= 40 ? 1 : n; m <= n; ++m)
            worst = std::max(worst, std::abs(steady_occupation(c.model, m) / S(m - 1, m - 1).real() - 1.0));
        a.results["steady_route_mismatch"] = worst;
        a.verify_failed = !(worst <= 1e-6);
    }
    return a;
}

// Amplitude difference in units of 1e-6 |G_b| + floor.
double amplitude_gap(double logP_a, double logP_b, double floor)
{
    const double a = std::exp(0.5 * logP_a), b = std::exp(0.5 * logP_b);
    return std::abs(a - b) / (1e-6 * b + floor);
}

Artifact cmd_propagator(const RunConfig& c)
{
    const int n = site_count(c.model);
    const int m = last_site(c, c.m);
    if (c.j < 1 || c.j > n)
        fail_config("SiteOutOfRange", "source site " + itos(c.j) + " outside 1.." + itos(n));
    if (c.times.empty())
        fail_config("MissingTimes", "propagator needs --times");
    const std::vector<double> times = sorted_unique(c.times);
    if (times.front() < 0.0)
        fail_config("NegativeTime", "times must be non-negative");
    const std::string model = lower_name(c.model.kind), stat = to_string(c.model.statistics);

    if (c.peaks) {
        if (times.size() < 2)
            fail_config("MissingTimes", "peak scan needs a grid with at least two times");
        const HeightProfile hp = peak_heights(c.model, m, times.back(), times[1] - times[0]);
        Artifact a{CsvTable({"model", "stat", "L", "j", "m", "t_peak", "height", "normalized"})};
        for (std::size_t k = 0; k < hp.j.size(); ++k)
            a.table.add_row({model, stat, itos(c.model.L), itos(hp.j[k]), itos(m), fmt17(hp.peak_time[k]),
                             fmt17(hp.height[k]), fmt17(hp.normalized[k])});
        return a;
    }

    const std::string route = c.route.empty() ? "direct" : c.route;
    Artifact a{CsvTable(kPropagatorColumns)};
    auto emit = [&](double t, double logP, Route r) {
        a.table.add_row({model, stat, itos(c.model.L), itos(c.j), itos(m), fmt17(t), fmt17(logP), to_string(r)});
    };

    std::vector<double> direct_logP;
    auto compute_direct = [&] {
        std::vector<double> grid = times;
        const bool padded = grid.front() > 0.0;
        if (padded)
            grid.insert(grid.begin(), 0.0);
        std::vector<double> out;
        for (const auto& s : propagate_direct(effective_hamiltonian(c.model), c.j, grid))
            if (s.m == m && !(padded && s.t == 0.0))
                out.push_back(s.logP);
        return out;
    };

    if (route == "direct") {
        direct_logP = compute_direct();
        for (std::size_t k = 0; k < times.size(); ++k)
            emit(times[k], direct_logP[k], Route::Direct);
    } else if (route == "spectral") {
        const Spectrum sp = hn_uniform(c.model) ? hn_spectral_analytic(c.model) : eig_general(effective_hamiltonian(c.model));
        a.results["nonnormality_log"] = sp.nonnormality_log;
        for (double t : times)
            emit(t, propagate_spectral(sp, m, c.j, t).logP, Route::Spectral);
    } else if (route == "bounce_sum") {
        for (double t : times) {
            const BounceResult b = g_obc_bounce(m, c.j, t, c.model);
            emit(t, 2.0 * b.logG.log_abs, Route::BounceSum);
        }
    } else if (route == "no_bounce" || route == "simplified") {
        if (m != n)
            fail_config("UnsupportedRoute", route + " route only gives the last-site propagator");
        for (double t : times) {
            if (route == "no_bounce")
                emit(t, log_p_no_bounce(c.model, c.j, t), Route::NoBounce);
            else
                emit(t, log_p_simplified(c.model, n - c.j, t), Route::Simplified);
        }
    } else {
        fail_config("UnknownRoute", "unknown propagator route '" + route + "'");
    }

    if (c.verify && route != "no_bounce" && route != "simplified") {
        if (direct_logP.empty())
            direct_logP = compute_direct();
        // The spectral sum cancels terms as large as e^{nonnormality}, which sets its absolute floor.
        const Spectrum sp = hn_uniform(c.model) ? hn_spectral_analytic(c.model) : eig_general(effective_hamiltonian(c.model));
        const bool use_bounce = hn_uniform(c.model) && route != "spectral";
        const double floor = use_bounce ? 1e-12 : 100.0 * 2.2e-16 * std::exp(sp.nonnormality_log);
        double worst = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double other = use_bounce ? 2.0 * g_obc_bounce(m, c.j, times[k], c.model).logG.log_abs
                                            : propagate_spectral(sp, m, c.j, times[k]).logP;
            worst = std::max(worst, amplitude_gap(other, direct_logP[k], floor));
        }
        a.results["verify_against"] = use_bounce ? "bounce_sum" : "spectral";
        a.results["max_amplitude_gap"] = worst;
        a.verify_failed = !(worst <= 1.0);
    }
    return a;
}

RelaxOptions relax_options(const RunConfig& c, bool keep_curve)
{
    RelaxOptions o;
    o.site = c.site;
    o.horizon_factor = c.horizon_factor;
    o.sustain_factor = c.sustain_factor;
    o.keep_curve = keep_curve;
    return o;
}

Artifact cmd_relax(const RunConfig& c)
{
    const InitialKind init = parse_initial_kind(c.init);
    const RelaxRun run = relax(c.model, init, c.eta, relax_options(c, !c.trajectory_out.empty()));
    Artifact a{CsvTable(kRelaxationColumns)};
    for (std::size_t e = 0; e < run.etas.size(); ++e)
        a.table.add_row(relaxation_row(run.spec, init, run.etas[e], run.results[e], run.Delta));
    a.results = {{"site", run.site},
                 {"Delta", run.Delta},
                 {"n_inf", run.n_inf},
                 {"tau_evec_times_Delta", evec_prediction(c.model) * 1.0}};
    if (!c.trajectory_out.empty()) {
        CsvTable traj(kTrajectoryColumns);
        for (std::size_t k = 0; k < run.t.size(); ++k)
            traj.add_row({fmt17(run.t[k]), itos(run.site), fmt17(run.occupation[k]), fmt17(run.delta_n[k])});
        a.trajectory = std::move(traj);
    }
    if (c.verify) {
        const CMatrix S = solve_steady_sylvester(effective_hamiltonian(c.model), c.model.Gamma);
        const double n_ss = S(run.site - 1, run.site - 1).real();
        const double steady_err = std::abs(run.n_inf / n_ss - 1.0);
        const double tau = run.results.front().tau;
        EvolveOptions eo;
        eo.verify = true;
        const auto traj = evolve_covariance(c.model, initial_state(init, c.model), {0.0, tau}, eo);
        const double dn = std::abs(traj.occupations(1, run.site - 1) - n_ss) / n_ss;
        const double crossing_err = std::abs(dn / run.etas.front() - 1.0);
        a.results["steady_route_mismatch"] = steady_err;
        a.results["crossing_mismatch"] = crossing_err;
        a.verify_failed = !(steady_err <= 1e-6 && crossing_err <= 1e-3);
    }
    return a;
}

Artifact cmd_sweep(const RunConfig& c)
{
    if (c.axis.empty())
        fail_config("MissingAxis", "sweep needs --axis");
    if (c.values.empty())
        fail_config("MissingValues", "sweep needs --values");
    const InitialKind init = parse_initial_kind(c.init);

    if (!c.saturation_L.empty()) {
        if (c.axis != "Gamma")
            fail_config("UnsupportedAxis", "a length scan per point needs --axis Gamma");
        const SaturationStudy st = saturation_study(sorted_unique(c.values), c.model, c.eta,
                                                    sorted_unique(c.saturation_L), c.workers);
        Artifact a{CsvTable({"Gamma", "xi_prop", "eta", "tau_sat_times_Delta"})};
        for (const auto& p : st.points)
            for (std::size_t e = 0; e < st.etas.size(); ++e)
                a.table.add_row({fmt17(p.Gamma), fmt17(p.xi_prop), fmt17(st.etas[e]), fmt17(p.tau_sat_times_Delta[e])});
        nlohmann::json fits = nlohmann::json::array();
        for (std::size_t e = 0; e < st.fits.size(); ++e)
            fits.push_back({{"eta", st.etas[e]},
                            {"slope", st.fits[e].slope},
                            {"intercept", st.fits[e].intercept},
                            {"r_squared", st.fits[e].r_squared}});
        a.results = {{"fits", fits}, {"dropped_gammas", st.dropped_gammas}};
        return a;
    }

    const SweepResult sw = run_sweep(c.model, c.axis, c.values, init, c.eta, relax_options(c, false), c.workers);
    Artifact a{CsvTable(kRelaxationColumns)};
    for (const auto& p : sw.points)
        for (std::size_t e = 0; e < sw.etas.size(); ++e)
            a.table.add_row(relaxation_row(p.run.spec, init, sw.etas[e], p.run.results[e], p.run.Delta));

    nlohmann::json fits = nlohmann::json::array();
    if (c.axis == "L") {
        for (std::size_t e = 0; e < sw.etas.size(); ++e) {
            try {
                const FitReport f = scaling_fit(sw, 0.3, e);
                fits.push_back({{"eta", sw.etas[e]}, {"slope", f.slope}, {"intercept", f.intercept},
                                {"r_squared", f.r_squared}});
            } catch (const Error& err) {
                fits.push_back({{"eta", sw.etas[e]}, {"error", err.name()}});
            }
        }
        a.results["scaling_fits"] = fits;
    }
    return a;
}

Artifact cmd_interference(const RunConfig& c)
{
    const int m = last_site(c, c.m);
    const InterferenceTerms it = interference_terms(c.model, m, c.j, c.t);
    Artifact a{CsvTable({"alpha", "log_abs", "phase", "log10_abs", "re_scaled", "im_scaled"})};
    const double shift = it.max_term_log10 * std::log(10.0);
    for (std::size_t k = 0; k < it.terms.size(); ++k) {
        const LogComplex& z = it.terms[k];
        const double mag = std::exp(z.log_abs - shift);
        a.table.add_row({itos(static_cast<long>(k) + 1), fmt17(z.log_abs), fmt17(z.phase),
                         fmt17(z.log_abs / std::log(10.0)), fmt17(mag * std::cos(z.phase)),
                         fmt17(mag * std::sin(z.phase))});
    }
    a.results = {{"m", m},
                 {"j", c.j},
                 {"t", c.t},
                 {"scale_log10", it.max_term_log10},
                 {"max_term_log10", it.max_term_log10},
                 {"sum_log10", it.sum_log10},
                 {"cancellation_digits", it.max_term_log10 - it.sum_log10},
                 {"stable_sum_log_abs", it.stable_sum.log_abs},
                 {"stable_sum_phase", it.stable_sum.phase},
                 {"abs_sum_log", it.abs_sum_log}};
    return a;
}

Artifact cmd_localization(const RunConfig& c)
{
    std::vector<cdouble> energies;
    if (c.energy.size() == 2) {
        energies.push_back({c.energy[0], c.energy[1]});
    } else if (!c.energy.empty()) {
        fail_config("InvalidEnergy", "--E takes re,im");
    } else {
        const Spectrum sp = eig_general(effective_hamiltonian(c.model));
        for (std::size_t i : order_by_energy(sp.eigenvalues))
            energies.push_back(sp.eigenvalues[static_cast<Eigen::Index>(i)]);
    }
    Artifact a{CsvTable({"alpha", "re_E", "im_E", "xi_extracted", "max_residual"})};
    double xi_max = 0.0;
    for (std::size_t k = 0; k < energies.size(); ++k) {
        const LocalizationReport r = localization_extract(c.model, energies[k]);
        xi_max = std::max(xi_max, r.xi_extracted);
        a.table.add_row({itos(static_cast<long>(k) + 1), fmt17(energies[k].real()), fmt17(energies[k].imag()),
                         fmt17(r.xi_extracted), fmt17(r.max_residual)});
    }
    a.results = {{"xi_max", xi_max}};
    return a;
}

Artifact cmd_verify(const RunConfig& c, std::ostream& log)
{
    const auto lines = run_verify_suite(c.seed);
    Artifact a{CsvTable({"name", "passed", "value", "tolerance", "detail"})};
    for (const auto& l : lines) {
        log << format_check(l) << '\n';
        a.table.add_row({l.name, l.passed ? "true" : "false", fmt17(l.value), fmt17(l.tolerance), l.detail});
    }
    a.verify_failed = !all_passed(lines);
    a.results = {{"checks", lines.size()}, {"all_passed", !a.verify_failed}};
    return a;
}

Artifact dispatch(const RunConfig& c, std::ostream& log)
{
    if (c.command != "verify")
        validate(c.model);
    if (c.workers < 1)
        fail_config("InvalidWorkers", "worker count must be positive");
    if (c.command == "spectrum")
        return cmd_spectrum(c);
    if (c.command == "steady")
        return cmd_steady(c);
    if (c.command == "propagator")
        return cmd_propagator(c);
    if (c.command == "relax")
        return cmd_relax(c);
    if (c.command == "sweep")
        return cmd_sweep(c);
    if (c.command == "interference")
        return cmd_interference(c);
    if (c.command == "localization")
        return cmd_localization(c);
    if (c.command == "verify")
        return cmd_verify(c, log);
    fail_config("UnknownCommand", "unknown command '" + c.command + "'");
}

nlohmann::json sidecar(const RunConfig& c, double wall, const std::string& status, const nlohmann::json& extra)
{
    nlohmann::json j = {{"tool", "skinrelax"}, {"version", kToolVersion}, {"config", c},
                        {"wall_time_s", wall}, {"status", status}};
    j.update(extra);
    return j;
}

} // namespace

void to_json(nlohmann::json& j, const RunConfig& c)
{
    j = {{"command", c.command},
         {"model", c.model},
         {"axis", c.axis},
         {"values", c.values},
         {"eta", c.eta},
         {"sustain_factor", c.sustain_factor},
         {"horizon_factor", c.horizon_factor},
         {"init", c.init},
         {"site", c.site},
         {"saturation_L", c.saturation_L},
         {"trajectory_out", c.trajectory_out},
         {"j", c.j},
         {"m", c.m},
         {"times", c.times},
         {"route", c.route},
         {"peaks", c.peaks},
         {"t", c.t},
         {"energy", c.energy},
         {"out", c.out},
         {"workers", c.workers},
         {"verify", c.verify},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c)
{
    static const std::set<std::string> known = {
        "command", "model", "axis",  "values", "eta",   "sustain_factor", "horizon_factor", "init",
        "site",    "saturation_L", "trajectory_out", "j", "m", "times", "route", "peaks", "t",
        "energy",  "out",   "workers", "verify", "seed"};
    if (!j.is_object())
        fail_config("InvalidConfig", "config must be a JSON object");
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            fail_config("UnknownField", "config has unknown field '" + item.key() + "'");
    RunConfig out;
    out.workers = default_workers();
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key))
                j.at(key).get_to(field);
        };
        get("command", out.command);
        if (j.contains("model"))
            out.model = j.at("model").get<ModelSpec>();
        get("axis", out.axis);
        get("values", out.values);
        get("eta", out.eta);
        get("sustain_factor", out.sustain_factor);
        get("horizon_factor", out.horizon_factor);
        get("init", out.init);
        get("site", out.site);
        get("saturation_L", out.saturation_L);
        get("trajectory_out", out.trajectory_out);
        get("j", out.j);
        get("m", out.m);
        get("times", out.times);
        get("route", out.route);
        get("peaks", out.peaks);
        get("t", out.t);
        get("energy", out.energy);
        get("out", out.out);
        get("workers", out.workers);
        get("verify", out.verify);
        get("seed", out.seed);
    } catch (const nlohmann::json::exception& e) {
        fail_config("InvalidConfig", e.what());
    }
    c = std::move(out);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        fail_config("ConfigUnreadable", "cannot read '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        fail_config("InvalidConfig", path + ": " + e.what());
    }
    return j.get<RunConfig>();
}

std::vector<double> parse_values(const std::string& text)
{
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size())
            fail_config("InvalidValues", "cannot parse '" + s + "' in '" + text + "'");
        return v;
    };
    std::vector<std::string> parts;
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    std::vector<double> out;
    if (sep == ':') {
        if (parts.size() != 3)
            fail_config("InvalidValues", "range must be start:stop:step, got '" + text + "'");
        const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || b < a)
            fail_config("InvalidValues", "range needs step > 0 and stop >= start");
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long k = 0; k <= n; ++k)
            out.push_back(a + static_cast<double>(k) * step);
    } else {
        for (const auto& p : parts)
            out.push_back(number(p));
    }
    return out;
}

int default_workers()
{
    if (const char* env = std::getenv("SKINRELAX_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

int run(const RunConfig& config, std::ostream& log)
{
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    int code = 0;
    std::string status = "ok";
    nlohmann::json extra;
    try {
        Artifact a = dispatch(config, log);
        if (config.out.empty())
            std::cout << a.table.str();
        else
            a.table.write(config.out);
        if (a.trajectory && !config.trajectory_out.empty())
            a.trajectory->write(config.trajectory_out);
        if (a.verify_failed) {
            code = 3;
            status = "verify_failed";
        }
        extra = {{"rows", a.table.size()}, {"columns", a.table.header()}, {"results", a.results}};
        if (!config.trajectory_out.empty())
            write_json(sidecar_path(config.trajectory_out),
                       sidecar(config, elapsed(), status, {{"columns", kTrajectoryColumns}}));
    } catch (const Error& e) {
        code = e.kind() == ErrorKind::Config ? 1 : e.kind() == ErrorKind::Numeric ? 2 : 3;
        status = "error";
        extra = {{"error", e.name()}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = 2;
        status = "error";
        extra = {{"error", "InternalError"}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    }
    if (!config.out.empty()) {
        try {
            write_json(sidecar_path(config.out), sidecar(config, elapsed(), status, extra));
        } catch (const Error& e) {
            log << "error: " << e.what() << '\n';
            return code == 0 ? 1 : code;
        }
    }
    return code;
}

int cli_main(int argc, char** argv)
{
    CLI::App app{"Relaxation dynamics of open non-Hermitian skin-effect chains"};
    app.require_subcommand(0, 1);

    RunConfig c;
    c.workers = default_workers();
    std::string config_path, model = "hn", stats = "fermion", edge = "uniform";
    std::string values, etas, times, sat_L, energy;

    app.add_option("--config", config_path, "JSON file mirroring the run configuration");

    for (const auto& [name, help] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--out", c.out, "output CSV (stdout when omitted)");
        sub->add_option("--workers", c.workers, "worker threads");
        sub->add_flag("--verify", c.verify, "cross-check against independent routes");
        if (name == "verify") {
            sub->add_option("--seed", c.seed);
            continue;
        }
        sub->add_option("--model", model, "hn, ssh or nnn");
        sub->add_option("--stats", stats, "fermion or boson");
        sub->add_option("--L", c.model.L, "sites (hn, nnn) or unit cells (ssh)");
        sub->add_option("--w", c.model.w);
        sub->add_option("--kappa", c.model.kappa);
        sub->add_option("--lambda", c.model.lambda_loss);
        sub->add_option("--Gamma", c.model.Gamma);
        sub->add_option("--u", c.model.u);
        sub->add_option("--gamma", c.model.gamma_ssh);
        sub->add_option("--T", c.model.T_nnn);
        sub->add_option("--phi", c.model.phi);
        sub->add_option("--edge-loss", edge, "uniform or literal");
        if (name == "spectrum")
            sub->add_option("--route", c.route, "general or analytic");
        if (name == "propagator") {
            sub->add_option("--j", c.j, "source site");
            sub->add_option("--m", c.m, "target site (default: last)");
            sub->add_option("--times", times, "start:stop:step or comma list")->required();
            sub->add_option("--route", c.route, "direct, spectral, bounce_sum, no_bounce or simplified");
            sub->add_flag("--peaks", c.peaks, "peak height of |G_mj|^2 for every source site");
        }
        if (name == "relax" || name == "sweep") {
            sub->add_option("--init", c.init, "vacuum, uniform_ss_avg or all_filled");
            sub->add_option("--eta", etas, "threshold(s), comma separated");
            sub->add_option("--sustain", c.sustain_factor);
            sub->add_option("--horizon", c.horizon_factor, "horizon in units of N / Delta");
            sub->add_option("--site", c.site, "observed site (default: last)");
        }
        if (name == "relax")
            sub->add_option("--trajectory", c.trajectory_out, "also write n(t) to this CSV");
        if (name == "sweep") {
            sub->add_option("--axis", c.axis)->required();
            sub->add_option("--values", values, "start:stop:step or comma list")->required();
            sub->add_option("--saturation-L", sat_L, "lengths scanned per Gamma value");
        }
        if (name == "interference") {
            sub->add_option("--j", c.j);
            sub->add_option("--m", c.m);
            sub->add_option("--t", c.t)->required();
        }
        if (name == "localization")
            sub->add_option("--E", energy, "re,im (default: every eigenvalue)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) {
            if (!app.get_subcommands().empty()) {
                std::cerr << "error: --config replaces the subcommand and its flags\n";
                return 1;
            }
            return run(load_config(config_path), std::cerr);
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 1;
        }
        c.command = app.get_subcommands().front()->get_name();
        c.model.kind = parse_model_kind(model);
        c.model.statistics = parse_statistics(stats);
        c.model.edge_loss = parse_edge_loss(edge);
        if (!values.empty())
            c.values = parse_values(values);
        if (!etas.empty())
            c.eta = parse_values(etas);
        if (!times.empty())
            c.times = parse_values(times);
        if (!sat_L.empty())
            c.saturation_L = parse_values(sat_L);
        if (!energy.empty())
            c.energy = parse_values(energy);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return run(c, std::cerr);
}

} // namespace skin
