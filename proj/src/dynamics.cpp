#include "skinrelax/dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

namespace skin {

const char* to_string(InitialKind k)
{
    switch (k) {
    case InitialKind::Vacuum: return "vacuum";
    case InitialKind::UniformSteadyAverage: return "uniform_ss_avg";
    case InitialKind::AllFilled: return "all_filled";
    }
    return "?";
}

InitialKind parse_initial_kind(const std::string& s)
{
    if (s == "vacuum")
        return InitialKind::Vacuum;
    if (s == "uniform_ss_avg")
        return InitialKind::UniformSteadyAverage;
    if (s == "all_filled")
        return InitialKind::AllFilled;
    fail_config("InvalidParameter", "unknown initial state '" + s + "'");
}

namespace {

// Steady-state occupations of every site: the dense solve for small chains, the
// integrated propagator rows otherwise.
Eigen::VectorXd steady_diagonal(const ModelSpec& spec)
{
    const int n = site_count(spec);
    Eigen::VectorXd out(n);
    if (n <= 60) {
        const CMatrix S = solve_steady_sylvester(effective_hamiltonian(spec), spec.Gamma);
        for (int i = 0; i < n; ++i)
            out[i] = S(i, i).real();
        return out;
    }
    for (int i = 0; i < n; ++i)
        out[i] = steady_occupation(spec, i + 1);
    return out;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        x[static_cast<std::size_t>(i)] = z;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

void check_covariance(const CMatrix& S, Statistics stats, double t)
{
    const double scale = std::max(1.0, norm_inf(S));
    const double herm = (S - S.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-9 * scale)
        fail_numeric("HermiticityViolation", "evolve_covariance(): S(t) not Hermitian at t = " + std::to_string(t));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (S + S.adjoint()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (stats == Statistics::Fermion) {
        if (lo < -1e-8 || hi > 1.0 + 1e-8)
            fail_numeric("PauliViolation", "evolve_covariance(): eigenvalue outside [0, 1] at t = " + std::to_string(t));
    } else if (lo < -1e-8 * scale) {
        fail_numeric("PositivityViolation", "evolve_covariance(): negative eigenvalue at t = " + std::to_string(t));
    }
}

struct RowSystem {
    SparseCMatrix B; // (-i H)^T
    double pump = 0.0;
    double h = 0.01;
    Eigen::Index n = 0;

    explicit RowSystem(const ModelSpec& spec)
    {
        const CMatrix A = -kI * effective_hamiltonian(spec);
        B = to_sparse(A.transpose());
        pump = 2.0 * spec.Gamma;
        h = rk4_step(norm_inf(A));
        n = A.rows();
    }

    CVector start(int m) const
    {
        CVector y = CVector::Zero(n + 1);
        y[m - 1] = 1.0;
        return y;
    }

    CVector operator()(const CVector& y) const
    {
        CVector d(n + 1);
        d.head(n) = B * y.head(n);
        d[n] = pump * y.head(n).squaredNorm();
        return d;
    }
};

double row_occupation(const CVector& y, const Eigen::VectorXd& s0)
{
    const Eigen::Index n = y.size() - 1;
    return (y.head(n).cwiseAbs2().array() * s0.array()).sum() + y[n].real();
}

} // namespace

CMatrix initial_state(InitialKind kind, const ModelSpec& spec)
{
    validate(spec, true);
    const int n = site_count(spec);
    switch (kind) {
    case InitialKind::Vacuum: return CMatrix::Zero(n, n);
    case InitialKind::AllFilled:
        if (spec.statistics != Statistics::Fermion)
            fail_config("AllFilledBosons", "initial_state(): all_filled needs fermions");
        return CMatrix::Identity(n, n);
    case InitialKind::UniformSteadyAverage: {
        const double mean = steady_diagonal(spec).mean();
        return mean * CMatrix::Identity(n, n);
    }
    }
    return {};
}

CovarianceTrajectory evolve_covariance(const ModelSpec& spec, const CMatrix& S0, const std::vector<double>& t_grid,
                                       const EvolveOptions& options)
{
    validate(spec, true);
    const CMatrix H = effective_hamiltonian(spec);
    const Eigen::Index n = H.rows();
    if (S0.rows() != n || S0.cols() != n)
        fail_config("Shape", "evolve_covariance(): S0 has the wrong size");
    const CMatrix A = -kI * H;
    const CMatrix P = 2.0 * spec.Gamma * CMatrix::Identity(n, n);

    OdeOptions ode;
    ode.mode = OdeMode::Covariance;
    ode.source = P.transpose();
    const auto Cs = integrate_linear_ode(A, S0.transpose(), t_grid, ode);

    CovarianceTrajectory traj;
    traj.t_grid = t_grid;
    traj.spec = spec;
    traj.occupations.resize(static_cast<Eigen::Index>(t_grid.size()), n);
    for (std::size_t k = 0; k < Cs.size(); ++k) {
        const CMatrix S = Cs[k].transpose();
        check_covariance(S, spec.statistics, t_grid[k]);
        traj.occupations.row(static_cast<Eigen::Index>(k)) = S.diagonal().real().transpose();
        if (options.store_full)
            traj.full_S.push_back(S);
    }

    if (options.verify) {
        std::vector<double> gx, gw;
        gauss_legendre(100, gx, gw);
        std::map<double, std::pair<CMatrix, CMatrix>> cache; // step -> (G(h), quadrature integral)
        for (std::size_t k = 0; k + 1 < Cs.size(); ++k) {
            const double h = t_grid[k + 1] - t_grid[k];
            auto it = cache.find(h);
            if (it == cache.end()) {
                std::vector<double> nodes{0.0};
                for (double x : gx)
                    nodes.push_back(0.5 * h * (1.0 + x));
                std::sort(nodes.begin() + 1, nodes.end());
                nodes.push_back(h);
                const auto Gs = integrate_linear_ode(A, CMatrix::Identity(n, n), nodes);
                CMatrix integral = CMatrix::Zero(n, n);
                for (std::size_t q = 0; q < gx.size(); ++q) {
                    const double s = 0.5 * h * (1.0 + gx[q]);
                    const auto pos = std::lower_bound(nodes.begin() + 1, nodes.end() - 1, s) - nodes.begin();
                    const CMatrix& G = Gs[static_cast<std::size_t>(pos)];
                    integral += (0.5 * h * gw[q]) * (G * P.transpose() * G.adjoint());
                }
                it = cache.emplace(h, std::make_pair(Gs.back(), integral)).first;
            }
            const CMatrix& G = it->second.first;
            const CMatrix formal = G * Cs[k] * G.adjoint() + it->second.second;
            const double scale = std::max(Cs[k + 1].norm(), 1e-300);
            const double diff = (formal - Cs[k + 1]).norm();
            if (diff > 1e-7 * scale && diff > 1e-300)
                fail_verify("FormalSolutionMismatch",
                            "evolve_covariance(): formal solution differs by " + std::to_string(diff / scale));
        }
    }
    return traj;
}

std::vector<double> site_occupation(const ModelSpec& spec, int m, const Eigen::VectorXd& s0_diag,
                                    const std::vector<double>& t_grid)
{
    validate(spec, true);
    const RowSystem sys(spec);
    if (m < 1 || m > sys.n)
        fail_config("InvalidSite", "site_occupation(): site out of range");
    if (s0_diag.size() != sys.n)
        fail_config("Shape", "site_occupation(): initial diagonal has the wrong size");
    if (t_grid.empty() || t_grid.front() != 0.0)
        fail_config("NonMonotonicGrid", "site_occupation(): grid must start at 0");
    std::vector<double> out(t_grid.size());
    CVector y = sys.start(m);
    rk4_march(y, t_grid, sys.h, sys,
              [&](std::size_t k, double, const CVector& state) { out[k] = row_occupation(state, s0_diag); });
    return out;
}

std::vector<double> vacuum_occupation_fast(const ModelSpec& spec, int m, const std::vector<double>& t_grid)
{
    return site_occupation(spec, m, Eigen::VectorXd::Zero(site_count(spec)), t_grid);
}

double steady_occupation(const ModelSpec& spec, int m)
{
    validate(spec, true);
    if (spec.Gamma == 0.0)
        return 0.0;
    const RowSystem sys(spec);
    if (m < 1 || m > sys.n)
        fail_config("InvalidSite", "steady_occupation(): site out of range");
    const double delta = dissipative_gap(spec);
    if (!(delta > 0.0))
        fail_numeric("UnstableModel", "steady_occupation(): non-positive gap");

    const double chunk = 1.0 / delta;
    const double t_min = (2.0 * static_cast<double>(sys.n) + 20.0) / delta;
    const double t_cap = 1e4 / delta + t_min;
    const std::vector<double> grid{0.0, chunk};
    CVector y = sys.start(m);
    double t = 0.0;
    while (true) {
        rk4_march(y, grid, sys.h, sys, [](std::size_t, double, const CVector&) {});
        t += chunk;
        const double integral = y[sys.n].real();
        const double rate = sys.pump * y.head(sys.n).squaredNorm();
        if (t >= t_min && rate * chunk < 1e-16 * integral)
            return integral;
        if (t > t_cap)
            fail_numeric("SteadyNotConverged", "steady_occupation(): propagator tail did not decay");
    }
}

std::vector<double> delta_n(const std::vector<double>& n_t, double n_inf)
{
    if (n_inf == 0.0)
        fail_numeric("ZeroSteadyState", "delta_n(): steady-state occupation is zero");
    std::vector<double> out(n_t.size());
    for (std::size_t k = 0; k < n_t.size(); ++k)
        out[k] = std::abs(n_t[k] - n_inf) / n_inf;
    return out;
}

std::vector<double> delta_n_curve(const CovarianceTrajectory& traj, int m)
{
    const Eigen::Index n = traj.occupations.cols();
    if (m < 1 || m > n)
        fail_config("InvalidSite", "delta_n_curve(): site out of range");
    if (traj.spec.Gamma == 0.0)
        fail_numeric("ZeroSteadyState", "delta_n_curve(): Gamma = 0 has an empty steady state");
    const CMatrix S = solve_steady_sylvester(effective_hamiltonian(traj.spec), traj.spec.Gamma);
    std::vector<double> occ(static_cast<std::size_t>(traj.occupations.rows()));
    for (Eigen::Index k = 0; k < traj.occupations.rows(); ++k)
        occ[static_cast<std::size_t>(k)] = traj.occupations(k, m - 1);
    return delta_n(occ, S(m - 1, m - 1).real());
}

namespace {

enum class ScanStatus { Found, Pending, None };

struct Scan {
    ScanStatus status = ScanStatus::None;
    double tau = 0.0;
    std::size_t resume = 1;
    int rejected = 0;
};

// Search for a sustained crossing of eta starting at sample index `from`.
Scan scan_crossing(const std::vector<double>& c, const std::vector<double>& t, double eta, double sustain,
                   double horizon, std::size_t from, int rejected)
{
    Scan out;
    out.rejected = rejected;
    std::size_t i = std::max<std::size_t>(from, 1);
    while (i < c.size()) {
        if (!(c[i - 1] > eta && c[i] <= eta)) {
            ++i;
            continue;
        }
        const double tau = t[i - 1] + (eta - c[i - 1]) * (t[i] - t[i - 1]) / (c[i] - c[i - 1]);
        if (tau > horizon) {
            out.resume = i;
            return out;
        }
        std::size_t k = i;
        bool violated = false;
        while (k < c.size() && t[k] <= sustain * tau) {
            if (c[k] > eta) {
                violated = true;
                break;
            }
            ++k;
        }
        if (violated) {
            ++out.rejected;
            i = k + 1;
            continue;
        }
        out.tau = tau;
        out.resume = i;
        out.status = (k < c.size()) ? ScanStatus::Found : ScanStatus::Pending;
        return out;
    }
    out.resume = c.empty() ? 1 : c.size();
    return out;
}

} // namespace

RelaxationResult relaxation_time(const std::vector<double>& curve, const std::vector<double>& t_grid, double eta,
                                 double sustain_factor, double horizon)
{
    if (!(eta > 0.0 && eta < 1.0))
        fail_config("InvalidParameter", "relaxation_time(): eta must lie in (0, 1)");
    if (curve.size() != t_grid.size() || curve.size() < 2)
        fail_config("Shape", "relaxation_time(): curve and grid must match and have >= 2 samples");
    if (curve.front() < eta)
        fail_config("InvalidParameter", "relaxation_time(): curve starts below eta");
    if (horizon < 0.0)
        horizon = t_grid.back();
    const Scan s = scan_crossing(curve, t_grid, eta, sustain_factor, horizon, 1, 0);
    if (s.status == ScanStatus::None)
        fail_numeric("NotRelaxedWithinHorizon", "relaxation_time(): no sustained crossing before the horizon");
    RelaxationResult r;
    r.tau = s.tau;
    r.threshold = eta;
    r.sustained = s.status == ScanStatus::Found;
    r.sustain_factor = sustain_factor;
    r.horizon = horizon;
    r.rejected_crossings = s.rejected;
    return r;
}

RelaxRun relax(const ModelSpec& spec, InitialKind init, const std::vector<double>& etas, const RelaxOptions& options)
{
    validate(spec, true);
    for (double eta : etas)
        if (!(eta > 0.0 && eta < 1.0))
            fail_config("InvalidParameter", "relax(): eta must lie in (0, 1)");
    const int n = site_count(spec);
    const int m = options.site == 0 ? n : options.site;
    if (m < 1 || m > n)
        fail_config("InvalidSite", "relax(): site out of range");

    RelaxRun run;
    run.spec = spec;
    run.init = init;
    run.site = m;
    run.etas = etas;
    run.Delta = dissipative_gap(spec);
    if (!(run.Delta > 0.0))
        fail_numeric("UnstableModel", "relax(): non-positive gap");
    run.n_inf = steady_occupation(spec, m);
    if (run.n_inf == 0.0)
        fail_numeric("ZeroSteadyState", "relax(): steady-state occupation is zero");

    Eigen::VectorXd s0 = Eigen::VectorXd::Zero(n);
    if (init != InitialKind::Vacuum)
        s0 = initial_state(init, spec).diagonal().real();

    const double dt = 0.05 / run.Delta;
    const double horizon = options.horizon_factor * n / run.Delta;
    const RowSystem sys(spec);
    CVector y = sys.start(m);

    std::vector<double> t{0.0};
    std::vector<double> occ{row_occupation(y, s0)};
    std::vector<double> dn{std::abs(occ[0] - run.n_inf) / run.n_inf};

    struct Pending {
        std::size_t resume = 1;
        int rejected = 0;
        bool done = false;
        RelaxationResult result;
    };
    std::vector<Pending> state(etas.size());
    for (std::size_t e = 0; e < etas.size(); ++e)
        if (dn[0] < etas[e])
            fail_numeric("InvalidInitialCurve", "relax(): delta_n starts below eta");

    constexpr int kChunk = 256;
    std::vector<double> local(kChunk + 1);
    for (int k = 0; k <= kChunk; ++k)
        local[static_cast<std::size_t>(k)] = k * dt;

    while (true) {
        rk4_march(y, local, sys.h, sys, [&](std::size_t k, double, const CVector& st) {
            if (k == 0)
                return;
            t.push_back(static_cast<double>(t.size()) * dt);
            occ.push_back(row_occupation(st, s0));
            dn.push_back(std::abs(occ.back() - run.n_inf) / run.n_inf);
        });
        bool all_done = true;
        for (std::size_t e = 0; e < etas.size(); ++e) {
            auto& p = state[e];
            if (p.done)
                continue;
            const Scan s = scan_crossing(dn, t, etas[e], options.sustain_factor, horizon, p.resume, 0);
            p.rejected = s.rejected;
            if (s.status == ScanStatus::Found) {
                p.done = true;
                p.result.tau = s.tau;
                p.result.threshold = etas[e];
                p.result.sustained = true;
                p.result.sustain_factor = options.sustain_factor;
                p.result.horizon = horizon;
                p.result.rejected_crossings = s.rejected;
                continue;
            }
            all_done = false;
            if (s.status == ScanStatus::None && t.back() >= horizon)
                fail_numeric("NotRelaxedWithinHorizon", "relax(): delta_n did not stay below " +
                                                            std::to_string(etas[e]) + " within t = " +
                                                            std::to_string(horizon));
        }
        if (all_done)
            break;
        if (t.back() > options.sustain_factor * horizon + 10.0 * dt)
            fail_numeric("NotRelaxedWithinHorizon", "relax(): sustain window extends past the run limit");
    }

    for (const auto& p : state)
        run.results.push_back(p.result);
    if (options.keep_curve) {
        run.t = std::move(t);
        run.occupation = std::move(occ);
        run.delta_n = std::move(dn);
    }
    return run;
}

} // namespace skin
