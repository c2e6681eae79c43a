#pragma once

#include <string>
#include <vector>

#include "skinrelax/models.hpp"

namespace skin {

enum class InitialKind { Vacuum, UniformSteadyAverage, AllFilled };
const char* to_string(InitialKind k);
InitialKind parse_initial_kind(const std::string& s);

// Covariance in the S_nm = <c_n^dag c_m> layout.
CMatrix initial_state(InitialKind kind, const ModelSpec& spec);

struct CovarianceTrajectory {
    std::vector<double> t_grid;
    Eigen::MatrixXd occupations; // (time, site)
    std::vector<CMatrix> full_S; // only when requested
    ModelSpec spec;
};

struct EvolveOptions {
    bool store_full = false;
    bool verify = false; // compare against the Gauss-Legendre formal solution
};

CovarianceTrajectory evolve_covariance(const ModelSpec& spec, const CMatrix& S0, const std::vector<double>& t_grid,
                                       const EvolveOptions& options = {});

// n_m(t) from a diagonal initial covariance using only row m of the propagator.
std::vector<double> site_occupation(const ModelSpec& spec, int m, const Eigen::VectorXd& s0_diag,
                                    const std::vector<double>& t_grid);
std::vector<double> vacuum_occupation_fast(const ModelSpec& spec, int m, const std::vector<double>& t_grid);

// n_m(infinity) = 2 Gamma int_0^inf sum_j |G_mj|^2, integrated until the tail is negligible.
double steady_occupation(const ModelSpec& spec, int m);

std::vector<double> delta_n_curve(const CovarianceTrajectory& traj, int m);
std::vector<double> delta_n(const std::vector<double>& n_t, double n_inf);

struct RelaxationResult {
    double tau = 0.0;
    double threshold = 0.0;
    bool sustained = false;
    double sustain_factor = 3.0;
    double horizon = 0.0;
    std::string crossing_method = "linear";
    int rejected_crossings = 0;
};

RelaxationResult relaxation_time(const std::vector<double>& curve, const std::vector<double>& t_grid, double eta,
                                 double sustain_factor = 3.0, double horizon = -1.0);

struct RelaxOptions {
    int site = 0;               // 0 = last site
    double horizon_factor = 10.0;
    double sustain_factor = 3.0;
    bool keep_curve = false;
};

struct RelaxRun {
    ModelSpec spec;
    InitialKind init = InitialKind::Vacuum;
    int site = 0;
    double Delta = 0.0;
    double n_inf = 0.0;
    std::vector<double> etas;
    std::vector<RelaxationResult> results; // one per eta
    std::vector<double> t;                 // filled when keep_curve
    std::vector<double> occupation;
    std::vector<double> delta_n;
};

RelaxRun relax(const ModelSpec& spec, InitialKind init, const std::vector<double>& etas,
               const RelaxOptions& options = {});

} // namespace skin
