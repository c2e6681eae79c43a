#pragma once

#include <vector>

#include "skinrelax/models.hpp"

namespace skin {

enum class Route { Direct, Spectral, NoBounce, BounceSum, Simplified };
const char* to_string(Route r);

// Sites are 1-based throughout the public API.
struct PropagatorSample {
    int m = 0;
    int j = 0;
    double t = 0.0;
    cdouble G{0.0, 0.0};
    LogComplex logG;      // always filled
    bool log_form = false; // G itself is not representable; use logG
    double P = 0.0;
    double logP = 0.0;
    Route route = Route::Direct;
};

PropagatorSample make_sample(int m, int j, double t, const LogComplex& g, Route route);

// Column j of G(t) = e^{-i H t}; samples ordered by time, then by m.
std::vector<PropagatorSample> propagate_direct(const CMatrix& H_eff, int j, const std::vector<double>& t_grid);

// Row m of G(t) for every grid time: result(k, j-1) = G(m, j; t_k).
CMatrix propagate_row(const CMatrix& H_eff, int m, const std::vector<double>& t_grid);

inline constexpr double kCancellationGuard = 25.0;

PropagatorSample propagate_spectral(const Spectrum& spectrum, int m, int j, double t);

cdouble g_infinity(int d, double J, double t);
cdouble g_infinity_bessel(int d, double J, double t);
LogComplex log_g_infinity(int d, double J, double t);

struct BounceResult {
    cdouble G;
    LogComplex logG;
    int B_used = 0;
};

BounceResult g_obc_bounce(int m, int j, double t, const ModelSpec& spec, int B = 0);

// log10 of |b = +-1 image terms| relative to the b = 0 term.
double bounce_correction_log10(int m, int j, double t, const ModelSpec& spec);

// P(L, j; t) to the last site in log form.
double log_p_no_bounce(const ModelSpec& spec, int j, double t);
double p_no_bounce(const ModelSpec& spec, int j, double t);
double log_p_simplified(const ModelSpec& spec, int d, double t);
double p_simplified(const ModelSpec& spec, int d, double t);

struct PeakStats {
    int d = 0;
    double t_max = 0.0;         // refined numeric peak time
    double t_max_grid = 0.0;    // raw grid argmax
    double grid_step = 0.0;
    double t_max_formula = 0.0; // d / Delta
    double height = 0.0;
    double log_height = 0.0;
    double sigma = 0.0;         // sqrt(d) / Delta
    double fitted_width = 0.0;  // half-width at height * e^{-1/2}
    double xi_prop_implied = 0.0;
};

PeakStats peak_stats(const ModelSpec& spec, int j);

// Propagation length from the peak heights at d and d + 1, after removing the 1/d prefactor.
double xi_prop_implied(const ModelSpec& spec, int d);

struct LocalityFit {
    double slope = 0.0;
    double coefficient_error = 0.0; // |G/t + i H_mj| / |H_mj| at the smallest t (d = 1)
};

LocalityFit locality_order_check(const CMatrix& H_eff, int m, int j, const std::vector<double>& t_list);

} // namespace skin
