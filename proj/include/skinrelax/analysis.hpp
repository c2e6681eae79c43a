#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "skinrelax/dynamics.hpp"

namespace skin {

struct FitReport {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t window_begin = 0; // half-open index range
    std::size_t window_end = 0;
    std::vector<double> residuals;
};

// Unweighted least squares of y against x over [begin, end).
FitReport linear_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin = 0,
                     std::size_t end = static_cast<std::size_t>(-1), std::size_t min_points = 2);

enum class LengthConvention { UnitCells, Sites };
const char* to_string(LengthConvention c);

// L / (xi_loc Delta). SSH lengths follow `convention`; NNN uses the extracted localization length.
double evec_prediction(const ModelSpec& spec, LengthConvention convention = LengthConvention::UnitCells);

// Named numeric parameter of a ModelSpec.
void set_parameter(ModelSpec& spec, const std::string& name, double value);
double get_parameter(const ModelSpec& spec, const std::string& name);

struct SweepPoint {
    double value = 0.0;
    RelaxRun run;
    double tau(std::size_t eta_index = 0) const { return run.results.at(eta_index).tau; }
    double tau_times_Delta(std::size_t eta_index = 0) const { return tau(eta_index) * run.Delta; }
};

struct SweepResult {
    std::string axis;
    std::vector<SweepPoint> points; // sorted by value
    ModelSpec spec_base;
    InitialKind init = InitialKind::Vacuum;
    std::vector<double> etas;
};

// One relax() per value, spread over `workers` threads; results are independent of scheduling.
SweepResult run_sweep(const ModelSpec& base, const std::string& axis, const std::vector<double>& values,
                      InitialKind init, const std::vector<double>& etas, const RelaxOptions& options = {},
                      int workers = 1);

FitReport scaling_fit(const SweepResult& sweep, double window_fraction = 0.3, std::size_t eta_index = 0);

struct SaturationPoint {
    double Gamma = 0.0;
    double xi_prop = 0.0;
    std::vector<double> tau_sat_times_Delta; // one per eta
    std::vector<double> L_values;
};

struct SaturationStudy {
    std::vector<double> etas;
    std::vector<SaturationPoint> points;
    std::vector<double> dropped_gammas; // no plateau within the supplied lengths
    std::vector<FitReport> fits;        // one per eta, tau_sat Delta against xi_prop
};

// True when the last three taus agree within 1%.
bool has_plateau(const std::vector<double>& taus);

SaturationStudy saturation_study(const std::vector<double>& gammas, const ModelSpec& spec_base,
                                 const std::vector<double>& etas, const std::vector<double>& L_values,
                                 int workers = 1);

enum class HeightMode { Amplifying, Attenuating };

struct XiPropFit {
    FitReport fit;
    double xi_est = 0.0;
};

// ln(height) against distance; amplifying data needs a positive slope (xi = 1/slope),
// attenuating data a negative one (xi = -1/slope).
XiPropFit xi_prop_fit(const std::vector<double>& distance, const std::vector<double>& heights, HeightMode mode);

struct HeightProfile {
    std::vector<int> j;
    std::vector<double> peak_time;
    std::vector<double> height;     // max_t |G_mj(t)|^2
    std::vector<double> normalized; // height / max height
};

// Peak of |G_mj(t)|^2 over t in [0, t_end] for every source j, sampled every dt.
HeightProfile peak_heights(const ModelSpec& spec, int m, double t_end, double dt);

// 1 - sqrt(Delta t / L), clipped at zero.
std::vector<double> small_gamma_curve(int L, double Delta, const std::vector<double>& t_grid);

struct InterferenceTerms {
    std::vector<LogComplex> terms; // one per eigenvalue
    LogComplex stable_sum;         // direct route
    double max_term_log10 = 0.0;
    double sum_log10 = 0.0;
    double abs_sum_log = 0.0; // log of sum |terms|
};

InterferenceTerms interference_terms(const ModelSpec& spec, int m, int j, double t);

struct LocalizationReport {
    cdouble eigenvalue;
    std::vector<cdouble> roots;
    std::vector<double> exponents;
    std::vector<double> phases;
    double xi_extracted = 0.0;
    double max_residual = 0.0;
};

// Characteristic polynomial in the transfer factor, ascending coefficients.
std::vector<cdouble> characteristic_polynomial(const ModelSpec& spec, cdouble E);

LocalizationReport localization_extract(const ModelSpec& spec, cdouble E);

} // namespace skin
