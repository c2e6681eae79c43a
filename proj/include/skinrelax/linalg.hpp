#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "skinrelax/error.hpp"

namespace skin {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using SparseCMatrix = Eigen::SparseMatrix<cdouble>;

inline constexpr cdouble kI{0.0, 1.0};

// Stored covariance C has C(r, c) = <c_c^dag c_r>, the transpose of S_nm = <c_n^dag c_m>.
// With this layout dC/dt = -i H C + i C H^dag + P, the form the Fock-space oracle confirms.
inline constexpr bool kCovarianceStoredTransposed = true;

double norm_inf(const CMatrix& M);
void require_finite(const CMatrix& M, const std::string& where);

// Complex number held as (log|z|, arg z); zero is log_abs = -inf.
struct LogComplex {
    double log_abs = -std::numeric_limits<double>::infinity();
    double phase = 0.0;

    static LogComplex from(cdouble z);
    cdouble value() const { return std::polar(std::exp(log_abs), phase); }
    bool is_zero() const { return std::isinf(log_abs) && log_abs < 0; }

    LogComplex operator*(const LogComplex& o) const { return {log_abs + o.log_abs, phase + o.phase}; }
    LogComplex scaled(double log_factor) const { return {log_abs + log_factor, phase}; }
};

LogComplex log_sum(const std::vector<LogComplex>& terms);
LogComplex operator+(const LogComplex& a, const LogComplex& b);

struct Spectrum {
    CVector eigenvalues;
    CMatrix right_vectors; // columns psi^r(alpha)
    CMatrix left_vectors;  // columns psi^l(alpha), <psi^l(a)|psi^r(b)> = delta_ab
    double biorth_residual = 0.0;
    double eig_residual = 0.0;
    // Nonzero when the stored columns are gauge-stripped: the true components are
    // psi^r_j = e^{+j g} stored_j and psi^l_j = e^{-j g} stored_j (j = 1..N).
    double log_gauge = 0.0;
    bool scale_overflow = false;
    // Log of the largest expansion coefficient the spectral sum has to cancel.
    double nonnormality_log = 0.0;

    Eigen::Index size() const { return eigenvalues.size(); }
    LogComplex right(Eigen::Index site, Eigen::Index alpha) const; // site is 1-based
    LogComplex left(Eigen::Index site, Eigen::Index alpha) const;
};

Spectrum eig_general(const CMatrix& M);
Spectrum eig_similarity_hn(const CMatrix& M, double xi_loc);

struct PolyRoots {
    std::vector<cdouble> coefficients; // ascending degree
    std::vector<cdouble> roots;
    double max_residual = 0.0;
};

PolyRoots poly_roots(const std::vector<cdouble>& coeffs);
cdouble poly_eval(const std::vector<cdouble>& coeffs, cdouble z);

enum class OdeMode { Linear, Covariance };

struct OdeOptions {
    OdeMode mode = OdeMode::Linear;
    std::optional<CMatrix> source;
    bool verify = false;
};

double rk4_step(double a_norm_inf);
void check_time_grid(const std::vector<double>& t_grid);

// Fixed-step classical RK4 for an autonomous system y' = f(y). Every grid point is hit
// exactly; observe(k, t, y) runs at each grid point, including the first.
template <class State, class Rhs, class Observe>
void rk4_march(State& y, const std::vector<double>& t_grid, double h_max, Rhs&& f, Observe&& observe)
{
    check_time_grid(t_grid);
    observe(std::size_t{0}, t_grid.front(), y);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double span = t_grid[k] - t_grid[k - 1];
        const auto n = std::max<long>(1, static_cast<long>(std::ceil(span / h_max - 1e-9)));
        const double h = span / static_cast<double>(n);
        for (long s = 0; s < n; ++s) {
            const State k1 = f(y);
            const State k2 = f(State(y + (0.5 * h) * k1));
            const State k3 = f(State(y + (0.5 * h) * k2));
            const State k4 = f(State(y + h * k3));
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        const double nrm = y.norm();
        if (!(nrm < 1e300))
            fail_numeric("StepOverflow", "rk4_march(): state norm exceeded 1e300 at t = " + std::to_string(t_grid[k]));
        observe(k, t_grid[k], y);
    }
}

std::vector<CMatrix> integrate_linear_ode(const CMatrix& A, const CMatrix& X0, const std::vector<double>& t_grid,
                                          const OdeOptions& options = {});

// Fixed point of dC/dt = -i H C + i C H^dag + 2 Gamma I, returned in the S_nm = <c_n^dag c_m> layout.
CMatrix solve_steady_sylvester(const CMatrix& H_eff, double pump_rate);

// e^{-i H t} by Taylor summation; meant for small ||H t||.
CMatrix expm_taylor(const CMatrix& minus_i_H_t);

SparseCMatrix to_sparse(const CMatrix& M);

} // namespace skin
