#pragma once

#include <vector>

#include "skinrelax/models.hpp"

namespace skin {

// Exact master equation of a short fermionic HN chain on the 2^L Fock space.
struct FockLindblad {
    int L = 0;
    int dim = 0;
    ModelSpec spec;
    std::vector<CMatrix> c;        // Jordan-Wigner annihilators
    CMatrix hamiltonian;
    std::vector<CMatrix> jump_ops; // each enters rate * D[X]
    std::vector<double> rates;
    CMatrix rho;                   // initial state
};

inline constexpr int kFockMaxSites = 4;

FockLindblad build_fock_lindblad(const ModelSpec& spec);

// Product state with the given site occupations (each in [0, 1]).
CMatrix product_state(const FockLindblad& fl, const Eigen::VectorXd& occupations);

// Superoperator acting on column-major vec(rho).
CMatrix liouvillian_matrix(const FockLindblad& fl);
CMatrix adjoint_liouvillian_matrix(const FockLindblad& fl);

// n_m(t) for every site, rows = times.
Eigen::MatrixXd lindblad_brute(const FockLindblad& fl, const std::vector<double>& t_grid);

struct ThirdQuantizationReport {
    int pairs_checked = 0;
    int pairs_passed = 0;
    double identity_residual = 0.0;
    double max_mode_residual = 0.0;       // relative
    double max_steady_residual = 0.0;     // S_ab against the steady covariance sandwich
    double max_diagonal_rate_error = 0.0; // max |eigenvalue(a, a) + 2 Delta| (uniform edges)
    bool grid_conjugation_closed = false;
    bool passed = false;
};

ThirdQuantizationReport third_quantization_check(const FockLindblad& fl, double tol = 1e-8);

} // namespace skin
