#include "skinrelax/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace skin {

namespace {

CMatrix annihilator(int L, int site)
{
    const int dim = 1 << L;
    CMatrix c = CMatrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        if (!(s & (1 << site)))
            continue;
        int below = 0;
        for (int k = 0; k < site; ++k)
            below += (s >> k) & 1;
        c(s ^ (1 << site), s) = (below % 2) ? -1.0 : 1.0;
    }
    return c;
}

CVector vec(const CMatrix& M) { return Eigen::Map<const CVector>(M.data(), M.size()); }

CMatrix unvec(const CVector& v, int dim) { return Eigen::Map<const CMatrix>(v.data(), dim, dim); }

} // namespace

FockLindblad build_fock_lindblad(const ModelSpec& spec)
{
    if (spec.kind != ModelKind::HN || spec.statistics != Statistics::Fermion)
        fail_config("UnsupportedModel", "build_fock_lindblad(): fermionic HN chains only");
    if (spec.L > kFockMaxSites)
        fail_config("TooLarge", "build_fock_lindblad(): at most 4 sites");
    validate(spec, true);

    FockLindblad fl;
    fl.L = spec.L;
    fl.dim = 1 << spec.L;
    fl.spec = spec;
    for (int j = 0; j < spec.L; ++j)
        fl.c.push_back(annihilator(spec.L, j));

    fl.hamiltonian = CMatrix::Zero(fl.dim, fl.dim);
    for (int j = 0; j + 1 < spec.L; ++j) {
        const CMatrix hop = fl.c[j + 1].adjoint() * fl.c[j];
        fl.hamiltonian += 0.5 * spec.w * (hop + hop.adjoint());
    }
    for (int j = 0; j + 1 < spec.L; ++j) {
        fl.jump_ops.push_back(fl.c[j] - kI * fl.c[j + 1]);
        fl.rates.push_back(spec.kappa);
    }
    const auto lam = hn_local_loss(spec);
    for (int j = 0; j < spec.L; ++j) {
        fl.jump_ops.push_back(fl.c[j]);
        fl.rates.push_back(2.0 * lam[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < spec.L; ++j) {
        fl.jump_ops.push_back(fl.c[j].adjoint());
        fl.rates.push_back(2.0 * spec.Gamma);
    }
    fl.rho = product_state(fl, Eigen::VectorXd::Zero(spec.L));
    return fl;
}

CMatrix product_state(const FockLindblad& fl, const Eigen::VectorXd& occupations)
{
    if (occupations.size() != fl.L)
        fail_config("Shape", "product_state(): one occupation per site");
    CMatrix rho = CMatrix::Zero(fl.dim, fl.dim);
    for (int s = 0; s < fl.dim; ++s) {
        double p = 1.0;
        for (int j = 0; j < fl.L; ++j) {
            const double n = occupations[j];
            if (n < 0.0 || n > 1.0)
                fail_config("InvalidParameter", "product_state(): occupations must lie in [0, 1]");
            p *= (s & (1 << j)) ? n : 1.0 - n;
        }
        rho(s, s) = p;
    }
    return rho;
}

CMatrix liouvillian_matrix(const FockLindblad& fl)
{
    const CMatrix I = CMatrix::Identity(fl.dim, fl.dim);
    const CMatrix& H = fl.hamiltonian;
    CMatrix S = -kI * (Eigen::kroneckerProduct(I, H) - Eigen::kroneckerProduct(H.transpose(), I)).eval();
    for (std::size_t k = 0; k < fl.jump_ops.size(); ++k) {
        const CMatrix& X = fl.jump_ops[k];
        const CMatrix XdX = X.adjoint() * X;
        S += fl.rates[k] * (Eigen::kroneckerProduct(X.conjugate(), X).eval() -
                            0.5 * Eigen::kroneckerProduct(I, XdX).eval() -
                            0.5 * Eigen::kroneckerProduct(XdX.transpose(), I).eval());
    }
    return S;
}

CMatrix adjoint_liouvillian_matrix(const FockLindblad& fl)
{
    const CMatrix I = CMatrix::Identity(fl.dim, fl.dim);
    const CMatrix& H = fl.hamiltonian;
    CMatrix S = kI * (Eigen::kroneckerProduct(I, H) - Eigen::kroneckerProduct(H.transpose(), I)).eval();
    for (std::size_t k = 0; k < fl.jump_ops.size(); ++k) {
        const CMatrix& X = fl.jump_ops[k];
        const CMatrix XdX = X.adjoint() * X;
        S += fl.rates[k] * (Eigen::kroneckerProduct(X.transpose(), X.adjoint()).eval() -
                            0.5 * Eigen::kroneckerProduct(I, XdX).eval() -
                            0.5 * Eigen::kroneckerProduct(XdX.transpose(), I).eval());
    }
    return S;
}

Eigen::MatrixXd lindblad_brute(const FockLindblad& fl, const std::vector<double>& t_grid)
{
    const CMatrix S = liouvillian_matrix(fl);
    const double h = std::min(0.005, 0.02 / std::max(norm_inf(S), 1e-300));
    std::vector<CMatrix> number;
    for (const auto& c : fl.c)
        number.push_back(c.adjoint() * c);

    Eigen::MatrixXd occ(static_cast<Eigen::Index>(t_grid.size()), fl.L);
    CVector y = vec(fl.rho);
    rk4_march(
        y, t_grid, h, [&](const CVector& v) -> CVector { return S * v; },
        [&](std::size_t k, double t, const CVector& v) {
            const CMatrix rho = unvec(v, fl.dim);
            const cdouble tr = rho.trace();
            if (std::abs(tr - 1.0) > 1e-8)
                fail_numeric("TraceDrift", "lindblad_brute(): trace drifted at t = " + std::to_string(t));
            Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-10)
                fail_numeric("NegativeDensity", "lindblad_brute(): rho lost positivity at t = " + std::to_string(t));
            for (int j = 0; j < fl.L; ++j)
                occ(static_cast<Eigen::Index>(k), j) = (rho * number[static_cast<std::size_t>(j)]).trace().real();
        });
    return occ;
}

ThirdQuantizationReport third_quantization_check(const FockLindblad& fl, double tol)
{
    if (fl.L > 3)
        fail_config("TooLarge", "third_quantization_check(): at most 3 sites");
    ThirdQuantizationReport rep;
    const CMatrix A = adjoint_liouvillian_matrix(fl);
    const CMatrix I = CMatrix::Identity(fl.dim, fl.dim);
    rep.identity_residual = (A * vec(I)).norm();
    if (rep.identity_residual > tol * std::max(1.0, norm_inf(A)))
        fail_numeric("IdentityNotAnnihilated", "third_quantization_check(): adjoint Liouvillian misses the identity");

    const ModelSpec& spec = fl.spec;
    const CMatrix H = effective_hamiltonian(spec);
    const bool uniform = spec.edge_loss == EdgeLoss::Uniform;
    const Spectrum sp = (spec.L >= 2 && spec.kappa < spec.w && uniform) ? hn_spectral_analytic(spec) : eig_general(H);
    const CMatrix S_ss = spec.Gamma > 0.0 ? solve_steady_sylvester(H, spec.Gamma) : CMatrix::Zero(spec.L, spec.L);
    const double delta = dissipative_gap(spec);
    const Eigen::Index n = sp.size();

    std::vector<cdouble> grid;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const CVector la = sp.left_vectors.col(a);
            const CVector lb = sp.left_vectors.col(b);
            const cdouble Ea = sp.eigenvalues[a], Eb = sp.eigenvalues[b];
            const cdouble rate = -kI * (Eb - std::conj(Ea));
            grid.push_back(rate);

            // b_a = sum_j conj(psi^l_j(a)) c_j
            CMatrix ba = CMatrix::Zero(fl.dim, fl.dim), bb = ba;
            for (Eigen::Index j = 0; j < n; ++j) {
                ba += std::conj(la[j]) * fl.c[static_cast<std::size_t>(j)];
                bb += std::conj(lb[j]) * fl.c[static_cast<std::size_t>(j)];
            }
            const cdouble S_ab = -kI * 2.0 * spec.Gamma * lb.dot(la) / (Eb - std::conj(Ea));
            const CMatrix l_op = ba.adjoint() * bb - S_ab * I;
            const CVector lhs = A * vec(l_op);
            const double mode_res = (lhs - rate * vec(l_op)).norm() / std::max(vec(l_op).norm(), 1e-300);

            const cdouble sandwich = lb.dot(S_ss.transpose() * la);
            const double steady_res = std::abs(S_ab - sandwich) / std::max(1.0, std::abs(sandwich));

            ++rep.pairs_checked;
            rep.max_mode_residual = std::max(rep.max_mode_residual, mode_res);
            rep.max_steady_residual = std::max(rep.max_steady_residual, steady_res);
            if (mode_res <= tol && steady_res <= tol)
                ++rep.pairs_passed;
            if (a == b && uniform)
                rep.max_diagonal_rate_error = std::max(rep.max_diagonal_rate_error, std::abs(rate + 2.0 * delta));
        }
    }
    rep.grid_conjugation_closed = true;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const cdouble z = std::conj(grid[static_cast<std::size_t>(a * n + b)]);
            const cdouble partner = grid[static_cast<std::size_t>(b * n + a)];
            if (std::abs(z - partner) > tol * std::max(1.0, std::abs(z)))
                rep.grid_conjugation_closed = false;
        }
    rep.passed = rep.pairs_passed == rep.pairs_checked && rep.grid_conjugation_closed &&
                 rep.max_diagonal_rate_error <= tol * std::max(1.0, delta);
    return rep;
}

} // namespace skin
