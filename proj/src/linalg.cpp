#include "skinrelax/linalg.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace skin {

double norm_inf(const CMatrix& M)
{
    if (M.size() == 0)
        return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

void require_finite(const CMatrix& M, const std::string& where)
{
    if (!M.allFinite())
        fail_numeric("NonFinite", where + ": matrix has non-finite entries");
}

LogComplex LogComplex::from(cdouble z)
{
    const double a = std::abs(z);
    if (a == 0.0)
        return {};
    return {std::log(a), std::arg(z)};
}

LogComplex log_sum(const std::vector<LogComplex>& terms)
{
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        top = std::max(top, t.log_abs);
    if (std::isinf(top))
        return {};
    cdouble acc = 0.0;
    for (const auto& t : terms)
        if (!t.is_zero())
            acc += std::polar(std::exp(t.log_abs - top), t.phase);
    LogComplex r = LogComplex::from(acc);
    return r.is_zero() ? r : r.scaled(top);
}

LogComplex operator+(const LogComplex& a, const LogComplex& b)
{
    return log_sum({a, b});
}

LogComplex Spectrum::right(Eigen::Index site, Eigen::Index alpha) const
{
    return LogComplex::from(right_vectors(site - 1, alpha)).scaled(static_cast<double>(site) * log_gauge);
}

LogComplex Spectrum::left(Eigen::Index site, Eigen::Index alpha) const
{
    return LogComplex::from(left_vectors(site - 1, alpha)).scaled(-static_cast<double>(site) * log_gauge);
}

namespace {

std::vector<Eigen::Index> sorted_order(const CVector& ev)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev[a].real() != ev[b].real())
            return ev[a].real() < ev[b].real();
        return ev[a].imag() < ev[b].imag();
    });
    return idx;
}

double biorth_error(const CMatrix& left, const CMatrix& right)
{
    const CMatrix overlap = left.adjoint() * right;
    return (overlap - CMatrix::Identity(overlap.rows(), overlap.cols())).cwiseAbs().maxCoeff();
}

} // namespace

Spectrum eig_general(const CMatrix& M)
{
    if (M.rows() != M.cols() || M.rows() < 1)
        fail_config("NotSquare", "eig_general(): matrix must be square and non-empty");
    if (M.rows() > 1024)
        fail_config("TooLarge", "eig_general(): dimension above 1024");
    require_finite(M, "eig_general()");

    const Eigen::Index n = M.rows();
    const double scale = std::max(norm_inf(M), std::numeric_limits<double>::min());

    Eigen::ComplexEigenSolver<CMatrix> solver(M, true);
    if (solver.info() != Eigen::Success)
        fail_numeric("NonConvergence", "eig_general(): QR iteration did not converge");

    const auto order = sorted_order(solver.eigenvalues());
    Spectrum s;
    s.eigenvalues.resize(n);
    s.right_vectors.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        s.eigenvalues[a] = solver.eigenvalues()[order[static_cast<std::size_t>(a)]];
        s.right_vectors.col(a) = solver.eigenvectors().col(order[static_cast<std::size_t>(a)]).normalized();
    }

    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b)
            if (std::abs(s.eigenvalues[a] - s.eigenvalues[b]) < 1e-10 * scale)
                fail_numeric("DegenerateSpectrum", "eig_general(): eigenvalues " + std::to_string(a) + " and " +
                                                       std::to_string(b) + " coincide to 1e-10 relative");

    // Rows of V^{-1} are the biorthonormal partners of the columns of V.
    Eigen::PartialPivLU<CMatrix> lu(s.right_vectors);
    s.left_vectors = lu.inverse().adjoint();
    require_finite(s.left_vectors, "eig_general()");

    s.biorth_residual = biorth_error(s.left_vectors, s.right_vectors);
    double res = 0.0;
    double cond = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto& r = s.right_vectors.col(a);
        const auto& l = s.left_vectors.col(a);
        res = std::max(res, (M * r - s.eigenvalues[a] * r).norm() / (scale * r.norm()));
        res = std::max(res, (M.adjoint() * l - std::conj(s.eigenvalues[a]) * l).norm() / (scale * l.norm()));
        cond = std::max(cond, l.norm() * r.norm());
    }
    s.eig_residual = res;
    s.nonnormality_log = std::log(cond);
    return s;
}

Spectrum eig_similarity_hn(const CMatrix& M, double xi_loc)
{
    if (M.rows() != M.cols() || M.rows() < 2)
        fail_config("NotTridiagonal", "eig_similarity_hn(): need a square matrix of size >= 2");
    if (!(xi_loc > 0.0) || !std::isfinite(xi_loc))
        fail_config("NotTridiagonal",
                    "eig_similarity_hn(): xi_loc must be finite and positive (reciprocal chains go through eig_general)");
    require_finite(M, "eig_similarity_hn()");

    const Eigen::Index n = M.rows();
    const double scale = norm_inf(M);
    const double tol = 1e-12 * std::max(scale, 1.0);
    const cdouble diag = M(0, 0);
    const cdouble up = M(0, 1);
    const cdouble down = M(1, 0);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const cdouble expected = (r == c) ? diag : (c == r + 1) ? up : (r == c + 1) ? down : cdouble{0.0};
            if (std::abs(M(r, c) - expected) > tol)
                fail_config("NotTridiagonal", "eig_similarity_hn(): matrix is not a uniform tridiagonal chain");
        }
    }
    const cdouble prod = up * down;
    if (std::abs(prod.imag()) > tol * tol || prod.real() <= 0.0 || std::abs(up) == 0.0)
        fail_config("NotTridiagonal", "eig_similarity_hn(): hopping product must be real and positive");

    const double g = 0.5 * std::log(std::abs(down) / std::abs(up));
    if (std::abs(g - 1.0 / xi_loc) > 1e-8 * std::max(1.0, 1.0 / xi_loc))
        fail_config("NotTridiagonal", "eig_similarity_hn(): xi_loc inconsistent with the hopping asymmetry");

    // Gauge map to the real symmetric chain with hopping sqrt(up * down).
    const double hop = std::sqrt(prod.real());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(n - 1, hop);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym;
    sym.computeFromTridiagonal(d, sub, Eigen::ComputeEigenvectors);
    if (sym.info() != Eigen::Success)
        fail_numeric("NonConvergence", "eig_similarity_hn(): tridiagonal QL did not converge");

    // Unit phase per bond, so complex hoppings with real product are handled too.
    const cdouble phase_up = up / std::abs(up);
    Eigen::VectorXcd bond_phase(n);
    bond_phase[0] = 1.0;
    for (Eigen::Index j = 1; j < n; ++j)
        bond_phase[j] = bond_phase[j - 1] / phase_up;

    Spectrum s;
    s.eigenvalues = (sym.eigenvalues().cast<cdouble>().array() + diag).matrix();
    const CMatrix phi = sym.eigenvectors().cast<cdouble>();
    s.scale_overflow = static_cast<double>(n) * g > 650.0;
    s.nonnormality_log = static_cast<double>(n - 1) * g;
    s.right_vectors.resize(n, n);
    s.left_vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double w = s.scale_overflow ? 0.0 : static_cast<double>(j + 1) * g;
        s.right_vectors.row(j) = std::exp(w) * bond_phase[j] * phi.row(j);
        s.left_vectors.row(j) = std::exp(-w) * bond_phase[j] * phi.row(j);
    }
    if (s.scale_overflow)
        s.log_gauge = g;

    s.biorth_residual = biorth_error(s.left_vectors, s.right_vectors);
    double res = 0.0;
    if (!s.scale_overflow) {
        for (Eigen::Index a = 0; a < n; ++a) {
            const auto& r = s.right_vectors.col(a);
            res = std::max(res, (M * r - s.eigenvalues[a] * r).norm() / (std::max(scale, 1e-300) * r.norm()));
        }
    } else {
        for (Eigen::Index a = 0; a < n; ++a) {
            Eigen::VectorXd v = sym.eigenvectors().col(a);
            Eigen::VectorXd tv = Eigen::VectorXd::Zero(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j > 0)
                    tv[j] += hop * v[j - 1];
                if (j + 1 < n)
                    tv[j] += hop * v[j + 1];
            }
            res = std::max(res, (tv - sym.eigenvalues()[a] * v).norm() / std::max(scale, 1e-300));
        }
    }
    s.eig_residual = res;
    return s;
}

cdouble poly_eval(const std::vector<cdouble>& coeffs, cdouble z)
{
    cdouble acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

namespace {

cdouble poly_derivative(const std::vector<cdouble>& coeffs, cdouble z)
{
    cdouble acc = 0.0;
    for (std::size_t k = coeffs.size() - 1; k >= 1; --k)
        acc = acc * z + static_cast<double>(k) * coeffs[k];
    return acc;
}

} // namespace

PolyRoots poly_roots(const std::vector<cdouble>& coeffs)
{
    const std::size_t degree = coeffs.size() - 1;
    if (coeffs.size() != 3 && coeffs.size() != 5)
        fail_config("UnsupportedDegree", "poly_roots(): degree must be 2 or 4");
    double cmax = 0.0;
    for (const auto& c : coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            fail_config("NonFinite", "poly_roots(): non-finite coefficient");
        cmax = std::max(cmax, std::abs(c));
    }
    if (std::abs(coeffs.back()) <= 1e-300 || std::abs(coeffs.back()) < 1e-14 * cmax)
        fail_numeric("DegenerateLeadingCoefficient", "poly_roots(): leading coefficient vanishes");

    PolyRoots out;
    out.coefficients = coeffs;
    if (degree == 2) {
        const cdouble a = coeffs[2], b = coeffs[1], c = coeffs[0];
        cdouble sq = std::sqrt(b * b - 4.0 * a * c);
        if ((std::conj(b) * sq).real() < 0.0)
            sq = -sq;
        const cdouble q = -0.5 * (b + sq);
        if (q == cdouble{0.0}) {
            out.roots = {0.0, 0.0};
        } else {
            out.roots = {q / a, c / q};
        }
    } else {
        Eigen::Matrix4cd companion = Eigen::Matrix4cd::Zero();
        for (int k = 0; k < 4; ++k)
            companion(k, 3) = -coeffs[static_cast<std::size_t>(k)] / coeffs[4];
        for (int k = 1; k < 4; ++k)
            companion(k, k - 1) = 1.0;
        Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(companion, false);
        if (es.info() != Eigen::Success)
            fail_numeric("NonConvergence", "poly_roots(): companion eigensolve failed");
        for (int k = 0; k < 4; ++k)
            out.roots.push_back(es.eigenvalues()[k]);
    }

    // Newton polishing, kept only when it lowers the residual.
    for (auto& r : out.roots) {
        for (int it = 0; it < 3; ++it) {
            const cdouble p = poly_eval(coeffs, r);
            const cdouble dp = poly_derivative(coeffs, r);
            if (dp == cdouble{0.0})
                break;
            const cdouble cand = r - p / dp;
            if (std::abs(poly_eval(coeffs, cand)) < std::abs(p))
                r = cand;
            else
                break;
        }
        out.max_residual = std::max(out.max_residual, std::abs(poly_eval(coeffs, r)));
    }
    std::sort(out.roots.begin(), out.roots.end(), [](cdouble a, cdouble b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

double rk4_step(double a_norm_inf)
{
    if (a_norm_inf <= 0.0)
        return 0.01;
    return std::min(0.01, 0.1 / a_norm_inf);
}

void check_time_grid(const std::vector<double>& t_grid)
{
    if (t_grid.empty())
        fail_config("NonMonotonicGrid", "time grid is empty");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1]))
            fail_config("NonMonotonicGrid", "time grid must be strictly increasing");
}

SparseCMatrix to_sparse(const CMatrix& M)
{
    return M.sparseView();
}

namespace {

template <class Op>
std::vector<CMatrix> integrate_with(const Op& A, const CMatrix& X0, const std::vector<double>& t_grid,
                                    const OdeOptions& opt, double h)
{
    std::vector<CMatrix> out;
    out.reserve(t_grid.size());
    CMatrix X = X0;
    const bool has_source = opt.source.has_value();
    auto rhs = [&](const CMatrix& Y) -> CMatrix {
        CMatrix d = A * Y;
        if (opt.mode == OdeMode::Covariance) {
            d += (A * Y.adjoint()).adjoint();
            if (has_source)
                d += *opt.source;
        } else if (has_source) {
            d += *opt.source;
        }
        return d;
    };
    rk4_march(X, t_grid, h, rhs, [&](std::size_t, double, const CMatrix& Y) { out.push_back(Y); });
    return out;
}

} // namespace

std::vector<CMatrix> integrate_linear_ode(const CMatrix& A, const CMatrix& X0, const std::vector<double>& t_grid,
                                          const OdeOptions& options)
{
    if (A.rows() != A.cols())
        fail_config("NotSquare", "integrate_linear_ode(): A must be square");
    if (X0.rows() != A.rows())
        fail_config("Shape", "integrate_linear_ode(): X0 not conformable with A");
    if (options.mode == OdeMode::Covariance && X0.cols() != A.rows())
        fail_config("Shape", "integrate_linear_ode(): covariance mode needs a square state");
    if (options.source && (options.source->rows() != X0.rows() || options.source->cols() != X0.cols()))
        fail_config("Shape", "integrate_linear_ode(): source shape mismatch");
    require_finite(A, "integrate_linear_ode()");
    check_time_grid(t_grid);
    if (t_grid.front() != 0.0)
        fail_config("NonMonotonicGrid", "integrate_linear_ode(): grid must start at 0");

    const double h = rk4_step(norm_inf(A));
    const Eigen::Index n = A.rows();
    const Eigen::Index nnz = (A.array() != cdouble{0.0}).count();
    const bool sparse = n > 8 && nnz * 4 < n * n;

    auto run = [&](double step) {
        if (sparse)
            return integrate_with(to_sparse(A), X0, t_grid, options, step);
        return integrate_with(A, X0, t_grid, options, step);
    };

    auto result = run(h);
    if (options.verify) {
        const auto fine = run(0.5 * h);
        const double scale = fine.back().norm();
        const double diff = (result.back() - fine.back()).norm();
        if (diff > 1e-8 * scale && diff > 1e-300)
            fail_verify("RichardsonMismatch", "integrate_linear_ode(): halved-step rerun differs by " +
                                                  std::to_string(diff / std::max(scale, 1e-300)));
    }
    return result;
}

namespace {

bool imag_parts_from_chain(const CMatrix& H, double& max_imag)
{
    // Uniform tridiagonal with real positive hopping product: spectrum is diag + real.
    const Eigen::Index n = H.rows();
    if (n < 2)
        return false;
    const double tol = 1e-12 * std::max(norm_inf(H), 1.0);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const cdouble expected = (r == c) ? H(0, 0) : (c == r + 1) ? H(0, 1) : (r == c + 1) ? H(1, 0) : 0.0;
            if (std::abs(H(r, c) - expected) > tol)
                return false;
        }
    const cdouble prod = H(0, 1) * H(1, 0);
    if (std::abs(prod.imag()) > tol || prod.real() < 0.0)
        return false;
    max_imag = H(0, 0).imag();
    return true;
}

CMatrix sylvester_dense(const CMatrix& A, const CMatrix& Q)
{
    // A C + C A^dag = Q, vectorized column-major.
    const Eigen::Index n = A.rows();
    const Eigen::Index N = n * n;
    CMatrix K = CMatrix::Zero(N, N);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = i + n * j;
            for (Eigen::Index k = 0; k < n; ++k)
                K(row, k + n * j) += A(i, k);
            for (Eigen::Index l = 0; l < n; ++l)
                K(row, i + n * l) += std::conj(A(j, l));
        }
    const CVector rhs = Eigen::Map<const CVector>(Q.data(), N);
    const CVector x = K.partialPivLu().solve(rhs);
    return Eigen::Map<const CMatrix>(x.data(), n, n);
}

CMatrix sylvester_schur(const CMatrix& A, const CMatrix& Q)
{
    // Bartels-Stewart on the complex Schur form A = U T U^dag.
    Eigen::ComplexSchur<CMatrix> schur(A);
    if (schur.info() != Eigen::Success)
        fail_numeric("NonConvergence", "solve_steady_sylvester(): Schur decomposition failed");
    const CMatrix& T = schur.matrixT();
    const CMatrix& U = schur.matrixU();
    const CMatrix F = U.adjoint() * Q * U;
    const Eigen::Index n = A.rows();
    CMatrix Y = CMatrix::Zero(n, n);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        CVector rhs = F.col(k);
        for (Eigen::Index l = k + 1; l < n; ++l)
            rhs -= std::conj(T(k, l)) * Y.col(l);
        CMatrix Tk = T;
        Tk.diagonal().array() += std::conj(T(k, k));
        Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(rhs);
    }
    return U * Y * U.adjoint();
}

} // namespace

CMatrix solve_steady_sylvester(const CMatrix& H_eff, double pump_rate)
{
    if (H_eff.rows() != H_eff.cols())
        fail_config("NotSquare", "solve_steady_sylvester(): H_eff must be square");
    require_finite(H_eff, "solve_steady_sylvester()");
    const Eigen::Index n = H_eff.rows();

    double max_imag = 0.0;
    if (!imag_parts_from_chain(H_eff, max_imag)) {
        if (n == 1) {
            max_imag = H_eff(0, 0).imag();
        } else {
            Eigen::ComplexEigenSolver<CMatrix> es(H_eff, false);
            max_imag = es.eigenvalues().imag().maxCoeff();
        }
    }
    if (max_imag >= -1e-12)
        fail_numeric("UnstableModel", "solve_steady_sylvester(): eigenvalue with Im E >= -1e-12");

    const CMatrix A = -kI * H_eff;
    const CMatrix Q = -2.0 * pump_rate * CMatrix::Identity(n, n);
    CMatrix C = (n <= 24) ? sylvester_dense(A, Q) : sylvester_schur(A, Q);
    C = 0.5 * (C + C.adjoint()).eval();
    require_finite(C, "solve_steady_sylvester()");

    const CMatrix residual = A * C + C * A.adjoint() - Q;
    const double bound = 1e-10 * std::max(norm_inf(C), 1e-300) * std::max(norm_inf(H_eff), 1.0);
    if (pump_rate != 0.0 && norm_inf(residual) > bound)
        fail_numeric("SteadyResidual", "solve_steady_sylvester(): residual " + std::to_string(norm_inf(residual)) +
                                           " exceeds bound");
    return C.transpose();
}

CMatrix expm_taylor(const CMatrix& X)
{
    const double nrm = norm_inf(X);
    int squarings = 0;
    if (nrm > 0.5)
        squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const CMatrix Y = X / std::ldexp(1.0, squarings);
    CMatrix sum = CMatrix::Identity(X.rows(), X.cols());
    CMatrix term = sum;
    for (int k = 1; k < 200; ++k) {
        term = (term * Y / static_cast<double>(k)).eval();
        sum += term;
        if (term.cwiseAbs().maxCoeff() == 0.0)
            break;
        if (k > 6 && norm_inf(term) < 1e-300)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        sum = (sum * sum).eval();
    return sum;
}

} // namespace skin
