#include <doctest.h>

#include "skinrelax/dynamics.hpp"
#include "skinrelax/oracle.hpp"

using namespace skin;

namespace {

ModelSpec hn(int L, double kappa, double Gamma, Statistics s = Statistics::Fermion)
{
    ModelSpec spec;
    spec.L = L;
    spec.kappa = kappa;
    spec.Gamma = Gamma;
    spec.statistics = s;
    return spec;
}

} // namespace

TEST_CASE("Jordan-Wigner operators obey canonical anticommutation")
{
    const FockLindblad fl = build_fock_lindblad(hn(3, 0.5, 0.1));
    REQUIRE(fl.dim == 8);
    const CMatrix I = CMatrix::Identity(8, 8);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const CMatrix& ca = fl.c[static_cast<std::size_t>(a)];
            const CMatrix& cb = fl.c[static_cast<std::size_t>(b)];
            CHECK((ca * cb.adjoint() + cb.adjoint() * ca - (a == b ? I : CMatrix::Zero(8, 8))).norm() < 1e-14);
            CHECK((ca * cb + cb * ca).norm() < 1e-14);
        }
    CHECK((fl.hamiltonian - fl.hamiltonian.adjoint()).norm() < 1e-14);
}

TEST_CASE("Liouvillian preserves the trace and its adjoint fixes the identity")
{
    const FockLindblad fl = build_fock_lindblad(hn(2, 0.7, 0.2));
    const CMatrix Lv = liouvillian_matrix(fl);
    const CMatrix La = adjoint_liouvillian_matrix(fl);
    CVector vec_id = CVector::Zero(16);
    for (int k = 0; k < 4; ++k)
        vec_id[k * 4 + k] = 1.0;
    // Trace functional is vec(I)^dag; it must annihilate every column.
    CHECK((vec_id.adjoint() * Lv).norm() < 1e-13);
    CHECK((La * vec_id).norm() < 1e-13);
    CHECK((La - Lv.adjoint()).norm() < 1e-13);
}

TEST_CASE("exact master equation agrees with the covariance route")
{
    ModelSpec s = hn(3, 0.6, 0.15);
    s.lambda_loss = 0.1;
    const std::vector<double> t = {0.0, 1.0, 3.0, 6.0};
    const FockLindblad fl = build_fock_lindblad(s);
    const Eigen::MatrixXd exact = lindblad_brute(fl, t);
    const auto traj = evolve_covariance(s, CMatrix::Zero(3, 3), t);
    CHECK((exact - traj.occupations).cwiseAbs().maxCoeff() < 1e-8);

    FockLindblad filled = fl;
    filled.rho = product_state(fl, Eigen::VectorXd::Ones(3));
    const Eigen::MatrixXd exact_f = lindblad_brute(filled, t);
    const auto traj_f = evolve_covariance(s, CMatrix::Identity(3, 3), t);
    CHECK((exact_f - traj_f.occupations).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("single-particle modes of the Liouvillian")
{
    const ThirdQuantizationReport r = third_quantization_check(build_fock_lindblad(hn(3, 0.5, 0.1)));
    CHECK(r.passed);
    CHECK(r.pairs_checked == 9);
    CHECK(r.pairs_passed == 9);
    CHECK(r.max_diagonal_rate_error < 1e-10);
    CHECK(r.grid_conjugation_closed);
}

TEST_CASE("oracle scope")
{
    CHECK_THROWS_AS(build_fock_lindblad(hn(5, 0.5, 0.1)), Error);
    CHECK_THROWS_AS(build_fock_lindblad(hn(2, 0.5, 0.1, Statistics::Boson)), Error);
}
