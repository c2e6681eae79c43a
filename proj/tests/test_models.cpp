#include <doctest.h>

#include <algorithm>

#include "skinrelax/models.hpp"

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

std::vector<double> sorted_real(const CVector& v)
{
    std::vector<double> out;
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out.push_back(v[k].real());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("gap for each model and statistics")
{
    ModelSpec s = hn(5, 0.5, 0.1);
    s.lambda_loss = 0.2;
    CHECK(dissipative_gap(s) == doctest::Approx(0.8));
    s.statistics = Statistics::Boson;
    CHECK(dissipative_gap(s) == doctest::Approx(0.6));

    ModelSpec ssh;
    ssh.kind = ModelKind::SSH;
    ssh.kappa = 0.5;
    ssh.gamma_ssh = 0.3;
    ssh.Gamma = 0.1;
    CHECK(dissipative_gap(ssh) == doctest::Approx(0.5));
}

TEST_CASE("HN chain matrix")
{
    const ModelSpec s = hn(6, 0.4, 0.1);
    const CMatrix H = effective_hamiltonian(s);
    CHECK(H(1, 0) == cdouble(0.7, 0.0));
    CHECK(H(0, 1) == cdouble(0.3, 0.0));
    CHECK(H(0, 2) == cdouble(0.0, 0.0));
    for (int j = 0; j < 6; ++j)
        CHECK(H(j, j) == cdouble(0.0, -0.5));

    ModelSpec lit = s;
    lit.edge_loss = EdgeLoss::Literal;
    const CMatrix HL = effective_hamiltonian(lit);
    CHECK(HL(0, 0).imag() == doctest::Approx(-0.7));
    CHECK(HL(5, 5).imag() == doctest::Approx(-0.7));
    CHECK(HL(2, 2).imag() == doctest::Approx(-0.5));
}

TEST_CASE("Lindblad data reproduce the chain matrix for both edge conventions")
{
    for (EdgeLoss e : {EdgeLoss::Uniform, EdgeLoss::Literal})
        for (Statistics st : {Statistics::Fermion, Statistics::Boson}) {
            ModelSpec s = hn(5, 0.6, 0.1, st);
            s.lambda_loss = 0.05;
            s.edge_loss = e;
            const HnModel m = build_hn(s);
            CHECK((effective_from_lindblad(m.lindblad, st) - m.H_eff).cwiseAbs().maxCoeff() < 1e-14);
            CHECK((m.lindblad.Lmat - m.lindblad.Lmat.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        }
}

TEST_CASE("closed-form HN spectrum matches a dense eigensolve")
{
    const ModelSpec s = hn(9, 0.5, 0.2);
    const Spectrum a = hn_spectral_analytic(s);
    const Spectrum b = eig_general(effective_hamiltonian(s));
    const auto ra = sorted_real(a.eigenvalues), rb = sorted_real(b.eigenvalues);
    for (std::size_t k = 0; k < ra.size(); ++k)
        CHECK(ra[k] == doctest::Approx(rb[k]).epsilon(1e-12));
    CHECK(a.biorth_residual < 1e-12);
    CHECK(a.eig_residual < 1e-12);
    CHECK(a.nonnormality_log == doctest::Approx(8 * hn_inverse_xi(1.0, 0.5)));

    ModelSpec lit = s;
    lit.edge_loss = EdgeLoss::Literal;
    CHECK_THROWS_AS(hn_spectral_analytic(lit), Error);
}

TEST_CASE("length scales")
{
    // 1 / xi_loc = ln sqrt((w + kappa) / (w - kappa))
    CHECK(1.0 / hn_inverse_xi(1.0, 0.999) == doctest::Approx(0.263144).epsilon(1e-5));
    CHECK(hn_J(1.0, 0.6) == doctest::Approx(0.8));
    CHECK(xi_prop_hn(1.0, 0.05, Statistics::Fermion) == doctest::Approx(1.0 / (2.0 * std::log(1.05))));
    CHECK(xi_prop_hn(1.0, 0.05, Statistics::Boson) == doctest::Approx(1.0 / (2.0 * std::log(1.0 / 0.95))));
    CHECK(xi_prop_hn_doubled(1.0, 0.05, Statistics::Fermion) == doctest::Approx(2.0 * xi_prop_hn(1.0, 0.05, Statistics::Fermion)));

    const Scales sc = derived_scales(hn(100, 0.999, 0.2, Statistics::Boson));
    CHECK(sc.tau_evec * sc.Delta == doctest::Approx(100.0 * 0.5 * std::log(1999.0)));

    ModelSpec ssh;
    ssh.kind = ModelKind::SSH;
    ssh.w = 0.5;
    ssh.kappa = 0.3;
    ssh.u = 1.0;
    ssh.gamma_ssh = 0.5;
    CHECK(ssh_xi1(ssh) == doctest::Approx(1.0 / std::log(1.5 / 0.2)));
    CHECK(ssh_xi2(ssh) == doctest::Approx(1.0 / std::log(0.8 / 0.5)));
}

TEST_CASE("SSH and NNN matrices")
{
    ModelSpec ssh;
    ssh.kind = ModelKind::SSH;
    ssh.L = 3;
    ssh.w = 0.8;
    ssh.kappa = 0.2;
    ssh.u = 1.0;
    ssh.gamma_ssh = 0.4;
    const CMatrix H = effective_hamiltonian(ssh);
    REQUIRE(H.rows() == 6);
    CHECK(H(1, 0).real() == doctest::Approx(0.5));
    CHECK(H(0, 1).real() == doctest::Approx(0.3));
    CHECK(H(2, 1).real() == doctest::Approx(0.7));
    CHECK(H(1, 2).real() == doctest::Approx(0.3));
    CHECK(H(3, 2).real() == doctest::Approx(0.5));

    ModelSpec nnn = hn(5, 0.5, 0.1);
    nnn.kind = ModelKind::NNN;
    nnn.T_nnn = 0.4;
    nnn.phi = 0.3;
    const CMatrix N = effective_hamiltonian(nnn);
    CHECK(std::abs(N(2, 0) - 0.2 * std::polar(1.0, 0.3)) < 1e-15);
    CHECK(std::abs(N(0, 2) - 0.2 * std::polar(1.0, -0.3)) < 1e-15);
}

TEST_CASE("validation errors")
{
    CHECK_THROWS_AS(validate(hn(0, 0.5, 0.1)), Error);
    CHECK_THROWS_AS(validate(hn(5, 1.2, 0.1)), Error);
    CHECK_THROWS_AS(validate(hn(5, 1.0, 0.1)), Error);
    CHECK_NOTHROW(validate(hn(5, 1.0, 0.1), true));
    CHECK_THROWS_AS(validate(hn(5, 0.1, 0.2, Statistics::Boson)), Error);
    ModelSpec s = hn(5, 0.5, 0.1);
    s.kind = ModelKind::NNN;
    s.edge_loss = EdgeLoss::Literal;
    CHECK_THROWS_AS(validate(s), Error);
    try {
        validate(hn(5, 0.1, 0.2, Statistics::Boson));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(e.name() == "BosonUnstable");
    }
}

TEST_CASE("ModelSpec JSON round trip")
{
    ModelSpec s = hn(12, 0.3, 0.05, Statistics::Boson);
    s.edge_loss = EdgeLoss::Literal;
    s.lambda_loss = 0.1;
    const nlohmann::json j = s;
    const ModelSpec back = j.get<ModelSpec>();
    CHECK(back.L == 12);
    CHECK(back.statistics == Statistics::Boson);
    CHECK(back.edge_loss == EdgeLoss::Literal);
    CHECK(back.lambda_loss == 0.1);
    CHECK_THROWS_AS(nlohmann::json({{"Lx", 3}}).get<ModelSpec>(), Error);
    CHECK(parse_model_kind("SSH") == ModelKind::SSH);
    CHECK_THROWS_AS(parse_statistics("anyon"), Error);
}
