#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "skinrelax/propagator.hpp"

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

// Miller's backward recurrence normalized by J_0 + 2 sum J_2k = 1.
double bessel_backward(int n, double x)
{
    const int top = n + 40 + static_cast<int>(x);
    std::vector<double> j(static_cast<std::size_t>(top + 2), 0.0);
    j[static_cast<std::size_t>(top)] = 1e-30;
    for (int k = top; k >= 1; --k)
        j[static_cast<std::size_t>(k - 1)] = 2.0 * k / x * j[static_cast<std::size_t>(k)] - j[static_cast<std::size_t>(k + 1)];
    double norm = j[0];
    for (int k = 2; k <= top; k += 2)
        norm += 2.0 * j[static_cast<std::size_t>(k)];
    return j[static_cast<std::size_t>(n)] / norm;
}

cdouble exact_entry(const CMatrix& H, int m, int j, double t)
{
    return (-kI * H * t).exp()(m - 1, j - 1);
}

} // namespace

TEST_CASE("infinite-chain kernel against a backward-recurrence Bessel")
{
    const cdouble g = g_infinity(1, 0.0447102, 10.0);
    CHECK(std::abs(g.real()) < 1e-14);
    CHECK(g.imag() == doctest::Approx(-0.2180113472182).epsilon(1e-12));
    CHECK(g.imag() == doctest::Approx(-bessel_backward(1, 0.447102)).epsilon(1e-12));
    for (int d : {0, 2, 5, 9}) {
        const double x = 3.7;
        const cdouble phase = std::polar(1.0, -0.5 * M_PI * d);
        CHECK(std::abs(g_infinity(d, 1.0, x) - phase * bessel_backward(d, x)) < 1e-13);
        CHECK(std::abs(log_g_infinity(d, 1.0, x).value() - phase * bessel_backward(d, x)) < 1e-13);
    }
}

TEST_CASE("direct route matches the matrix exponential")
{
    const ModelSpec s = hn(8, 0.6, 0.1);
    const CMatrix H = effective_hamiltonian(s);
    const std::vector<double> t = {0.0, 1.5, 4.0};
    const auto col = propagate_direct(H, 3, t);
    REQUIRE(col.size() == 3 * 8);
    for (const auto& smp : col) {
        CHECK(std::abs(smp.logG.value() - exact_entry(H, smp.m, 3, smp.t)) < 1e-10);
        CHECK(smp.route == Route::Direct);
    }
    const CMatrix row = propagate_row(H, 8, t);
    for (std::size_t k = 0; k < t.size(); ++k)
        for (int j = 1; j <= 8; ++j)
            CHECK(std::abs(row(static_cast<Eigen::Index>(k), j - 1) - exact_entry(H, 8, j, t[k])) < 1e-10);
    CHECK_THROWS_AS(propagate_direct(H, 9, t), Error);
}

TEST_CASE("spectral route and its cancellation guard")
{
    const ModelSpec s = hn(10, 0.5, 0.2);
    const CMatrix H = effective_hamiltonian(s);
    const Spectrum sp = hn_spectral_analytic(s);
    for (double t : {0.3, 2.0, 7.0})
        CHECK(std::abs(propagate_spectral(sp, 10, 2, t).logG.value() - exact_entry(H, 10, 2, t)) < 1e-10);

    const Spectrum steep = hn_spectral_analytic(hn(40, 0.999, 0.05));
    CHECK(steep.nonnormality_log > kCancellationGuard);
    CHECK_THROWS_AS(propagate_spectral(steep, 40, 1, 10.0), Error);
}

TEST_CASE("image sum reproduces the open chain")
{
    for (Statistics st : {Statistics::Fermion, Statistics::Boson}) {
        const ModelSpec s = hn(25, 0.9, 0.05, st);
        const CMatrix H = effective_hamiltonian(s);
        for (double t : {5.0, 20.0})
            for (int j : {1, 12}) {
                const cdouble ref = exact_entry(H, 25, j, t);
                CHECK(std::abs(g_obc_bounce(25, j, t, s).logG.value() - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
            }
    }
}

TEST_CASE("no-bounce and simplified forms approximate the last-site probability")
{
    const ModelSpec s = hn(60, 0.999, 0.05);
    const CMatrix H = effective_hamiltonian(s);
    const int j = 30;
    const double t = peak_stats(s, j).t_max;
    const auto col = propagate_direct(H, j, {0.0, t});
    const double logP = col.back().logP;
    // Dropping the reflected images leaves a relative error of order (Jt/2)^2 / d^2.
    CHECK(std::abs(std::exp(log_p_no_bounce(s, j, t) - logP) - 1.0) < 5e-3);
    CHECK(std::abs(log_p_simplified(s, 60 - j, t) - logP) < 0.2);
    CHECK(p_no_bounce(s, j, t) == doctest::Approx(std::exp(log_p_no_bounce(s, j, t))));
}

TEST_CASE("peak time of the last-site probability")
{
    const ModelSpec s = hn(100, 1.0, 0.05);
    const int d = 30;
    const PeakStats ps = peak_stats(s, 100 - d);
    CHECK(ps.d == d);
    CHECK(ps.t_max_formula == doctest::Approx(d / dissipative_gap(s)));
    CHECK(ps.t_max == doctest::Approx(ps.t_max_formula).epsilon(1e-3));
    CHECK(ps.sigma == doctest::Approx(std::sqrt(30.0) / dissipative_gap(s)));
}

TEST_CASE("locality: G_mj grows as t^|m-j| at short times")
{
    const CMatrix H = effective_hamiltonian(hn(10, 0.5, 0.1));
    const LocalityFit f = locality_order_check(H, 6, 4, {1e-3, 2e-3, 4e-3, 8e-3});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("sample fields")
{
    const PropagatorSample s = make_sample(3, 1, 2.0, LogComplex::from({0.0, 0.5}), Route::Spectral);
    CHECK(s.logP == doctest::Approx(2.0 * std::log(0.5)));
    CHECK(s.P == doctest::Approx(0.25));
    CHECK_FALSE(s.log_form);
    CHECK(std::string(to_string(Route::NoBounce)) == "no_bounce");
    const PropagatorSample big = make_sample(3, 1, 2.0, LogComplex{900.0, 0.0}, Route::Direct);
    CHECK(big.log_form);
}
