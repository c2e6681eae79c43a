#include <doctest.h>

#include "skinrelax/analysis.hpp"
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

SweepResult synthetic_sweep(const std::vector<double>& Ls, double slope, double offset, bool sustained = true)
{
    SweepResult sw;
    sw.axis = "L";
    sw.etas = {0.5};
    for (double L : Ls) {
        SweepPoint p;
        p.value = L;
        p.run.Delta = 1.0;
        RelaxationResult r;
        r.tau = slope * L + offset;
        r.sustained = sustained;
        p.run.results = {r};
        sw.points.push_back(p);
    }
    return sw;
}

} // namespace

TEST_CASE("linear fit of exact data")
{
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> y = {3, 5, 7, 9, 11};
    const FitReport f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    const FitReport w = linear_fit(x, {0, 0, 7, 9, 11}, 2, 5);
    CHECK(w.slope == doctest::Approx(2.0));
    CHECK(w.window_begin == 2);
    CHECK_THROWS_AS(linear_fit(x, y, 0, 5, 6), Error);
}

TEST_CASE("scaling fit over the trailing window")
{
    std::vector<double> Ls;
    for (int L = 10; L <= 200; L += 10)
        Ls.push_back(L);
    const FitReport f = scaling_fit(synthetic_sweep(Ls, 2.0, 3.0));
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(3.0));
    CHECK(f.window_end - f.window_begin == 6);
    CHECK_THROWS_AS(scaling_fit(synthetic_sweep({10, 20, 30, 40, 50, 60}, 2.0, 3.0)), Error);
    CHECK_THROWS_AS(scaling_fit(synthetic_sweep(Ls, 2.0, 3.0, false)), Error);
}

TEST_CASE("propagation length from exponential heights")
{
    std::vector<double> d, h, g;
    for (int k = 1; k <= 12; ++k) {
        d.push_back(k);
        h.push_back(std::exp(-k / 7.0));
        g.push_back(std::exp(k / 4.0));
    }
    CHECK(xi_prop_fit(d, h, HeightMode::Attenuating).xi_est == doctest::Approx(7.0));
    CHECK(xi_prop_fit(d, g, HeightMode::Amplifying).xi_est == doctest::Approx(4.0));
    CHECK_THROWS_AS(xi_prop_fit(d, h, HeightMode::Amplifying), Error);
    h[3] = 0.0;
    CHECK_THROWS_AS(xi_prop_fit(d, h, HeightMode::Attenuating), Error);
}

TEST_CASE("plateau detection")
{
    CHECK(has_plateau({10.0, 20.0, 30.0, 30.1, 30.2}));
    CHECK_FALSE(has_plateau({10.0, 20.0, 30.0}));
    CHECK_FALSE(has_plateau({30.0, 30.1}));
}

TEST_CASE("parameter access by name")
{
    ModelSpec s;
    set_parameter(s, "Gamma", 0.3);
    set_parameter(s, "L", 40);
    set_parameter(s, "lambda", 0.1);
    CHECK(get_parameter(s, "Gamma") == 0.3);
    CHECK(get_parameter(s, "L") == 40);
    CHECK(get_parameter(s, "lambda_loss") == 0.1);
    CHECK_THROWS_AS(set_parameter(s, "L", 4.5), Error);
    CHECK_THROWS_AS(set_parameter(s, "temperature", 1.0), Error);
    CHECK_THROWS_AS(get_parameter(s, "temperature"), Error);
}

TEST_CASE("eigenvector-based estimate")
{
    const ModelSpec b = hn(100, 0.999, 0.2, Statistics::Boson);
    CHECK(evec_prediction(b) * dissipative_gap(b) == doctest::Approx(380.0201).epsilon(1e-6));

    ModelSpec ssh;
    ssh.kind = ModelKind::SSH;
    ssh.L = 30;
    ssh.w = 1.0;
    ssh.kappa = 0.5;
    ssh.u = 1.0;
    ssh.gamma_ssh = 0.9;
    ssh.Gamma = 0.1;
    const double inv = std::max(std::log(1.9 / 0.5), std::log(1.5 / 0.1));
    CHECK(evec_prediction(ssh) == doctest::Approx(30 * inv / dissipative_gap(ssh)));
    CHECK(evec_prediction(ssh, LengthConvention::Sites) == doctest::Approx(2.0 * evec_prediction(ssh)));

    ModelSpec nnn = hn(30, 0.9, 0.1);
    nnn.kind = ModelKind::NNN;
    CHECK(evec_prediction(nnn) == doctest::Approx(evec_prediction(hn(30, 0.9, 0.1))).epsilon(1e-8));
}

TEST_CASE("sweeps are sorted and independent of the worker count")
{
    const ModelSpec b = hn(20, 0.9, 0.1, Statistics::Boson);
    const std::vector<double> Ls = {30, 10, 20, 10};
    const SweepResult one = run_sweep(b, "L", Ls, InitialKind::Vacuum, {0.3}, {}, 1);
    const SweepResult three = run_sweep(b, "L", Ls, InitialKind::Vacuum, {0.3}, {}, 3);
    REQUIRE(one.points.size() == 3);
    CHECK(one.points[0].value == 10);
    CHECK(one.points[2].run.spec.L == 30);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(one.points[k].tau() == three.points[k].tau());
    CHECK_THROWS_AS(run_sweep(b, "Gamma", {0.1, 2.0}, InitialKind::Vacuum, {0.3}), Error);
}

TEST_CASE("interference terms")
{
    // One site: a single term that is the whole propagator.
    const ModelSpec one = hn(1, 0.5, 0.1);
    const InterferenceTerms a = interference_terms(one, 1, 1, 3.0);
    REQUIRE(a.terms.size() == 1);
    CHECK(std::abs(a.terms[0].value() - std::exp(-0.6 * 3.0)) < 1e-14);
    CHECK(a.stable_sum.log_abs == doctest::Approx(-1.8));

    const ModelSpec s = hn(50, 0.999, 0.05, Statistics::Boson);
    const InterferenceTerms big = interference_terms(s, 50, 1, 20.0);
    CHECK(big.terms.size() == 50);
    CHECK(big.max_term_log10 - big.sum_log10 > 40.0);

    const InterferenceTerms zero = interference_terms(s, 50, 1, 0.0);
    CHECK(zero.stable_sum.is_zero());
    CHECK(interference_terms(s, 7, 7, 0.0).sum_log10 == doctest::Approx(0.0));
}

TEST_CASE("localization from the characteristic polynomial")
{
    const ModelSpec s = hn(20, 0.6, 0.1);
    const Spectrum sp = hn_spectral_analytic(s);
    for (Eigen::Index a = 0; a < sp.size(); a += 5) {
        const LocalizationReport r = localization_extract(s, sp.eigenvalues[a]);
        CHECK(r.xi_extracted == doctest::Approx(1.0 / hn_inverse_xi(1.0, 0.6)).epsilon(1e-8));
        REQUIRE(r.roots.size() == 2);
        CHECK(std::abs(r.roots[0] * r.roots[1] - 0.8 / 0.2) < 1e-12);
    }
    CHECK_THROWS_AS(localization_extract(s, {5.0, 0.0}), Error);

    const auto c = characteristic_polynomial(s, {0.3, -0.7});
    REQUIRE(c.size() == 3);
    CHECK(c[0] == cdouble(0.8));
    CHECK(std::abs(c[1] - cdouble(-0.3, -0.0)) < 1e-15);
}

TEST_CASE("peak heights and the small-pump curve")
{
    const ModelSpec s = hn(20, 0.9, 0.1);
    const HeightProfile hp = peak_heights(s, 20, 40.0, 0.05);
    REQUIRE(hp.j.size() == 20);
    CHECK(*std::max_element(hp.normalized.begin(), hp.normalized.end()) == 1.0);
    CHECK(hp.peak_time.back() == 0.0);
    CHECK(hp.height.back() == doctest::Approx(1.0));

    const auto curve = small_gamma_curve(100, 0.5, {0.0, 50.0, 200.0, 400.0});
    CHECK(curve[0] == 1.0);
    CHECK(curve[1] == doctest::Approx(0.5));
    CHECK(curve[2] == 0.0);
    CHECK(curve[3] == 0.0);
}
