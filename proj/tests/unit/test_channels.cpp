#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rsmastat/channels.hpp"
#include "rsmastat/rng.hpp"

using namespace rsmastat;

namespace {

CMatrix empirical_covariance(const SampleSet& set, int user) {
    CMatrix c = CMatrix::Zero(set.n_tx(), set.n_tx());
    for (int s = 0; s < set.size(); ++s) c += set[s].col(user) * set[s].col(user).adjoint();
    return c / static_cast<double>(set.size());
}

}  // namespace

TEST_CASE("correlation matrix hand values") {
    CHECK(relative_frobenius_error(build_correlation_matrix(0.0, 4).matrix(), CMatrix::Identity(4, 4)) == 0.0);

    CMatrix half(2, 2);
    half << 1.0, 0.5, 0.5, 1.0;
    CHECK(relative_frobenius_error(build_correlation_matrix(0.5, 2).matrix(), half) < 1e-15);

    const HermitianMatrix r = build_correlation_matrix(cdouble(0.0, 1.0), 3);
    CHECK(std::abs(r(0, 1) - cdouble(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(r(0, 2) - cdouble(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(r(2, 0) - cdouble(-1.0, 0.0)) < 1e-15);
    const auto e = hermitian_evd(r);
    CHECK(e.eigenvalues(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(e.eigenvalues(1)) < 1e-12);

    CHECK_THROWS_AS(build_correlation_matrix(cdouble(0.8, 0.8), 3), PreconditionError);
    CHECK_THROWS_AS(build_correlation_matrix(0.5, 0), PreconditionError);
}

TEST_CASE("uncorrelated Rayleigh samples have identity covariance") {
    CorrelatedRayleighStats st;
    st.n_tx = 4;
    st.coefficients = {0.0, 0.0};
    const SampleSet set = sample_correlated_rayleigh(st, 10000, 17);
    for (int k = 0; k < 2; ++k)
        CHECK(relative_frobenius_error(empirical_covariance(set, k), CMatrix::Identity(4, 4)) < 0.05);
}

TEST_CASE("correlated Rayleigh covariance converges to R") {
    CorrelatedRayleighStats st;
    st.n_tx = 4;
    st.coefficients = {std::polar(0.6, 1.1), std::polar(0.9, -0.4), std::polar(0.3, 2.5)};
    const SampleSet set = sample_correlated_rayleigh(st, 10000, 99);
    for (int k = 0; k < 3; ++k) {
        const CMatrix r = build_correlation_matrix(st.coefficients[static_cast<std::size_t>(k)], 4).matrix();
        CHECK(relative_frobenius_error(empirical_covariance(set, k), r) < 0.05);
    }
}

TEST_CASE("fully correlated Rayleigh samples lie on the dominant eigenvector") {
    CorrelatedRayleighStats st;
    st.n_tx = 5;
    st.coefficients = {std::polar(1.0, 0.8), cdouble(1.0, 0.0)};
    const SampleSet set = sample_correlated_rayleigh(st, 200, 4);
    for (int k = 0; k < 2; ++k) {
        const CVector v =
            hermitian_evd(build_correlation_matrix(st.coefficients[static_cast<std::size_t>(k)], 5)).eigenvectors.col(0);
        for (int s = 0; s < set.size(); ++s) {
            const CVector h = set[s].col(k);
            const CVector residual = h - v * (v.adjoint() * h)(0);
            // Bounded by the eigenvector accuracy of the sampler's decomposition.
            CHECK(residual.norm() <= 1e-7 * std::max(1.0, h.norm()));
        }
    }
}

TEST_CASE("sampling is deterministic and S extends the set") {
    CorrelatedRayleighStats st;
    st.n_tx = 3;
    st.coefficients = {std::polar(0.5, 0.2), std::polar(0.5, -1.0)};
    st.phase_inaccuracy_half_width = std::numbers::pi / 8;
    const SampleSet a = sample_correlated_rayleigh(st, 50, 123);
    const SampleSet b = sample_correlated_rayleigh(st, 50, 123);
    const SampleSet c = sample_correlated_rayleigh(st, 80, 123);
    const SampleSet d = sample_correlated_rayleigh(st, 50, 124);
    CHECK(a.identical_to(b));
    CHECK_FALSE(a.identical_to(d));
    for (int s = 0; s < 50; ++s) CHECK(a[s] == c[s]);
    CHECK(a.seed_record().generator == std::string(CounterRng::kGeneratorName));
    CHECK(a.seed_record().seed == 123);
}

TEST_CASE("phase inaccuracy perturbs the sample covariance but not true statistics") {
    CorrelatedRayleighStats st;
    st.n_tx = 4;
    st.coefficients = {cdouble(1.0, 0.0)};
    st.phase_inaccuracy_half_width = std::numbers::pi / 8;
    const SampleSet set = sample_correlated_rayleigh(st, 4000, 8);
    // Perturbed phases spread energy off the single eigenvector of R.
    const auto spread = hermitian_evd(HermitianMatrix(empirical_covariance(set, 0)));
    CHECK(spread.eigenvalues(1) > 1e-3);
    const auto truth = std::get<CorrelatedRayleighStats>(true_statistics(st));
    CHECK(truth.phase_inaccuracy_half_width == 0.0);
    CHECK(truth.coefficients[0] == st.coefficients[0]);
}

TEST_CASE("ULA samples") {
    UlaPhaseStats st;
    st.n_tx = 4;
    st.amplitudes = {1.0, 0.8, 0.0};
    st.mean_phases = {0.3, -1.0, 2.0};
    st.phase_range = std::numbers::pi / 2;
    const SampleSet set = sample_ula_phase(st, 300, 5);
    for (int s = 0; s < set.size(); ++s) {
        for (int k = 0; k < 3; ++k) {
            const double beta = st.amplitudes[static_cast<std::size_t>(k)];
            CHECK(set[s].col(k).norm() == doctest::Approx(beta * 2.0).epsilon(1e-12));
            for (int m = 0; m < 4; ++m) CHECK(std::abs(set[s](m, k)) == doctest::Approx(beta).epsilon(1e-12));
            if (beta > 0.0) {
                // Linear phase progression with phi in the configured interval.
                const double phi = -std::arg(set[s](1, k) / set[s](0, k));
                double offset = std::remainder(phi - st.mean_phases[static_cast<std::size_t>(k)], 2.0 * std::numbers::pi);
                CHECK(std::abs(offset) <= st.phase_range / 2 + 1e-12);
                for (int m = 2; m < 4; ++m)
                    CHECK(std::abs(set[s](m, k) / set[s](m - 1, k) - set[s](1, k) / set[s](0, k)) < 1e-12);
            }
        }
    }

    st.phase_range = 0.0;
    const SampleSet fixed = sample_ula_phase(st, 20, 5);
    for (int s = 1; s < fixed.size(); ++s) CHECK(fixed[s] == fixed[0]);
    CHECK(std::abs(fixed[0](1, 0) - std::polar(1.0, -0.3)) < 1e-15);
}

TEST_CASE("stats validation") {
    CorrelatedRayleighStats bad;
    bad.n_tx = 2;
    bad.coefficients = {cdouble(1.1, 0.0)};
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    bad.coefficients = {0.5};
    bad.phase_inaccuracy_half_width = 4.0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);

    UlaPhaseStats u;
    u.n_tx = 2;
    u.amplitudes = {-1.0};
    u.mean_phases = {0.0};
    CHECK_THROWS_AS(u.validate(), PreconditionError);
    u.amplitudes = {1.0};
    u.phase_range = 7.0;
    CHECK_THROWS_AS(u.validate(), PreconditionError);
}

TEST_CASE("statistics ensembles") {
    CorrelatedRayleighTemplate degenerate;
    degenerate.n_tx = 3;
    degenerate.users = 2;
    degenerate.magnitude = 0.7;
    degenerate.phase_interval = {0.0, 0.0};
    const auto one = draw_statistics_ensemble(degenerate, 1, 1);
    REQUIRE(one.size() == 1);
    for (const cdouble t : std::get<CorrelatedRayleighStats>(one[0]).coefficients)
        CHECK(t == cdouble(0.7, 0.0));

    CorrelatedRayleighTemplate wide = degenerate;
    wide.phase_interval = {-std::numbers::pi, std::numbers::pi};
    double sum = 0.0;
    int n = 0;
    for (const auto& st : draw_statistics_ensemble(wide, 100, 2))
        for (const cdouble t : std::get<CorrelatedRayleighStats>(st).coefficients) {
            CHECK(std::abs(t) == doctest::Approx(0.7).epsilon(1e-14));
            sum += std::arg(t);
            ++n;
        }
    CHECK(std::abs(sum / n) < 0.2);

    UlaPhaseTemplate ula;
    ula.n_tx = 4;
    ula.amplitudes = {1.0, 0.8, 0.5};
    ula.phase_range = 1.0;
    ula.mean_phase_interval = {-std::numbers::pi / 2, std::numbers::pi / 2};
    for (const auto& st : draw_statistics_ensemble(ula, 50, 3)) {
        const auto& u = std::get<UlaPhaseStats>(st);
        CHECK(u.phase_range == 1.0);
        CHECK(u.amplitudes == ula.amplitudes);
        for (double ph : u.mean_phases) CHECK((ph >= -std::numbers::pi / 2 && ph <= std::numbers::pi / 2));
    }
}

TEST_CASE("sample set text round trip is bit exact") {
    CorrelatedRayleighStats st;
    st.n_tx = 3;
    st.coefficients = {std::polar(0.4, 0.3), std::polar(0.8, 2.0)};
    const SampleSet a = sample_correlated_rayleigh(st, 17, 31);
    std::stringstream ss;
    write_sample_set(ss, a);
    const SampleSet b = read_sample_set(ss);
    CHECK(a.identical_to(b));

    std::stringstream broken("rsmastat-samples 1\nn_tx 2\n");
    CHECK_THROWS(read_sample_set(broken));
}
