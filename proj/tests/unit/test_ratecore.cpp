#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rsmastat/ratecore.hpp"

using namespace rsmastat;

namespace {

CVector vec(std::initializer_list<cdouble> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cdouble x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST_CASE("PrecoderSet invariants") {
    PrecoderSet p(2, 2);
    p.common() = vec({1.0, 0.0});
    p.private_precoder(1) = vec({0.0, cdouble(0.0, 1.0)});
    CHECK(p.total_power() == doctest::Approx(2.0));
    CHECK_NOTHROW(p.validate(2.0));
    CHECK_NOTHROW(p.validate(2.0 - 5e-10));
    CHECK_THROWS_AS(p.validate(1.99), PreconditionError);
    p.common_rates()(0) = -0.1;
    CHECK_THROWS_AS(p.validate(2.0), PreconditionError);
}

TEST_CASE("single-user SINR and rate by hand") {
    PrecoderSet p(1, 1);
    p.private_precoder(0)(0) = 10.0;  // power 100
    const CVector h = vec({1.0});
    const SinrPair g = compute_sinrs(h, p, 0);
    CHECK(g.priv == doctest::Approx(100.0));
    CHECK(g.common == 0.0);
    const PerSampleRates r = per_sample_rates(CMatrix(h), p);
    CHECK(r.private_rates(0) == doctest::Approx(std::log2(101.0)).epsilon(1e-14));
}

TEST_CASE("two-user SINRs by hand") {
    // h1 = (1, 0), h2 = (0, 1); p_c = (1, 1), p_1 = (2, 0), p_2 = (1, 1).
    CMatrix h(2, 2);
    h << 1.0, 0.0, 0.0, 1.0;
    CMatrix streams(2, 3);
    streams << 1.0, 2.0, 1.0, 1.0, 0.0, 1.0;
    const PrecoderSet p(streams, RVector::Zero(2));
    // User 1: |h^H p_c|^2 = 1, privates 4 + 1 = 5 -> common 1/6, private 4/2.
    const SinrPair s1 = compute_sinrs(h.col(0), p, 0);
    CHECK(s1.common == doctest::Approx(1.0 / 6.0));
    CHECK(s1.priv == doctest::Approx(2.0));
    // User 2: common 1/(0 + 1 + 1), private 1/(0 + 1).
    const SinrPair s2 = compute_sinrs(h.col(1), p, 1);
    CHECK(s2.common == doctest::Approx(0.5));
    CHECK(s2.priv == doctest::Approx(1.0));
}

TEST_CASE("zero precoders give zero rates") {
    oracle::Gen gen(1);
    const CMatrix h = gen.cmatrix(3, 2);
    const PerSampleRates r = per_sample_rates(h, PrecoderSet(3, 2));
    CHECK(r.common_rates.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.private_rates.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-sample rates match the oracle") {
    oracle::Gen gen(2);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen.integer(1, 4), k = gen.integer(1, 3);
        const CMatrix h = gen.cmatrix(n, k);
        const PrecoderSet p = gen.precoders(n, k, gen.uniform(0.1, 100.0));
        const PerSampleRates r = per_sample_rates(h, p);
        const oracle::Rates ref = oracle::rsma_rates(h, p.streams());
        for (int u = 0; u < k; ++u) {
            CHECK(r.common_sinrs(u) == doctest::Approx(ref.common_sinr[u]).epsilon(1e-12));
            CHECK(r.private_sinrs(u) == doctest::Approx(ref.private_sinr[u]).epsilon(1e-12));
            CHECK(r.common_rates(u) == doctest::Approx(ref.common_rate[u]).epsilon(1e-12));
            CHECK(r.private_rates(u) == doctest::Approx(ref.private_rate[u]).epsilon(1e-12));
        }
    }
}

TEST_CASE("MMSE equalizer minimizes the MSE") {
    oracle::Gen gen(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen.integer(1, 4), k = gen.integer(1, 3);
        const CMatrix h = gen.cmatrix(n, k);
        const PrecoderSet p = gen.precoders(n, k, 10.0);
        const int user = gen.integer(0, k - 1);
        const EqualizerPair g = mmse_equalizers(h.col(user), p, user);
        const MsePair best = mse(h.col(user), p, user, g.common, g.priv);
        for (int probe = 0; probe < 20; ++probe) {
            const cdouble dc = 0.05 * gen.cgauss(), dp = 0.05 * gen.cgauss();
            const MsePair other = mse(h.col(user), p, user, g.common + dc, g.priv + dp);
            CHECK(other.common >= best.common - 1e-14);
            CHECK(other.priv >= best.priv - 1e-14);
        }
    }
}

TEST_CASE("MMSE weight 1/eps minimizes u*eps - ln(u); the log2 version sits at 1/(eps ln 2)") {
    for (double eps : {0.01, 0.2, 0.5, 0.9, 1.0}) {
        const WeightPair w = mmse_weights(eps, eps);
        double best_ln = 0.0, best_log2 = 0.0, v_ln = 1e300, v_log2 = 1e300;
        for (double u = 0.01; u < 400.0; u *= 1.0005) {
            if (const double v = u * eps - std::log(u); v < v_ln) {
                v_ln = v;
                best_ln = u;
            }
            if (const double v = wmse(eps, u); v < v_log2) {
                v_log2 = v;
                best_log2 = u;
            }
        }
        CHECK(w.common == doctest::Approx(1.0 / eps));
        CHECK(w.priv == doctest::Approx(best_ln).epsilon(1e-3));
        CHECK(best_log2 == doctest::Approx(1.0 / (eps * std::log(2.0))).epsilon(1e-3));
        // The log2 surrogate still equals 1 - rate at u = 1/eps.
        CHECK(wmse(eps, w.priv) == doctest::Approx(1.0 + std::log2(eps)));
    }
    CHECK_THROWS_AS(mmse_weights(0.0, 0.5), PreconditionError);
    CHECK_THROWS_AS(mmse_weights(0.5, -1.0), PreconditionError);
}

TEST_CASE("rate-WMMSE identity: wmse at MMSE point equals 1 - rate") {
    oracle::Gen gen(4);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = gen.integer(1, 4), k = gen.integer(1, 3);
        const CMatrix h = gen.cmatrix(n, k);
        const PrecoderSet p = gen.precoders(n, k, gen.uniform(0.1, 1000.0));
        const oracle::Rates ref = oracle::rsma_rates(h, p.streams());
        for (int u = 0; u < k; ++u) {
            const EqualizerPair g = mmse_equalizers(h.col(u), p, u);
            const MsePair e = mse(h.col(u), p, u, g.common, g.priv);
            const WeightPair w = mmse_weights(e.common, e.priv);
            CHECK(std::abs(wmse(e.common, w.common) - (1.0 - ref.common_rate[u])) < 1e-9);
            CHECK(std::abs(wmse(e.priv, w.priv) - (1.0 - ref.private_rate[u])) < 1e-9);
        }
    }
}

TEST_CASE("SAF rates and the RSMA max-min objective") {
    oracle::Gen gen(5);
    const SampleSet set = gen.samples(3, 2, 7);
    PrecoderSet p = gen.precoders(3, 2, 20.0);
    const SafRates saf = saf_rates(set, p);
    for (int k = 0; k < 2; ++k) {
        double common = 0.0, priv = 0.0;
        for (int s = 0; s < set.size(); ++s) {
            const auto r = oracle::rsma_rates(set[s], p.streams());
            common += r.common_rate[k];
            priv += r.private_rate[k];
        }
        CHECK(saf.common(k) == doctest::Approx(common / 7).epsilon(1e-12));
        CHECK(saf.priv(k) == doctest::Approx(priv / 7).epsilon(1e-12));
    }
    CHECK(saf.common_rate == doctest::Approx(saf.common.minCoeff()));

    p.common_rates() << 0.25 * saf.common_rate, 0.5 * saf.common_rate;
    MmfEvaluation m = mmf_objective(set, p);
    CHECK(m.feasible);
    CHECK(m.value == doctest::Approx(std::min(saf.priv(0) + 0.25 * saf.common_rate,
                                              saf.priv(1) + 0.5 * saf.common_rate)));
    p.common_rates() << saf.common_rate, saf.common_rate;
    m = mmf_objective(set, p);
    CHECK_FALSE(m.feasible);
}

TEST_CASE("optimal common split") {
    RVector priv(3);
    priv << 1.0, 2.0, 4.0;
    RVector alloc;
    // Budget 1.5: raise user 0 to 2, then users 0 and 1 together to 2.25.
    CHECK(best_common_split(1.5, priv, &alloc) == doctest::Approx(2.25));
    CHECK(alloc.sum() == doctest::Approx(1.5));
    CHECK(alloc(2) == 0.0);
    CHECK(best_common_split(0.0, priv) == 1.0);
    CHECK(best_common_split(-1.0, priv) == 1.0);
    oracle::Gen gen(6);
    for (int trial = 0; trial < 50; ++trial) {
        RVector v(4);
        std::vector<double> w(4);
        for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i)] = v(i) = gen.uniform(0.0, 3.0);
        const double b = gen.uniform(0.0, 4.0);
        CHECK(best_common_split(b, v) == doctest::Approx(oracle::split_by_bisection(b, w)).epsilon(1e-10));
    }
}

TEST_CASE("link plans") {
    const LinkPlan r = LinkPlan::rsma(3);
    CHECK(r.links.size() == 6);
    CHECK(r.uses_common_stream());
    CHECK(r.active_streams() == std::vector<int>{0, 1, 2, 3});
    CHECK(r.links[0].role == LinkRole::kCommonShare);
    CHECK(r.links[3].role == LinkRole::kPrivateWithShare);
    CHECK(r.links[3].interferers == std::vector<int>{2, 3});

    const LinkPlan s = LinkPlan::sdma(2);
    CHECK(s.links.size() == 2);
    CHECK_FALSE(s.uses_common_stream());
    CHECK(s.active_streams() == std::vector<int>{1, 2});

    // Order (1, 0, 2): user 1 decodes streams of 2, 0, 1; user 0 decodes 2, 0 with 1 as noise; user 2 decodes 2.
    const LinkPlan n = LinkPlan::noma({1, 0, 2});
    CHECK(n.links.size() == 6);
    int user1 = 0, user0 = 0, user2 = 0;
    for (const DecodingLink& l : n.links) {
        if (l.user == 1) ++user1;
        if (l.user == 0) {
            ++user0;
            CHECK(std::find(l.interferers.begin(), l.interferers.end(), 2) != l.interferers.end());
        }
        if (l.user == 2) {
            ++user2;
            CHECK(l.stream == 3);
            CHECK(l.interferers.size() == 2);
        }
    }
    CHECK(user1 == 3);
    CHECK(user0 == 2);
    CHECK(user2 == 1);
    CHECK_THROWS_AS(LinkPlan::noma({0, 0, 1}), PreconditionError);
}

TEST_CASE("generic link rates agree with the RSMA formulas") {
    oracle::Gen gen(7);
    const SampleSet set = gen.samples(3, 3, 5);
    const PrecoderSet p = gen.precoders(3, 3, 30.0);
    const LinkPlan plan = LinkPlan::rsma(3);
    const RVector rates = saf_link_rates(set, plan, p);
    const SafRates saf = saf_rates(set, p);
    for (int k = 0; k < 3; ++k) {
        CHECK(rates(k) == doctest::Approx(saf.common(k)).epsilon(1e-12));
        CHECK(rates(3 + k) == doctest::Approx(saf.priv(k)).epsilon(1e-12));
    }
    CHECK(mmf_with_optimal_split(set, plan, p) ==
          doctest::Approx(oracle::mmf_optimal_split_direct(set, plan, p.streams())).epsilon(1e-9));

    const LinkPlan noma = LinkPlan::noma({2, 0, 1});
    const RVector nr = saf_link_rates(set, noma, p);
    for (std::size_t l = 0; l < noma.links.size(); ++l) {
        double direct = 0.0;
        for (int s = 0; s < set.size(); ++s) direct += oracle::link_rate(set[s], p.streams(), noma.links[l]);
        CHECK(nr(static_cast<Eigen::Index>(l)) == doctest::Approx(direct / set.size()).epsilon(1e-12));
    }
}

TEST_CASE("MMSE state gives the rate-WMMSE identity on every link") {
    oracle::Gen gen(8);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(1, 4), k = gen.integer(1, 3);
        const SampleSet set = gen.samples(n, k, gen.integer(1, 10));
        const PrecoderSet p = gen.precoders(n, k, gen.uniform(1.0, 100.0));
        for (const LinkPlan& plan : {LinkPlan::rsma(k), LinkPlan::sdma(k)}) {
            const EqualizerWeightState st = mmse_update(set, plan, p);
            for (int l = 0; l < static_cast<int>(plan.links.size()); ++l) {
                double rate = 0.0;
                for (int s = 0; s < set.size(); ++s)
                    rate += oracle::link_rate(set[s], p.streams(), plan.links[static_cast<std::size_t>(l)]);
                rate /= set.size();
                CHECK(std::abs(oracle::direct_saf_wmse(set, plan, st, l, p.streams()) - (1.0 - rate)) < 1e-9);
            }
        }
    }
}
