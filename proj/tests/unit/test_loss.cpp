#include <gtest/gtest.h>

#include <cmath>

#include "../support/param_sets.hpp"
#include "cidx/fft.hpp"
#include "cidx/loss.hpp"

using namespace cidx;
using namespace cidx::testing;

namespace {

constexpr int kN = 125;

AffineModel five_year() { return AffineModel(model_of(kPerMaturity[0]), time_change_of(kPerMaturity[0])); }

AffineModel quiet_model(double beta = 0.0) {
    ParamSegment seg;
    seg.lambda_inf = 0.0;
    seg.kappa = 1.0;
    seg.sigma = 0.1;
    seg.beta = beta;
    return AffineModel(ModelParams::constant(0.0, seg, JumpSizeLaw::fixed(0.6)), TimeChange::identity());
}

double put_from_distribution(const std::vector<double>& p, double K, double l1) {
    double s = 0.0;
    for (size_t k = 0; k < p.size(); ++k) s += p[k] * std::max(K - l1 * k / (p.size() - 1), 0.0);
    return s;
}

}  // namespace

TEST(ExpectedDefaults, BoundaryAndNoSources) {
    auto m = five_year();
    BasketState s = BasketState::initial(m);
    s.t = 1.0;
    s.defaults = 7;
    s.loss = 7 * 0.6 / kN;
    EXPECT_EQ(expected_defaults(s, 1.0, m, kN), 7.0);
    auto q = quiet_model();
    BasketState s0 = BasketState::initial(q);
    EXPECT_NEAR(expected_defaults(s0, 5.0, q, kN), 0.0, 1e-15);
    s0.defaults = 3;
    EXPECT_NEAR(expected_defaults(s0, 5.0, q, kN), 3.0, 1e-13);
}

TEST(ExpectedDefaults, CatastropheState) {
    auto m = five_year();
    BasketState s = BasketState::initial(m);
    s.catastrophe = true;
    s.defaults = kN;
    EXPECT_EQ(expected_defaults(s, 3.0, m, kN), double(kN));
}

TEST(CountDistribution, InitialAndCatastropheOnly) {
    auto m = five_year();
    auto p0 = default_count_distribution(BasketState::initial(m), 0.0, m, kN);
    EXPECT_EQ(p0[0], 1.0);
    auto q = quiet_model(0.02);
    auto p = default_count_distribution(BasketState::initial(q), 4.0, q, kN);
    EXPECT_NEAR(p[kN], 1.0 - std::exp(-0.08), 1e-12);
    EXPECT_NEAR(p[0], std::exp(-0.08), 1e-12);
    for (int k = 1; k < kN; ++k) EXPECT_NEAR(p[k], 0.0, 1e-14);
}

TEST(CountDistribution, MeanMatchesExpectedDefaults) {
    for (const auto& ps : kPerMaturity) {
        AffineModel m(model_of(ps), time_change_of(ps));
        for (double T : {1.0, 5.0, 8.7}) {
            auto s = BasketState::initial(m);
            auto p = default_count_distribution(s, T, m, kN);
            double mass = 0.0, mean = 0.0;
            for (int k = 0; k <= kN; ++k) {
                EXPECT_GE(p[k], 0.0);
                mass += p[k];
                mean += k * p[k];
            }
            EXPECT_NEAR(mass, 1.0, 1e-8);
            const double ed = expected_defaults(s, T, m, kN);
            EXPECT_NEAR(mean / ed, 1.0, 1e-6) << T;
        }
    }
}

TEST(TranchePut, TrivialCases) {
    auto m = five_year();
    auto s = BasketState::initial(m);
    EXPECT_EQ(tranche_put(s, 5.0, 0.0, m, kN), 0.0);
    EXPECT_EQ(tranche_put(s, 0.0, 0.03, m, kN), 0.03);
}

TEST(TranchePut, MatchesDistribution) {
    auto m = five_year();
    auto s = BasketState::initial(m);
    const double T = 5.0;
    auto p = default_count_distribution(s, T, m, kN);
    for (double K : {0.03, 0.06, 0.09, 0.12, 0.22}) {
        EXPECT_NEAR(tranche_put(s, T, K, m, kN), put_from_distribution(p, K, 0.6), 1e-9) << K;
    }
    // Beyond the maximum loss the put is linear in the expected loss.
    EXPECT_NEAR(tranche_put(s, T, 1.0, m, kN), 1.0 - 0.6 * expected_defaults(s, T, m, kN) / kN, 1e-14);
    EXPECT_NEAR(tranche_put(s, T, 0.7, m, kN), put_from_distribution(p, 0.7, 0.6), 1e-9);
}

TEST(TranchePut, ConditionalStateMatchesDistribution) {
    auto m = five_year();
    BasketState s;
    s.t = 2.0;
    s.defaults = 4;
    s.loss = 4 * 0.6 / kN;
    s.lambda = 1.7;
    auto p = default_count_distribution(s, 6.0, m, kN);
    EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 0.0, 1e-15);
    for (double K : {0.03, 0.06})
        EXPECT_NEAR(tranche_put(s, 6.0, K, m, kN), put_from_distribution(p, K, 0.6), 1e-9);
    EXPECT_EQ(tranche_put(s, 6.0, 0.015, m, kN), 0.0);
}

TEST(TranchePut, MonotoneConvexLipschitz) {
    auto m = AffineModel(model_of(kPerMaturity[2]), time_change_of(kPerMaturity[2]));
    auto s = BasketState::initial(m);
    for (double T : {2.0, 5.0, 8.0}) {
        double prev_v = -1.0, prev_slope = -1.0;
        for (int i = 0; i <= 24; ++i) {
            const double K = 0.01 * i;
            const double v = tranche_put(s, T, K, m, kN);
            if (i > 0) {
                const double slope = (v - prev_v) / 0.01;
                EXPECT_GE(slope, -1e-10);
                EXPECT_LE(slope, 1.0 + 1e-10);
                if (i > 1) EXPECT_GE(slope, prev_slope - 1e-9);
                prev_slope = slope;
            }
            prev_v = v;
        }
    }
    for (double K : {0.03, 0.09, 0.22}) {
        double prev = K + 1.0;
        for (double T = 0.5; T <= 10.0; T += 0.5) {
            const double v = tranche_put(s, T, K, m, kN);
            EXPECT_LE(v, prev + 1e-12);
            prev = v;
        }
    }
}

TEST(DigitalBelow, MatchesDistribution) {
    auto m = five_year();
    auto s = BasketState::initial(m);
    EXPECT_EQ(digital_below(s, 0.0, 1, m, kN), 1.0);
    auto p = default_count_distribution(s, 5.0, m, kN);
    for (int k : {1, 3, 10}) {
        double want = 0.0;
        for (int i = 0; i < k; ++i) want += p[i];
        EXPECT_NEAR(digital_below(s, 5.0, k, m, kN), want, 1e-8);
    }
    BasketState late = s;
    late.t = 1.0;
    late.defaults = 3;
    EXPECT_EQ(digital_below(late, 5.0, 3, m, kN), 0.0);
    try {
        digital_below(s, 5.0, kN, m, kN);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidRank);
    }
}

TEST(CounterpartyFilter, InertWithoutCounterpartyParameters) {
    auto m = five_year();
    auto s = BasketState::initial(m);
    EXPECT_EQ(expected_defaults(s, 5.0, m, kN, true), expected_defaults(s, 5.0, m, kN, false));
    EXPECT_EQ(tranche_put(s, 5.0, 0.06, m, kN, {}, true), tranche_put(s, 5.0, 0.06, m, kN, {}, false));
    EXPECT_EQ(digital_below(s, 5.0, 3, m, kN, {}, true), digital_below(s, 5.0, 3, m, kN, {}, false));
    EXPECT_EQ(expected_loss(s, 5.0, m, kN, true), expected_loss(s, 5.0, m, kN, false));
}

TEST(CounterpartyFilter, ReducesSurvivingClaims) {
    ModelParams mp = model_of(kPerMaturity[0]);
    mp.segments[0].eta = 0.02;
    mp.segments[0].xi = 0.01;
    AffineModel m(mp, time_change_of(kPerMaturity[0]));
    auto s = BasketState::initial(m);
    const double surv = counterparty_survival(s, 5.0, m);
    EXPECT_LT(surv, std::exp(-0.02 * 5.0 * 0.9));
    EXPECT_LT(tranche_put(s, 5.0, 0.06, m, kN, {}, true), tranche_put(s, 5.0, 0.06, m, kN, {}, false));
    EXPECT_LE(tranche_put(s, 5.0, 0.06, m, kN, {}, true), 0.06 * surv);
}

TEST(InfinitePoolMoments, ZeroAndNearDeterministic) {
    auto q = quiet_model();
    auto z = infinite_pool_moments(3.0, q);
    EXPECT_NEAR(z.mean, 0.0, 1e-12);
    EXPECT_NEAR(z.variance, 0.0, 1e-9);
    ParamSegment seg;
    seg.lambda_inf = 0.01;
    seg.kappa = 50.0;
    seg.sigma = 1e-3;
    AffineModel d(ModelParams::constant(0.01, seg, JumpSizeLaw::fixed(0.6)), TimeChange::identity());
    auto r = infinite_pool_moments(1.0, d);
    EXPECT_NEAR(r.mean / (0.6 * 0.01), 1.0, 1e-3);
}

TEST(InfinitePoolMoments, MatchInvertedCountDistribution) {
    // With no catastrophe term, L~ = l1 N~ and the count law follows from inverting its spectrum.
    ModelParams mp = model_of(kPerMaturity[0]);
    mp.segments[0].beta = 0.0;
    AffineModel m(mp, time_change_of(kPerMaturity[0]));
    const int g = 4096;
    auto phi = count_spectrum(m, 0.0, 5.0, m.initial_intensity(), g);
    for (auto& z : phi) z = std::conj(z);
    auto b = fft::backward_real(phi, g);
    double e1 = 0.0, e2 = 0.0;
    for (int j = 0; j < g / 2; ++j) {
        const double p = b[j] * std::exp(count_damping(g) * j) / g;
        e1 += j * p;
        e2 += double(j) * j * p;
    }
    auto r = infinite_pool_moments(5.0, m);
    EXPECT_NEAR(r.mean / (0.6 * e1), 1.0, 1e-8);
    EXPECT_NEAR(r.variance / (0.36 * (e2 - e1 * e1)), 1.0, 1e-5);
}

TEST(InfinitePoolMoments, MeanMatchesCountMean) {
    auto m = five_year();
    auto r = infinite_pool_moments(5.0, m);
    // Mean count: derivative in v; loss mean is l1 times it.
    CharArg a;
    const double h = 1e-5;
    auto K = [&](double v) {
        a.v = v;
        auto c = m.char_fn(0.0, 5.0, a);
        return (c.A + c.B * m.initial_intensity()).real();
    };
    const double mean_n = (K(h) - K(-h)) / (2 * h);
    EXPECT_NEAR(r.mean / (0.6 * mean_n), 1.0, 1e-7);
    EXPECT_GT(r.variance, 0.0);
}
