#include <gtest/gtest.h>

#include <cmath>

#include "../support/param_sets.hpp"
#include "cidx/fft.hpp"
#include "cidx/largepool.hpp"
#include "cidx/loss.hpp"

using namespace cidx;
using namespace cidx::testing;

namespace {

constexpr int kN = 125;

AffineModel five_year() { return AffineModel(model_of(kPerMaturity[0]), time_change_of(kPerMaturity[0])); }

}  // namespace

TEST(SolveMu, FixedLossClosedForm) {
    auto c = solve_mu(JumpSizeLaw::fixed(0.6), kN);
    EXPECT_DOUBLE_EQ(c.mu, -std::log(124.0 / 125.0) / 0.6);
    EXPECT_DOUBLE_EQ(c.loss_max, 0.6);
    EXPECT_NEAR(c.lattice, 0.6, 1e-15);
}

TEST(SolveMu, DiscreteLawResidual) {
    auto law = JumpSizeLaw::discrete({{0.4, 0.5}, {0.9, 0.5}});
    auto c = solve_mu(law, kN);
    EXPECT_LT(std::abs(law.phi(cplx(-c.mu, 0.0)).real() - (1.0 - 1.0 / kN)), 1e-12);
    EXPECT_NEAR(c.lattice, 0.1, 1e-12);
    EXPECT_NEAR(c.loss_max, 0.65, 1e-15);
}

TEST(SolveMu, LargeBasketLimit) {
    for (int n : {1000, 100000, 10000000}) {
        auto c = solve_mu(JumpSizeLaw::discrete({{0.3, 0.25}, {0.7, 0.75}}), n);
        EXPECT_NEAR(c.mu * 0.6 * n, 1.0, 2.0 / n);
    }
}

TEST(SolveMu, NoRootWhenTinyLossesDominate) {
    try {
        solve_mu(JumpSizeLaw::discrete({{1e-15, 0.999}, {0.6, 0.001}}), kN);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoRoot);
    }
}

TEST(LargePoolExpectedLoss, MatchesExactExpectedLoss) {
    auto m = five_year();
    auto c = solve_mu(m.law(), kN);
    auto s = BasketState::initial(m);
    for (double T : {0.5, 3.0, 5.0, 8.7})
        EXPECT_NEAR(lp_expected_loss(T, m, c), 0.6 * expected_defaults(s, T, m, kN) / kN, 1e-12);
    ParamSegment quiet;
    quiet.lambda_inf = 0.0;
    quiet.kappa = 1.0;
    quiet.sigma = 0.1;
    AffineModel z(ModelParams::constant(0.0, quiet, JumpSizeLaw::fixed(0.6)), TimeChange::identity());
    EXPECT_EQ(lp_expected_loss(4.0, z, c), 0.0);
}

TEST(LargePoolPut, TrivialStrikes) {
    auto m = five_year();
    auto c = solve_mu(m.law(), kN);
    EXPECT_EQ(lp_tranche_put(5.0, 0.0, m, c), 0.0);
    EXPECT_EQ(lp_tranche_put(0.0, 0.05, m, c), 0.05);
    EXPECT_NEAR(lp_tranche_put(5.0, 0.8, m, c), 0.8 - lp_expected_loss(5.0, m, c), 1e-15);
    try {
        lp_tranche_put(5.0, 1.2, m, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidDetachment);
    }
}

TEST(LargePoolPut, AuxiliaryVariantsAgree) {
    for (const auto& ps : kPerMaturity) {
        AffineModel m(model_of(ps), time_change_of(ps));
        auto c = solve_mu(m.law(), kN);
        for (double K : {0.03, 0.06, 0.12}) {
            const double a = lp_tranche_put(5.0, K, m, c, AuxLaw::Delta);
            const double b = lp_tranche_put(5.0, K, m, c, AuxLaw::Poisson);
            EXPECT_NEAR(a, b, 1e-6);
            EXPECT_NEAR(a, b, 1e-12);
        }
    }
}

TEST(LargePoolPut, DoublingNodesIsStable) {
    auto m = five_year();
    auto c = solve_mu(m.law(), kN);
    LargePoolNumerics coarse, fine;
    fine.min_nodes = 1 << 14;
    for (double K : {0.03, 0.09, 0.22})
        EXPECT_NEAR(lp_tranche_put(5.0, K, m, c, AuxLaw::Poisson, coarse),
                    lp_tranche_put(5.0, K, m, c, AuxLaw::Poisson, fine), 1e-8);
}

TEST(LargePoolPut, BoundedMonotoneConvex) {
    AffineModel m(model_of(kGlobal), time_change_of(kGlobal));
    auto c = solve_mu(m.law(), kN);
    std::vector<double> ks;
    for (int i = 0; i <= 40; ++i) ks.push_back(0.005 * i);
    for (double T : {1.0, 5.0, 10.0}) {
        auto v = lp_tranche_puts(T, ks, m, c);
        for (size_t i = 0; i < ks.size(); ++i) {
            EXPECT_GE(v[i], -1e-13);
            EXPECT_LE(v[i], ks[i] + 1e-13);
            if (i > 0) EXPECT_GE(v[i], v[i - 1] - 1e-13);
            if (i > 1) EXPECT_GE(v[i] - 2 * v[i - 1] + v[i - 2], -1e-12);
        }
    }
}

TEST(LargePoolPut, CloseToExactPutForWideTranches) {
    auto m = five_year();
    auto c = solve_mu(m.law(), kN);
    auto s = BasketState::initial(m);
    for (double K : {0.03, 0.06, 0.12}) {
        const double exact = tranche_put(s, 5.0, K, m, kN);
        const double lp = lp_tranche_put(5.0, K, m, c);
        EXPECT_LT(std::abs(lp - exact), 0.01 * K) << K;
    }
}

TEST(LargePoolPut, DiscreteLawMatchesDirectSum) {
    // Without catastrophe and with a two-point law, L~ is a compound count; compare with the lattice
    // law rebuilt from the inverted pool count distribution and exact convolution powers.
    ModelParams mp = model_of(kPerMaturity[0]);
    mp.segments[0].beta = 0.0;
    mp.jump_law = JumpSizeLaw::discrete({{0.4, 0.5}, {0.8, 0.5}});
    AffineModel m(mp, time_change_of(kPerMaturity[0]));
    auto c = solve_mu(m.law(), kN);
    const int g = 4096;
    auto phi = count_spectrum(m, 0.0, 5.0, m.initial_intensity(), g);
    // Counts only depend on the intensity, so the count law is the same as for a fixed jump size.
    for (auto& z : phi) z = std::conj(z);
    auto b = fft::backward_real(phi, g);
    std::vector<double> pj(g / 2);
    for (int j = 0; j < g / 2; ++j) pj[j] = b[j] * std::exp(count_damping(g) * j) / g;
    const double K = 0.06;
    const double cK = 1.0 - K / c.loss_max;
    // Sum over the count j and the number of large jumps i ~ Binomial(j, 1/2); L~ = 0.4 (j + i).
    double want = 0.0;
    for (int j = 0; j < 400; ++j) {
        double b = std::pow(0.5, j);
        for (int i = 0; i <= j; ++i) {
            const double x = 0.4 * (j + i);
            want += pj[j] * b * std::max(std::exp(-c.mu * x) - cK, 0.0);
            b *= double(j - i) / (i + 1);
        }
    }
    want *= c.loss_max;
    EXPECT_NEAR(lp_tranche_put(5.0, K, m, c), want, 1e-9);
}

TEST(CorrectionKernel, DecaysAsInverseSquare) {
    auto c = solve_mu(JumpSizeLaw::fixed(0.6), kN);
    for (double p : {10.0, 100.0, 1e3, 1e4})
        EXPECT_LE(std::abs(correction_kernel(p, 2.0, c)) * p * p, c.mu * c.loss_max * (1 + 1e-12));
}
