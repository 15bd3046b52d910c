#include <gtest/gtest.h>

#include <cmath>

#include "cidx/errors.hpp"
#include "cidx/fft.hpp"
#include "cidx/pool.hpp"

using namespace cidx;

namespace {

std::vector<double> invert(const PayoffKernel& k) {
    auto a = fft::backward_real(k.spectrum, k.grid);
    for (int j = 0; j < k.grid; ++j) a[j] *= std::exp(-k.damping * j) / k.grid;
    return a;
}

}  // namespace

TEST(PoolMatrix, FirstSteps) {
    auto m = build_pool_matrix(5, 3);
    EXPECT_EQ(m.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m.at(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(m.at(2, 1), 0.2);
    EXPECT_DOUBLE_EQ(m.at(2, 2), 0.8);
}

TEST(PoolMatrix, RowStochasticAndSupport) {
    auto m = build_pool_matrix(125, 2000);
    for (int j = 0; j <= m.j_max; ++j) {
        double s = 0.0;
        for (int k = 0; k <= 125; ++k) {
            const double p = m.at(j, k);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            if (k > j) EXPECT_EQ(p, 0.0);
            s += p;
        }
        if (j >= 1) EXPECT_EQ(m.at(j, 0), 0.0);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(PoolMatrix, RecursionMatchesClosedForm) {
    for (int n = 1; n <= 20; ++n) {
        auto m = build_pool_matrix(n, 40);
        for (int j = 0; j <= 40; ++j)
            for (int k = 0; k <= n; ++k) EXPECT_NEAR(m.at(j, k), closed_form_pjk(n, j, k), 1e-9) << n << ' ' << j;
    }
    auto m = build_pool_matrix(8, 11);
    for (int k = 0; k <= 8; ++k) EXPECT_NEAR(m.at(11, k), closed_form_pjk(8, 11, k), 1e-10);
}

TEST(PoolMatrix, ClosedFormLimits) {
    EXPECT_EQ(closed_form_pjk(5, 3, 0), 0.0);
    EXPECT_DOUBLE_EQ(closed_form_pjk(5, 1, 1), 1.0);
    try {
        closed_form_pjk(31, 2, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SizeTooLarge);
    }
}

TEST(PoolMatrix, ConditionalStartShiftsSupport) {
    auto m = build_pool_matrix(10, 30, 4);
    for (int j = 0; j <= 30; ++j) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) EXPECT_EQ(m.at(j, k), 0.0);
        for (int k = 0; k <= 10; ++k) s += m.at(j, k);
        EXPECT_NEAR(s, 1.0, 1e-13);
    }
    EXPECT_DOUBLE_EQ(m.at(1, 4), 0.4);
    EXPECT_DOUBLE_EQ(m.at(1, 5), 0.6);
}

TEST(ConditionalMoments, MatchRowMoments) {
    EXPECT_EQ(conditional_mean_var(10, 0).first, 0.0);
    EXPECT_EQ(conditional_mean_var(10, 0).second, 0.0);
    EXPECT_NEAR(conditional_mean_var(37, 1).first, 1.0, 1e-14);
    for (int n : {2, 10, 25, 50}) {
        auto m = build_pool_matrix(n, 200);
        for (int j = 0; j <= 200; ++j) {
            double e = 0.0, e2 = 0.0;
            for (int k = 0; k <= n; ++k) {
                e += k * m.at(j, k);
                e2 += double(k) * k * m.at(j, k);
            }
            auto [ej, vj] = conditional_mean_var(n, j);
            EXPECT_NEAR(ej, e, 1e-10 * std::max(1.0, e));
            EXPECT_NEAR(vj, e2 - e * e, 1e-10 * std::max(1.0, e2));
        }
    }
}

TEST(ConditionalMoments, LargePoolVarianceAsymptote) {
    // At a defaulted fraction p the occupancy variance grows like N (1-p)(p + (1-p) ln(1-p)).
    // The frequently quoted p(1-p) N overstates it by a factor of about six at p = 0.3.
    const double p = 0.3;
    const double c = (1.0 - p) * (p + (1.0 - p) * std::log(1.0 - p));
    for (int n : {50, 100, 200}) {
        const int j = static_cast<int>(std::lround(std::log(1.0 - p) / std::log(1.0 - 1.0 / n)));
        const double v = conditional_mean_var(n, j).second;
        EXPECT_NEAR(v / n / c, 1.0, 0.05) << n;
        EXPECT_LT(v / n, 0.25 * p * (1.0 - p));
    }
}

TEST(TrancheKernel, ZeroStrikeIsZero) {
    auto k = kernel_ft_tranche(0.0, 125, JumpSizeLaw::fixed(0.6), -1, 4096);
    for (double f : k.values) EXPECT_EQ(f, 0.0);
    for (auto c : k.spectrum) EXPECT_EQ(std::abs(c), 0.0);
}

TEST(TrancheKernel, RoundTripAndZeroFrequency) {
    auto k = kernel_ft_tranche(0.03, 125, JumpSizeLaw::fixed(0.6), -1, 4096);
    double sum = 0.0;
    for (int j = 0; j <= k.j_max; ++j) sum += k.values[j] * std::exp(k.damping * j);
    EXPECT_NEAR(k.spectrum[0].real(), sum, 1e-12 * sum);
    EXPECT_GT(sum, 0.0);
    auto back = invert(k);
    for (int j = 0; j < k.grid; ++j) {
        const double f = j <= k.j_max ? k.values[j] : 0.0;
        EXPECT_NEAR(back[j], f, 1e-10);
    }
    // f is (K - l1 k / N)^+ averaged over the row; at j = 1 exactly one default.
    EXPECT_NEAR(k.values[0], 0.03, 1e-15);
    EXPECT_NEAR(k.values[1], 0.03 - 0.6 / 125, 1e-15);
}

TEST(TrancheKernel, NonincreasingAndVanishing) {
    auto k = kernel_ft_tranche(0.12, 125, JumpSizeLaw::fixed(0.6), -1, 4096);
    for (int j = 1; j <= k.j_max; ++j) EXPECT_LE(k.values[j], k.values[j - 1] + 1e-18);
    EXPECT_LT(k.values.back(), 1e-17);
}

TEST(TrancheKernel, InvalidDetachment) {
    try {
        kernel_ft_tranche(0.6, 125, JumpSizeLaw::fixed(0.6), -1, 4096);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidDetachment);
    }
}

TEST(TrancheKernel, DiscreteLawReducesToFixed) {
    // A two-point law with all weight on one point must reproduce the fixed-loss kernel.
    auto law = JumpSizeLaw::discrete({{0.6, 1.0}, {0.3, 0.0}});
    auto a = kernel_ft_tranche(0.06, 125, law, 400, 4096);
    auto b = kernel_ft_tranche(0.06, 125, JumpSizeLaw::fixed(0.6), 400, 4096);
    for (int j = 0; j <= 400; ++j) EXPECT_NEAR(a.values[j], b.values[j], 1e-14);
}

TEST(LossConvolutions, MeanIsPreserved) {
    auto law = JumpSizeLaw::discrete({{0.45, 0.5}, {0.75, 0.5}});
    auto t = loss_convolutions(law, 125, 20);
    for (int i = 0; i <= 20; ++i) {
        double mass = 0.0, mean = 0.0;
        for (size_t m = 0; m < t.rows[i].size(); ++m) {
            mass += t.rows[i][m];
            mean += m * t.step * t.rows[i][m];
        }
        EXPECT_NEAR(mass, 1.0, 1e-13);
        EXPECT_NEAR(mean, i * 0.6 / 125, 1e-13);
    }
}

TEST(DigitalKernel, ValuesAndRoundTrip) {
    auto k = kernel_ft_digital(5, 125, -1, 4096);
    EXPECT_EQ(k.values[0], 1.0);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(k.values[j], 1.0, 1e-15);
    for (int j = 1; j <= k.j_max; ++j) EXPECT_LE(k.values[j], k.values[j - 1] + 1e-18);
    auto back = invert(k);
    for (int j = 0; j < k.grid; ++j) EXPECT_NEAR(back[j], j <= k.j_max ? k.values[j] : 0.0, 1e-10);
    auto k1 = kernel_ft_digital(1, 125, -1, 4096);
    EXPECT_EQ(k1.values[0], 1.0);
    EXPECT_EQ(k1.values[1], 0.0);
}

TEST(DigitalKernel, InvalidRank) {
    for (int r : {0, 125, 200}) {
        try {
            kernel_ft_digital(r, 125, -1, 4096);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidRank);
        }
    }
}
