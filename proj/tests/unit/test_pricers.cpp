#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "../support/param_sets.hpp"
#include "cidx/pricers.hpp"

using namespace cidx;
using namespace cidx::testing;

namespace {

const Basket kBasket{125, 1.0};

AffineModel global_model() { return AffineModel(model_of(kGlobal), time_change_of(kGlobal)); }
AffineModel five_year() { return AffineModel(model_of(kPerMaturity[0]), time_change_of(kPerMaturity[0])); }

AffineModel quiet_model() {
    ParamSegment seg;
    seg.lambda_inf = 0.0;
    seg.kappa = 1.0;
    seg.sigma = 0.1;
    return AffineModel(ModelParams::constant(0.0, seg, JumpSizeLaw::fixed(0.6)), TimeChange::identity());
}

double annuity(const LegSchedule& s, const DiscountCurve& c) {
    double a = 0.0;
    for (const auto& p : s.periods) a += c.df(p.pay) * p.accrual;
    return a;
}

}  // namespace

TEST(Schedule, DatedQuarterlyRollsBackFromMaturity) {
    auto s = itraxx_schedule(0);
    s.validate();
    EXPECT_NEAR(s.maturity(), kMaturities[0], 1e-15);
    EXPECT_EQ(s.periods.size(), 15u);
    // First coupon 2009-12-20: 81 days after valuation.
    EXPECT_NEAR(s.periods[0].end, 81.0 / 365.0, 1e-15);
    auto s360 = itraxx_schedule(0, DayCount::Act360);
    EXPECT_NEAR(s360.periods[1].accrual, 90.0 / 360.0, 1e-15);  // Dec 20 to Mar 20, 2010
}

TEST(Schedule, RegularAndForward) {
    auto s = regular_schedule(5.0);
    EXPECT_EQ(s.periods.size(), 20u);
    auto f = s.from(1.1);
    EXPECT_NEAR(f.periods.front().start, 1.1, 1e-15);
    EXPECT_NEAR(f.periods.front().accrual, 0.15, 1e-12);
    EXPECT_NEAR(f.maturity(), 5.0, 1e-12);
}

TEST(DiscountCurve, InterpolationAndFlat) {
    auto c = eur_2009_curve();
    EXPECT_EQ(c.df(0.0), 1.0);
    EXPECT_NEAR(c.df(5.0), std::exp(-0.0265 * 5.0), 1e-15);
    EXPECT_NEAR(c.df(6.0), std::sqrt(c.df(5.0) * c.df(7.0)), 1e-15);
    double prev = 1.0;
    for (double t = 0.1; t < 12.0; t += 0.1) {
        EXPECT_LT(c.df(t), prev);
        prev = c.df(t);
    }
    EXPECT_NEAR(DiscountCurve::flat(0.03).df(2.0, 5.0), std::exp(-0.09), 1e-15);
}

TEST(IndexCds, ZeroSpreadIsDiscountedExpectedLoss) {
    auto m = five_year();
    auto curve = DiscountCurve::flat(0.0);
    auto s = regular_schedule(5.0);
    auto r = price_index_cds(s, 0.0, m, kBasket, curve);
    auto st = BasketState::initial(m);
    EXPECT_NEAR(r.pv, expected_loss(st, 5.0, m, 125), 1e-14);
    EXPECT_GT(r.pv, 0.0);
}

TEST(IndexCds, ZeroDefaultModelPaysAnnuity) {
    auto q = quiet_model();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(1);
    auto r = price_index_cds(s, 0.01, q, kBasket, curve);
    EXPECT_NEAR(r.pv, -0.01 * annuity(s, curve), 1e-14);
}

TEST(IndexCds, DecreasingInSpreadAndBreakeven) {
    auto m = global_model();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(2);
    auto r = price_index_cds(s, 0.0, m, kBasket, curve);
    double prev = r.pv;
    for (double sp = 0.001; sp < 0.05; sp += 0.004) {
        const double pv = price_index_cds(s, sp, m, kBasket, curve).pv;
        EXPECT_LT(pv, prev);
        prev = pv;
    }
    EXPECT_NEAR(price_index_cds(s, r.breakeven, m, kBasket, curve).pv, 0.0, 1e-14);
}

TEST(CdoTranche, EmptyTrancheAndInvalid) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    auto r = price_cdo_tranche(s, {0.05, 0.05, 0.05}, m, kBasket, curve);
    EXPECT_EQ(r.pv, 0.0);
    try {
        price_cdo_tranche(s, {0.06, 0.03, 0.05}, m, kBasket, curve);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidTranche);
    }
}

TEST(CdoTranche, AdditivityAcrossPartition) {
    for (const auto& ps : {kGlobal, kPerMaturity[1]}) {
        AffineModel m(model_of(ps), time_change_of(ps));
        auto curve = eur_2009_curve();
        auto s = itraxx_schedule(2);
        std::vector<TrancheSpec> parts{{0.0, 0.03, 0.05}, {0.03, 0.06, 0.05}, {0.06, 0.09, 0.05},
                                       {0.09, 0.12, 0.0}, {0.12, 0.22, 0.0},  {0.22, 1.0, 0.0}};
        auto tr = price_cdo_tranches(s, parts, m, kBasket, curve);
        double sum = 0.0;
        for (const auto& t : tr) sum += t.protection;
        const auto idx = price_index_cds(s, 0.0, m, kBasket, curve);
        EXPECT_NEAR(sum, idx.protection, 1e-8);
    }
}

TEST(CdoTranche, SharedSpectraMatchSinglePricing) {
    auto m = global_model();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    std::vector<TrancheSpec> parts{{0.0, 0.03, 0.05}, {0.09, 0.12, 0.0}};
    auto both = price_cdo_tranches(s, parts, m, kBasket, curve);
    for (size_t i = 0; i < parts.size(); ++i) {
        auto one = price_cdo_tranche(s, parts[i], m, kBasket, curve);
        EXPECT_NEAR(both[i].upfront, one.upfront, 1e-14);
        EXPECT_NEAR(both[i].breakeven, one.breakeven, 1e-14);
    }
}

TEST(CdoTranche, EquityUpfrontIncreasesWithInitialIntensity) {
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    for (const auto& ps : kPerMaturity) {
        double prev = -1.0;
        for (double scale : {0.5, 1.0, 1.5, 2.0}) {
            ModelParams mp = model_of(ps);
            mp.lambda0 *= scale;
            AffineModel m(mp, time_change_of(ps));
            const double u = price_cdo_tranche(s, {0.0, 0.03, 0.05}, m, kBasket, curve).upfront;
            EXPECT_GT(u, prev);
            prev = u;
        }
    }
}

TEST(CounterpartyFlag, InertWithoutCounterpartyParameters) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    PricingOptions on;
    on.counterparty = true;
    EXPECT_NEAR(price_index_cds(s, 0.01, m, kBasket, curve, on).pv, price_index_cds(s, 0.01, m, kBasket, curve).pv,
                1e-12);
    EXPECT_NEAR(price_cdo_tranche(s, {0.03, 0.06, 0.05}, m, kBasket, curve, on).pv,
                price_cdo_tranche(s, {0.03, 0.06, 0.05}, m, kBasket, curve).pv, 1e-12);
    EXPECT_NEAR(price_ntd(s, 2, 0.01, 0.4, m, kBasket, curve, on).pv, price_ntd(s, 2, 0.01, 0.4, m, kBasket, curve).pv,
                1e-12);
}

TEST(Ntd, ZeroDefaultFirstToDefaultPaysAnnuity) {
    auto q = quiet_model();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    auto r = price_ntd(s, 1, 0.02, 0.4, q, kBasket, curve);
    EXPECT_NEAR(r.pv, -0.02 * annuity(s, curve), 1e-14);
}

TEST(Ntd, TriggeredStateHasNoForwardProtection) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = regular_schedule(5.0);
    PricingOptions opt;
    BasketState st;
    st.t = 1.0;
    st.defaults = 3;
    st.loss = 3 * 0.6 / 125;
    st.lambda = 1.0;
    opt.state = st;
    auto r = price_ntd(s, 3, 0.02, 0.4, m, kBasket, curve, opt);
    EXPECT_EQ(r.protection, 0.0);
    EXPECT_EQ(r.rpv01, 0.0);
    try {
        price_ntd(s, 125, 0.02, 0.4, m, kBasket, curve);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidRank);
    }
}

TEST(Ntd, ProtectionDecreasesWithRank) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0);
    double prev = 1.0;
    for (int k = 1; k <= 10; ++k) {
        auto r = price_ntd(s, k, 0.0, 0.4, m, kBasket, curve);
        EXPECT_LT(r.protection, prev);
        prev = r.protection;
    }
}

TEST(QuoteTransform, Arithmetic) {
    EXPECT_DOUBLE_EQ(quote_transform(0.0, 5.0, 0.10), 0.10);
    EXPECT_NEAR(quote_transform(0.05, 5.0, 0.0), 0.25 / 1.125, 1e-15);
    EXPECT_NEAR(quote_transform(0.05, 5.0, 0.3681), 0.6181 / 1.125, 1e-15);
    EXPECT_NEAR(quote_transform(0.05, 5.0, 0.3681), 0.5494, 5e-5);
}

TEST(CdoTranche, LargePoolMethodTracksExact) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = itraxx_schedule(0, DayCount::Act360);
    std::vector<TrancheSpec> parts{{0.0, 0.03, 0.05}, {0.03, 0.06, 0.05}, {0.06, 0.09, 0.05},
                                   {0.09, 0.12, 0.0}, {0.12, 0.22, 0.0},  {0.22, 1.0, 0.0}};
    PricingOptions lp;
    lp.method = TrancheMethod::LargePool;
    auto a = price_cdo_tranches(s, parts, m, kBasket, curve);
    auto b = price_cdo_tranches(s, parts, m, kBasket, curve, lp);
    double sum = 0.0;
    for (size_t i = 0; i < parts.size(); ++i) {
        EXPECT_NEAR(b[i].upfront, a[i].upfront, 0.01) << i;
        sum += b[i].protection;
    }
    // Expected loss is exact under the large-pool map, so the index still decomposes.
    EXPECT_NEAR(sum, price_index_cds(s, 0.0, m, kBasket, curve).protection, 1e-8);
}

TEST(IndexCds, ForwardStartingLegProtectsFromItsStart) {
    auto m = five_year();
    auto curve = eur_2009_curve();
    auto s = regular_schedule(5.0).from(0.6);
    auto st = BasketState::initial(m);
    double want = 0.0, prev = expected_loss(st, 0.6, m, 125);
    for (const auto& p : s.periods) {
        const double el = expected_loss(st, p.end, m, 125);
        want += curve.df(p.end) * (el - prev);
        prev = el;
    }
    EXPECT_NEAR(price_index_cds(s, 0.01, m, kBasket, curve).protection, want, 1e-15);
}
