#include <gtest/gtest.h>

#include <cmath>

#include "../support/itraxx_quotes.hpp"
#include "cidx/calibration.hpp"

using namespace cidx;
using namespace cidx::testing;

namespace {

const Basket kBasket{125, 1.0};

// Replaces every quote by the model's own value.
QuoteSet synthetic_quotes(const AffineModel& m, const DiscountCurve& curve, const PricingOptions& opt = {}) {
    auto q = itraxx_quotes();
    for (auto& mq : q.maturities) {
        mq.index.price = model_index_price(mq, m, kBasket, curve, opt);
        std::vector<TrancheSpec> specs;
        for (const auto& t : mq.tranches) specs.push_back({t.attach, t.detach, t.kind == QuoteKind::Upfront ? t.running : 0.0});
        const auto prices = price_cdo_tranches(mq.schedule, specs, m, kBasket, curve, opt);
        for (size_t k = 0; k < specs.size(); ++k) mq.tranches[k].value = model_tranche_value(mq.tranches[k], prices[k]);
    }
    return q;
}

CalibSpec small_spec() {
    auto s = CalibSpec::single_maturity(0);
    s.pricing.numerics.count_grid = 512;
    s.population = 8;
    s.max_generations = 3;
    s.seed = 99;
    auto set = [&](CalibParam p, double lo, double hi) {
        s.params[static_cast<int>(p)].lo = lo;
        s.params[static_cast<int>(p)].hi = hi;
    };
    set(CalibParam::Lambda0, 0.5, 2.0);
    set(CalibParam::Kappa, 0.2, 1.0);
    set(CalibParam::N, 2.0, 6.0);
    set(CalibParam::Gamma, 0.05, 0.2);
    set(CalibParam::Theta, 1.0, 2.5);
    set(CalibParam::Beta, 0.0, 0.01);
    return s;
}

}  // namespace

TEST(QuoteSet, Validation) {
    QuoteSet empty;
    try {
        empty.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    }
    auto q = itraxx_quotes();
    q.maturities[1].tranches[2].bid_ask = 0.0;
    EXPECT_THROW(q.validate(), Error);
    auto r = itraxx_quotes();
    std::swap(r.maturities[0], r.maturities[1]);
    EXPECT_THROW(r.validate(), Error);
}

TEST(Bootstrap, FixedPointAtUnitSlopes) {
    auto model = model_of(kPerMaturity[0]);
    auto curve = eur_2009_curve();
    TimeChange unit{{kMaturities[0], kMaturities[1], kMaturities[2]}, {1.0, 1.0, 1.0}};
    auto q = synthetic_quotes(AffineModel(model, unit), curve);
    auto tc = bootstrap_slopes(model, q, curve, kBasket);
    for (double a : tc.slopes) EXPECT_NEAR(a, 1.0, 1e-9);
}

TEST(Bootstrap, RepricesMarketIndexQuotes) {
    auto curve = eur_2009_curve();
    auto q = itraxx_quotes();
    for (const auto& ps : {kGlobal, kPerMaturity[0], kPerMaturity[1], kPerMaturity[2]}) {
        auto model = model_of(ps);
        auto tc = bootstrap_slopes(model, q, curve, kBasket);
        AffineModel m(model, tc);
        for (const auto& mq : q.maturities) EXPECT_LT(std::abs(model_index_price(mq, m, kBasket, curve) - mq.index.price), 1e-8);
    }
}

TEST(Bootstrap, GlobalSlopesNearPublished) {
    // The discount curve of the published fit is not known; the first slope is within 1%, the later
    // ones absorb the long-end curve difference (measured 1.8% and 7.9%).
    auto tc = bootstrap_slopes(model_of(kGlobal), itraxx_quotes(), eur_2009_curve(), kBasket);
    EXPECT_NEAR(tc.slopes[0] / kGlobal.slopes[0], 1.0, 0.01);
    EXPECT_NEAR(tc.slopes[1] / kGlobal.slopes[1], 1.0, 0.02);
    EXPECT_NEAR(tc.slopes[2] / kGlobal.slopes[2], 1.0, 0.10);
}

TEST(Bootstrap, ScalingEquivalenceRecoversCompensatingSlopes) {
    const auto& ps = kPerMaturity[0];
    auto model = model_of(ps);
    auto curve = eur_2009_curve();
    auto q = synthetic_quotes(AffineModel(model, time_change_of(ps)), curve);
    // Running model time twice as fast with all rates doubled is the same model at half the slopes.
    const double c = 2.0;
    auto scaled = model;
    scaled.lambda0 *= c;
    for (auto& s : scaled.segments) s = s.scaled(c);
    auto tc = bootstrap_slopes(scaled, q, curve, kBasket);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(tc.slopes[i], ps.slopes[i] / c, 1e-7);
}

TEST(Bootstrap, UnreachableQuoteHasNoSolution) {
    auto q = itraxx_quotes();
    q.maturities[0].index.price = 0.2;
    try {
        bootstrap_slopes(model_of(kPerMaturity[0]), q, eur_2009_curve(), kBasket);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoSolution);
    }
}

TEST(Objective, ZeroAtMidAndCountsBidAskUnits) {
    const auto& ps = kPerMaturity[0];
    auto model = model_of(ps);
    auto tc = time_change_of(ps);
    auto curve = eur_2009_curve();
    auto q = synthetic_quotes(AffineModel(model, tc), curve);
    EXPECT_LT(objective(model, tc, q, curve, kBasket), 1e-20);
    for (auto& mq : q.maturities)
        for (size_t k = 0; k < mq.tranches.size(); ++k) mq.tranches[k].value += (k % 2 ? 1.0 : -1.0) * mq.tranches[k].bid_ask;
    EXPECT_NEAR(objective(model, tc, q, curve, kBasket), 15.0, 1e-9);
    std::vector<QuoteFit> fits;
    EXPECT_NEAR(objective(model, tc, q, curve, kBasket, {1}, {}, &fits), 5.0, 1e-9);
    ASSERT_EQ(fits.size(), 5u);
    EXPECT_EQ(fits[0].maturity, 1);
    EXPECT_NEAR(fits[1].error, -1.0, 1e-9);
}

TEST(CalibSpec, DecodeAppliesFrozenRelations) {
    auto s = CalibSpec::single_maturity(0);
    EXPECT_EQ(s.dimension(), 6);
    auto m = s.decode({1.013, 0.4076, 4.4, 0.1049, 1.622, 0.004045});
    const auto& seg = m.segments[0];
    EXPECT_NEAR(seg.lambda_inf, 0.04289 * 0.4076, 1e-15);
    EXPECT_NEAR(seg.sigma * seg.sigma / (seg.kappa * seg.lambda_inf), 0.5195, 1e-12);
    EXPECT_EQ(seg.jumps[0].n, 4);
    EXPECT_EQ(seg.alpha, 0.0);
    EXPECT_EQ(CalibSpec().dimension(), 9);
    auto bad = s;
    bad.params[0].hi = bad.params[0].lo;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Calibrate, DeterministicElitistAndThreadIndependent) {
    auto curve = eur_2009_curve();
    auto q = itraxx_quotes();
    auto spec = small_spec();
    auto a = calibrate(spec, q, curve, kBasket);
    auto b = calibrate(spec, q, curve, kBasket);
    spec.threads = 2;
    auto c = calibrate(spec, q, curve, kBasket);
    EXPECT_EQ(a.best_history, b.best_history);
    EXPECT_EQ(a.best_genes, b.best_genes);
    EXPECT_EQ(a.best_history, c.best_history);
    ASSERT_EQ(a.best_history.size(), 4u);
    for (size_t i = 1; i < a.best_history.size(); ++i) EXPECT_LE(a.best_history[i], a.best_history[i - 1]);
    EXPECT_EQ(a.evaluations, 32);
    EXPECT_TRUE(a.budget_exhausted);
    EXPECT_EQ(a.objective, a.best_history.back());
    // Index quotes reprice exactly at the returned slopes.
    AffineModel m(a.model, a.time_change);
    for (const auto& mq : q.maturities)
        EXPECT_LT(std::abs(model_index_price(mq, m, kBasket, curve, spec.pricing) - mq.index.price), 1e-8);
}
