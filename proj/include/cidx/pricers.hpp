#pragma once

// Index CDS, CDO tranche and Nth-to-default pricing from the loss expectations.
// Premium legs use expectations at period midpoints; protection legs discount each
// period's expected loss increment from the period end.

#include <optional>
#include <vector>

#include "cidx/largepool.hpp"
#include "cidx/loss.hpp"
#include "cidx/schedule.hpp"

namespace cidx {

struct Basket {
    int n_names = 125;
    double notional = 1.0;
};

enum class TrancheMethod { Exact, LargePool };

struct PricingOptions {
    Numerics numerics;
    TrancheMethod method = TrancheMethod::Exact;  // large pool: initial state, no counterparty
    AuxLaw aux = AuxLaw::Poisson;
    bool counterparty = false;          // cash flows only while the counterparty survives
    std::optional<BasketState> state;   // conditional state; initial state when empty
};

struct TrancheSpec {
    double attach = 0.0;
    double detach = 0.0;
    double running = 0.0;  // running spread per year
    void validate() const;
};

// Protection, premium and PV in currency units of the notional; rpv01 is the premium leg per unit spread.
struct CdsPrice {
    double protection = 0.0;
    double rpv01 = 0.0;
    double premium = 0.0;
    double pv = 0.0;  // protection - premium
    double breakeven = 0.0;
};

// Quote-level figures are per unit tranche notional; legs are in currency units.
struct TranchePrice {
    double protection = 0.0;
    double rpv01 = 0.0;
    double premium = 0.0;
    double pv = 0.0;
    double upfront = 0.0;    // (protection - running * rpv01) / tranche notional
    double breakeven = 0.0;  // running spread that makes the upfront zero
};

struct NtdPrice {
    double protection = 0.0;
    double rpv01 = 0.0;
    double premium = 0.0;
    double pv = 0.0;
    double breakeven = 0.0;
};

CdsPrice price_index_cds(const LegSchedule& schedule, double spread, const AffineModel& m, const Basket& basket,
                         const DiscountCurve& curve, const PricingOptions& opt = {});

TranchePrice price_cdo_tranche(const LegSchedule& schedule, const TrancheSpec& tranche, const AffineModel& m,
                               const Basket& basket, const DiscountCurve& curve, const PricingOptions& opt = {});

// Several tranches on one schedule share the count spectra at every date.
std::vector<TranchePrice> price_cdo_tranches(const LegSchedule& schedule, const std::vector<TrancheSpec>& tranches,
                                             const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                                             const PricingOptions& opt = {});

// Nth-to-default on one name notional (basket.notional); loss given default 1 - recovery.
NtdPrice price_ntd(const LegSchedule& schedule, int k, double spread, double recovery, const AffineModel& m,
                   const Basket& basket, const DiscountCurve& curve, const PricingOptions& opt = {});

// (s T + U) / (1 + s T / 2): running spread and upfront folded into one number.
double quote_transform(double spread, double T, double upfront);

}  // namespace cidx
