#pragma once

// JSON market, model, run-config and calibration-spec files, normalized to library units
// (decimals, years). Rates and prices carry explicit unit tags; untagged values are rejected.

#include <optional>
#include <string>
#include <vector>

#include "cidx/calibration.hpp"
#include "cidx/mc.hpp"
#include "cidx/swaptions.hpp"
#include "json.hpp"

namespace cidx {

using json = nlohmann::ordered_json;

struct MarketData {
    Date valuation{};
    DiscountCurve curve = DiscountCurve::flat(0.0);
    json discount_spec;  // normalized discount section, kept for round trips
    Basket basket;
    double recovery = 0.4;
    int frequency = 4;
    DayCount tranche_accrual = DayCount::Act360;
    DayCount index_accrual = DayCount::Act360;
    std::vector<Date> maturity_dates;  // one per quote maturity
    QuoteSet quotes;

    // Quote index by label ("5Y") or maturity date; SchemaError when absent.
    int find_maturity(const std::string& key) const;
};

struct ModelFile {
    ModelParams params;
    std::optional<TimeChange> time_change;  // explicit slopes
    bool bootstrap = false;                 // fit slopes to the market index quotes instead
};

enum class SwaptionMethod { Exact, Fast };

struct RunConfig {
    PricingOptions pricing;
    SwaptionMethod swaption_method = SwaptionMethod::Exact;
    SimConfig mc;
};

// Value in decimals from {"value": x, "unit": "bp"|"percent"|"decimal"} or "165bp" / "36.81%".
double parse_quantity(const json& j, const std::string& path);

MarketData parse_market(const json& j);
MarketData load_market(const std::string& path);
json market_to_json(const MarketData& m);

// Jump law defaults to the market's fixed loss 1 - recovery when the file has none.
ModelFile parse_model(const json& j, const MarketData* market = nullptr);
json model_to_json(const ModelParams& p, const TimeChange& tc);

RunConfig parse_config(const json& j);
// A maturity label and the default jump loss are resolved against the market when given.
CalibSpec parse_calib_spec(const json& j, const MarketData* market = nullptr);

json read_json_file(const std::string& path);

// Time change for pricing: explicit slopes, bootstrapped slopes, or identity.
TimeChange resolve_time_change(const ModelFile& model, const MarketData& market, const RunConfig& cfg);

}  // namespace cidx
