#pragma once

// Two-stage calibration: time-change slopes bootstrapped on index quotes, then differential
// evolution on the model parameters against tranche quotes weighted by bid-ask.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cidx/pricers.hpp"

namespace cidx {

enum class QuoteKind { Upfront, Spread };

// Values are decimals: upfront 0.3681, spread 0.014775; bid_ask in the same unit as the value.
struct TrancheQuote {
    double attach = 0.0;
    double detach = 0.0;
    double running = 0.0;  // running spread paid with an upfront quote; ignored for spread quotes
    QuoteKind kind = QuoteKind::Upfront;
    double value = 0.0;
    double bid_ask = 0.0;
};

// Index quoted as price = 1 - upfront with a running spread.
struct IndexQuote {
    double running = 0.0;
    double price = 1.0;
};

struct MaturityQuotes {
    std::string label;
    LegSchedule schedule;  // tranche legs
    std::optional<LegSchedule> index_schedule;  // index legs when their conventions differ
    IndexQuote index;
    std::vector<TrancheQuote> tranches;
    double maturity() const { return schedule.maturity(); }
    const LegSchedule& index_legs() const { return index_schedule ? *index_schedule : schedule; }
};

struct QuoteSet {
    std::vector<MaturityQuotes> maturities;
    void validate() const;
};

// Index price implied by a model, same convention as the quote.
double model_index_price(const MaturityQuotes& q, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                         const PricingOptions& opt = {});
// Tranche value in the quote's own convention (upfront or breakeven spread).
double model_tranche_value(const TrancheQuote& q, const TranchePrice& p);

inline constexpr double kSlopeMin = 1e-3;
inline constexpr double kSlopeMax = 1e3;

// Slopes with breakpoints at the quote maturities, fitted one maturity at a time so each index
// quote reprices exactly; the last slope extends past the last maturity. NoSolution when a quote
// is out of reach for slopes in [kSlopeMin, kSlopeMax].
TimeChange bootstrap_slopes(const ModelParams& model, const QuoteSet& quotes, const DiscountCurve& curve,
                            const Basket& basket, const PricingOptions& opt = {});

struct QuoteFit {
    int maturity = 0;
    int tranche = 0;
    double market = 0.0;
    double model = 0.0;
    double error = 0.0;  // (model - market) / bid_ask
};

// Sum of squared bid-ask-normalized tranche errors over the listed maturities (all when empty).
double objective(const ModelParams& model, const TimeChange& tc, const QuoteSet& quotes, const DiscountCurve& curve,
                 const Basket& basket, const std::vector<int>& fit_maturities = {}, const PricingOptions& opt = {},
                 std::vector<QuoteFit>* fits = nullptr);

enum class CalibParam { Lambda0, LambdaInf, Kappa, Sigma, N, Gamma, Theta, Alpha, Beta };
inline constexpr int kCalibParams = 9;
const char* calib_param_name(CalibParam p);

// A parameter is either searched in [lo, hi] or held at value.
struct ParamRange {
    bool free = true;
    double lo = 0.0;
    double hi = 1.0;
    double value = 0.0;
};

struct CalibSpec {
    std::array<ParamRange, kCalibParams> params;
    // Frozen relations; when set, lambda_inf (resp. sigma) is derived and its range is ignored.
    std::optional<double> lambda_inf_over_kappa;
    std::optional<double> sigma2_over_kappa_lambda_inf;
    std::vector<int> fit_maturities;  // tranche quotes entering the objective; empty = all (global)
    double jump_loss = 0.6;           // fixed loss per default, 1 - recovery

    int population = 0;  // 0: 10 x dimension
    double F = 0.8;
    double CR = 0.9;
    int max_generations = 200;
    std::uint64_t seed = 1;
    int threads = 1;
    double target = 0.0;  // stop once the best objective is at or below this
    PricingOptions pricing;

    CalibSpec();  // all nine parameters free over default bounds
    // Searches lambda0, kappa, n, gamma, theta, beta with lambda_inf/kappa, sigma^2/(kappa lambda_inf)
    // and alpha = 0 frozen; only the tranches of one maturity enter the objective.
    static CalibSpec single_maturity(int maturity_index, double lambda_inf_over_kappa = 0.04289,
                                     double sigma2_over_kappa_lambda_inf = 0.5195);

    int dimension() const;
    void validate() const;
    // Model from a gene vector (size dimension()); n is rounded.
    ModelParams decode(const std::vector<double>& genes) const;
};

struct CalibResult {
    ModelParams model;
    TimeChange time_change;
    double objective = 0.0;
    std::vector<QuoteFit> fits;
    std::vector<double> best_genes;
    std::vector<double> best_history;  // best objective after each generation (index 0: initial population)
    int generations = 0;
    long evaluations = 0;
    bool budget_exhausted = false;  // max_generations reached above target
};

// DE/rand/1/bin; every candidate is bootstrapped then scored. Deterministic for a seed, independent
// of the thread count. Candidates whose bootstrap or pricing fails score +inf.
CalibResult calibrate(const CalibSpec& spec, const QuoteSet& quotes, const DiscountCurve& curve, const Basket& basket);

}  // namespace cidx
