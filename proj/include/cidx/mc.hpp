#pragma once

// Monte Carlo simulation of the model from its dynamics: CIR intensity with Gamma jumps (full-truncation
// Euler in model time), Cox pool defaults thinned onto the basket, catastrophe and counterparty events.
// Independent of the transform machinery; used as a reference for the closed-form pricers.

#include <cstdint>
#include <functional>
#include <vector>

#include "cidx/pricers.hpp"
#include "cidx/swaptions.hpp"

namespace cidx {

struct SimConfig {
    long paths = 100000;
    double dt = 1.0 / 365.0;  // real-time step bound
    std::uint64_t seed = 1;
    bool antithetic = true;
    int threads = 1;

    void validate() const;
};

// State observed at a requested real time.
struct Observation {
    double t = 0.0;
    int defaults = 0;          // basket names defaulted
    double loss = 0.0;         // basket loss, fraction of notional
    long pool_count = 0;       // N~
    double pool_loss = 0.0;    // L~
    bool catastrophe = false;  // Q > 0
    bool counterparty_default = false;  // R > 0
    double lambda = 0.0;       // real-time intensity (right limit)
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    long samples = 0;  // independent samples (antithetic pairs count once)
};

// Payoff functional: observations at the requested times (in order) -> one value per output.
using PathFunctional = std::function<void(const std::vector<Observation>&, double* out)>;

// Simulates cfg.paths paths and averages n_out payoff outputs. Sample i (an antithetic pair counts
// as one sample) draws from mt19937_64 seeded with splitmix64(seed ^ splitmix64(i)); samples are
// accumulated in blocks of kMcBlock paths merged in block order, so results do not depend on the
// thread count.
std::vector<Estimate> simulate(const ModelParams& model, const TimeChange& tc, const Basket& basket,
                               const std::vector<double>& obs_times, const SimConfig& cfg, int n_out,
                               const PathFunctional& payoff);

inline constexpr long kMcBlock = 1024;

std::uint64_t splitmix64(std::uint64_t x);

// Estimators replicating the pricers' cash-flow conventions on simulated paths (initial state only).
Estimate mc_expected_defaults(double T, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                              const SimConfig& cfg);
std::vector<Estimate> mc_tranche_puts(double T, const std::vector<double>& strikes, const ModelParams& model,
                                      const TimeChange& tc, const Basket& basket, const SimConfig& cfg);
// E[exp(u L~_T) 1{Q_T = 0}] for real u.
Estimate mc_char_fn(double T, double u, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                    const SimConfig& cfg);
Estimate mc_index_cds(const LegSchedule& schedule, double spread, const ModelParams& model, const TimeChange& tc,
                      const Basket& basket, const DiscountCurve& curve, const SimConfig& cfg,
                      bool counterparty = false);
// Upfront per unit tranche notional.
std::vector<Estimate> mc_cdo_upfronts(const LegSchedule& schedule, const std::vector<TrancheSpec>& tranches,
                                      const ModelParams& model, const TimeChange& tc, const Basket& basket,
                                      const DiscountCurve& curve, const SimConfig& cfg, bool counterparty = false);
Estimate mc_ntd(const LegSchedule& schedule, int k, double spread, double recovery, const ModelParams& model,
                const TimeChange& tc, const Basket& basket, const DiscountCurve& curve, const SimConfig& cfg,
                bool counterparty = false);
// Exercise payoff from the closed-form conditional swap value at the simulated state.
Estimate mc_swaption(const SwaptionSpec& spec, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                     const DiscountCurve& curve, const SimConfig& cfg);

}  // namespace cidx
