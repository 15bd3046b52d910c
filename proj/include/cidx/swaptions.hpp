#pragma once

// Index swaptions: exact pricing on the joint law of (pool count, intensity) at exercise, and the
// one-dimensional large-pool approximation.

#include <optional>
#include <vector>

#include "cidx/largepool.hpp"
#include "cidx/pricers.hpp"

namespace cidx {

enum class SwaptionSide { Payer, Receiver };

struct SwaptionSpec {
    double exercise = 0.0;  // t
    double maturity = 0.0;  // T
    double strike = 0.0;    // spread per year
    SwaptionSide side = SwaptionSide::Payer;
    bool front_end_protection = true;  // payer only
    int frequency = 4;
    std::optional<LegSchedule> schedule;  // underlying swap; regular from T back to t when empty

    void validate() const;
    LegSchedule swap_schedule() const;
};

// Joint mass of the pool count and the intensity at time t, on Q_t = 0.
struct JointGrid {
    double t = 0.0;
    int n_count = 0;              // rows j = 0..n_count-1
    std::vector<double> lambda;   // intensity nodes (real-time)
    double dlambda = 0.0;
    double damping = 0.0;
    std::vector<double> mass;     // row-major n_count x lambda.size(): P(N~_t = j, lambda_t in cell i, Q_t = 0)
    double catastrophe = 0.0;     // P(Q_t > 0)
    double clipped = 0.0;         // negative or out-of-range mass removed before renormalizing

    double at(int j, int i) const { return mass[static_cast<size_t>(j) * lambda.size() + i]; }
};

JointGrid joint_density(double t, const AffineModel& m, const Numerics& num = {});

// Value of the underlying swap at exercise, conditional on the state there. With
// H(lambda) = sum_n h_n exp(A_n + B_n lambda), the receiver side (per unit index notional) is
// lbar [(1 - k/N) H(lambda) - 1] and the front-end-protected payer side is its negative.
struct ExerciseValue {
    double exercise = 0.0;
    double lbar = 0.0;
    int n_names = 0;
    std::vector<double> times, weights;
    std::vector<cplx> A, B;  // coefficients of E_t[(1-1/N)^{N~_tau - N~_t} 1{Q_tau = 0}]; real for this argument

    double H(double lambda) const;
    double payoff(const SwaptionSpec& spec, int defaults, double lambda, bool catastrophe) const;
};

// Node weights h_n of the swap at exercise: coupons, protection increments and the final notional.
void swap_nodes(const SwaptionSpec& spec, const DiscountCurve& curve, double lbar, std::vector<double>& times,
                std::vector<double>& weights);

ExerciseValue exercise_value(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                             const DiscountCurve& curve);

// Discounted expected payoff, per unit index notional times basket.notional.
double swaption_exact(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                      const Numerics& num = {});
// Same with the joint density at exercise supplied, to price several strikes on one grid.
double swaption_exact(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                      const JointGrid& grid);

struct FastSwaptionNumerics {
    double envelope_tol = 1e-9;
    double p_max = 1e5;
};

// Receiver price by the one-dimensional Fourier integral. anchor: typical intensity Lambda at exercise
// (E[lambda_t] when empty).
double swaption_fast_receiver(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                              const DiscountCurve& curve, std::optional<double> anchor = {},
                              const FastSwaptionNumerics& num = {});

// Payer with front-end protection: forward value at exercise plus the fast receiver.
double swaption_fast_payer(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                           const DiscountCurve& curve, std::optional<double> anchor = {},
                           const FastSwaptionNumerics& num = {});

// Mean and variance of the real-time intensity at t (on all paths).
std::pair<double, double> intensity_moments(double t, const AffineModel& m);

}  // namespace cidx
