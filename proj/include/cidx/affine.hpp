#pragma once

// Closed-form characteristic function of (loss, count, intensity, catastrophe, counterparty).

#include <utility>
#include <vector>

#include "cidx/errors.hpp"
#include "cidx/model.hpp"

namespace cidx {

inline constexpr double kSigmaFloor = 1e-6;

cplx psi(const CharArg& arg, const ParamSegment& seg, cplx phiJ_u);

// Constant solutions (B_plus, B_minus) of the Riccati equation.
std::pair<cplx, cplx> b_roots(cplx psi, const ParamSegment& seg);

// Coefficients at the start of a constant-parameter segment of length dt, given those at its end.
AffineCoeffs solve_segment(const AffineCoeffs& terminal, const CharArg& arg, const ParamSegment& seg,
                           cplx phiJ_u, double dt);

// Model compiled for repeated evaluation: parameter segments merged with the time change
// and pre-scaled. The intensity state is the real-time intensity (right limit).
class AffineModel {
public:
    AffineModel(ModelParams params, TimeChange tc);

    // E_t exp(u L_T + v N_T + w lambda_T + x Q_T + y R_T) = exp(A + B lambda_t + u L_t + ...).
    AffineCoeffs char_fn(double t, double T, const CharArg& arg) const;
    // Same with phi_J(u) supplied, to skip re-evaluating the jump-size law.
    AffineCoeffs char_fn(double t, double T, const CharArg& arg, cplx phiJ_u) const;

    // exp(A + B lambda) for a given intensity state.
    cplx cf(double t, double T, const CharArg& arg, double lambda_t) const;

    double initial_intensity() const { return params_.lambda0 * tc_.slope_right(0.0); }
    const ModelParams& params() const { return params_; }
    const TimeChange& time_change() const { return tc_; }
    const JumpSizeLaw& law() const { return params_.jump_law; }

    struct Interval {
        double start;
        double end;
        double slope;
        ParamSegment seg;  // scaled to real time
    };
    const std::vector<Interval>& intervals() const { return intervals_; }
    // Interval holding (tau, tau+).
    const Interval& interval_right(double tau) const;

private:
    ModelParams params_;
    TimeChange tc_;
    std::vector<Interval> intervals_;
};

AffineCoeffs char_fn(double t, double T, const CharArg& arg, const ModelParams& model,
                     const TimeChange& tc);

// Fixed-step RK4 integration of the coefficient ODEs, run in model time with unscaled
// parameters. Independent of the closed form; used as a test oracle.
AffineCoeffs ode_oracle(double t, double T, const CharArg& arg, const ModelParams& model,
                        const TimeChange& tc, int steps);

}  // namespace cidx
