#pragma once

// Parameter types for the loss-intensity model.

#include <complex>
#include <limits>
#include <vector>

namespace cidx {

using cplx = std::complex<double>;

inline constexpr double kOpenEnd = std::numeric_limits<double>::infinity();

// One Gamma(n+1, theta) jump component of the intensity, arriving at rate gamma.
struct GammaJump {
    double gamma = 0.0;
    int n = 0;
    double theta = 1.0;
};

struct ParamSegment {
    double t_start = 0.0;
    double t_end = kOpenEnd;
    double lambda_inf = 0.0;
    double kappa = 1.0;
    double sigma = 0.1;
    std::vector<GammaJump> jumps;
    double alpha = 0.0;
    double beta = 0.0;
    double xi = 0.0;
    double zeta = 0.0;
    double eta = 0.0;

    // Parameters seen by real time when model time runs at speed a.
    ParamSegment scaled(double a) const;
    void validate() const;
};

// Loss given default per name, in name units (a loss of 1 wipes one name's notional).
struct JumpSizeLaw {
    struct Point {
        double loss;
        double weight;
    };
    std::vector<Point> points;

    static JumpSizeLaw fixed(double l1) { return JumpSizeLaw{{{l1, 1.0}}}; }
    static JumpSizeLaw discrete(std::vector<Point> pts);

    bool is_fixed() const { return points.size() == 1; }
    double mean() const;
    double min_loss() const;
    double max_loss() const;
    cplx phi(cplx u) const;  // E[exp(u l)]
    void validate() const;
};

struct ModelParams {
    double lambda0 = 0.0;
    std::vector<ParamSegment> segments;
    JumpSizeLaw jump_law = JumpSizeLaw::fixed(0.6);

    // Constant parameters over [0, inf).
    static ModelParams constant(double lambda0, const ParamSegment& seg, JumpSizeLaw law);
    void validate() const;
    const ParamSegment& segment_at(double t) const;
};

// Piecewise affine map from real time to model time, t(0) = 0.
// Slope slopes[i] applies on (breakpoints[i-1], breakpoints[i]]; the last slope extends to infinity.
struct TimeChange {
    std::vector<double> breakpoints;
    std::vector<double> slopes;

    static TimeChange identity() { return TimeChange{{}, {1.0}}; }
    double slope_right(double tau) const;  // slope on (tau, tau+)
    double model_time(double tau) const;
    void validate() const;
};

// Argument of the characteristic function. ex = e^x and ey = e^y are real in [0, 1];
// zero encodes x = -inf (resp. y = -inf).
struct CharArg {
    cplx u{0.0, 0.0};
    cplx v{0.0, 0.0};
    cplx w{0.0, 0.0};
    double ex = 1.0;
    double ey = 1.0;
};

struct AffineCoeffs {
    cplx A{0.0, 0.0};
    cplx B{0.0, 0.0};
};

}  // namespace cidx
