#include <algorithm>
#include <cmath>
#include <string>

#include "cidx/errors.hpp"
#include "cidx/model.hpp"

namespace cidx {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateSigma: return "DegenerateSigma";
        case ErrorCode::PoleCollision: return "PoleCollision";
        case ErrorCode::SizeTooLarge: return "SizeTooLarge";
        case ErrorCode::InvalidDetachment: return "InvalidDetachment";
        case ErrorCode::InvalidRank: return "InvalidRank";
        case ErrorCode::InvalidTranche: return "InvalidTranche";
        case ErrorCode::NumericalQuality: return "NumericalQuality";
        case ErrorCode::AnchorInvalid: return "AnchorInvalid";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::NoSolution: return "NoSolution";
        case ErrorCode::BudgetExhausted: return "BudgetExhausted";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::UnitError: return "UnitError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ParamSegment ParamSegment::scaled(double a) const {
    ParamSegment s = *this;
    s.lambda_inf *= a;
    s.kappa *= a;
    s.sigma *= a;
    s.beta *= a;
    s.eta *= a;
    for (auto& j : s.jumps) {
        j.gamma *= a;
        j.theta *= a;
    }
    return s;
}

void ParamSegment::validate() const {
    require(t_end > t_start, "segment end must follow its start");
    require(kappa > 0.0, "kappa must be positive");
    require(lambda_inf >= 0.0, "lambda_inf must be nonnegative");
    require(sigma > 0.0, "sigma must be positive");
    require(alpha >= 0.0 && beta >= 0.0 && zeta >= 0.0 && eta >= 0.0,
            "alpha, beta, zeta, eta must be nonnegative");
    require(xi >= 0.0 && xi <= 1.0, "xi must lie in [0,1]");
    for (const auto& j : jumps) {
        require(j.gamma >= 0.0, "jump rate must be nonnegative");
        require(j.n >= 0, "jump shape index must be nonnegative");
        require(j.theta > 0.0, "jump scale must be positive");
    }
}

JumpSizeLaw JumpSizeLaw::discrete(std::vector<Point> pts) {
    JumpSizeLaw law{std::move(pts)};
    double total = 0.0;
    for (const auto& p : law.points) total += p.weight;
    require(total > 0.0, "jump size law has zero total weight");
    for (auto& p : law.points) p.weight /= total;
    law.validate();
    return law;
}

double JumpSizeLaw::mean() const {
    double m = 0.0;
    for (const auto& p : points) m += p.loss * p.weight;
    return m;
}

double JumpSizeLaw::min_loss() const {
    double m = points.front().loss;
    for (const auto& p : points) m = std::min(m, p.loss);
    return m;
}

double JumpSizeLaw::max_loss() const {
    double m = points.front().loss;
    for (const auto& p : points) m = std::max(m, p.loss);
    return m;
}

cplx JumpSizeLaw::phi(cplx u) const {
    if (points.size() == 1) return std::exp(u * points[0].loss);
    cplx s = 0.0;
    for (const auto& p : points) s += p.weight * std::exp(u * p.loss);
    return s;
}

void JumpSizeLaw::validate() const {
    require(!points.empty(), "jump size law has no points");
    double total = 0.0;
    for (const auto& p : points) {
        require(p.loss > 0.0 && p.loss <= 1.0, "loss per default must lie in (0,1]");
        require(p.weight >= 0.0, "jump size weights must be nonnegative");
        total += p.weight;
    }
    require(std::abs(total - 1.0) < 1e-12, "jump size weights must sum to one");
}

ModelParams ModelParams::constant(double lambda0, const ParamSegment& seg, JumpSizeLaw law) {
    ModelParams m;
    m.lambda0 = lambda0;
    m.segments = {seg};
    m.segments[0].t_start = 0.0;
    m.segments[0].t_end = kOpenEnd;
    m.jump_law = std::move(law);
    return m;
}

void ModelParams::validate() const {
    require(lambda0 >= 0.0, "lambda0 must be nonnegative");
    require(!segments.empty(), "model needs at least one parameter segment");
    require(segments.front().t_start == 0.0, "first segment must start at 0");
    for (size_t i = 0; i < segments.size(); ++i) {
        segments[i].validate();
        if (i + 1 < segments.size())
            require(segments[i].t_end == segments[i + 1].t_start, "segments must tile time without gaps");
    }
    jump_law.validate();
}

const ParamSegment& ModelParams::segment_at(double t) const {
    for (const auto& s : segments)
        if (t < s.t_end) return s;
    return segments.back();
}

double TimeChange::slope_right(double tau) const {
    size_t i = std::upper_bound(breakpoints.begin(), breakpoints.end(), tau) - breakpoints.begin();
    return slopes[std::min(i, slopes.size() - 1)];
}

double TimeChange::model_time(double tau) const {
    double t = 0.0, prev = 0.0;
    for (size_t i = 0; i < breakpoints.size(); ++i) {
        double a = slopes[std::min(i, slopes.size() - 1)];
        if (tau <= breakpoints[i]) return t + a * (tau - prev);
        t += a * (breakpoints[i] - prev);
        prev = breakpoints[i];
    }
    return t + slopes[std::min(breakpoints.size(), slopes.size() - 1)] * (tau - prev);
}

void TimeChange::validate() const {
    require(!slopes.empty(), "time change needs at least one slope");
    require(slopes.size() == breakpoints.size() || slopes.size() == breakpoints.size() + 1,
            "time change needs one slope per interval");
    for (double a : slopes) require(a > 0.0 && std::isfinite(a), "time change slopes must be positive");
    double prev = 0.0;
    for (double b : breakpoints) {
        require(b > prev, "time change breakpoints must be increasing and positive");
        prev = b;
    }
}

}  // namespace cidx
