#include "cidx/affine.hpp"

#include <algorithm>
#include <cmath>

namespace cidx {

namespace {

constexpr double kPoleTol = 1e-12;

cplx gamma_mgf(const GammaJump& j, cplx z) {
    // E[exp(z X)] for X ~ Gamma(n+1, theta)
    return std::pow(1.0 - j.theta * z, -static_cast<double>(j.n + 1));
}

cplx ipow(cplx x, int k) {
    cplx r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

}  // namespace

cplx psi(const CharArg& arg, const ParamSegment& seg, cplx phiJ_u) {
    return 1.0 - std::exp(arg.v) * phiJ_u * (1.0 - seg.xi * (1.0 - arg.ey)) + seg.alpha * (1.0 - arg.ex) +
           seg.zeta * (1.0 - arg.ey);
}

std::pair<cplx, cplx> b_roots(cplx ps, const ParamSegment& seg) {
    if (seg.sigma < kSigmaFloor) fail(ErrorCode::DegenerateSigma, "sigma below floor 1e-6");
    const double s2 = seg.sigma * seg.sigma;
    const cplx d = std::sqrt(seg.kappa * seg.kappa + 2.0 * s2 * ps);
    // B_minus in rationalized form avoids cancellation when sigma is small.
    return {(seg.kappa + d) / s2, -2.0 * ps / (seg.kappa + d)};
}

AffineCoeffs solve_segment(const AffineCoeffs& terminal, const CharArg& arg, const ParamSegment& seg,
                           cplx phiJ_u, double dt) {
    if (dt <= 0.0) return terminal;
    const cplx ps = psi(arg, seg, phiJ_u);
    const auto [bp, bm] = b_roots(ps, seg);
    const double s2 = seg.sigma * seg.sigma;
    const cplx d = 0.5 * s2 * (bp - bm);
    if (std::abs(d) < 1e-14) fail(ErrorCode::PoleCollision, "coincident Riccati roots");
    const cplx w = terminal.B;
    const double linear = -seg.beta * (1.0 - arg.ex) * dt - seg.eta * (1.0 - arg.ey) * dt;
    const double kl = seg.kappa * seg.lambda_inf;

    auto F = [&](cplx b) {
        cplx f = kl * b;
        for (const auto& j : seg.jumps) f += j.gamma * (gamma_mgf(j, b) - 1.0);
        return f;
    };

    for (const auto& j : seg.jumps) {
        if (std::abs(1.0 - j.theta * bp) < kPoleTol || std::abs(1.0 - j.theta * bm) < kPoleTol ||
            std::abs(1.0 - j.theta * w) < kPoleTol)
            fail(ErrorCode::PoleCollision, "1 - theta B vanishes");
    }

    AffineCoeffs out;
    if (std::abs(w - bp) < 1e-12 * std::max(1.0, std::abs(bp))) {
        out.B = bp;
        out.A = terminal.A + dt * F(bp) + linear;
        return out;
    }

    const cplx chi0 = (w - bm) / (w - bp);
    const cplx chi = chi0 * std::exp(-d * dt);
    const cplx B = (bm - chi * bp) / (1.0 - chi);
    // ln((B - B+)/(w - B+)) and ln((B - B-)/(w - B-))
    const cplx lp = std::log(1.0 - chi0) - std::log(1.0 - chi);
    const cplx lm = lp - d * dt;

    cplx acc = F(bp) * lp - F(bm) * lm;
    for (const auto& j : seg.jumps) {
        if (j.gamma == 0.0) continue;
        const int m = j.n + 1;
        const cplx x = 1.0 - j.theta * B;
        const cplx xT = 1.0 - j.theta * w;
        if (std::abs(x) < kPoleTol) fail(ErrorCode::PoleCollision, "1 - theta B vanishes");
        const cplx lx = std::log(x) - std::log(xT);
        const cplx ix = 1.0 / x, ixT = 1.0 / xT;
        for (int sgn = 1; sgn >= -1; sgn -= 2) {
            const cplx xr = 1.0 - j.theta * (sgn > 0 ? bp : bm);
            const cplx ixr = 1.0 / xr;
            cplx block = -ipow(ixr, m) * lx;
            cplx pk = ix, pkT = ixT;  // x^-k, xT^-k
            cplx pr = ipow(ixr, m - 1);  // xr^-(m-k) at k = 1
            for (int k = 1; k <= j.n; ++k) {
                block += (pr * (pk - pkT)) / static_cast<double>(k);
                pk *= ix;
                pkT *= ixT;
                pr *= xr;
            }
            acc += static_cast<double>(sgn) * j.gamma * block;
        }
    }
    out.B = B;
    out.A = terminal.A + acc / d + linear;
    return out;
}

AffineModel::AffineModel(ModelParams params, TimeChange tc) : params_(std::move(params)), tc_(std::move(tc)) {
    params_.validate();
    tc_.validate();
    std::vector<double> cuts;
    for (const auto& s : params_.segments)
        if (std::isfinite(s.t_end)) cuts.push_back(s.t_end);
    for (double b : tc_.breakpoints) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double prev = 0.0;
    auto push = [&](double end) {
        const double a = tc_.slope_right(prev);
        intervals_.push_back({prev, end, a, params_.segment_at(prev).scaled(a)});
        prev = end;
    };
    for (double c : cuts) push(c);
    push(kOpenEnd);
}

const AffineModel::Interval& AffineModel::interval_right(double tau) const {
    for (const auto& iv : intervals_)
        if (tau < iv.end) return iv;
    return intervals_.back();
}

AffineCoeffs AffineModel::char_fn(double t, double T, const CharArg& arg) const {
    return char_fn(t, T, arg, params_.jump_law.phi(arg.u));
}

AffineCoeffs AffineModel::char_fn(double t, double T, const CharArg& arg, cplx phiJ_u) const {
    require(t >= 0.0 && t <= T, "char_fn needs 0 <= t <= T");
    // Interval with start < T <= end.
    size_t i = 0;
    while (i + 1 < intervals_.size() && intervals_[i].end < T) ++i;
    AffineCoeffs c{0.0, arg.w};
    if (T == intervals_[i].end && i + 1 < intervals_.size())
        c.B *= intervals_[i + 1].slope / intervals_[i].slope;
    double cur = T;
    for (;;) {
        const auto& iv = intervals_[i];
        const double lo = std::max(t, iv.start);
        c = solve_segment(c, arg, iv.seg, phiJ_u, cur - lo);
        cur = lo;
        if (cur <= t || i == 0) break;
        c.B *= iv.slope / intervals_[i - 1].slope;
        --i;
    }
    return c;
}

cplx AffineModel::cf(double t, double T, const CharArg& arg, double lambda_t) const {
    const auto c = char_fn(t, T, arg);
    return std::exp(c.A + c.B * lambda_t);
}

AffineCoeffs char_fn(double t, double T, const CharArg& arg, const ModelParams& model, const TimeChange& tc) {
    return AffineModel(model, tc).char_fn(t, T, arg);
}

AffineCoeffs ode_oracle(double t, double T, const CharArg& arg, const ModelParams& model, const TimeChange& tc,
                        int steps) {
    require(steps >= 100, "ode_oracle needs at least 100 steps");
    require(t >= 0.0 && t <= T, "ode_oracle needs 0 <= t <= T");
    model.validate();
    tc.validate();
    const cplx phiJ = model.jump_law.phi(arg.u);

    // Real-time cut points mapped to model time; parameters are unscaled in model time.
    std::vector<double> cuts{t, T};
    for (const auto& s : model.segments)
        if (s.t_end > t && s.t_end < T) cuts.push_back(s.t_end);
    for (double b : tc.breakpoints)
        if (b > t && b < T) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double s_t = tc.model_time(t), s_T = tc.model_time(T);
    cplx A = 0.0;
    cplx B = arg.w * tc.slope_right(T);  // coefficient of model-time intensity
    for (size_t k = cuts.size() - 1; k >= 1; --k) {
        const double lo = tc.model_time(cuts[k - 1]), hi = tc.model_time(cuts[k]);
        const ParamSegment& seg = model.segment_at(cuts[k - 1]);
        const double kl = seg.kappa * seg.lambda_inf, s2 = seg.sigma * seg.sigma;
        const cplx ps = psi(arg, seg, phiJ);
        const double lin = seg.beta * (1.0 - arg.ex) + seg.eta * (1.0 - arg.ey);
        // d/dt of (A, B); integrated backward in t.
        auto rhs = [&](cplx b, cplx& dA, cplx& dB) {
            dB = seg.kappa * b - 0.5 * s2 * b * b + ps;
            cplx jmp = 0.0;
            for (const auto& j : seg.jumps) jmp += j.gamma * (gamma_mgf(j, b) - 1.0);
            dA = -kl * b - jmp + lin;
        };
        const int n = std::max(1, static_cast<int>(std::ceil(steps * (hi - lo) / std::max(s_T - s_t, 1e-300))));
        const double h = -(hi - lo) / n;
        for (int s = 0; s < n; ++s) {
            cplx a1, b1, a2, b2, a3, b3, a4, b4;
            rhs(B, a1, b1);
            rhs(B + 0.5 * h * b1, a2, b2);
            rhs(B + 0.5 * h * b2, a3, b3);
            rhs(B + h * b3, a4, b4);
            A += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            B += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
    }
    return {A, B / tc.slope_right(t)};
}

}  // namespace cidx
