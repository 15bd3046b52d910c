#include "cidx/swaptions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cidx/fft.hpp"
#include "cidx/parallel.hpp"
#include "cidx/pool.hpp"

namespace cidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxLambdaGrid = 1 << 16;
constexpr double kLambdaSmoothing = 0.01;

cplx cf_at_zero(const AffineModel& m, double T, const CharArg& a) {
    const auto c = m.char_fn(0.0, T, a);
    return std::exp(c.A + c.B * m.initial_intensity());
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < n; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

// min over s > 0 of E[e^{s lambda_t}] e^{-s W}. The scan stops where the moment generating function
// explodes: past that point the closed form returns finite values that are not moments.
double lambda_tail_bound(double t, const AffineModel& m, double W, double mean) {
    double best = 1.0, prev_k = 0.0;
    for (double s = 0.01 / std::max(mean, 1e-3); s < 100.0 / std::max(mean, 1e-3); s *= 1.2) {
        CharArg a;
        a.w = s;
        const cplx v = cf_at_zero(m, t, a);
        if (!std::isfinite(v.real()) || v.real() <= 0.0) break;
        const double k = std::log(v.real());
        if (k <= prev_k) break;  // the cumulant generating function is increasing
        prev_k = k;
        best = std::min(best, std::exp(k - s * W));
    }
    return best;
}

}  // namespace

void SwaptionSpec::validate() const {
    require(exercise > 0.0 && exercise < maturity, "swaption needs 0 < exercise < maturity");
    require(strike > 0.0, "swaption strike must be positive");
    require(frequency > 0, "coupon frequency must be positive");
}

LegSchedule SwaptionSpec::swap_schedule() const {
    LegSchedule s = schedule ? schedule->from(exercise) : regular_schedule(maturity, frequency).from(exercise);
    s.validate();
    require(std::abs(s.periods.front().start - exercise) < 1e-12, "swap schedule must start at exercise");
    return s;
}

std::pair<double, double> intensity_moments(double t, const AffineModel& m) {
    auto K = [&](double w) {
        CharArg a;
        a.w = w;
        return std::log(cf_at_zero(m, t, a).real());
    };
    const double scale = std::max(m.initial_intensity(), 1e-3);
    const double h = 1e-4 / scale;
    const double kp = K(h), km = K(-h);
    return {(kp - km) / (2 * h), std::max((kp + km) / (h * h), 0.0)};
}

JointGrid joint_density(double t, const AffineModel& m, const Numerics& num) {
    require(t > 0.0, "joint density needs t > 0");
    require(num.lambda_grid >= 64, "intensity grid must have at least 64 points");
    JointGrid g;
    g.t = t;
    const double lambda0 = m.initial_intensity();
    const int G = required_count_grid(m, 0.0, t, lambda0, 64);
    const double delta = count_damping(G);

    const auto [mean, var] = intensity_moments(t, m);
    // W_tail: a Chernoff bound puts the mass above it below 1e-10. The periodic window extends a quarter
    // beyond; that strip is the aliased image of negative intensities, where the inversion rings around
    // the edge of the support, and is folded back onto zero.
    double w_tail = mean + 12.0 * std::sqrt(var) + 1e-3;
    while (lambda_tail_bound(t, m, w_tail, mean) > 1e-10) w_tail *= 1.5;
    const double W = 1.25 * w_tail;
    // Undoing the damping multiplies inversion errors by up to e^{cW}; the window already holds the
    // tail, so the damping is kept light.
    double c = std::clamp(1.0 / std::max(mean, 1e-12), 0.1, 10.0);
    c = std::min(c, 2.0 / W);
    g.damping = c;

    // Near zero the intensity density can be singular (CIR below the Feller bound), so its transform
    // decays slowly and a plain inversion rings. The transform is multiplied by a Gaussian of width
    // smooth (a small fraction of the intensity spread), which convolves the density with a positive,
    // localized kernel. The grid is refined until either the raw transform or the filtered one is
    // negligible at the Nyquist frequency.
    const double smooth = kLambdaSmoothing * std::min(std::sqrt(var), mean);
    CharArg probe;
    probe.ex = 0.0;
    probe.w = -c;
    const double base = std::abs(cf_at_zero(m, t, probe));
    int M = 1;
    while (M < num.lambda_grid) M <<= 1;
    for (; M < kMaxLambdaGrid; M <<= 1) {
        const double q_max = kPi * M / W;
        if (q_max * smooth >= 5.0) break;
        probe.w = cplx(-c, q_max);
        if (M * std::abs(cf_at_zero(m, t, probe)) < 1e-6 * base) break;
    }
    const double dl = W / M;
    const double dq = 2.0 * kPi / W;
    g.dlambda = dl;

    // Transform over the intensity for each count frequency k = 0..G/2.
    const int half = G / 2 + 1;
    std::vector<std::vector<cplx>> rows(half, std::vector<cplx>(M));
    parallel_for(half, num.threads, [&](int k) {
        CharArg a;
        a.ex = 0.0;
        a.v = cplx(-delta, 2.0 * kPi * k / G);
        auto& row = rows[k];
        for (int mm = 0; mm < M; ++mm) {
            const int f = mm < M / 2 ? mm : mm - M;
            a.w = cplx(-c, f * dq);
            const auto co = m.char_fn(0.0, t, a, 1.0);
            row[mm] = std::exp(co.A + co.B * lambda0);
            const double z = f * dq * smooth;
            row[mm] *= std::exp(-0.5 * z * z);
        }
        fft::complex_inplace(row, -1);
    });

    const int n_lambda = static_cast<int>(std::ceil(w_tail / dl));
    const int n_count = G / 2;
    g.n_count = n_count;
    g.lambda.resize(n_lambda);
    for (int i = 0; i < n_lambda; ++i) g.lambda[i] = i * dl;
    g.mass.assign(static_cast<size_t>(n_count) * n_lambda, 0.0);

    double clipped = 0.0;
    std::vector<cplx> col(half);
    for (int i = 0; i < M; ++i) {
        for (int k = 0; k < half; ++k) col[k] = std::conj(rows[k][i]);
        const auto x = fft::backward_real(col, G);
        const int ii = i < n_lambda ? i : i - M;
        const double scale_i = std::exp(c * ii * dl) / (double(G) * M);
        for (int j = 0; j < G; ++j) {
            // The upper half of the count grid holds aliased negative counts.
            const int jj = j < n_count ? j : j - G;
            const double v = x[j] * std::exp(delta * jj) * scale_i;
            if (jj < 0)
                clipped += std::abs(v);
            else
                g.mass[static_cast<size_t>(j) * n_lambda + std::max(ii, 0)] += v;
        }
    }
    double total = 0.0;
    for (auto& v : g.mass) {
        if (v < 0.0) {
            clipped -= v;
            v = 0.0;
        }
        total += v;
    }
    CharArg a0;
    a0.ex = 0.0;
    const double q_alive = cf_at_zero(m, t, a0).real();
    g.catastrophe = 1.0 - q_alive;
    g.clipped = clipped;
    if (clipped > 1e-4) fail(ErrorCode::NumericalQuality, "joint density inversion lost too much mass");
    const double s = total > 0.0 ? q_alive / total : 0.0;
    for (auto& v : g.mass) v *= s;
    return g;
}

void swap_nodes(const SwaptionSpec& spec, const DiscountCurve& curve, double lbar, std::vector<double>& times,
                std::vector<double>& weights) {
    const LegSchedule s = spec.swap_schedule();
    const double t = spec.exercise;
    auto zc = [&](double tau) { return curve.df(t, tau); };
    times.clear();
    weights.clear();
    times.push_back(t);
    weights.push_back(1.0 - zc(s.periods.front().end));
    const size_t n = s.periods.size();
    for (size_t i = 0; i < n; ++i) {
        const double e = s.periods[i].end;
        times.push_back(e);
        weights.push_back(i + 1 < n ? zc(e) - zc(s.periods[i + 1].end) : zc(e));
    }
    for (const auto& p : s.periods) {
        times.push_back(p.mid());
        weights.push_back(spec.strike / lbar * p.accrual * zc(p.pay));
    }
}

double ExerciseValue::H(double lambda) const {
    double h = 0.0;
    for (size_t n = 0; n < times.size(); ++n) h += weights[n] * std::exp((A[n] + B[n] * lambda).real());
    return h;
}

double ExerciseValue::payoff(const SwaptionSpec& spec, int defaults, double lambda, bool catastrophe) const {
    const bool payer = spec.side == SwaptionSide::Payer;
    if (catastrophe) return payer && spec.front_end_protection ? lbar : 0.0;
    const double alive = 1.0 - double(defaults) / n_names;
    const double h = H(lambda);
    if (!payer) return lbar * std::max(alive * h - 1.0, 0.0);
    if (spec.front_end_protection) return lbar * std::max(1.0 - alive * h, 0.0);
    return lbar * alive * std::max(1.0 - h, 0.0);
}

ExerciseValue exercise_value(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                             const DiscountCurve& curve) {
    spec.validate();
    ExerciseValue ev;
    ev.exercise = spec.exercise;
    ev.lbar = m.law().mean();
    ev.n_names = basket.n_names;
    swap_nodes(spec, curve, ev.lbar, ev.times, ev.weights);
    CharArg a;
    a.ex = 0.0;
    a.v = std::log(1.0 - 1.0 / basket.n_names);
    for (double tau : ev.times) {
        const auto co = m.char_fn(spec.exercise, tau, a, 1.0);
        ev.A.push_back(co.A);
        ev.B.push_back(co.B);
    }
    return ev;
}

double swaption_exact(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                      const Numerics& num) {
    spec.validate();
    return swaption_exact(spec, m, basket, curve, joint_density(spec.exercise, m, num));
}

double swaption_exact(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                      const JointGrid& g) {
    const auto ev = exercise_value(spec, m, basket, curve);
    require(std::abs(g.t - spec.exercise) < 1e-12, "joint density is not at the exercise date");
    const int N = basket.n_names;
    const int nl = static_cast<int>(g.lambda.size());

    // Mass by basket count and intensity node.
    std::vector<double> by_k(static_cast<size_t>(N + 1) * nl, 0.0);
    const auto pool = build_pool_matrix(N, g.n_count - 1);
    for (int j = 0; j < g.n_count; ++j) {
        const double* pj = pool.row(j);
        for (int i = 0; i < nl; ++i) {
            const double w = g.at(j, i);
            if (w == 0.0) continue;
            for (int k = 0; k <= std::min(j, N); ++k) by_k[static_cast<size_t>(k) * nl + i] += w * pj[k];
        }
    }
    double value = g.catastrophe * ev.payoff(spec, N, 0.0, true);
    for (int i = 0; i < nl; ++i) {
        double col = 0.0;
        for (int k = 0; k <= N; ++k) col += by_k[static_cast<size_t>(k) * nl + i];
        if (col == 0.0) continue;
        for (int k = 0; k <= N; ++k) {
            const double w = by_k[static_cast<size_t>(k) * nl + i];
            if (w != 0.0) value += w * ev.payoff(spec, k, g.lambda[i], false);
        }
    }
    return value * curve.df(spec.exercise) * basket.notional;
}

double swaption_fast_receiver(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                              const DiscountCurve& curve, std::optional<double> anchor,
                              const FastSwaptionNumerics& num) {
    spec.validate();
    const auto c = solve_mu(m.law(), basket.n_names);
    const double mu = c.mu, LM = c.loss_max;
    std::vector<double> times, h;
    swap_nodes(spec, curve, LM, times, h);
    const double t = spec.exercise;
    const size_t n = times.size();
    std::vector<double> A(n), B(n);
    for (size_t i = 0; i < n; ++i) {
        CharArg a;
        a.u = -mu;
        a.ex = 0.0;
        const auto co = m.char_fn(t, times[i], a);
        A[i] = co.A.real();
        B[i] = co.B.real();
    }
    auto H = [&](double lam) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += h[i] * std::exp(A[i] + B[i] * lam);
        return s;
    };
    if (std::log(H(0.0)) / mu <= 0.0) return 0.0;  // never exercised
    double Lam = anchor ? *anchor : intensity_moments(t, m).first;
    require(Lam >= 0.0, "anchor intensity must be nonnegative");
    if (!anchor && H(Lam) < 1.0) {
        // Default anchor past the exercise boundary: H decreases in lambda, so use the boundary itself.
        double lo = 0.0, hi = Lam;
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (H(mid) >= 1.0 ? lo : hi) = mid;
        }
        Lam = lo;
    }
    const double HL = H(Lam);
    const double alpha = std::log(HL) / mu;
    if (alpha < 0.0) fail(ErrorCode::AnchorInvalid, "exercise boundary is negative at the anchor intensity");
    double beta = 0.0;
    for (size_t i = 0; i < n; ++i) beta += h[i] * std::exp(A[i] + B[i] * Lam) * B[i];
    beta /= HL * mu;
    const double a_cut = alpha - beta * Lam;

    auto integrand = [&](double p, double& envelope) {
        CharArg a;
        a.ex = 0.0;
        a.u = cplx(-mu, -p);
        cplx first = 0.0;
        double env = 0.0;
        for (size_t i = 0; i < n; ++i) {
            a.w = cplx(B[i], p * beta);
            const cplx v = h[i] * std::exp(A[i]) * cf_at_zero(m, t, a);
            first += v;
            env += std::abs(v);
        }
        CharArg b;
        b.ex = 0.0;
        b.u = cplx(0.0, -p);
        b.w = cplx(0.0, p * beta);
        const cplx second = cf_at_zero(m, t, b);
        env += std::abs(second);
        const double kernel = p == 0.0 ? a_cut : std::sin(p * a_cut) / p;
        envelope = env / std::max(p, 1e-300);
        return kernel * (first - second).real();
    };

    // Panels short enough to resolve the sine kernel and the lattice oscillation of the loss.
    const auto [lmean, lvar] = intensity_moments(t, m);
    CharArg cnt;
    const double hh = 1e-4;
    cnt.v = hh;
    const double kp = std::log(cf_at_zero(m, t, cnt).real());
    cnt.v = -hh;
    const double km = std::log(cf_at_zero(m, t, cnt).real());
    const double n_scale = (kp - km) / (2 * hh) + 6.0 * std::sqrt(std::max((kp + km) / (hh * hh), 0.0)) + 1.0;
    const double lam_scale = lmean + 6.0 * std::sqrt(lvar);
    const double freq = std::max({a_cut, m.law().max_loss() * n_scale, std::abs(beta) * lam_scale, 1e-3});
    const double width = kPi / (2.0 * freq);
    static const GaussLegendre gl(16);
    double integral = 0.0;
    int quiet = 0;
    for (double p0 = 0.0;; p0 += width) {
        if (p0 > num.p_max) fail(ErrorCode::NumericalQuality, "fast swaption integral did not decay");
        double panel = 0.0, env_max = 0.0;
        for (size_t q = 0; q < gl.x.size(); ++q) {
            const double p = p0 + 0.5 * width * (gl.x[q] + 1.0);
            double env = 0.0;
            panel += gl.w[q] * integrand(p, env);
            env_max = std::max(env_max, env);
        }
        integral += 0.5 * width * panel;
        quiet = env_max < num.envelope_tol ? quiet + 1 : 0;
        if (quiet >= 4) break;
    }
    const double sr = LM * (2.0 / kPi) * integral;
    return std::max(sr, 0.0) * curve.df(t) * basket.notional;
}

double swaption_fast_payer(const SwaptionSpec& spec, const AffineModel& m, const Basket& basket,
                           const DiscountCurve& curve, std::optional<double> anchor, const FastSwaptionNumerics& num) {
    spec.validate();
    if (!spec.front_end_protection)
        fail(ErrorCode::InvalidArgument, "the fast method prices payer swaptions with front-end protection only");
    const auto c = solve_mu(m.law(), basket.n_names);
    std::vector<double> times, h;
    swap_nodes(spec, curve, c.loss_max, times, h);
    double fwd = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        CharArg a;
        a.u = -c.mu;
        a.ex = 0.0;
        fwd += h[i] * cf_at_zero(m, times[i], a).real();
    }
    const double forward = c.loss_max * (1.0 - fwd) * curve.df(spec.exercise) * basket.notional;
    return forward + swaption_fast_receiver(spec, m, basket, curve, anchor, num);
}

}  // namespace cidx
