#include "cidx/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cidx/fft.hpp"

namespace cidx {

namespace {

constexpr double kClip = -1e-10;

bool has_counterparty(const AffineModel& m) {
    for (const auto& iv : m.intervals())
        if (iv.seg.xi != 0.0 || iv.seg.zeta != 0.0 || iv.seg.eta != 0.0) return true;
    return false;
}

double real_cf(const AffineModel& m, double t, double T, const CharArg& a, double lambda) {
    const auto c = m.char_fn(t, T, a, 1.0);
    return std::exp((c.A + c.B * lambda).real());
}

// Cumulant generating function of the count increment at real v.
double count_cgf(const AffineModel& m, double t, double T, double lambda, double v) {
    CharArg a;
    a.v = v;
    const auto c = m.char_fn(t, T, a, 1.0);
    return (c.A + c.B * lambda).real();
}

}  // namespace

std::vector<cplx> count_spectrum(const AffineModel& m, double t, double T, double lambda_t, int grid, double ey) {
    const double delta = count_damping(grid);
    std::vector<cplx> out(grid / 2 + 1);
    CharArg a;
    a.ex = 0.0;
    a.ey = ey;
    for (int k = 0; k <= grid / 2; ++k) {
        a.v = cplx(-delta, 2.0 * std::numbers::pi * k / grid);
        const auto c = m.char_fn(t, T, a, 1.0);
        out[k] = std::exp(c.A + c.B * lambda_t);
    }
    return out;
}

int required_count_grid(const AffineModel& m, double t, double T, double lambda_t, int base_grid) {
    int g = 1;
    while (g < base_grid) g <<= 1;
    if (T <= t) return g;
    const double h = 1e-4;
    const double kp = count_cgf(m, t, T, lambda_t, h), km = count_cgf(m, t, T, lambda_t, -h);
    const double mean = (kp - km) / (2 * h);
    const double var = std::max((kp + km) / (h * h), 0.0);
    const double need = mean + 12.0 * std::sqrt(var) + 64.0;
    while (g / 2 < need && g < (1 << 22)) g <<= 1;
    return g;
}

double kernel_expectation(const PayoffKernel& k, const std::vector<cplx>& phi) {
    const int g = k.grid;
    require(static_cast<int>(phi.size()) == g / 2 + 1, "kernel and count spectrum grids differ");
    double s = (k.spectrum[0] * phi[0]).real() + (k.spectrum[g / 2] * phi[g / 2]).real();
    for (int i = 1; i < g / 2; ++i) s += 2.0 * (k.spectrum[i] * phi[i]).real();
    return s / g;
}

double counterparty_survival(const BasketState& s, double T, const AffineModel& m) {
    if (s.counterparty_default) return 0.0;
    if (T <= s.t || !has_counterparty(m)) return 1.0;
    CharArg a;
    a.ey = 0.0;
    return real_cf(m, s.t, T, a, s.lambda);
}

double expected_defaults(const BasketState& s, double T, const AffineModel& m, int n_names, bool counterparty_filter) {
    counterparty_filter = counterparty_filter && (s.counterparty_default || has_counterparty(m));
    require(T >= s.t, "horizon precedes state time");
    if (s.catastrophe || (counterparty_filter && s.counterparty_default)) return n_names;
    if (T == s.t) return s.defaults;
    CharArg a;
    a.v = std::log(1.0 - 1.0 / n_names);
    a.ex = 0.0;
    a.ey = counterparty_filter ? 0.0 : 1.0;
    return n_names - (n_names - s.defaults) * real_cf(m, s.t, T, a, s.lambda);
}

double expected_loss(const BasketState& s, double T, const AffineModel& m, int n_names, bool counterparty_filter) {
    counterparty_filter = counterparty_filter && (s.counterparty_default || has_counterparty(m));
    const double lbar = m.law().mean();
    if (!counterparty_filter) {
        const double en = expected_defaults(s, T, m, n_names, false);
        return s.loss + lbar * (en - s.defaults) / n_names;
    }
    const double surv = counterparty_survival(s, T, m);
    if (surv == 0.0) return 0.0;
    if (s.catastrophe) return s.loss * surv;
    const double alive = n_names - expected_defaults(s, T, m, n_names, true);  // E[(N - N_T) 1{R=0}]
    return s.loss * surv + lbar / n_names * ((n_names - s.defaults) * surv - alive);
}

std::vector<double> default_count_distribution(const BasketState& s, double T, const AffineModel& m, int n_names,
                                               const Numerics& num) {
    require(T >= s.t, "horizon precedes state time");
    std::vector<double> out(n_names + 1, 0.0);
    if (s.catastrophe) {
        out[n_names] = 1.0;
        return out;
    }
    if (T == s.t) {
        out[s.defaults] = 1.0;
        return out;
    }
    const int g = required_count_grid(m, s.t, T, s.lambda, num.count_grid);
    auto phi = count_spectrum(m, s.t, T, s.lambda, g);
    for (auto& z : phi) z = std::conj(z);
    auto b = fft::backward_real(phi, g);
    const double delta = count_damping(g);
    CharArg a;
    a.ex = 0.0;
    const double q_alive = real_cf(m, s.t, T, a, s.lambda);

    const int jn = g / 2;
    std::vector<double> pj(jn);
    double total = 0.0;
    for (int j = 0; j < jn; ++j) {
        double p = b[j] * std::exp(delta * j) / g;
        if (p < 0.0) {
            if (p < kClip) fail(ErrorCode::NumericalQuality, "negative probability from count inversion");
            p = 0.0;
        }
        pj[j] = p;
        total += p;
    }
    const double scale = total > 0.0 ? q_alive / total : 0.0;
    std::vector<double> row(n_names + 1, 0.0);
    row[s.defaults] = 1.0;
    for (int j = 0; j < jn; ++j) {
        const double w = pj[j] * scale;
        if (w != 0.0)
            for (int k = s.defaults; k <= n_names; ++k) out[k] += w * row[k];
        for (int k = n_names; k >= 1; --k)
            row[k] = k * (1.0 / n_names) * row[k] + (n_names - k + 1) * (1.0 / n_names) * row[k - 1];
        row[0] = 0.0;
    }
    out[n_names] += 1.0 - q_alive;
    return out;
}

double tranche_put(const BasketState& s, double T, double K, const AffineModel& m, int n_names, const Numerics& num,
                   bool counterparty_filter) {
    counterparty_filter = counterparty_filter && (s.counterparty_default || has_counterparty(m));
    if (K < 0.0 || K > 1.0) fail(ErrorCode::InvalidDetachment, "strike must lie in [0,1]");
    require(T >= s.t, "horizon precedes state time");
    const double surv = counterparty_filter ? counterparty_survival(s, T, m) : 1.0;
    if (surv == 0.0) return 0.0;
    const double room = K - s.loss;
    if (room <= 0.0) return 0.0;
    if (s.catastrophe || T == s.t) return room * surv;
    const int remaining = n_names - s.defaults;
    if (room >= m.law().max_loss() * remaining / n_names)
        return K * surv - expected_loss(s, T, m, n_names, counterparty_filter);  // payoff is linear here
    int g = required_count_grid(m, s.t, T, s.lambda, num.count_grid);
    auto ker = cached_tranche_kernel(K, n_names, m.law(), g, s.defaults, s.loss);
    g = ker->grid;
    const auto phi = count_spectrum(m, s.t, T, s.lambda, g, counterparty_filter ? 0.0 : 1.0);
    return ker->limit * surv + kernel_expectation(*ker, phi);
}

double digital_below(const BasketState& s, double T, int k, const AffineModel& m, int n_names, const Numerics& num,
                     bool counterparty_filter) {
    counterparty_filter = counterparty_filter && (s.counterparty_default || has_counterparty(m));
    if (k < 1 || k >= n_names) fail(ErrorCode::InvalidRank, "rank must satisfy 1 <= k < N_M");
    require(T >= s.t, "horizon precedes state time");
    if (s.catastrophe || s.defaults >= k) return 0.0;
    const double surv = counterparty_filter ? counterparty_survival(s, T, m) : 1.0;
    if (T == s.t || surv == 0.0) return surv;
    int g = required_count_grid(m, s.t, T, s.lambda, num.count_grid);
    auto ker = cached_digital_kernel(k, n_names, g, s.defaults);
    g = ker->grid;
    const auto phi = count_spectrum(m, s.t, T, s.lambda, g, counterparty_filter ? 0.0 : 1.0);
    return kernel_expectation(*ker, phi);
}

PoolMoments infinite_pool_moments(double T, const AffineModel& m, int order) {
    require(order == 1 || order == 2, "moment order must be 1 or 2");
    const double lambda0 = m.initial_intensity();
    auto K = [&](double u) {
        CharArg a;
        a.u = u;
        const auto c = m.char_fn(0.0, T, a);
        return (c.A + c.B * lambda0).real();
    };
    const double h = 1e-5;
    auto d1 = [&](double e) { return (K(e) - K(-e)) / (2.0 * e); };
    auto d2 = [&](double e) { return (K(e) + K(-e)) / (e * e); };  // K(0) = 0
    PoolMoments out;
    out.mean = (4.0 * d1(h / 2) - d1(h)) / 3.0;
    out.variance = order == 2 ? (4.0 * d2(h / 2) - d2(h)) / 3.0 : std::nan("");
    return out;
}

}  // namespace cidx
