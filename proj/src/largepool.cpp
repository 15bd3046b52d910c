#include "cidx/largepool.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cidx {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest spacing l with every jump size an integer multiple of l; 0 when it would be tiny.
double lattice_spacing(const JumpSizeLaw& law) {
    const double lmax = law.max_loss();
    const double eps = 1e-9 * lmax;
    double g = 0.0;
    for (const auto& pt : law.points) {
        if (pt.loss <= eps) continue;
        double a = std::max(g, pt.loss), b = std::min(g, pt.loss);
        if (g == 0.0) {
            g = pt.loss;
            continue;
        }
        while (b > eps) {
            double r = std::fmod(a, b);
            if (r > b - eps) r = 0.0;
            a = b;
            b = r;
        }
        g = a;
    }
    if (g < lmax / 65536.0) return 0.0;
    for (const auto& pt : law.points) {
        const double q = pt.loss / g;
        if (std::abs(q - std::round(q)) > 1e-7) return 0.0;
    }
    // Snap to an exact divisor of the largest point.
    return lmax / std::round(lmax / g);
}

cplx pool_cf(const AffineModel& m, double T, cplx u) {
    CharArg a;
    a.u = u;
    a.ex = 0.0;
    const auto c = m.char_fn(0.0, T, a);
    return std::exp(c.A + c.B * m.initial_intensity());
}

void check_strike(double K) {
    if (!(K >= 0.0 && K <= 1.0)) fail(ErrorCode::InvalidDetachment, "strike must lie in [0,1]");
}

// Sum_{n=0}^{count-1} r^n.
cplx geometric(cplx r, int count) {
    if (count <= 0) return 0.0;
    if (std::abs(1.0 - r) < 1e-14) return double(count);
    return (1.0 - std::pow(r, count)) / (1.0 - r);
}

}  // namespace

LargePoolConsts solve_mu(const JumpSizeLaw& law, int n_names) {
    law.validate();
    require(n_names >= 2, "basket needs at least two names");
    LargePoolConsts c;
    c.n_names = n_names;
    c.loss_max = law.mean();
    c.lattice = lattice_spacing(law);
    const double target = 1.0 - 1.0 / n_names;
    if (law.is_fixed()) {
        c.mu = -std::log(target) / law.points.front().loss;
        return c;
    }
    auto f = [&](double mu) { return law.phi(cplx(-mu, 0.0)).real() - target; };
    double zero_mass = 0.0;
    for (const auto& pt : law.points)
        if (pt.loss == 0.0) zero_mass += pt.weight;
    if (zero_mass >= target) fail(ErrorCode::NoRoot, "jump-size law cannot reach phi_J(-mu) = 1 - 1/N_M");
    double lo = 0.0, hi = 1.0 / law.max_loss();
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) fail(ErrorCode::NoRoot, "no bracket for mu");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    c.mu = 0.5 * (lo + hi);
    if (std::abs(f(c.mu)) > 1e-12) fail(ErrorCode::NoRoot, "mu bisection did not converge");
    return c;
}

double lp_expected_loss(double T, const AffineModel& m, const LargePoolConsts& c) {
    if (T <= 0.0) return 0.0;
    return c.loss_max * (1.0 - pool_cf(m, T, cplx(-c.mu, 0.0)).real());
}

cplx correction_kernel(double p, double K_tilde, const LargePoolConsts& c) {
    const cplx ip(0.0, p);
    return c.mu * c.loss_max * std::exp(-ip * K_tilde) / (ip * (ip - c.mu));
}

double lp_tranche_put(double T, double K, const AffineModel& m, const LargePoolConsts& c, AuxLaw aux,
                      const LargePoolNumerics& num) {
    return lp_tranche_puts(T, {K}, m, c, aux, num).front();
}

std::vector<double> lp_tranche_puts(double T, const std::vector<double>& strikes, const AffineModel& m,
                                    const LargePoolConsts& c, AuxLaw aux, const LargePoolNumerics& num) {
    for (double K : strikes) check_strike(K);
    std::vector<double> out(strikes.size(), 0.0);
    if (T <= 0.0) return strikes;
    if (c.lattice <= 0.0)
        fail(ErrorCode::NumericalQuality, "large-pool pricing needs jump sizes on a common lattice");

    const double LM = c.loss_max, mu = c.mu, l = c.lattice;
    const double E = pool_cf(m, T, cplx(-mu, 0.0)).real();  // E[e^{-mu L~} 1{Q=0}]
    const double q0 = pool_cf(m, T, 0.0).real();            // P(Q=0)

    // Auxiliary law and its explicit put.
    const double lbar = m.law().mean();
    double lambda_hat = 0.0;
    if (aux == AuxLaw::Poisson && q0 > 0.0 && E < q0) lambda_hat = -std::log(E / q0) / (1.0 - std::exp(-mu * lbar));
    const double steps = lbar / l;
    const bool aux_on_lattice = aux == AuxLaw::Poisson && std::abs(steps - std::round(steps)) < 1e-9;

    std::vector<size_t> active;
    std::vector<double> k_tilde(strikes.size()), hat(strikes.size());
    int n1_max = 0;
    const double el = lp_expected_loss(T, m, c);
    for (size_t i = 0; i < strikes.size(); ++i) {
        const double K = strikes[i];
        if (K <= 0.0) continue;
        if (K >= LM) {
            out[i] = K - el;  // L_T never exceeds L_M
            continue;
        }
        const double cK = 1.0 - K / LM;  // e^{-mu K~}
        k_tilde[i] = -std::log(cK) / mu;
        if (aux == AuxLaw::Delta) {
            hat[i] = LM * std::max(E - cK, 0.0);
        } else {
            double pmf = q0 * std::exp(-lambda_hat), s = 0.0;
            for (int n = 0; n * lbar < k_tilde[i]; ++n) {
                s += pmf * (std::exp(-mu * n * lbar) - cK);
                pmf *= lambda_hat / (n + 1);
            }
            hat[i] = LM * s;
        }
        n1_max = std::max(n1_max, static_cast<int>(std::ceil(k_tilde[i] / l)));
        active.push_back(i);
    }
    if (active.empty()) return out;

    // Range of lattice steps carrying the law of L~ / l.
    auto cgf = [&](double s) { return std::log(pool_cf(m, T, cplx(s / l, 0.0)).real()); };
    const double h = 1e-4, k0 = cgf(0.0), kp = cgf(h), km = cgf(-h);
    const double mean = (kp - km) / (2 * h), var = std::max((kp - 2 * k0 + km) / (h * h), 0.0);
    const double span = std::max(mean + 12.0 * std::sqrt(var) + 64.0, double(n1_max) + 1.0);
    int nodes = num.min_nodes;
    while (nodes < 2 * span && nodes < num.max_nodes) nodes <<= 1;

    // Midpoint rule over one period of the lattice characteristic function; the kernel folded over
    // all periods is the finite sum S(p) = l L_M sum_{n l < K~} (1 - e^{-mu (K~ - n l)}) e^{-i p n l}.
    auto correction = [&](int M) {
        const double dp = 2.0 * kPi / (l * M);
        std::vector<double> acc(active.size(), 0.0);
        for (int j = 0; j < M / 2; ++j) {
            const double p = (j + 0.5) * dp;
            const cplx u(-mu, p);
            cplx d = pool_cf(m, T, u);
            if (aux_on_lattice) d -= q0 * std::exp(lambda_hat * (std::exp(u * lbar) - 1.0));
            const cplx z = std::exp(cplx(0.0, -p * l));
            const cplx zr = z * std::exp(mu * l);
            for (size_t a = 0; a < active.size(); ++a) {
                const double kt = k_tilde[active[a]];
                const int count = static_cast<int>(std::ceil(kt / l - 1e-12));
                const cplx S = l * LM * (geometric(z, count) - std::exp(-mu * kt) * geometric(zr, count));
                acc[a] += (d * S).real();
            }
        }
        for (auto& x : acc) x *= 2.0 * dp / (2.0 * kPi);
        return acc;
    };

    // Explicit part plus correction. Off-lattice auxiliary atoms (the delta law, or a Poisson law whose
    // step is not a lattice multiple) are subtracted exactly instead of inside the integral, so there the
    // correction is the lattice integral minus the explicit part.
    auto lattice_value = [&](const std::vector<double>& corr, size_t a) {
        return aux_on_lattice ? hat[active[a]] + corr[a] : corr[a];
    };

    auto prev = correction(nodes);
    for (;;) {
        const int next_nodes = nodes * 2;
        if (next_nodes > num.max_nodes) fail(ErrorCode::NumericalQuality, "large-pool quadrature did not converge");
        auto cur = correction(next_nodes);
        double diff = 0.0;
        for (size_t a = 0; a < active.size(); ++a)
            diff = std::max(diff, std::abs(lattice_value(cur, a) - lattice_value(prev, a)));
        prev = std::move(cur);
        nodes = next_nodes;
        if (diff < num.tol) break;
    }
    for (size_t a = 0; a < active.size(); ++a) out[active[a]] = lattice_value(prev, a);
    return out;
}

}  // namespace cidx
