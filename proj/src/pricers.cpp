#include "cidx/pricers.hpp"

#include <algorithm>
#include <cmath>

#include "cidx/parallel.hpp"

namespace cidx {

namespace {

BasketState start_state(const AffineModel& m, const PricingOptions& opt) {
    return opt.state ? *opt.state : BasketState::initial(m);
}

// Sorted distinct evaluation times: the state time, period ends and midpoints.
std::vector<double> evaluation_times(const LegSchedule& sched, double t0) {
    std::vector<double> ts{t0};
    for (const auto& p : sched.periods) {
        ts.push_back(p.start);  // differs from the state time for forward-starting legs
        ts.push_back(p.mid());
        ts.push_back(p.end);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

size_t index_of(const std::vector<double>& ts, double t) {
    return std::lower_bound(ts.begin(), ts.end(), t) - ts.begin();
}

LegSchedule forward_schedule(const LegSchedule& schedule, double t) {
    schedule.validate();
    LegSchedule s = schedule.from(t);
    require(!s.periods.empty(), "schedule has expired at the state time");
    return s;
}

double safe_ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }

// E[(K - L_tau)^+ (1{R=0})] for every time and strike, sharing one count spectrum per time.
std::vector<std::vector<double>> put_surface(const BasketState& s, const std::vector<double>& times,
                                             const std::vector<double>& strikes, const AffineModel& m, int n_names,
                                             const PricingOptions& opt) {
    if (opt.method == TrancheMethod::LargePool) {
        require(!opt.state && !opt.counterparty, "large-pool pricing starts from the initial state without counterparty");
        const auto consts = solve_mu(m.law(), n_names);
        std::vector<std::vector<double>> out(times.size());
        parallel_for(static_cast<int>(times.size()), opt.numerics.threads,
                     [&](int i) { out[i] = lp_tranche_puts(times[i], strikes, m, consts, opt.aux); });
        return out;
    }
    const bool filter = opt.counterparty;
    const int remaining = n_names - s.defaults;
    const double linear_from = s.loss + m.law().max_loss() * remaining / n_names;
    std::vector<double> kernel_strikes;
    for (double K : strikes)
        if (K > s.loss && K - s.loss < linear_from - s.loss) kernel_strikes.push_back(K);

    int grid = 0;
    std::vector<std::shared_ptr<const PayoffKernel>> kernels;
    const bool need_kernels = !kernel_strikes.empty() && !s.catastrophe && times.back() > s.t;
    if (need_kernels) {
        int g0 = required_count_grid(m, s.t, times.back(), s.lambda, opt.numerics.count_grid);
        grid = g0;
        for (double K : kernel_strikes)
            grid = std::max(grid, cached_tranche_kernel(K, n_names, m.law(), g0, s.defaults, s.loss)->grid);
        for (double K : kernel_strikes)
            kernels.push_back(cached_tranche_kernel(K, n_names, m.law(), grid, s.defaults, s.loss));
    }

    std::vector<std::vector<double>> out(times.size(), std::vector<double>(strikes.size(), 0.0));
    parallel_for(static_cast<int>(times.size()), opt.numerics.threads, [&](int i) {
        const double T = times[i];
        const bool trivial = s.catastrophe || T <= s.t || !need_kernels;
        std::vector<cplx> phi;
        if (!trivial) phi = count_spectrum(m, s.t, T, s.lambda, grid, filter ? 0.0 : 1.0);
        const double surv = filter ? counterparty_survival(s, T, m) : 1.0;
        size_t ki = 0;
        for (size_t j = 0; j < strikes.size(); ++j) {
            const double K = strikes[j];
            const bool is_kernel = ki < kernel_strikes.size() && kernel_strikes[ki] == K;
            if (trivial || !is_kernel) {
                out[i][j] = tranche_put(s, T, K, m, n_names, opt.numerics, filter);
            } else {
                out[i][j] = kernels[ki]->limit * surv + kernel_expectation(*kernels[ki], phi);
            }
            if (is_kernel) ++ki;
        }
    });
    return out;
}

}  // namespace

void TrancheSpec::validate() const {
    if (!(attach >= 0.0 && detach <= 1.0)) fail(ErrorCode::InvalidTranche, "tranche points must lie in [0,1]");
    if (attach > detach) fail(ErrorCode::InvalidTranche, "attachment above detachment");
    require(running >= 0.0, "running spread must be non-negative");
}

CdsPrice price_index_cds(const LegSchedule& schedule, double spread, const AffineModel& m, const Basket& basket,
                         const DiscountCurve& curve, const PricingOptions& opt) {
    const BasketState s = start_state(m, opt);
    const LegSchedule sched = forward_schedule(schedule, s.t);
    const int n = basket.n_names;
    const auto times = evaluation_times(sched, s.t);
    std::vector<double> el(times.size()), alive(times.size());
    parallel_for(static_cast<int>(times.size()), opt.numerics.threads, [&](int i) {
        el[i] = expected_loss(s, times[i], m, n, opt.counterparty);
        alive[i] = (n - expected_defaults(s, times[i], m, n, opt.counterparty)) / n;
    });
    CdsPrice r;
    for (const auto& p : sched.periods) {
        const size_t a = index_of(times, p.start), b = index_of(times, p.end), c = index_of(times, p.mid());
        r.protection += curve.df(s.t, p.end) * (el[b] - el[a]);
        r.rpv01 += curve.df(s.t, p.pay) * p.accrual * alive[c];
    }
    r.protection *= basket.notional;
    r.rpv01 *= basket.notional;
    r.premium = spread * r.rpv01;
    r.pv = r.protection - r.premium;
    r.breakeven = safe_ratio(r.protection, r.rpv01);
    return r;
}

std::vector<TranchePrice> price_cdo_tranches(const LegSchedule& schedule, const std::vector<TrancheSpec>& tranches,
                                             const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                                             const PricingOptions& opt) {
    for (const auto& tr : tranches) tr.validate();
    const BasketState s = start_state(m, opt);
    const LegSchedule sched = forward_schedule(schedule, s.t);
    const auto times = evaluation_times(sched, s.t);

    std::vector<double> strikes;
    for (const auto& tr : tranches) {
        if (tr.attach < tr.detach) {
            strikes.push_back(tr.attach);
            strikes.push_back(tr.detach);
        }
    }
    std::sort(strikes.begin(), strikes.end());
    strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());
    std::vector<std::vector<double>> puts;
    if (!strikes.empty()) puts = put_surface(s, times, strikes, m, basket.n_names, opt);
    std::vector<double> surv(times.size(), 1.0);
    if (opt.counterparty)
        for (size_t i = 0; i < times.size(); ++i) surv[i] = counterparty_survival(s, times[i], m);

    std::vector<TranchePrice> out(tranches.size());
    for (size_t q = 0; q < tranches.size(); ++q) {
        const auto& tr = tranches[q];
        const double width = tr.detach - tr.attach;
        if (width == 0.0) continue;  // empty tranche: every leg is zero
        const size_t ia = index_of(strikes, tr.attach), id = index_of(strikes, tr.detach);
        auto remaining = [&](size_t i) { return puts[i][id] - puts[i][ia]; };
        auto tranche_loss = [&](size_t i) { return width * surv[i] - remaining(i); };
        TranchePrice r;
        for (const auto& p : sched.periods) {
            const size_t a = index_of(times, p.start), b = index_of(times, p.end), c = index_of(times, p.mid());
            r.protection += curve.df(s.t, p.end) * (tranche_loss(b) - tranche_loss(a));
            r.rpv01 += curve.df(s.t, p.pay) * p.accrual * remaining(c);
        }
        r.protection /= width;
        r.rpv01 /= width;
        r.upfront = r.protection - tr.running * r.rpv01;
        r.breakeven = safe_ratio(r.protection, r.rpv01);
        const double scale = width * basket.notional;
        r.protection *= scale;
        r.rpv01 *= scale;
        r.premium = tr.running * r.rpv01;
        r.pv = r.protection - r.premium;
        out[q] = r;
    }
    return out;
}

TranchePrice price_cdo_tranche(const LegSchedule& schedule, const TrancheSpec& tranche, const AffineModel& m,
                               const Basket& basket, const DiscountCurve& curve, const PricingOptions& opt) {
    return price_cdo_tranches(schedule, {tranche}, m, basket, curve, opt).front();
}

NtdPrice price_ntd(const LegSchedule& schedule, int k, double spread, double recovery, const AffineModel& m,
                   const Basket& basket, const DiscountCurve& curve, const PricingOptions& opt) {
    const int n = basket.n_names;
    if (k < 1 || k >= n) fail(ErrorCode::InvalidRank, "rank must satisfy 1 <= k < N_M");
    require(recovery >= 0.0 && recovery < 1.0, "recovery must lie in [0,1)");
    const BasketState s = start_state(m, opt);
    const LegSchedule sched = forward_schedule(schedule, s.t);
    const auto times = evaluation_times(sched, s.t);
    std::vector<double> below(times.size());
    parallel_for(static_cast<int>(times.size()), opt.numerics.threads, [&](int i) {
        below[i] = digital_below(s, times[i], k, m, n, opt.numerics, opt.counterparty);
    });
    NtdPrice r;
    for (const auto& p : sched.periods) {
        const size_t a = index_of(times, p.start), b = index_of(times, p.end), c = index_of(times, p.mid());
        r.protection += curve.df(s.t, p.end) * (below[a] - below[b]);
        r.rpv01 += curve.df(s.t, p.pay) * p.accrual * below[c];
    }
    r.protection *= (1.0 - recovery) * basket.notional;
    r.rpv01 *= basket.notional;
    r.premium = spread * r.rpv01;
    r.pv = r.protection - r.premium;
    r.breakeven = safe_ratio(r.protection, r.rpv01);
    return r;
}

double quote_transform(double spread, double T, double upfront) {
    return (spread * T + upfront) / (1.0 + spread * T / 2.0);
}

}  // namespace cidx
