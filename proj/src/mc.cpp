#include "cidx/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cidx/parallel.hpp"

namespace cidx {

namespace {

// Uniforms in (0,1) and normals from one engine; the mirrored stream returns 1-u and -z for the
// same engine state, which is what the antithetic partner path consumes.
class Draws {
public:
    Draws(std::uint64_t seed, bool mirror) : eng_(seed), mirror_(mirror) {}

    double uniform() {
        const double u = (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
        return mirror_ ? 1.0 - u : u;
    }

    // Marsaglia polar method: mirrored uniforms give the same acceptance and negated normals.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double v1, v2, s;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v2 * f;
        has_spare_ = true;
        return v1 * f;
    }

    double exponential() { return -std::log(uniform()); }

private:
    std::mt19937_64 eng_;
    bool mirror_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Interval {
    double start, end;
    int steps;
    double slope;
    const ParamSegment* seg;
    int obs = -1;  // observation index recorded at the end, if any
};

class Simulator {
public:
    Simulator(const ModelParams& model, const TimeChange& tc, const Basket& basket, std::vector<double> obs)
        : model_(model), tc_(tc), n_names_(basket.n_names), obs_(std::move(obs)) {}

    void build(double dt) {
        std::vector<double> cuts{0.0};
        const double horizon = obs_.empty() ? 0.0 : obs_.back();
        for (double t : obs_) cuts.push_back(t);
        for (double b : tc_.breakpoints)
            if (b < horizon) cuts.push_back(b);
        for (const auto& s : model_.segments)
            if (s.t_end < horizon) cuts.push_back(s.t_end);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            Interval iv;
            iv.start = cuts[i];
            iv.end = cuts[i + 1];
            iv.steps = std::max(1, static_cast<int>(std::ceil((iv.end - iv.start) / dt - 1e-9)));
            iv.slope = tc_.slope_right(iv.start);
            iv.seg = &model_.segment_at(iv.start);
            const auto it = std::lower_bound(obs_.begin(), obs_.end(), iv.end);
            if (it != obs_.end() && *it == iv.end) iv.obs = static_cast<int>(it - obs_.begin());
            intervals_.push_back(iv);
        }
        cum_.clear();
        double c = 0.0;
        for (const auto& p : model_.jump_law.points) cum_.push_back(c += p.weight);
    }

    void run(Draws& rng, std::vector<Observation>& out) const {
        out.assign(obs_.size(), Observation{});
        double lam = model_.lambda0;  // model-time intensity
        int n = 0;
        double loss = 0.0, pool_loss = 0.0;
        long pool_n = 0;
        bool q = false, r = false;
        double hazard = 0.0, threshold = rng.exponential();

        auto record = [&](int i, double t) {
            Observation& o = out[i];
            o.t = t;
            o.defaults = n;
            o.loss = loss;
            o.pool_count = pool_n;
            o.pool_loss = pool_loss;
            o.catastrophe = q;
            o.counterparty_default = r;
            o.lambda = tc_.slope_right(t) * std::max(lam, 0.0);
        };
        for (size_t i = 0; i < obs_.size() && obs_[i] == 0.0; ++i) record(static_cast<int>(i), 0.0);

        for (const auto& iv : intervals_) {
            const ParamSegment& s = *iv.seg;
            const double ds = iv.slope * (iv.end - iv.start) / iv.steps;
            double jump_rate = 0.0;
            for (const auto& j : s.jumps) jump_rate += j.gamma;
            for (int k = 0; k < iv.steps; ++k) {
                const double lp = std::max(lam, 0.0);
                const double r_pool = lp, r_q = s.alpha * lp + s.beta, r_r = s.zeta * lp + s.eta;
                const double total = r_pool + r_q + r_r + jump_rate;
                hazard += total * ds;
                while (hazard >= threshold) {
                    hazard -= threshold;
                    threshold = rng.exponential();
                    double pick = rng.uniform() * total;
                    if ((pick -= r_pool) < 0.0) {
                        const double l = draw_loss(rng);
                        ++pool_n;
                        pool_loss += l;
                        if (s.xi > 0.0 && rng.uniform() < s.xi) r = true;
                        // Thinning: the pool default hits a surviving basket name with probability (N_M - N)/N_M.
                        if (!q && n < n_names_ && rng.uniform() * n_names_ < n_names_ - n) {
                            ++n;
                            loss += l / n_names_;
                        }
                    } else if ((pick -= r_q) < 0.0) {
                        if (!q) {
                            q = true;
                            for (; n < n_names_; ++n) loss += draw_loss(rng) / n_names_;
                        }
                    } else if ((pick -= r_r) < 0.0) {
                        r = true;
                    } else {
                        for (const auto& j : s.jumps) {
                            if ((pick -= j.gamma) < 0.0 || &j == &s.jumps.back()) {
                                double g = 0.0;
                                for (int e = 0; e <= j.n; ++e) g += rng.exponential();
                                lam += j.theta * g;
                                break;
                            }
                        }
                    }
                }
                // Full-truncation Euler for the diffusive part.
                lam += s.kappa * (s.lambda_inf - lp) * ds + s.sigma * std::sqrt(lp * ds) * rng.normal();
            }
            if (iv.obs >= 0) record(iv.obs, iv.end);
        }
    }

private:
    double draw_loss(Draws& rng) const {
        const auto& pts = model_.jump_law.points;
        if (pts.size() == 1) return pts[0].loss;
        const double u = rng.uniform() * cum_.back();
        const size_t i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        return pts[std::min(i, pts.size() - 1)].loss;
    }

    const ModelParams& model_;
    const TimeChange& tc_;
    int n_names_;
    std::vector<double> obs_;
    std::vector<Interval> intervals_;
    std::vector<double> cum_;
};

// Running mean and sum of squared deviations (Welford), merged blockwise in a fixed order.
struct Moments {
    long n = 0;
    double mean = 0.0, m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        const long tot = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / tot;
        m2 += o.m2 + d * d * double(n) * o.n / tot;
        n = tot;
    }
};

struct LegTimes {
    std::vector<double> times;
    std::vector<size_t> start, mid, end;
    std::vector<double> df_end, df_pay, accrual;
};

LegTimes leg_times(const LegSchedule& schedule, const DiscountCurve& curve) {
    schedule.validate();
    LegTimes lt;
    for (const auto& p : schedule.periods) {
        lt.times.push_back(p.start);
        lt.times.push_back(p.mid());
        lt.times.push_back(p.end);
    }
    std::sort(lt.times.begin(), lt.times.end());
    lt.times.erase(std::unique(lt.times.begin(), lt.times.end()), lt.times.end());
    auto idx = [&](double t) { return static_cast<size_t>(std::lower_bound(lt.times.begin(), lt.times.end(), t) - lt.times.begin()); };
    for (const auto& p : schedule.periods) {
        lt.start.push_back(idx(p.start));
        lt.mid.push_back(idx(p.mid()));
        lt.end.push_back(idx(p.end));
        lt.df_end.push_back(curve.df(p.end));
        lt.df_pay.push_back(curve.df(p.pay));
        lt.accrual.push_back(p.accrual);
    }
    return lt;
}

}  // namespace

void SimConfig::validate() const {
    require(paths >= 10000, "Monte Carlo needs at least 1e4 paths");
    require(dt > 0.0 && dt <= 1.0 / 252.0 + 1e-15, "Monte Carlo step must satisfy 0 < dt <= 1/252");
    require(threads >= 1, "thread count must be positive");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<Estimate> simulate(const ModelParams& model, const TimeChange& tc, const Basket& basket,
                               const std::vector<double>& obs_times, const SimConfig& cfg, int n_out,
                               const PathFunctional& payoff) {
    cfg.validate();
    model.validate();
    tc.validate();
    require(basket.n_names >= 1, "basket needs at least one name");
    require(n_out >= 1, "payoff needs at least one output");
    for (size_t i = 0; i < obs_times.size(); ++i)
        require(obs_times[i] >= 0.0 && (i == 0 || obs_times[i] > obs_times[i - 1]),
                "observation times must be nonnegative and increasing");

    Simulator sim(model, tc, basket, obs_times);
    sim.build(cfg.dt);

    const int per_sample = cfg.antithetic ? 2 : 1;
    const long samples = (cfg.paths + per_sample - 1) / per_sample;
    const long samples_per_block = kMcBlock / per_sample;
    const int blocks = static_cast<int>((samples + samples_per_block - 1) / samples_per_block);
    std::vector<std::vector<Moments>> acc(blocks, std::vector<Moments>(n_out));

    parallel_for(blocks, cfg.threads, [&](int b) {
        std::vector<Observation> obs;
        std::vector<double> v(n_out), w(n_out);
        const long first = static_cast<long>(b) * samples_per_block;
        const long last = std::min(samples, first + samples_per_block);
        for (long i = first; i < last; ++i) {
            // Each sample has its own stream: seed split by sample index.
            const std::uint64_t s = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(i)));
            Draws plain(s, false);
            sim.run(plain, obs);
            payoff(obs, v.data());
            if (cfg.antithetic) {
                Draws mirrored(s, true);
                sim.run(mirrored, obs);
                payoff(obs, w.data());
                for (int k = 0; k < n_out; ++k) v[k] = 0.5 * (v[k] + w[k]);
            }
            for (int k = 0; k < n_out; ++k) acc[b][k].add(v[k]);
        }
    });

    std::vector<Estimate> out(n_out);
    for (int k = 0; k < n_out; ++k) {
        Moments tot;
        for (int b = 0; b < blocks; ++b) tot.merge(acc[b][k]);
        out[k].mean = tot.mean;
        out[k].samples = tot.n;
        out[k].se = tot.n > 1 ? std::sqrt(tot.m2 / (tot.n - 1) / tot.n) : 0.0;
    }
    return out;
}

Estimate mc_expected_defaults(double T, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                              const SimConfig& cfg) {
    require(T > 0.0, "horizon must be positive");
    return simulate(model, tc, basket, {T}, cfg, 1,
                    [](const std::vector<Observation>& o, double* out) { out[0] = o[0].defaults; })
        .front();
}

std::vector<Estimate> mc_tranche_puts(double T, const std::vector<double>& strikes, const ModelParams& model,
                                      const TimeChange& tc, const Basket& basket, const SimConfig& cfg) {
    require(T > 0.0, "horizon must be positive");
    return simulate(model, tc, basket, {T}, cfg, static_cast<int>(strikes.size()),
                    [&](const std::vector<Observation>& o, double* out) {
                        for (size_t i = 0; i < strikes.size(); ++i) out[i] = std::max(strikes[i] - o[0].loss, 0.0);
                    });
}

Estimate mc_char_fn(double T, double u, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                    const SimConfig& cfg) {
    require(T > 0.0, "horizon must be positive");
    return simulate(model, tc, basket, {T}, cfg, 1,
                    [&](const std::vector<Observation>& o, double* out) {
                        out[0] = o[0].catastrophe ? 0.0 : std::exp(u * o[0].pool_loss);
                    })
        .front();
}

Estimate mc_index_cds(const LegSchedule& schedule, double spread, const ModelParams& model, const TimeChange& tc,
                      const Basket& basket, const DiscountCurve& curve, const SimConfig& cfg, bool counterparty) {
    const auto lt = leg_times(schedule, curve);
    const double n = basket.n_names;
    auto e = simulate(model, tc, basket, lt.times, cfg, 1, [&](const std::vector<Observation>& o, double* out) {
        auto live = [&](size_t i) { return counterparty && o[i].counterparty_default ? 0.0 : 1.0; };
        double pv = 0.0;
        for (size_t p = 0; p < lt.end.size(); ++p) {
            const size_t a = lt.start[p], b = lt.end[p], c = lt.mid[p];
            pv += lt.df_end[p] * (o[b].loss * live(b) - o[a].loss * live(a));
            pv -= spread * lt.df_pay[p] * lt.accrual[p] * (1.0 - o[c].defaults / n) * live(c);
        }
        out[0] = pv * basket.notional;
    });
    return e.front();
}

std::vector<Estimate> mc_cdo_upfronts(const LegSchedule& schedule, const std::vector<TrancheSpec>& tranches,
                                      const ModelParams& model, const TimeChange& tc, const Basket& basket,
                                      const DiscountCurve& curve, const SimConfig& cfg, bool counterparty) {
    for (const auto& tr : tranches) {
        tr.validate();
        require(tr.detach > tr.attach, "tranche must have positive width");
    }
    const auto lt = leg_times(schedule, curve);
    return simulate(model, tc, basket, lt.times, cfg, static_cast<int>(tranches.size()),
                    [&](const std::vector<Observation>& o, double* out) {
                        for (size_t q = 0; q < tranches.size(); ++q) {
                            const auto& tr = tranches[q];
                            const double w = tr.detach - tr.attach;
                            auto live = [&](size_t i) { return counterparty && o[i].counterparty_default ? 0.0 : 1.0; };
                            auto tl = [&](size_t i) { return std::clamp(o[i].loss - tr.attach, 0.0, w); };
                            double pv = 0.0;
                            for (size_t p = 0; p < lt.end.size(); ++p) {
                                const size_t a = lt.start[p], b = lt.end[p], c = lt.mid[p];
                                pv += lt.df_end[p] * (tl(b) * live(b) - tl(a) * live(a));
                                pv -= tr.running * lt.df_pay[p] * lt.accrual[p] * (w - tl(c)) * live(c);
                            }
                            out[q] = pv / w;
                        }
                    });
}

Estimate mc_ntd(const LegSchedule& schedule, int k, double spread, double recovery, const ModelParams& model,
                const TimeChange& tc, const Basket& basket, const DiscountCurve& curve, const SimConfig& cfg,
                bool counterparty) {
    if (k < 1 || k >= basket.n_names) fail(ErrorCode::InvalidRank, "rank must satisfy 1 <= k < N_M");
    require(recovery >= 0.0 && recovery < 1.0, "recovery must lie in [0,1)");
    const auto lt = leg_times(schedule, curve);
    auto e = simulate(model, tc, basket, lt.times, cfg, 1, [&](const std::vector<Observation>& o, double* out) {
        auto below = [&](size_t i) {
            return (o[i].defaults < k && !(counterparty && o[i].counterparty_default)) ? 1.0 : 0.0;
        };
        double pv = 0.0;
        for (size_t p = 0; p < lt.end.size(); ++p) {
            pv += (1.0 - recovery) * lt.df_end[p] * (below(lt.start[p]) - below(lt.end[p]));
            pv -= spread * lt.df_pay[p] * lt.accrual[p] * below(lt.mid[p]);
        }
        out[0] = pv * basket.notional;
    });
    return e.front();
}

Estimate mc_swaption(const SwaptionSpec& spec, const ModelParams& model, const TimeChange& tc, const Basket& basket,
                     const DiscountCurve& curve, const SimConfig& cfg) {
    const AffineModel m(model, tc);
    const auto ev = exercise_value(spec, m, basket, curve);
    const double disc = curve.df(spec.exercise) * basket.notional;
    auto e = simulate(model, tc, basket, {spec.exercise}, cfg, 1, [&](const std::vector<Observation>& o, double* out) {
        out[0] = disc * ev.payoff(spec, o[0].defaults, o[0].lambda, o[0].catastrophe);
    });
    return e.front();
}

}  // namespace cidx
