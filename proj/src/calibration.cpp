#include "cidx/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cidx/parallel.hpp"

namespace cidx {

void QuoteSet::validate() const {
    if (maturities.empty()) fail(ErrorCode::SchemaError, "quote set has no maturities");
    for (size_t i = 0; i < maturities.size(); ++i) {
        const auto& m = maturities[i];
        m.schedule.validate();
        if (m.index_schedule) {
            m.index_schedule->validate();
            require(std::abs(m.index_schedule->maturity() - m.maturity()) < 1e-12,
                    "index and tranche schedules must share the maturity");
        }
        require(i == 0 || m.maturity() > maturities[i - 1].maturity(), "quote maturities must be increasing");
        require(m.index.running >= 0.0, "index running spread must be non-negative");
        for (const auto& t : m.tranches) {
            require(t.attach >= 0.0 && t.attach < t.detach && t.detach <= 1.0, "tranche quote needs 0 <= a < d <= 1");
            require(t.bid_ask > 0.0, "bid-ask width must be positive");
        }
    }
}

double model_index_price(const MaturityQuotes& q, const AffineModel& m, const Basket& basket, const DiscountCurve& curve,
                         const PricingOptions& opt) {
    return 1.0 - price_index_cds(q.index_legs(), q.index.running, m, basket, curve, opt).pv / basket.notional;
}

double model_tranche_value(const TrancheQuote& q, const TranchePrice& p) {
    return q.kind == QuoteKind::Upfront ? p.upfront : p.breakeven;
}

TimeChange bootstrap_slopes(const ModelParams& model, const QuoteSet& quotes, const DiscountCurve& curve,
                            const Basket& basket, const PricingOptions& opt) {
    quotes.validate();
    const size_t n = quotes.maturities.size();
    TimeChange tc;
    for (const auto& q : quotes.maturities) tc.breakpoints.push_back(q.maturity());
    tc.slopes.assign(n, 1.0);

    for (size_t i = 0; i < n; ++i) {
        const auto& q = quotes.maturities[i];
        // Price excess of the model over the quote; decreasing in the slope.
        auto excess = [&](double log_a) {
            for (size_t j = i; j < n; ++j) tc.slopes[j] = std::exp(log_a);
            return model_index_price(q, AffineModel(model, tc), basket, curve, opt) - q.index.price;
        };
        double lo = std::log(kSlopeMin), hi = std::log(kSlopeMax);
        double f_lo = excess(lo), f_hi = excess(hi);
        if (f_lo < 0.0 || f_hi > 0.0)
            fail(ErrorCode::NoSolution, "no slope in [1e-3, 1e3] reprices the " + q.label + " index quote");
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            const double f = excess(mid);
            (f > 0.0 ? lo : hi) = mid;
            (f > 0.0 ? f_lo : f_hi) = f;
        }
        // Newton polish with a secant slope, kept inside the bracket.
        double x = 0.5 * (lo + hi), f = excess(x);
        for (int it = 0; it < 50 && std::abs(f) > 1e-14; ++it) {
            (f > 0.0 ? lo : hi) = x;
            (f > 0.0 ? f_lo : f_hi) = f;
            const double h = 1e-7;
            const double d = (excess(x + h) - f) / h;
            double next = d < 0.0 ? x - f / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            x = next;
            f = excess(x);
        }
        for (size_t j = i; j < n; ++j) tc.slopes[j] = std::exp(x);
    }
    return tc;
}

double objective(const ModelParams& model, const TimeChange& tc, const QuoteSet& quotes, const DiscountCurve& curve,
                 const Basket& basket, const std::vector<int>& fit_maturities, const PricingOptions& opt,
                 std::vector<QuoteFit>* fits) {
    std::vector<int> which = fit_maturities;
    if (which.empty())
        for (size_t i = 0; i < quotes.maturities.size(); ++i) which.push_back(static_cast<int>(i));
    const AffineModel m(model, tc);
    double total = 0.0;
    if (fits) fits->clear();
    for (int i : which) {
        require(i >= 0 && i < static_cast<int>(quotes.maturities.size()), "fit maturity index out of range");
        const auto& q = quotes.maturities[i];
        if (q.tranches.empty()) continue;
        std::vector<TrancheSpec> specs;
        for (const auto& t : q.tranches)
            specs.push_back({t.attach, t.detach, t.kind == QuoteKind::Upfront ? t.running : 0.0});
        const auto prices = price_cdo_tranches(q.schedule, specs, m, basket, curve, opt);
        for (size_t k = 0; k < q.tranches.size(); ++k) {
            const auto& t = q.tranches[k];
            const double v = model_tranche_value(t, prices[k]);
            const double e = (v - t.value) / t.bid_ask;
            total += e * e;
            if (fits) fits->push_back({i, static_cast<int>(k), t.value, v, e});
        }
    }
    return total;
}

const char* calib_param_name(CalibParam p) {
    static const char* names[] = {"lambda0", "lambda_inf", "kappa", "sigma", "n", "gamma", "theta", "alpha", "beta"};
    return names[static_cast<int>(p)];
}

namespace {

constexpr int idx(CalibParam p) { return static_cast<int>(p); }

bool derived(const CalibSpec& s, int i) {
    return (i == idx(CalibParam::LambdaInf) && s.lambda_inf_over_kappa) ||
           (i == idx(CalibParam::Sigma) && s.sigma2_over_kappa_lambda_inf);
}

bool searched(const CalibSpec& s, int i) { return s.params[i].free && !derived(s, i); }

}  // namespace

CalibSpec::CalibSpec() {
    auto set = [&](CalibParam p, double lo, double hi, double v) { params[idx(p)] = {true, lo, hi, v}; };
    set(CalibParam::Lambda0, 0.01, 20.0, 1.0);
    set(CalibParam::LambdaInf, 1e-4, 2.0, 0.05);
    set(CalibParam::Kappa, 0.01, 20.0, 1.0);
    set(CalibParam::Sigma, 1e-3, 3.0, 0.1);
    set(CalibParam::N, 0.0, 40.0, 4.0);
    set(CalibParam::Gamma, 1e-3, 1.0, 0.1);
    set(CalibParam::Theta, 0.01, 10.0, 1.0);
    set(CalibParam::Alpha, 0.0, 0.1, 0.0);
    set(CalibParam::Beta, 0.0, 0.05, 0.005);
}

CalibSpec CalibSpec::single_maturity(int maturity_index, double lambda_inf_over_kappa,
                                     double sigma2_over_kappa_lambda_inf) {
    CalibSpec s;
    s.lambda_inf_over_kappa = lambda_inf_over_kappa;
    s.sigma2_over_kappa_lambda_inf = sigma2_over_kappa_lambda_inf;
    s.params[idx(CalibParam::Alpha)] = {false, 0.0, 0.0, 0.0};
    s.fit_maturities = {maturity_index};
    return s;
}

int CalibSpec::dimension() const {
    int d = 0;
    for (int i = 0; i < kCalibParams; ++i) d += searched(*this, i);
    return d;
}

void CalibSpec::validate() const {
    for (int i = 0; i < kCalibParams; ++i) {
        const auto& p = params[i];
        if (searched(*this, i))
            require(std::isfinite(p.lo) && std::isfinite(p.hi) && p.lo < p.hi,
                    std::string("bounds of ") + calib_param_name(static_cast<CalibParam>(i)) + " must be finite and ordered");
    }
    require(params[idx(CalibParam::N)].lo >= 0.0 || !params[idx(CalibParam::N)].free, "n must be nonnegative");
    require(!lambda_inf_over_kappa || *lambda_inf_over_kappa > 0.0, "lambda_inf/kappa ratio must be positive");
    require(!sigma2_over_kappa_lambda_inf || *sigma2_over_kappa_lambda_inf > 0.0, "sigma ratio must be positive");
    require(dimension() >= 1, "calibration needs at least one free parameter");
    require(population == 0 || population >= 4, "population must be at least 4");
    require(F > 0.0 && F <= 2.0 && CR >= 0.0 && CR <= 1.0, "DE rates out of range");
    require(max_generations >= 0 && threads >= 1, "generations and threads must be nonnegative and positive");
    require(jump_loss > 0.0 && jump_loss <= 1.0, "jump loss must lie in (0,1]");
}

ModelParams CalibSpec::decode(const std::vector<double>& genes) const {
    require(static_cast<int>(genes.size()) == dimension(), "gene vector has the wrong size");
    std::array<double, kCalibParams> v;
    for (int i = 0, g = 0; i < kCalibParams; ++i)
        v[i] = searched(*this, i) ? std::clamp(genes[g++], params[i].lo, params[i].hi) : params[i].value;
    const double kappa = v[idx(CalibParam::Kappa)];
    if (lambda_inf_over_kappa) v[idx(CalibParam::LambdaInf)] = *lambda_inf_over_kappa * kappa;
    if (sigma2_over_kappa_lambda_inf)
        v[idx(CalibParam::Sigma)] = std::sqrt(*sigma2_over_kappa_lambda_inf * kappa * v[idx(CalibParam::LambdaInf)]);

    ParamSegment s;
    s.lambda_inf = v[idx(CalibParam::LambdaInf)];
    s.kappa = kappa;
    s.sigma = v[idx(CalibParam::Sigma)];
    s.jumps = {GammaJump{v[idx(CalibParam::Gamma)], static_cast<int>(std::lround(v[idx(CalibParam::N)])),
                         v[idx(CalibParam::Theta)]}};
    s.alpha = v[idx(CalibParam::Alpha)];
    s.beta = v[idx(CalibParam::Beta)];
    return ModelParams::constant(v[idx(CalibParam::Lambda0)], s, JumpSizeLaw::fixed(jump_loss));
}

CalibResult calibrate(const CalibSpec& spec, const QuoteSet& quotes, const DiscountCurve& curve, const Basket& basket) {
    spec.validate();
    quotes.validate();
    const int dim = spec.dimension();
    const int np = spec.population > 0 ? spec.population : 10 * dim;
    std::vector<double> lo, hi;
    for (int i = 0; i < kCalibParams; ++i)
        if (searched(spec, i)) {
            lo.push_back(spec.params[i].lo);
            hi.push_back(spec.params[i].hi);
        }

    auto score = [&](const std::vector<double>& genes) {
        try {
            const ModelParams m = spec.decode(genes);
            m.validate();
            const TimeChange tc = bootstrap_slopes(m, quotes, curve, basket, spec.pricing);
            const double f = objective(m, tc, quotes, curve, basket, spec.fit_maturities, spec.pricing);
            return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto evaluate = [&](const std::vector<std::vector<double>>& pop, std::vector<double>& f) {
        parallel_for(static_cast<int>(pop.size()), spec.threads, [&](int i) { f[i] = score(pop[i]); });
    };

    // All random draws happen on this thread, so the trajectory does not depend on the worker count.
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    for (auto& x : pop)
        for (int j = 0; j < dim; ++j) x[j] = lo[j] + unif(rng) * (hi[j] - lo[j]);
    std::vector<double> fit(np);
    evaluate(pop, fit);

    CalibResult res;
    res.evaluations = np;
    auto best_index = [&] { return static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin()); };
    res.best_history.push_back(fit[best_index()]);

    std::uniform_int_distribution<int> pick(0, np - 1), pick_dim(0, dim - 1);
    std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
    std::vector<double> trial_fit(np);
    int gen = 0;
    while (gen < spec.max_generations && res.best_history.back() > spec.target) {
        for (int i = 0; i < np; ++i) {
            int r1, r2, r3;
            do r1 = pick(rng); while (r1 == i);
            do r2 = pick(rng); while (r2 == i || r2 == r1);
            do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
            const int jr = pick_dim(rng);
            for (int j = 0; j < dim; ++j) {
                double y = pop[i][j];
                if (unif(rng) < spec.CR || j == jr) {
                    y = pop[r1][j] + spec.F * (pop[r2][j] - pop[r3][j]);
                    // Out-of-bounds components land halfway between the parent and the violated bound.
                    if (y < lo[j]) y = 0.5 * (lo[j] + pop[i][j]);
                    if (y > hi[j]) y = 0.5 * (hi[j] + pop[i][j]);
                }
                trial[i][j] = y;
            }
        }
        evaluate(trial, trial_fit);
        res.evaluations += np;
        for (int i = 0; i < np; ++i)
            if (trial_fit[i] <= fit[i]) {
                pop[i] = trial[i];
                fit[i] = trial_fit[i];
            }
        ++gen;
        res.best_history.push_back(fit[best_index()]);
    }

    const int b = best_index();
    res.generations = gen;
    res.best_genes = pop[b];
    res.budget_exhausted = fit[b] > spec.target;
    res.model = spec.decode(pop[b]);
    if (std::isfinite(fit[b])) {
        res.time_change = bootstrap_slopes(res.model, quotes, curve, basket, spec.pricing);
        res.objective = objective(res.model, res.time_change, quotes, curve, basket, spec.fit_maturities, spec.pricing,
                                  &res.fits);
    } else {
        res.objective = fit[b];
    }
    return res;
}

}  // namespace cidx
