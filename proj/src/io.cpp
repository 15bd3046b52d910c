#include "cidx/io.hpp"

#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cidx {

namespace {

using namespace detail;

const char* day_count_name(DayCount dc) { return dc == DayCount::Act360 ? "ACT/360" : "ACT/365F"; }

json decimal(double v) { return json{{"value", v}, {"unit", "decimal"}}; }

// Divisor to decimals; dividing by an exact power of ten rounds once.
double unit_divisor(const std::string& unit, const std::string& path) {
    if (unit == "bp") return 1e4;
    if (unit == "percent" || unit == "%") return 1e2;
    if (unit == "decimal") return 1.0;
    fail(ErrorCode::UnitError, path + ": unknown unit '" + unit + "' (bp, percent or decimal)");
}

}  // namespace

double parse_quantity(const json& j, const std::string& path) {
    if (j.is_number())
        fail(ErrorCode::UnitError, path + ": bare number is ambiguous; give {\"value\", \"unit\"} or a '%'/'bp' suffix");
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        std::string unit;
        std::string num = s;
        if (s.size() > 2 && s.compare(s.size() - 2, 2, "bp") == 0) {
            unit = "bp";
            num = s.substr(0, s.size() - 2);
        } else if (!s.empty() && s.back() == '%') {
            unit = "percent";
            num = s.substr(0, s.size() - 1);
        } else {
            fail(ErrorCode::UnitError, path + ": '" + s + "' has no unit suffix ('%' or 'bp')");
        }
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(num, &used);
        } catch (const std::exception&) {
            schema(path, "cannot read a number from '" + s + "'");
        }
        if (used != num.size() || !std::isfinite(v)) schema(path, "cannot read a number from '" + s + "'");
        // Shift the decimal exponent in the text so "36.81%" reads as the double nearest 0.3681.
        if (num.find_first_of("eE") == std::string::npos) return std::stod(num + (unit == "bp" ? "e-4" : "e-2"));
        return v / unit_divisor(unit, path);
    }
    check_keys(j, path, {"value", "unit"});
    const double v = number(at(j, path, "value"), path + ".value");
    return v / unit_divisor(string(at(j, path, "unit"), path + ".unit"), path + ".unit");
}

int MarketData::find_maturity(const std::string& key) const {
    for (size_t i = 0; i < quotes.maturities.size(); ++i)
        if (quotes.maturities[i].label == key || format_date(maturity_dates[i]) == key) return static_cast<int>(i);
    fail(ErrorCode::SchemaError, "no quoted maturity '" + key + "'");
}

MarketData parse_market(const json& j) {
    const std::string p = "market";
    check_keys(j, p, {"schema", "valuation_date", "discount", "basket", "conventions", "quotes"});
    if (j.contains("schema") && string(j.at("schema"), p + ".schema") != "cidx.market/1")
        schema(p + ".schema", "unsupported schema version");
    MarketData m;
    m.valuation = date(at(j, p, "valuation_date"), p + ".valuation_date");

    // Discount curve.
    {
        const std::string dp = p + ".discount";
        const json& d = at(j, p, "discount");
        const std::string type = string(at(d, dp, "type"), dp + ".type");
        if (type == "flat") {
            check_keys(d, dp, {"type", "rate"});
            const double r = parse_quantity(at(d, dp, "rate"), dp + ".rate");
            m.curve = DiscountCurve::flat(r);
            m.discount_spec = json{{"type", "flat"}, {"rate", decimal(r)}};
        } else if (type == "zero_rates" || type == "discount_factors") {
            check_keys(d, dp, {"type", "points"});
            const json& pts = at(d, dp, "points");
            if (!pts.is_array() || pts.empty()) schema(dp + ".points", "expected a non-empty array");
            std::vector<std::pair<double, double>> curve;
            json norm = json::array();
            for (size_t i = 0; i < pts.size(); ++i) {
                const std::string pp = dp + ".points[" + std::to_string(i) + "]";
                const double t = number(at(pts[i], pp, "t"), pp + ".t");
                if (!(t > 0.0)) schema(pp + ".t", "time must be positive");
                if (type == "zero_rates") {
                    check_keys(pts[i], pp, {"t", "rate"});
                    const double r = parse_quantity(at(pts[i], pp, "rate"), pp + ".rate");
                    curve.emplace_back(t, std::exp(-r * t));
                    norm.push_back(json{{"t", t}, {"rate", decimal(r)}});
                } else {
                    check_keys(pts[i], pp, {"t", "df"});
                    const double df = number(at(pts[i], pp, "df"), pp + ".df");
                    curve.emplace_back(t, df);
                    norm.push_back(json{{"t", t}, {"df", df}});
                }
            }
            m.curve = DiscountCurve::from_points(curve);
            m.discount_spec = json{{"type", type}, {"points", norm}};
        } else {
            schema(dp + ".type", "expected flat, zero_rates or discount_factors");
        }
    }

    {
        const std::string bp = p + ".basket";
        const json& b = at(j, p, "basket");
        check_keys(b, bp, {"names", "notional", "recovery"});
        m.basket.n_names = integer(at(b, bp, "names"), bp + ".names");
        m.basket.notional = number_or(b, bp, "notional", 1.0);
        m.recovery = parse_quantity(at(b, bp, "recovery"), bp + ".recovery");
        if (m.basket.n_names < 1) schema(bp + ".names", "must be positive");
        if (!(m.basket.notional > 0.0)) schema(bp + ".notional", "must be positive");
        if (!(m.recovery >= 0.0 && m.recovery < 1.0)) schema(bp + ".recovery", "must lie in [0, 1)");
    }

    if (j.contains("conventions")) {
        const std::string cp = p + ".conventions";
        const json& c = j.at("conventions");
        check_keys(c, cp, {"frequency", "tranche_accrual", "index_accrual"});
        if (c.contains("frequency")) m.frequency = integer(c.at("frequency"), cp + ".frequency");
        if (c.contains("tranche_accrual")) m.tranche_accrual = day_count(c.at("tranche_accrual"), cp + ".tranche_accrual");
        m.index_accrual = m.tranche_accrual;
        if (c.contains("index_accrual")) m.index_accrual = day_count(c.at("index_accrual"), cp + ".index_accrual");
    }

    const json& qs = at(j, p, "quotes");
    if (!qs.is_array() || qs.empty()) schema(p + ".quotes", "expected a non-empty array");
    for (size_t i = 0; i < qs.size(); ++i) {
        const std::string qp = p + ".quotes[" + std::to_string(i) + "]";
        const json& q = qs[i];
        check_keys(q, qp, {"label", "maturity", "index", "tranches"});
        MaturityQuotes mq;
        const Date mat = date(at(q, qp, "maturity"), qp + ".maturity");
        mq.label = q.contains("label") ? string(q.at("label"), qp + ".label") : format_date(mat);
        try {
            mq.schedule = dated_schedule(m.valuation, mat, m.frequency, m.tranche_accrual);
            if (m.index_accrual != m.tranche_accrual)
                mq.index_schedule = dated_schedule(m.valuation, mat, m.frequency, m.index_accrual);
        } catch (const Error& e) {
            schema(qp + ".maturity", e.what());
        }
        const std::string ip = qp + ".index";
        const json& idx = at(q, qp, "index");
        check_keys(idx, ip, {"price", "running"});
        mq.index.price = parse_quantity(at(idx, ip, "price"), ip + ".price");
        mq.index.running = parse_quantity(at(idx, ip, "running"), ip + ".running");
        if (q.contains("tranches")) {
            const json& ts = q.at("tranches");
            if (!ts.is_array()) schema(qp + ".tranches", "expected an array");
            for (size_t k = 0; k < ts.size(); ++k) {
                const std::string tp = qp + ".tranches[" + std::to_string(k) + "]";
                const json& t = ts[k];
                check_keys(t, tp, {"attach", "detach", "upfront", "running", "spread", "bid_ask"});
                TrancheQuote tq;
                tq.attach = parse_quantity(at(t, tp, "attach"), tp + ".attach");
                tq.detach = parse_quantity(at(t, tp, "detach"), tp + ".detach");
                const bool up = t.contains("upfront"), sp = t.contains("spread");
                if (up == sp) schema(tp, "give exactly one of upfront or spread");
                if (up) {
                    tq.kind = QuoteKind::Upfront;
                    tq.value = parse_quantity(t.at("upfront"), tp + ".upfront");
                    tq.running = parse_quantity(at(t, tp, "running"), tp + ".running");
                } else {
                    if (t.contains("running")) schema(tp + ".running", "spread quotes carry no running spread");
                    tq.kind = QuoteKind::Spread;
                    tq.value = parse_quantity(t.at("spread"), tp + ".spread");
                }
                tq.bid_ask = parse_quantity(at(t, tp, "bid_ask"), tp + ".bid_ask");
                if (!(tq.attach >= 0.0 && tq.attach < tq.detach && tq.detach <= 1.0))
                    schema(tp, "needs 0 <= attach < detach <= 1");
                if (!(tq.bid_ask > 0.0)) schema(tp + ".bid_ask", "must be positive");
                mq.tranches.push_back(tq);
            }
        }
        if (!m.quotes.maturities.empty() && !(mq.maturity() > m.quotes.maturities.back().maturity()))
            schema(qp + ".maturity", "maturities must be increasing");
        m.maturity_dates.push_back(mat);
        m.quotes.maturities.push_back(std::move(mq));
    }
    return m;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
    }
}

MarketData load_market(const std::string& path) { return parse_market(read_json_file(path)); }

json market_to_json(const MarketData& m) {
    json quotes = json::array();
    for (size_t i = 0; i < m.quotes.maturities.size(); ++i) {
        const auto& q = m.quotes.maturities[i];
        json tr = json::array();
        for (const auto& t : q.tranches) {
            json o{{"attach", decimal(t.attach)}, {"detach", decimal(t.detach)}};
            if (t.kind == QuoteKind::Upfront) {
                o["upfront"] = decimal(t.value);
                o["running"] = decimal(t.running);
            } else {
                o["spread"] = decimal(t.value);
            }
            o["bid_ask"] = decimal(t.bid_ask);
            tr.push_back(o);
        }
        quotes.push_back(json{{"label", q.label},
                              {"maturity", format_date(m.maturity_dates[i])},
                              {"index", {{"price", decimal(q.index.price)}, {"running", decimal(q.index.running)}}},
                              {"tranches", tr}});
    }
    return json{{"schema", "cidx.market/1"},
                {"valuation_date", format_date(m.valuation)},
                {"discount", m.discount_spec},
                {"basket", {{"names", m.basket.n_names}, {"notional", m.basket.notional}, {"recovery", decimal(m.recovery)}}},
                {"conventions",
                 {{"frequency", m.frequency},
                  {"tranche_accrual", day_count_name(m.tranche_accrual)},
                  {"index_accrual", day_count_name(m.index_accrual)}}},
                {"quotes", quotes}};
}

ModelFile parse_model(const json& j, const MarketData* market) {
    const std::string p = "model";
    check_keys(j, p, {"schema", "lambda0", "segments", "jump_law", "time_change"});
    if (j.contains("schema") && string(j.at("schema"), p + ".schema") != "cidx.model/1")
        schema(p + ".schema", "unsupported schema version");
    ModelFile f;
    f.params.lambda0 = number(at(j, p, "lambda0"), p + ".lambda0");
    const json& segs = at(j, p, "segments");
    if (!segs.is_array() || segs.empty()) schema(p + ".segments", "expected a non-empty array");
    double start = 0.0;
    for (size_t i = 0; i < segs.size(); ++i) {
        const std::string sp = p + ".segments[" + std::to_string(i) + "]";
        const json& s = segs[i];
        check_keys(s, sp, {"t_end", "lambda_inf", "kappa", "sigma", "jumps", "alpha", "beta", "xi", "zeta", "eta"});
        ParamSegment seg;
        seg.t_start = start;
        seg.t_end = (s.contains("t_end") && !s.at("t_end").is_null()) ? number(s.at("t_end"), sp + ".t_end") : kOpenEnd;
        seg.lambda_inf = number(at(s, sp, "lambda_inf"), sp + ".lambda_inf");
        seg.kappa = number(at(s, sp, "kappa"), sp + ".kappa");
        seg.sigma = number(at(s, sp, "sigma"), sp + ".sigma");
        seg.alpha = number_or(s, sp, "alpha", 0.0);
        seg.beta = number_or(s, sp, "beta", 0.0);
        seg.xi = number_or(s, sp, "xi", 0.0);
        seg.zeta = number_or(s, sp, "zeta", 0.0);
        seg.eta = number_or(s, sp, "eta", 0.0);
        if (s.contains("jumps")) {
            const json& js = s.at("jumps");
            if (!js.is_array()) schema(sp + ".jumps", "expected an array");
            for (size_t k = 0; k < js.size(); ++k) {
                const std::string jp = sp + ".jumps[" + std::to_string(k) + "]";
                check_keys(js[k], jp, {"gamma", "n", "theta"});
                seg.jumps.push_back(GammaJump{number(at(js[k], jp, "gamma"), jp + ".gamma"),
                                              integer(at(js[k], jp, "n"), jp + ".n"),
                                              number(at(js[k], jp, "theta"), jp + ".theta")});
            }
        }
        if (i + 1 < segs.size() && seg.t_end == kOpenEnd) schema(sp + ".t_end", "only the last segment may be open");
        start = seg.t_end;
        f.params.segments.push_back(seg);
    }
    if (j.contains("jump_law")) {
        const std::string lp = p + ".jump_law";
        const json& l = j.at("jump_law");
        check_keys(l, lp, {"fixed", "discrete"});
        if (l.contains("fixed") == l.contains("discrete")) schema(lp, "give exactly one of fixed or discrete");
        if (l.contains("fixed")) {
            f.params.jump_law = JumpSizeLaw::fixed(number(l.at("fixed"), lp + ".fixed"));
        } else {
            std::vector<JumpSizeLaw::Point> pts;
            const json& d = l.at("discrete");
            if (!d.is_array() || d.empty()) schema(lp + ".discrete", "expected a non-empty array");
            for (size_t k = 0; k < d.size(); ++k) {
                const std::string dp = lp + ".discrete[" + std::to_string(k) + "]";
                check_keys(d[k], dp, {"loss", "weight"});
                pts.push_back({number(at(d[k], dp, "loss"), dp + ".loss"), number(at(d[k], dp, "weight"), dp + ".weight")});
            }
            f.params.jump_law = JumpSizeLaw::discrete(pts);
        }
    } else if (market) {
        f.params.jump_law = JumpSizeLaw::fixed(1.0 - market->recovery);
    }
    if (j.contains("time_change")) {
        const std::string tp = p + ".time_change";
        const json& t = j.at("time_change");
        if (t.is_string()) {
            if (t.get<std::string>() != "bootstrap") schema(tp, "expected \"bootstrap\" or an object");
            f.bootstrap = true;
        } else {
            check_keys(t, tp, {"breakpoints", "slopes"});
            TimeChange tc;
            const json& sl = at(t, tp, "slopes");
            if (!sl.is_array() || sl.empty()) schema(tp + ".slopes", "expected a non-empty array");
            for (size_t k = 0; k < sl.size(); ++k) tc.slopes.push_back(number(sl[k], tp + ".slopes[" + std::to_string(k) + "]"));
            const json& bp = at(t, tp, "breakpoints");
            if (bp.is_string()) {
                if (bp.get<std::string>() != "quote_maturities") schema(tp + ".breakpoints", "expected \"quote_maturities\" or an array");
                if (!market) schema(tp + ".breakpoints", "quote_maturities needs a market file");
                for (const auto& q : market->quotes.maturities) tc.breakpoints.push_back(q.maturity());
            } else {
                if (!bp.is_array()) schema(tp + ".breakpoints", "expected an array");
                for (size_t k = 0; k < bp.size(); ++k)
                    tc.breakpoints.push_back(number(bp[k], tp + ".breakpoints[" + std::to_string(k) + "]"));
            }
            if (tc.breakpoints.size() + 1 != tc.slopes.size() && tc.breakpoints.size() != tc.slopes.size())
                schema(tp, "need one slope per breakpoint (the last extends) or one more");
            f.time_change = tc;
        }
    }
    try {
        f.params.validate();
        if (f.time_change) f.time_change->validate();
    } catch (const Error& e) {
        schema(p, e.what());
    }
    return f;
}

json model_to_json(const ModelParams& mp, const TimeChange& tc) {
    json segs = json::array();
    for (const auto& s : mp.segments) {
        json jumps = json::array();
        for (const auto& g : s.jumps) jumps.push_back(json{{"gamma", g.gamma}, {"n", g.n}, {"theta", g.theta}});
        segs.push_back(json{{"t_end", s.t_end == kOpenEnd ? json(nullptr) : json(s.t_end)},
                            {"lambda_inf", s.lambda_inf},
                            {"kappa", s.kappa},
                            {"sigma", s.sigma},
                            {"jumps", jumps},
                            {"alpha", s.alpha},
                            {"beta", s.beta},
                            {"xi", s.xi},
                            {"zeta", s.zeta},
                            {"eta", s.eta}});
    }
    json law;
    if (mp.jump_law.is_fixed()) {
        law["fixed"] = mp.jump_law.points[0].loss;
    } else {
        law["discrete"] = json::array();
        for (const auto& pt : mp.jump_law.points) law["discrete"].push_back(json{{"loss", pt.loss}, {"weight", pt.weight}});
    }
    return json{{"schema", "cidx.model/1"},
                {"lambda0", mp.lambda0},
                {"segments", segs},
                {"jump_law", law},
                {"time_change", {{"breakpoints", tc.breakpoints}, {"slopes", tc.slopes}}}};
}

RunConfig parse_config(const json& j) {
    const std::string p = "config";
    RunConfig c;
    if (j.is_null()) return c;
    check_keys(j, p, {"schema", "count_grid", "lambda_grid", "threads", "tranche_method", "aux_law", "swaption_method",
                      "counterparty", "mc"});
    if (j.contains("schema") && string(j.at("schema"), p + ".schema") != "cidx.config/1")
        schema(p + ".schema", "unsupported schema version");
    auto& num = c.pricing.numerics;
    if (j.contains("count_grid")) num.count_grid = integer(j.at("count_grid"), p + ".count_grid");
    if (j.contains("lambda_grid")) num.lambda_grid = integer(j.at("lambda_grid"), p + ".lambda_grid");
    if (j.contains("threads")) num.threads = integer(j.at("threads"), p + ".threads");
    if (num.count_grid < 64 || num.lambda_grid < 64) schema(p, "grid sizes must be at least 64");
    if (num.threads < 1) schema(p + ".threads", "must be positive");
    if (j.contains("tranche_method")) {
        const auto s = string(j.at("tranche_method"), p + ".tranche_method");
        if (s == "exact") c.pricing.method = TrancheMethod::Exact;
        else if (s == "large_pool") c.pricing.method = TrancheMethod::LargePool;
        else schema(p + ".tranche_method", "expected exact or large_pool");
    }
    if (j.contains("aux_law")) {
        const auto s = string(j.at("aux_law"), p + ".aux_law");
        if (s == "poisson") c.pricing.aux = AuxLaw::Poisson;
        else if (s == "delta") c.pricing.aux = AuxLaw::Delta;
        else schema(p + ".aux_law", "expected poisson or delta");
    }
    if (j.contains("swaption_method")) {
        const auto s = string(j.at("swaption_method"), p + ".swaption_method");
        if (s == "exact") c.swaption_method = SwaptionMethod::Exact;
        else if (s == "fast") c.swaption_method = SwaptionMethod::Fast;
        else schema(p + ".swaption_method", "expected exact or fast");
    }
    c.pricing.counterparty = boolean_or(j, p, "counterparty", false);
    c.mc.threads = num.threads;
    if (j.contains("mc")) {
        const std::string mp = p + ".mc";
        const json& m = j.at("mc");
        check_keys(m, mp, {"paths", "dt", "seed", "antithetic"});
        if (m.contains("paths")) c.mc.paths = m.at("paths").is_number_integer() ? m.at("paths").get<long>() : -1;
        if (m.contains("dt")) c.mc.dt = number(m.at("dt"), mp + ".dt");
        if (m.contains("seed")) {
            if (!m.at("seed").is_number_unsigned()) schema(mp + ".seed", "expected a nonnegative integer");
            c.mc.seed = m.at("seed").get<std::uint64_t>();
        }
        c.mc.antithetic = boolean_or(m, mp, "antithetic", true);
        try {
            c.mc.validate();
        } catch (const Error& e) {
            schema(mp, e.what());
        }
    }
    return c;
}

CalibSpec parse_calib_spec(const json& j, const MarketData* market) {
    const std::string p = "calibration";
    check_keys(j, p, {"schema", "mode", "maturity", "params", "frozen", "jump_loss", "de", "count_grid"});
    if (j.contains("schema") && string(j.at("schema"), p + ".schema") != "cidx.calib/1")
        schema(p + ".schema", "unsupported schema version");
    const std::string mode = j.contains("mode") ? string(j.at("mode"), p + ".mode") : "global";
    CalibSpec s;
    if (mode == "single_maturity") {
        const json& m = at(j, p, "maturity");
        int idx = 0;
        if (m.is_number_integer()) {
            idx = m.get<int>();
        } else {
            if (!market) schema(p + ".maturity", "a maturity label needs a market file");
            idx = market->find_maturity(string(m, p + ".maturity"));
        }
        s = CalibSpec::single_maturity(idx);
    } else if (mode != "global") {
        schema(p + ".mode", "expected global or single_maturity");
    }
    if (j.contains("frozen")) {
        const std::string fp = p + ".frozen";
        const json& f = j.at("frozen");
        check_keys(f, fp, {"lambda_inf_over_kappa", "sigma2_over_kappa_lambda_inf"});
        s.lambda_inf_over_kappa.reset();
        s.sigma2_over_kappa_lambda_inf.reset();
        if (f.contains("lambda_inf_over_kappa"))
            s.lambda_inf_over_kappa = number(f.at("lambda_inf_over_kappa"), fp + ".lambda_inf_over_kappa");
        if (f.contains("sigma2_over_kappa_lambda_inf"))
            s.sigma2_over_kappa_lambda_inf = number(f.at("sigma2_over_kappa_lambda_inf"), fp + ".sigma2_over_kappa_lambda_inf");
    }
    if (j.contains("params")) {
        const std::string pp = p + ".params";
        const json& ps = j.at("params");
        check_keys(ps, pp, {"lambda0", "lambda_inf", "kappa", "sigma", "n", "gamma", "theta", "alpha", "beta"});
        for (int i = 0; i < kCalibParams; ++i) {
            const char* name = calib_param_name(static_cast<CalibParam>(i));
            if (!ps.contains(name)) continue;
            const std::string np = pp + "." + name;
            const json& r = ps.at(name);
            check_keys(r, np, {"lo", "hi", "value"});
            auto& range = s.params[i];
            if (r.contains("value")) {
                if (r.contains("lo") || r.contains("hi")) schema(np, "give either value or lo/hi");
                range = {false, 0.0, 0.0, number(r.at("value"), np + ".value")};
            } else {
                range = {true, number(at(r, np, "lo"), np + ".lo"), number(at(r, np, "hi"), np + ".hi"), range.value};
            }
        }
    }
    s.jump_loss = j.contains("jump_loss") ? number(j.at("jump_loss"), p + ".jump_loss")
                                          : (market ? 1.0 - market->recovery : s.jump_loss);
    if (j.contains("de")) {
        const std::string dp = p + ".de";
        const json& d = j.at("de");
        check_keys(d, dp, {"population", "F", "CR", "max_generations", "seed", "threads", "target"});
        if (d.contains("population")) s.population = integer(d.at("population"), dp + ".population");
        s.F = number_or(d, dp, "F", s.F);
        s.CR = number_or(d, dp, "CR", s.CR);
        if (d.contains("max_generations")) s.max_generations = integer(d.at("max_generations"), dp + ".max_generations");
        if (d.contains("seed")) {
            if (!d.at("seed").is_number_unsigned()) schema(dp + ".seed", "expected a nonnegative integer");
            s.seed = d.at("seed").get<std::uint64_t>();
        }
        if (d.contains("threads")) s.threads = integer(d.at("threads"), dp + ".threads");
        s.target = number_or(d, dp, "target", s.target);
    }
    if (j.contains("count_grid")) s.pricing.numerics.count_grid = integer(j.at("count_grid"), p + ".count_grid");
    try {
        s.validate();
        if (market)
            for (int i : s.fit_maturities)
                require(i >= 0 && i < static_cast<int>(market->quotes.maturities.size()), "maturity index out of range");
    } catch (const Error& e) {
        schema(p, e.what());
    }
    return s;
}

TimeChange resolve_time_change(const ModelFile& model, const MarketData& market, const RunConfig& cfg) {
    if (model.bootstrap) return bootstrap_slopes(model.params, market.quotes, market.curve, market.basket, cfg.pricing);
    if (model.time_change) return *model.time_change;
    return TimeChange::identity();
}

}  // namespace cidx
