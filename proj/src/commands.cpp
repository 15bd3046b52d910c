#include "cidx/commands.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"

namespace cidx {

using namespace detail;

namespace {

// A maturity given as a quote label / date (dated legs of that quote) or as a number of years (regular legs).
struct Legs {
    std::string label;
    double T = 0.0;
    LegSchedule tranche;
    LegSchedule index;
    const MaturityQuotes* quotes = nullptr;
};

Legs resolve_legs(const MarketData& market, const json& j, const std::string& path) {
    Legs l;
    if (j.is_string()) {
        const int i = market.find_maturity(j.get<std::string>());
        l.quotes = &market.quotes.maturities[i];
        l.label = l.quotes->label;
        l.tranche = l.quotes->schedule;
        l.index = l.quotes->index_legs();
    } else {
        const double T = number(j, path);
        if (!(T > 0.0)) schema(path, "maturity must be positive");
        l.tranche = l.index = regular_schedule(T, market.frequency);
        std::ostringstream s;
        s << T << "y";
        l.label = s.str();
    }
    l.T = l.tranche.maturity();
    return l;
}

// Real time from a quote label or a number of years.
double resolve_time(const MarketData& market, const json& j, const std::string& path) {
    if (j.is_string()) return market.quotes.maturities[market.find_maturity(j.get<std::string>())].maturity();
    const double t = number(j, path);
    if (!(t > 0.0)) schema(path, "time must be positive");
    return t;
}

std::string tranche_name(double a, double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g%%-%g%%", a * 100.0, d * 100.0);
    return buf;
}

// Shortest text that reads back to the same double.
std::string text(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json estimate_json(const Estimate& e) { return json{{"mean", e.mean}, {"se", e.se}, {"samples", e.samples}}; }

json header(const std::string& name, const Legs* legs = nullptr) {
    json r{{"schema", "cidx.result/1"}, {"command", name}};
    if (legs) r["maturity"] = {{"label", legs->label}, {"years", legs->T}};
    return r;
}

struct Ctx {
    const MarketData& market;
    const ModelFile* model;
    const RunConfig& cfg;
    std::string name;

    AffineModel affine() const {
        require(model != nullptr, name + " needs a model file");
        return AffineModel(model->params, resolve_time_change(*model, market, cfg));
    }
};

CommandOutput price_cds(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"maturity", "spread"});
    const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
    double spread = 0.0;
    if (rq.contains("spread")) spread = parse_quantity(rq.at("spread"), "request.spread");
    else if (legs.quotes) spread = legs.quotes->index.running;
    else schema("request.spread", "missing field (no quoted running spread at this maturity)");
    const AffineModel m = c.affine();
    const CdsPrice p = price_index_cds(legs.index, spread, m, c.market.basket, c.market.curve, c.cfg.pricing);
    const double upfront = p.pv / c.market.basket.notional;
    json r = header(c.name, &legs);
    r["spread"] = spread;
    r["protection"] = p.protection;
    r["premium"] = p.premium;
    r["rpv01"] = p.rpv01;
    r["pv"] = p.pv;
    r["breakeven"] = p.breakeven;
    r["upfront"] = upfront;
    r["price"] = 1.0 - upfront;
    r["quote_transform"] = quote_transform(spread, legs.T, upfront);
    if (legs.quotes) r["market_price"] = legs.quotes->index.price;
    return {r, ""};
}

CommandOutput price_cdo(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"maturity", "tranches"});
    const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
    std::vector<TrancheSpec> specs;
    std::vector<const TrancheQuote*> quoted;
    if (rq.contains("tranches")) {
        const json& ts = rq.at("tranches");
        if (!ts.is_array() || ts.empty()) schema("request.tranches", "expected a non-empty array");
        for (size_t k = 0; k < ts.size(); ++k) {
            const std::string tp = "request.tranches[" + std::to_string(k) + "]";
            check_keys(ts[k], tp, {"attach", "detach", "running"});
            TrancheSpec s{parse_quantity(at(ts[k], tp, "attach"), tp + ".attach"),
                          parse_quantity(at(ts[k], tp, "detach"), tp + ".detach"),
                          ts[k].contains("running") ? parse_quantity(ts[k].at("running"), tp + ".running") : 0.0};
            specs.push_back(s);
            quoted.push_back(nullptr);
        }
    } else {
        if (!legs.quotes || legs.quotes->tranches.empty())
            schema("request.tranches", "missing field (no quoted tranches at this maturity)");
        for (const auto& t : legs.quotes->tranches) {
            specs.push_back({t.attach, t.detach, t.kind == QuoteKind::Upfront ? t.running : 0.0});
            quoted.push_back(&t);
        }
    }
    const AffineModel m = c.affine();
    const auto prices = price_cdo_tranches(legs.tranche, specs, m, c.market.basket, c.market.curve, c.cfg.pricing);
    json rows = json::array();
    double obj = 0.0;
    for (size_t k = 0; k < specs.size(); ++k) {
        const auto& p = prices[k];
        json row{{"tranche", tranche_name(specs[k].attach, specs[k].detach)},
                 {"attach", specs[k].attach},
                 {"detach", specs[k].detach},
                 {"running", specs[k].running},
                 {"protection", p.protection},
                 {"premium", p.premium},
                 {"rpv01", p.rpv01},
                 {"pv", p.pv},
                 {"upfront", p.upfront},
                 {"breakeven", p.breakeven},
                 {"quote_transform", quoted[k] && quoted[k]->kind == QuoteKind::Spread
                                         ? quote_transform(p.breakeven, legs.T, 0.0)
                                         : quote_transform(specs[k].running, legs.T, p.upfront)}};
        if (const TrancheQuote* q = quoted[k]) {
            const double v = model_tranche_value(*q, p);
            const double e = (v - q->value) / q->bid_ask;
            obj += e * e;
            row["quote"] = {{"kind", q->kind == QuoteKind::Upfront ? "upfront" : "spread"},
                            {"market", q->value},
                            {"model", v},
                            {"bid_ask", q->bid_ask},
                            {"error_bid_ask", e}};
        }
        rows.push_back(row);
    }
    json r = header(c.name, &legs);
    r["method"] = c.cfg.pricing.method == TrancheMethod::Exact ? "exact" : "large_pool";
    r["tranches"] = rows;
    if (quoted.front()) r["objective"] = obj;
    return {r, ""};
}

CommandOutput price_ntd(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"maturity", "k", "spread", "recovery"});
    const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
    const int k = integer(at(rq, "request", "k"), "request.k");
    const double spread = parse_quantity(at(rq, "request", "spread"), "request.spread");
    const double recovery = rq.contains("recovery") ? parse_quantity(rq.at("recovery"), "request.recovery") : c.market.recovery;
    const AffineModel m = c.affine();
    const NtdPrice p = price_ntd(legs.tranche, k, spread, recovery, m, c.market.basket, c.market.curve, c.cfg.pricing);
    json r = header(c.name, &legs);
    r["k"] = k;
    r["spread"] = spread;
    r["recovery"] = recovery;
    r["protection"] = p.protection;
    r["premium"] = p.premium;
    r["rpv01"] = p.rpv01;
    r["pv"] = p.pv;
    r["breakeven"] = p.breakeven;
    r["quote_transform"] = quote_transform(spread, legs.T, p.pv / c.market.basket.notional);
    return {r, ""};
}

SwaptionSpec swaption_spec(const MarketData& market, const json& rq) {
    SwaptionSpec s;
    s.exercise = number(at(rq, "request", "exercise"), "request.exercise");
    s.maturity = resolve_time(market, at(rq, "request", "maturity"), "request.maturity");
    s.strike = parse_quantity(at(rq, "request", "strike"), "request.strike");
    const std::string side = rq.contains("side") ? string(rq.at("side"), "request.side") : "payer";
    if (side == "payer") s.side = SwaptionSide::Payer;
    else if (side == "receiver") s.side = SwaptionSide::Receiver;
    else schema("request.side", "expected payer or receiver");
    s.front_end_protection = boolean_or(rq, "request", "front_end_protection", true);
    s.frequency = market.frequency;
    s.validate();
    return s;
}

json swaption_header(const std::string& name, const SwaptionSpec& s) {
    json r = header(name);
    r["exercise"] = s.exercise;
    r["maturity"] = {{"years", s.maturity}};
    r["strike"] = s.strike;
    r["side"] = s.side == SwaptionSide::Payer ? "payer" : "receiver";
    r["front_end_protection"] = s.front_end_protection;
    return r;
}

CommandOutput price_swaption(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"exercise", "maturity", "strike", "side", "front_end_protection", "method"});
    const SwaptionSpec s = swaption_spec(c.market, rq);
    SwaptionMethod method = c.cfg.swaption_method;
    if (rq.contains("method")) {
        const auto v = string(rq.at("method"), "request.method");
        if (v == "exact") method = SwaptionMethod::Exact;
        else if (v == "fast") method = SwaptionMethod::Fast;
        else schema("request.method", "expected exact or fast");
    }
    const AffineModel m = c.affine();
    double price = 0.0;
    if (method == SwaptionMethod::Exact) {
        price = swaption_exact(s, m, c.market.basket, c.market.curve, c.cfg.pricing.numerics);
    } else {
        if (s.side == SwaptionSide::Payer && !s.front_end_protection)
            fail(ErrorCode::InvalidArgument, "the fast method prices payers with front-end protection only");
        price = s.side == SwaptionSide::Payer ? swaption_fast_payer(s, m, c.market.basket, c.market.curve)
                                              : swaption_fast_receiver(s, m, c.market.basket, c.market.curve);
    }
    json r = swaption_header(c.name, s);
    r["method"] = method == SwaptionMethod::Exact ? "exact" : "fast";
    r["price"] = price;
    return {r, ""};
}

std::vector<double> strikes_of(const json& rq, const char* key, std::vector<double> dflt) {
    if (!rq.contains(key)) return dflt;
    const json& ks = rq.at(key);
    const std::string kp = std::string("request.") + key;
    if (!ks.is_array() || ks.empty()) schema(kp, "expected a non-empty array");
    std::vector<double> out;
    for (size_t i = 0; i < ks.size(); ++i) out.push_back(parse_quantity(ks[i], kp + "[" + std::to_string(i) + "]"));
    return out;
}

CommandOutput mc_price(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"product", "maturity", "horizon", "strikes", "spread", "tranches", "k", "recovery",
                               "exercise", "strike", "side", "front_end_protection", "paths", "dt", "seed",
                               "antithetic", "compare"});
    require(c.model != nullptr, c.name + " needs a model file");
    const std::string product = string(at(rq, "request", "product"), "request.product");
    SimConfig sim = c.cfg.mc;
    if (rq.contains("paths")) {
        if (!rq.at("paths").is_number_integer()) schema("request.paths", "expected an integer");
        sim.paths = rq.at("paths").get<long>();
    }
    if (rq.contains("dt")) sim.dt = number(rq.at("dt"), "request.dt");
    if (rq.contains("seed")) {
        if (!rq.at("seed").is_number_unsigned()) schema("request.seed", "expected a nonnegative integer");
        sim.seed = rq.at("seed").get<std::uint64_t>();
    }
    sim.antithetic = boolean_or(rq, "request", "antithetic", sim.antithetic);
    sim.validate();
    const bool compare = boolean_or(rq, "request", "compare", false);
    const auto& basket = c.market.basket;
    const auto& curve = c.market.curve;
    const bool cp = c.cfg.pricing.counterparty;
    const ModelParams& params = c.model->params;
    const AffineModel m = c.affine();
    const TimeChange& tc = m.time_change();

    json r = header(c.name);
    r["product"] = product;
    r["mc"] = {{"paths", sim.paths}, {"dt", sim.dt}, {"seed", sim.seed}, {"antithetic", sim.antithetic}};
    const BasketState s0 = BasketState::initial(m);
    auto closed = [&](double v) {
        if (compare) r["closed_form"] = v;
    };

    if (product == "defaults" || product == "puts") {
        const double T = resolve_time(c.market, at(rq, "request", "horizon"), "request.horizon");
        r["horizon"] = T;
        if (product == "defaults") {
            r["estimate"] = estimate_json(mc_expected_defaults(T, params, tc, basket, sim));
            closed(expected_defaults(s0, T, m, basket.n_names));
        } else {
            const auto ks = strikes_of(rq, "strikes", {0.03, 0.06, 0.12});
            const auto est = mc_tranche_puts(T, ks, params, tc, basket, sim);
            json rows = json::array();
            for (size_t i = 0; i < ks.size(); ++i) {
                json row{{"K", ks[i]}, {"estimate", estimate_json(est[i])}};
                if (compare) row["closed_form"] = tranche_put(s0, T, ks[i], m, basket.n_names, c.cfg.pricing.numerics);
                rows.push_back(row);
            }
            r["puts"] = rows;
        }
    } else if (product == "cds") {
        const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
        double spread = 0.0;
        if (rq.contains("spread")) spread = parse_quantity(rq.at("spread"), "request.spread");
        else if (legs.quotes) spread = legs.quotes->index.running;
        else schema("request.spread", "missing field");
        r["maturity"] = {{"label", legs.label}, {"years", legs.T}};
        r["spread"] = spread;
        r["estimate"] = estimate_json(mc_index_cds(legs.index, spread, params, tc, basket, curve, sim, cp));
        if (compare) closed(price_index_cds(legs.index, spread, m, basket, curve, c.cfg.pricing).pv);
    } else if (product == "cdo") {
        const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
        std::vector<TrancheSpec> specs;
        if (rq.contains("tranches")) {
            const json& ts = rq.at("tranches");
            if (!ts.is_array() || ts.empty()) schema("request.tranches", "expected a non-empty array");
            for (size_t k = 0; k < ts.size(); ++k) {
                const std::string tp = "request.tranches[" + std::to_string(k) + "]";
                check_keys(ts[k], tp, {"attach", "detach", "running"});
                specs.push_back({parse_quantity(at(ts[k], tp, "attach"), tp + ".attach"),
                                 parse_quantity(at(ts[k], tp, "detach"), tp + ".detach"),
                                 ts[k].contains("running") ? parse_quantity(ts[k].at("running"), tp + ".running") : 0.0});
            }
        } else {
            if (!legs.quotes || legs.quotes->tranches.empty()) schema("request.tranches", "missing field");
            for (const auto& t : legs.quotes->tranches)
                specs.push_back({t.attach, t.detach, t.kind == QuoteKind::Upfront ? t.running : 0.0});
        }
        const auto est = mc_cdo_upfronts(legs.tranche, specs, params, tc, basket, curve, sim, cp);
        std::vector<TranchePrice> cf;
        if (compare) cf = price_cdo_tranches(legs.tranche, specs, m, basket, curve, c.cfg.pricing);
        json rows = json::array();
        for (size_t k = 0; k < specs.size(); ++k) {
            json row{{"tranche", tranche_name(specs[k].attach, specs[k].detach)},
                     {"running", specs[k].running},
                     {"upfront", estimate_json(est[k])}};
            if (compare) row["closed_form"] = cf[k].upfront;
            rows.push_back(row);
        }
        r["maturity"] = {{"label", legs.label}, {"years", legs.T}};
        r["tranches"] = rows;
    } else if (product == "ntd") {
        const Legs legs = resolve_legs(c.market, at(rq, "request", "maturity"), "request.maturity");
        const int k = integer(at(rq, "request", "k"), "request.k");
        const double spread = parse_quantity(at(rq, "request", "spread"), "request.spread");
        const double rec = rq.contains("recovery") ? parse_quantity(rq.at("recovery"), "request.recovery") : c.market.recovery;
        r["maturity"] = {{"label", legs.label}, {"years", legs.T}};
        r["k"] = k;
        r["spread"] = spread;
        r["estimate"] = estimate_json(mc_ntd(legs.tranche, k, spread, rec, params, tc, basket, curve, sim, cp));
        if (compare) closed(price_ntd(legs.tranche, k, spread, rec, m, basket, curve, c.cfg.pricing).pv);
    } else if (product == "swaption") {
        json sub = json::object();
        for (const char* key : {"exercise", "maturity", "strike", "side", "front_end_protection"})
            if (rq.contains(key)) sub[key] = rq.at(key);
        const SwaptionSpec s = swaption_spec(c.market, sub);
        const json h = swaption_header(c.name, s);
        for (const char* key : {"exercise", "maturity", "strike", "side", "front_end_protection"}) r[key] = h.at(key);
        r["estimate"] = estimate_json(mc_swaption(s, params, tc, basket, curve, sim));
        if (compare) closed(swaption_exact(s, m, basket, curve, c.cfg.pricing.numerics));
    } else {
        schema("request.product", "expected defaults, puts, cds, cdo, ntd or swaption");
    }
    return {r, ""};
}

CommandOutput loss_dist(const Ctx& c, const json& rq) {
    check_keys(rq, "request", {"horizon", "strikes", "curve"});
    const double T = resolve_time(c.market, at(rq, "request", "horizon"), "request.horizon");
    std::vector<double> grid;
    for (int i = 1; i <= 60; ++i) grid.push_back(0.005 * i);
    const auto ks = strikes_of(rq, "strikes", grid);
    const std::string curve = rq.contains("curve") ? string(rq.at("curve"), "request.curve") : "count";
    if (curve != "count" && curve != "put") schema("request.curve", "expected count or put");

    const AffineModel m = c.affine();
    const BasketState s0 = BasketState::initial(m);
    const int n = c.market.basket.n_names;
    const auto& num = c.cfg.pricing.numerics;
    const auto p = default_count_distribution(s0, T, m, n, num);
    double sum = 0.0, mean = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
        sum += p[k];
        mean += static_cast<double>(k) * p[k];
    }
    json puts = json::array();
    std::vector<double> pv;
    for (double K : ks) {
        pv.push_back(tranche_put(s0, T, K, m, n, num, c.cfg.pricing.counterparty));
        puts.push_back(json{{"K", K}, {"value", pv.back()}});
    }
    json r = header(c.name);
    r["horizon"] = T;
    r["names"] = n;
    r["probabilities"] = p;
    r["sum"] = sum;
    r["mean_defaults"] = mean;
    r["tranche_puts"] = puts;

    std::ostringstream csv;
    if (curve == "count") {
        csv << "k,value\n";
        for (size_t k = 0; k < p.size(); ++k) csv << k << ',' << text(p[k]) << '\n';
    } else {
        csv << "K,value\n";
        for (size_t i = 0; i < ks.size(); ++i) csv << text(ks[i]) << ',' << text(pv[i]) << '\n';
    }
    return {r, csv.str()};
}

CommandOutput calibrate_cmd(const Ctx& c, const json& rq) {
    CalibSpec spec = parse_calib_spec(rq, &c.market);
    const int grid = spec.pricing.numerics.count_grid;
    spec.pricing = c.cfg.pricing;
    if (rq.contains("count_grid")) spec.pricing.numerics.count_grid = grid;
    if (!(rq.contains("de") && rq.at("de").contains("threads"))) spec.threads = c.cfg.pricing.numerics.threads;

    const auto& q = c.market.quotes;
    const CalibResult res = calibrate(spec, q, c.market.curve, c.market.basket);
    std::vector<QuoteFit> fits;
    const double obj =
        objective(res.model, res.time_change, q, c.market.curve, c.market.basket, spec.fit_maturities, spec.pricing, &fits);
    const AffineModel m(res.model, res.time_change);

    json table = json::array();
    std::ostringstream csv;
    csv << "maturity,attach,detach,market,model\n";
    for (size_t i = 0; i < q.maturities.size(); ++i) {
        const auto& mq = q.maturities[i];
        json rows = json::array();
        int within = 0, n_rows = 0;
        for (const auto& f : fits) {
            if (f.maturity != static_cast<int>(i)) continue;
            const auto& t = mq.tranches[f.tranche];
            const double running = t.kind == QuoteKind::Upfront ? t.running : 0.0;
            auto qt = [&](double v) {
                return t.kind == QuoteKind::Upfront ? quote_transform(running, mq.maturity(), v) : quote_transform(v, mq.maturity(), 0.0);
            };
            rows.push_back(json{{"tranche", tranche_name(t.attach, t.detach)},
                                {"kind", t.kind == QuoteKind::Upfront ? "upfront" : "spread"},
                                {"running", running},
                                {"market", f.market},
                                {"model", f.model},
                                {"bid_ask", t.bid_ask},
                                {"error_bid_ask", f.error}});
            csv << mq.label << ',' << text(t.attach) << ',' << text(t.detach) << ',' << text(qt(f.market)) << ',' << text(qt(f.model)) << '\n';
            ++n_rows;
            if (std::abs(f.error) <= 2.0) ++within;
        }
        if (rows.empty()) continue;
        table.push_back(json{{"label", mq.label},
                             {"years", mq.maturity()},
                             {"index", {{"running", mq.index.running},
                                        {"market_price", mq.index.price},
                                        {"model_price", model_index_price(mq, m, c.market.basket, c.market.curve, spec.pricing)}}},
                             {"tranches", rows},
                             {"within_2x_bid_ask", within},
                             {"count", n_rows}});
    }
    json r = header(c.name);
    r["model"] = model_to_json(res.model, res.time_change);
    r["slopes"] = res.time_change.slopes;
    r["objective"] = obj;
    r["budget_exhausted"] = res.budget_exhausted;
    r["generations"] = res.generations;
    r["evaluations"] = res.evaluations;
    r["best_history"] = res.best_history;
    r["de"] = {{"population", spec.population > 0 ? spec.population : 10 * spec.dimension()},
               {"F", spec.F},
               {"CR", spec.CR},
               {"max_generations", spec.max_generations},
               {"seed", spec.seed},
               {"target", spec.target}};
    r["table"] = table;
    return {r, csv.str()};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"price-cds", "price-cdo", "price-ntd", "price-swaption",
                                                "mc-price",  "loss-dist", "calibrate"};
    return names;
}

CommandOutput run_command(const std::string& name, const MarketData& market, const ModelFile* model,
                          const RunConfig& cfg, const json& request) {
    const Ctx c{market, model, cfg, name};
    const json& rq = request.is_null() ? json::object() : request;
    if (name == "price-cds") return price_cds(c, rq);
    if (name == "price-cdo") return price_cdo(c, rq);
    if (name == "price-ntd") return price_ntd(c, rq);
    if (name == "price-swaption") return price_swaption(c, rq);
    if (name == "mc-price") return mc_price(c, rq);
    if (name == "loss-dist") return loss_dist(c, rq);
    if (name == "calibrate") return calibrate_cmd(c, rq);
    fail(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
}

int exit_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NumericalQuality:
        case ErrorCode::PoleCollision:
        case ErrorCode::NoRoot:
        case ErrorCode::NoSolution:
        case ErrorCode::AnchorInvalid:
        case ErrorCode::BudgetExhausted:
            return 3;
        default:
            return 1;
    }
}

}  // namespace cidx
