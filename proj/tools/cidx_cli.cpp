// cidx command-line tool. Thin shell over the C API: flags become a JSON request, results go to --out
// (stdout by default) and plot data to --csv.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cidx/cidx.h"
#include "json.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kUsage = 2;

struct Common {
    std::string market, model, config, request, out, csv;
    int threads = 0;
};

// Flag values collected across subcommands; only the set ones reach the request.
struct Flags {
    std::string maturity, horizon, spread, strike, side, method, product, curve, recovery;
    std::vector<std::string> tranches, strikes;
    double exercise = 0.0, dt = 0.0;
    int k = 0;
    long paths = 0;
    unsigned long long seed = 0;
    bool no_fep = false, no_antithetic = false, compare = false;
};

void add_common(CLI::App* sub, Common& c, bool model_required) {
    sub->add_option("--market,--quotes", c.market, "market data JSON")->required()->check(CLI::ExistingFile);
    auto* m = sub->add_option("--model", c.model, "model parameters JSON")->check(CLI::ExistingFile);
    if (model_required) m->required();
    sub->add_option("--config", c.config, "run configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--request", c.request, "request JSON; flags given on the command line take precedence")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "result JSON path (default: stdout)");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

// A maturity or horizon: a quote label / date stays a string, a plain number means years.
json time_value(const std::string& s) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return s;
}

// "a:d[:running]" with unit suffixes, e.g. "3%:6%:500bp".
json tranche_value(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw CLI::ValidationError("--tranche", "expected attach:detach[:running]");
    json t{{"attach", parts[0]}, {"detach", parts[1]}};
    if (parts.size() == 3) t["running"] = parts[2];
    return t;
}

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return true;
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

int fail_with(cidx_status s) {
    std::cerr << cidx_last_error() << "\n";
    return s == CIDX_NUMERICAL_QUALITY ? 3 : 1;
}

int io_failure(const std::string& msg) {
    std::cerr << json{{"status", "io_error"}, {"code", "IoError"}, {"message", msg}}.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit index derivatives: pricing, simulation and calibration"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(cidx_version()));

    Common c;
    Flags f;
    std::string spec_path;

    auto* cds = app.add_subcommand("price-cds", "index CDS legs, upfront and breakeven");
    add_common(cds, c, true);
    cds->add_option("--maturity", f.maturity, "quote label, date or years")->required();
    cds->add_option("--spread", f.spread, "running spread, e.g. 165bp (default: the quoted running)");

    auto* cdo = app.add_subcommand("price-cdo", "CDO tranches (the quoted tranches unless --tranche is given)");
    add_common(cdo, c, true);
    cdo->add_option("--maturity", f.maturity, "quote label, date or years")->required();
    cdo->add_option("--tranche", f.tranches, "attach:detach[:running], e.g. 0%:3%:500bp");
    cdo->add_option("--method", f.method, "exact or largepool")->check(CLI::IsMember({"exact", "largepool"}));

    auto* ntd = app.add_subcommand("price-ntd", "Nth-to-default swap");
    add_common(ntd, c, true);
    ntd->add_option("--maturity", f.maturity, "quote label, date or years")->required();
    ntd->add_option("--k", f.k, "default rank")->required();
    ntd->add_option("--spread", f.spread, "running spread")->required();
    ntd->add_option("--recovery", f.recovery, "recovery rate (default: the market's)");

    auto* swp = app.add_subcommand("price-swaption", "index swaption");
    add_common(swp, c, true);
    swp->add_option("--exercise", f.exercise, "exercise time in years")->required();
    swp->add_option("--maturity", f.maturity, "swap maturity: quote label, date or years")->required();
    swp->add_option("--strike", f.strike, "strike spread, e.g. 165bp")->required();
    swp->add_option("--side", f.side, "payer or receiver")->check(CLI::IsMember({"payer", "receiver"}));
    swp->add_flag("--no-fep", f.no_fep, "payer without front-end protection");
    swp->add_option("--method", f.method, "exact or fast")->check(CLI::IsMember({"exact", "fast"}));

    auto* mc = app.add_subcommand("mc-price", "Monte Carlo estimate of a product");
    add_common(mc, c, true);
    mc->add_option("--product", f.product, "defaults, puts, cds, cdo, ntd or swaption")
        ->required()
        ->check(CLI::IsMember({"defaults", "puts", "cds", "cdo", "ntd", "swaption"}));
    mc->add_option("--maturity", f.maturity, "quote label, date or years");
    mc->add_option("--horizon", f.horizon, "horizon for defaults/puts");
    mc->add_option("--strikes", f.strikes, "put strikes, e.g. 3% 6% 12%");
    mc->add_option("--spread", f.spread, "running spread");
    mc->add_option("--tranche", f.tranches, "attach:detach[:running]");
    mc->add_option("--k", f.k, "NTD rank");
    mc->add_option("--recovery", f.recovery, "NTD recovery");
    mc->add_option("--exercise", f.exercise, "swaption exercise time in years");
    mc->add_option("--strike", f.strike, "swaption strike");
    mc->add_option("--side", f.side, "payer or receiver")->check(CLI::IsMember({"payer", "receiver"}));
    mc->add_flag("--no-fep", f.no_fep, "payer without front-end protection");
    mc->add_option("--paths", f.paths, "number of paths (antithetic pairs count twice)");
    mc->add_option("--dt", f.dt, "time step bound in years");
    mc->add_option("--seed", f.seed, "random seed");
    mc->add_flag("--no-antithetic", f.no_antithetic, "plain sampling");
    mc->add_flag("--compare", f.compare, "also report the closed-form value");

    auto* ld = app.add_subcommand("loss-dist", "default-count distribution and tranche-put curve");
    add_common(ld, c, true);
    ld->add_option("--horizon", f.horizon, "quote label, date or years")->required();
    ld->add_option("--strikes", f.strikes, "put strikes (default 0.5% to 30%)");
    ld->add_option("--curve", f.curve, "CSV content: count or put")->check(CLI::IsMember({"count", "put"}));

    auto* cal = app.add_subcommand("calibrate", "fit slopes and model parameters to the quotes");
    add_common(cal, c, false);
    cal->add_option("--spec", spec_path, "calibration spec JSON")->required()->check(CLI::ExistingFile);

    for (auto* sub : {ld, cal}) sub->add_option("--csv", c.csv, "plot data CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    json request = json::object();
    std::string text;
    if (name == "calibrate") c.request = spec_path;
    if (!c.request.empty()) {
        if (!read_file(c.request, text)) return io_failure("cannot read '" + c.request + "'");
        try {
            request = json::parse(text);
        } catch (const json::parse_error& e) {
            std::cerr << json{{"status", "schema_error"}, {"code", "SchemaError"}, {"message", c.request + ": " + e.what()}}.dump()
                      << "\n";
            return 1;
        }
    }
    auto given = [&](const char* opt) { return sub->get_option_no_throw(opt) && sub->count(opt) > 0; };
    if (given("--maturity")) request["maturity"] = time_value(f.maturity);
    if (given("--horizon")) request["horizon"] = time_value(f.horizon);
    if (given("--spread")) request["spread"] = f.spread;
    if (given("--strike")) request["strike"] = f.strike;
    if (given("--side")) request["side"] = f.side;
    if (given("--k")) request["k"] = f.k;
    if (given("--recovery")) request["recovery"] = f.recovery;
    if (given("--exercise")) request["exercise"] = f.exercise;
    if (given("--product")) request["product"] = f.product;
    if (given("--curve")) request["curve"] = f.curve;
    if (given("--paths")) request["paths"] = f.paths;
    if (given("--dt")) request["dt"] = f.dt;
    if (given("--seed")) request["seed"] = f.seed;
    if (f.no_fep) request["front_end_protection"] = false;
    if (f.no_antithetic) request["antithetic"] = false;
    if (f.compare) request["compare"] = true;
    if (given("--strikes")) request["strikes"] = f.strikes;
    if (given("--tranche")) {
        try {
            json ts = json::array();
            for (const auto& t : f.tranches) ts.push_back(tranche_value(t));
            request["tranches"] = ts;
        } catch (const CLI::ParseError& e) {
            return app.exit(e) == 0 ? 0 : kUsage;
        }
    }

    json config = json::object();
    if (!c.config.empty()) {
        if (!read_file(c.config, text)) return io_failure("cannot read '" + c.config + "'");
        try {
            config = json::parse(text);
        } catch (const json::parse_error& e) {
            std::cerr << json{{"status", "schema_error"}, {"code", "SchemaError"}, {"message", c.config + ": " + e.what()}}.dump()
                      << "\n";
            return 1;
        }
    }
    if (c.threads > 0) config["threads"] = c.threads;
    if (given("--method")) {
        if (name == "price-cdo") config["tranche_method"] = f.method == "largepool" ? "large_pool" : "exact";
        else request["method"] = f.method;
    }

    cidx_market* market = nullptr;
    cidx_model* model = nullptr;
    cidx_config* cfg = nullptr;
    char* out = nullptr;
    char* csv = nullptr;
    int rc = 0;
    cidx_status s = cidx_market_load(c.market.c_str(), &market);
    if (s == CIDX_OK && !c.model.empty()) s = cidx_model_load(c.model.c_str(), market, &model);
    if (s == CIDX_OK) s = cidx_config_parse(config.dump().c_str(), &cfg);
    if (s == CIDX_OK) s = cidx_run(name.c_str(), market, model, cfg, request.dump().c_str(), &out, &csv);
    if (s != CIDX_OK) {
        rc = fail_with(s);
    } else {
        if (c.out.empty()) {
            std::fwrite(out, 1, std::char_traits<char>::length(out), stdout);
        } else if (!write_file(c.out, out)) {
            rc = io_failure("cannot write '" + c.out + "'");
        }
        if (rc == 0 && !c.csv.empty() && csv && !write_file(c.csv, csv)) rc = io_failure("cannot write '" + c.csv + "'");
    }
    cidx_string_free(out);
    cidx_string_free(csv);
    cidx_config_free(cfg);
    cidx_model_free(model);
    cidx_market_free(market);
    return rc;
}
