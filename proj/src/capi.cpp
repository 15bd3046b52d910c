#include "cidx/cidx.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>

#include "cidx/commands.hpp"

struct cidx_market {
    cidx::MarketData data;
};
struct cidx_model {
    cidx::ModelFile data;
};
struct cidx_config {
    cidx::RunConfig data;
};

namespace {

thread_local std::string g_last_error;

cidx_status status_of(cidx::ErrorCode code) {
    using cidx::ErrorCode;
    switch (code) {
        case ErrorCode::SchemaError: return CIDX_SCHEMA_ERROR;
        case ErrorCode::UnitError: return CIDX_UNIT_ERROR;
        case ErrorCode::IoError: return CIDX_IO_ERROR;
        default: return cidx::exit_status(code) == 3 ? CIDX_NUMERICAL_QUALITY : CIDX_INVALID_ARGUMENT;
    }
}

cidx_status set_error(cidx_status s, const std::string& code, const std::string& msg) {
    g_last_error = cidx::json{{"status", cidx_status_name(s)}, {"code", code}, {"message", msg}}.dump();
    return s;
}

template <class F>
cidx_status guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return CIDX_OK;
    } catch (const cidx::Error& e) {
        return set_error(status_of(e.code()), cidx::error_code_name(e.code()), e.what());
    } catch (const cidx::json::exception& e) {
        return set_error(CIDX_SCHEMA_ERROR, "SchemaError", e.what());
    } catch (const std::bad_alloc&) {
        return set_error(CIDX_INTERNAL_ERROR, "OutOfMemory", "allocation failed");
    } catch (const std::exception& e) {
        return set_error(CIDX_INTERNAL_ERROR, "Internal", e.what());
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

cidx::json parse_text(const char* text, const char* what) {
    if (!text) cidx::fail(cidx::ErrorCode::InvalidArgument, std::string(what) + " is null");
    try {
        return cidx::json::parse(text);
    } catch (const cidx::json::parse_error& e) {
        cidx::fail(cidx::ErrorCode::SchemaError, std::string(what) + ": invalid JSON: " + e.what());
    }
}

void need(const void* p, const char* what) {
    if (!p) cidx::fail(cidx::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* cidx_version(void) { return "1.0.0"; }

const char* cidx_status_name(cidx_status status) {
    switch (status) {
        case CIDX_OK: return "ok";
        case CIDX_INVALID_ARGUMENT: return "invalid_argument";
        case CIDX_SCHEMA_ERROR: return "schema_error";
        case CIDX_UNIT_ERROR: return "unit_error";
        case CIDX_IO_ERROR: return "io_error";
        case CIDX_NUMERICAL_QUALITY: return "numerical_quality";
        case CIDX_UNKNOWN_COMMAND: return "unknown_command";
        case CIDX_INTERNAL_ERROR: return "internal_error";
    }
    return "unknown";
}

const char* cidx_last_error(void) { return g_last_error.c_str(); }

cidx_status cidx_market_load(const char* path, cidx_market** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new cidx_market{cidx::load_market(path)};
    });
}

cidx_status cidx_market_parse(const char* json_text, cidx_market** out) {
    return guarded([&] {
        need(out, "out");
        *out = new cidx_market{cidx::parse_market(parse_text(json_text, "market"))};
    });
}

cidx_status cidx_market_to_json(const cidx_market* market, char** out_json) {
    return guarded([&] {
        need(market, "market");
        need(out_json, "out_json");
        *out_json = dup(cidx::market_to_json(market->data).dump(2) + "\n");
    });
}

void cidx_market_free(cidx_market* market) { delete market; }

cidx_status cidx_model_load(const char* path, const cidx_market* market, cidx_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new cidx_model{cidx::parse_model(cidx::read_json_file(path), market ? &market->data : nullptr)};
    });
}

cidx_status cidx_model_parse(const char* json_text, const cidx_market* market, cidx_model** out) {
    return guarded([&] {
        need(out, "out");
        *out = new cidx_model{cidx::parse_model(parse_text(json_text, "model"), market ? &market->data : nullptr)};
    });
}

void cidx_model_free(cidx_model* model) { delete model; }

cidx_status cidx_config_parse(const char* json_text, cidx_config** out) {
    return guarded([&] {
        need(out, "out");
        *out = new cidx_config{cidx::parse_config(json_text ? parse_text(json_text, "config") : cidx::json())};
    });
}

cidx_status cidx_config_load(const char* path, cidx_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new cidx_config{cidx::parse_config(cidx::read_json_file(path))};
    });
}

void cidx_config_free(cidx_config* config) { delete config; }

int cidx_command_count(void) { return static_cast<int>(cidx::command_names().size()); }

const char* cidx_command_name(int index) {
    const auto& n = cidx::command_names();
    return index >= 0 && index < static_cast<int>(n.size()) ? n[index].c_str() : nullptr;
}

cidx_status cidx_run(const char* command, const cidx_market* market, const cidx_model* model, const cidx_config* config,
                     const char* request_json, char** out_json, char** out_csv) {
    if (command) {
        const auto& n = cidx::command_names();
        if (std::find(n.begin(), n.end(), command) == n.end())
            return set_error(CIDX_UNKNOWN_COMMAND, "UnknownCommand", std::string("unknown command '") + command + "'");
    }
    return guarded([&] {
        need(command, "command");
        need(market, "market");
        need(out_json, "out_json");
        const cidx::RunConfig cfg = config ? config->data : cidx::RunConfig{};
        const cidx::json request = request_json ? parse_text(request_json, "request") : cidx::json::object();
        const auto res = cidx::run_command(command, market->data, model ? &model->data : nullptr, cfg, request);
        std::string body = res.result.dump(2) + "\n";
        char* j = dup(body);
        if (out_csv) {
            try {
                *out_csv = res.csv.empty() ? nullptr : dup(res.csv);
            } catch (...) {
                std::free(j);
                throw;
            }
        }
        *out_json = j;
    });
}

void cidx_string_free(char* s) { std::free(s); }

}  // extern "C"
