#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <cqedwb/error.hpp>

#include "cli_params.hpp"
#include "cli_table.hpp"

namespace cqedwb::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

struct PointResult {
    std::vector<Row> rows;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::string> warnings;
};

class Point {
public:
    Point(const std::map<std::string, Value>& vals, std::map<std::string, double> current, int jobs)
        : vals_(vals), current_(std::move(current)), jobs_(jobs) {}

    double r(const std::string& name) const {
        if (auto it = current_.find(name); it != current_.end()) return it->second;
        return vals_.at(name).axis.at(0);
    }
    long long i(const std::string& name) const { return vals_.at(name).i; }
    int n(const std::string& name) const { return static_cast<int>(vals_.at(name).i); }
    const std::string& s(const std::string& name) const { return vals_.at(name).s; }
    bool b(const std::string& name) const { return vals_.at(name).b; }
    int jobs() const { return jobs_; }

private:
    const std::map<std::string, Value>& vals_;
    std::map<std::string, double> current_;
    int jobs_;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
    std::function<std::vector<std::string>(const Point&)> columns;
    std::function<PointResult(const Point&)> eval;
};

// Runs fn(0..n-1) on up to `jobs` threads; the exception of the lowest failing index wins.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto body = [&](std::size_t k) {
        try {
            fn(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < n; k = next++) body(k);
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string column_name(const ParamSpec& p) {
    std::string out = p.name;
    std::replace(out.begin(), out.end(), '-', '_');
    if (!p.unit.empty()) {
        out += '_';
        for (char c : p.unit) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// Converts a config-file entry to the textual form a flag would carry.
inline std::string config_text(const ParamSpec& p, const json& v) {
    auto number = [&](const json& x, const char* what) -> std::string {
        if (x.is_number()) return format_double(x.get<double>());
        if (x.is_string()) return x.get<std::string>();
        throw UsageError(fmt::format("config key '{}': {} must be a number or string", p.name, what));
    };
    if (v.is_boolean()) {
        if (p.kind != Kind::flag) throw UsageError(fmt::format("config key '{}': boolean given for a non-flag", p.name));
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number_integer() && p.kind == Kind::integer) return std::to_string(v.get<long long>());
    if (v.is_number()) return number(v, "value");
    if (v.is_string()) return v.get<std::string>();
    if (v.is_object() && p.kind == Kind::real) {
        for (const auto& [k, _] : v.items())
            if (k != "start" && k != "stop" && k != "points" && k != "scale")
                throw UsageError(fmt::format("config key '{}': unknown sweep field '{}'", p.name, k));
        if (!v.contains("start") || !v.contains("stop") || !v.contains("points"))
            throw UsageError(fmt::format("config key '{}': sweep needs start, stop and points", p.name));
        if (!v["points"].is_number_integer())
            throw UsageError(fmt::format("config key '{}': points must be an integer", p.name));
        std::string out = number(v["start"], "start") + ":" + number(v["stop"], "stop") + ":" +
                          std::to_string(v["points"].get<long long>());
        if (v.contains("scale")) {
            if (!v["scale"].is_string()) throw UsageError(fmt::format("config key '{}': scale must be a string", p.name));
            out += ":" + v["scale"].get<std::string>();
        }
        return out;
    }
    throw UsageError(fmt::format("config key '{}': unsupported value", p.name));
}

inline json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError(fmt::format("--config: cannot open '{}'", path));
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(fmt::format("--config: {}", e.what()));
    }
    if (!cfg.is_object()) throw UsageError("--config: top level must be a JSON object");
    return cfg;
}

// Defaults, then config file, then flags.
inline std::map<std::string, Value> resolve(const Command& cmd, const json& cfg,
                                            const std::map<std::string, std::string>& flags) {
    std::map<std::string, std::string> raw;
    for (const auto& p : cmd.params) raw[p.name] = p.def;
    for (const auto& [key, v] : cfg.items()) {
        auto it = std::find_if(cmd.params.begin(), cmd.params.end(), [&](const ParamSpec& p) { return p.name == key; });
        if (it == cmd.params.end()) throw UsageError(fmt::format("unknown config key '{}' for {}", key, cmd.name));
        raw[key] = config_text(*it, v);
    }
    for (const auto& [k, v] : flags) raw[k] = v;
    std::map<std::string, Value> out;
    for (const auto& p : cmd.params) out[p.name] = parse_value(p, raw[p.name]);
    return out;
}

inline json echo_inputs(const Command& cmd, const std::map<std::string, Value>& vals) {
    json in = json::object();
    for (const auto& p : cmd.params) {
        const Value& v = vals.at(p.name);
        switch (p.kind) {
        case Kind::real:
            if (v.sweep) {
                in[p.name] = {{"start", v.sweep->start},
                              {"stop", v.sweep->stop},
                              {"points", v.sweep->points},
                              {"scale", v.sweep->log ? "log" : "linear"}};
            } else {
                in[p.name] = v.axis[0];
            }
            break;
        case Kind::integer: in[p.name] = v.i; break;
        case Kind::flag: in[p.name] = v.b; break;
        case Kind::choice:
        case Kind::text: in[p.name] = v.s; break;
        }
    }
    return in;
}

struct RunOutput {
    Table table;
    json summary;
    bool ok = true;
};

inline json finite_or_null(double x, const std::string& key, std::vector<std::string>& warnings) {
    if (std::isfinite(x)) return x;
    warnings.push_back(fmt::format("{} is {}", key, format_double(x)));
    return nullptr;
}

inline RunOutput run_command(const Command& cmd, const std::map<std::string, Value>& vals, int jobs) {
    RunOutput out;
    json& s = out.summary;
    s["command"] = cmd.name;
    s["version"] = kVersion;
    s["status"] = "ok";
    s["inputs"] = echo_inputs(cmd, vals);
    json units = json::object();
    for (const auto& p : cmd.params)
        if (!p.unit.empty()) units[p.name] = p.unit;
    s["units"] = units;

    std::vector<const ParamSpec*> swept;
    for (const auto& p : cmd.params)
        if (p.kind == Kind::real && vals.at(p.name).sweep) swept.push_back(&p);
    json sweep_names = json::array();
    for (auto* p : swept) sweep_names.push_back(p->name);
    s["sweep"] = sweep_names;

    // cartesian product, first swept axis slowest
    std::size_t total = 1;
    for (auto* p : swept) total *= vals.at(p->name).axis.size();
    std::vector<Point> points;
    points.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        std::map<std::string, double> cur;
        std::size_t rem = k;
        for (auto it = swept.rbegin(); it != swept.rend(); ++it) {
            const auto& axis = vals.at((*it)->name).axis;
            cur[(*it)->name] = axis[rem % axis.size()];
            rem /= axis.size();
        }
        points.emplace_back(vals, std::move(cur), jobs);
    }
    s["points"] = total;

    std::vector<PointResult> results(total);
    std::vector<std::string> warnings;
    json outputs = json::object();
    try {
        // inner parallelism goes to the command itself when there is a single point
        parallel_for(total, total > 1 ? jobs : 1, [&](std::size_t k) { results[k] = cmd.eval(points[k]); });
        for (auto* p : swept) out.table.columns.push_back(column_name(*p));
        for (auto& c : cmd.columns(points.front())) out.table.columns.push_back(c);
        for (std::size_t k = 0; k < total; ++k) {
            Row prefix;
            for (auto* p : swept) prefix.emplace_back(points[k].r(p->name));
            for (auto& r : results[k].rows) {
                Row full = prefix;
                full.insert(full.end(), r.begin(), r.end());
                if (full.size() != out.table.columns.size())
                    throw std::logic_error(fmt::format("{}: row width {} does not match header", cmd.name, full.size()));
                out.table.rows.push_back(std::move(full));
            }
            for (auto& w : results[k].warnings)
                if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
        }
        if (total == 1) {
            for (const auto& [k, v] : results[0].scalars) outputs[k] = finite_or_null(v, k, warnings);
        } else {
            // scalar outputs become ranges over the sweep
            std::vector<std::string> keys;
            for (const auto& [k, v] : results[0].scalars) keys.push_back(k);
            for (const auto& key : keys) {
                double lo = HUGE_VAL, hi = -HUGE_VAL;
                bool bad = false;
                for (const auto& r : results)
                    for (const auto& [k, v] : r.scalars)
                        if (k == key) {
                            if (!std::isfinite(v)) bad = true;
                            else lo = std::min(lo, v), hi = std::max(hi, v);
                        }
                if (bad) warnings.push_back(fmt::format("{} is not finite at some sweep points", key));
                outputs["min_" + key] = finite_or_null(lo, "min_" + key, warnings);
                outputs["max_" + key] = finite_or_null(hi, "max_" + key, warnings);
            }
        }
    } catch (const Error& e) {
        out.ok = false;
        out.table = {};
        s["status"] = "error";
        s["outputs"] = json::object();
        s["warnings"] = warnings;
        s["table"] = nullptr;
        s["error"] = {{"kind", e.name()}, {"message", e.what()}};
        return out;
    }
    s["outputs"] = outputs;
    s["warnings"] = warnings;
    json cols = json::array();
    for (const auto& c : out.table.columns) cols.push_back(c);
    s["table"] = {{"columns", cols}, {"rows", out.table.rows.size()}, {"path", nullptr}};
    return out;
}

} // namespace cqedwb::cli
