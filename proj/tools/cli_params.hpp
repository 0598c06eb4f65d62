#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "cli_table.hpp"

namespace cqedwb::cli {

// Invalid flags, config keys or values; reported with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Dim { none, freq, time, length, current, capacitance, inductance, resistance, temperature, angle, flux, power };

struct UnitDef {
    const char* suffix;
    Dim dim;
    double mult; // SI value is mult * 10^exp10
    int exp10;
};

inline const std::vector<UnitDef>& unit_table() {
    static const std::vector<UnitDef> t{
        {"GHz", Dim::freq, 1, 9},         {"MHz", Dim::freq, 1, 6},         {"kHz", Dim::freq, 1, 3},
        {"Hz", Dim::freq, 1, 0},          {"s", Dim::time, 1, 0},           {"ms", Dim::time, 1, -3},
        {"us", Dim::time, 1, -6},         {"ns", Dim::time, 1, -9},         {"ps", Dim::time, 1, -12},
        {"m", Dim::length, 1, 0},         {"mm", Dim::length, 1, -3},       {"um", Dim::length, 1, -6},
        {"nm", Dim::length, 1, -9},       {"A", Dim::current, 1, 0},        {"mA", Dim::current, 1, -3},
        {"uA", Dim::current, 1, -6},      {"F", Dim::capacitance, 1, 0},    {"nF", Dim::capacitance, 1, -9},
        {"pF", Dim::capacitance, 1, -12}, {"fF", Dim::capacitance, 1, -15}, {"H", Dim::inductance, 1, 0},
        {"uH", Dim::inductance, 1, -6},   {"nH", Dim::inductance, 1, -9},   {"pH", Dim::inductance, 1, -12},
        {"ohm", Dim::resistance, 1, 0},   {"kohm", Dim::resistance, 1, 3},  {"K", Dim::temperature, 1, 0},
        {"mK", Dim::temperature, 1, -3},  {"rad", Dim::angle, 1, 0},        {"deg", Dim::angle, std::numbers::pi / 180.0, 0},
        {"dB", Dim::power, 1, 0},         {"Phi0", Dim::flux, 1, 0},
    };
    return t;
}

inline const UnitDef* find_unit(const std::string& s) {
    for (const auto& u : unit_table())
        if (s == u.suffix) return &u;
    return nullptr;
}

enum class Kind { real, integer, choice, flag, text };

struct ParamSpec {
    std::string name;
    Kind kind = Kind::real;
    std::string def;  // default in the same syntax as the flag
    Dim dim = Dim::none;
    std::string unit; // native unit suffix, empty when dimensionless
    std::string help;
    bool sweepable = true;
    std::vector<std::string> choices;
    long long min_int = 0;
    long long max_int = 1'000'000;
};

inline ParamSpec real(std::string name, std::string def, std::string unit, std::string help) {
    ParamSpec p;
    p.name = std::move(name);
    p.def = std::move(def);
    p.unit = std::move(unit);
    p.help = std::move(help);
    if (!p.unit.empty()) {
        const UnitDef* u = find_unit(p.unit);
        if (!u) throw std::logic_error("unknown native unit " + p.unit);
        p.dim = u->dim;
    }
    return p;
}

inline ParamSpec integer(std::string name, long long def, long long lo, long long hi, std::string help) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = Kind::integer;
    p.def = std::to_string(def);
    p.min_int = lo;
    p.max_int = hi;
    p.help = std::move(help);
    return p;
}

inline ParamSpec choice(std::string name, std::vector<std::string> choices, std::string help) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = Kind::choice;
    p.def = choices.front();
    p.choices = std::move(choices);
    p.help = std::move(help);
    return p;
}

inline ParamSpec flag(std::string name, std::string help) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = Kind::flag;
    p.def = "false";
    p.help = std::move(help);
    return p;
}

inline ParamSpec text(std::string name, std::string help) {
    ParamSpec p;
    p.name = std::move(name);
    p.kind = Kind::text;
    p.help = std::move(help);
    return p;
}

inline ParamSpec fixed(ParamSpec p) {
    p.sweepable = false;
    return p;
}

struct Sweep {
    double start = 0, stop = 0;
    long long points = 1;
    bool log = false;
};

// A parameter after parsing. Reals carry their axis (one entry unless swept).
struct Value {
    const ParamSpec* spec = nullptr;
    std::vector<double> axis;
    std::optional<Sweep> sweep;
    long long i = 0;
    std::string s;
    bool b = false;
};

// Number with optional unit suffix, returned in the parameter's native unit.
inline double parse_quantity(const ParamSpec& p, const std::string& raw) {
    const char* b = raw.data();
    const char* e = b + raw.size();
    if (b != e && *b == '+') ++b;
    double x = 0;
    auto [ptr, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || !std::isfinite(x))
        throw UsageError(fmt::format("--{}: '{}' is not a number", p.name, raw));
    std::string suffix(ptr, e);
    if (suffix.empty()) return x;
    const UnitDef* u = find_unit(suffix);
    if (!u || p.unit.empty() || u->dim != p.dim)
        throw UsageError(fmt::format("--{}: unit '{}' does not apply", p.name, suffix));
    // divide by exact powers of ten so 40fF parses to 4e-14 exactly
    const UnitDef* nat = find_unit(p.unit);
    const int ex = u->exp10 - nat->exp10;
    const double y = x * (u->mult / nat->mult);
    return ex >= 0 ? y * std::pow(10.0, ex) : y / std::pow(10.0, -ex);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next - pos));
        if (next == std::string::npos) return out;
        pos = next + 1;
    }
}

inline long long parse_int(const std::string& name, const std::string& raw) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty())
        throw UsageError(fmt::format("--{}: '{}' is not an integer", name, raw));
    return v;
}

inline std::vector<double> sweep_axis(const Sweep& sw) {
    std::vector<double> axis;
    const auto n = sw.points;
    for (long long k = 0; k < n; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(n - 1);
        if (sw.log) axis.push_back(sw.start * std::pow(sw.stop / sw.start, f));
        else axis.push_back(sw.start + (sw.stop - sw.start) * f);
    }
    axis.front() = sw.start;
    axis.back() = sw.stop;
    return axis;
}

inline Value parse_value(const ParamSpec& p, const std::string& raw) {
    Value v;
    v.spec = &p;
    switch (p.kind) {
    case Kind::real: {
        auto parts = split(raw, ':');
        if (parts.size() == 1) {
            v.axis = {parse_quantity(p, raw)};
            return v;
        }
        if (!p.sweepable) throw UsageError(fmt::format("--{}: cannot be swept", p.name));
        if (parts.size() != 3 && parts.size() != 4)
            throw UsageError(fmt::format("--{}: sweep syntax is start:stop:points[:log]", p.name));
        Sweep sw;
        sw.start = parse_quantity(p, parts[0]);
        sw.stop = parse_quantity(p, parts[1]);
        sw.points = parse_int(p.name, parts[2]);
        if (parts.size() == 4) {
            if (parts[3] == "log") sw.log = true;
            else if (parts[3] != "lin" && parts[3] != "linear")
                throw UsageError(fmt::format("--{}: sweep scale must be lin or log", p.name));
        }
        if (sw.points < 2) throw UsageError(fmt::format("--{}: a sweep needs at least 2 points", p.name));
        if (sw.points > 1'000'000) throw UsageError(fmt::format("--{}: too many sweep points", p.name));
        if (sw.log && !(sw.start * sw.stop > 0))
            throw UsageError(fmt::format("--{}: log sweep endpoints must share a sign and be nonzero", p.name));
        v.sweep = sw;
        v.axis = sweep_axis(sw);
        return v;
    }
    case Kind::integer:
        v.i = parse_int(p.name, raw);
        if (v.i < p.min_int || v.i > p.max_int)
            throw UsageError(fmt::format("--{}: {} is outside [{}, {}]", p.name, v.i, p.min_int, p.max_int));
        return v;
    case Kind::choice:
        for (const auto& c : p.choices)
            if (c == raw) {
                v.s = raw;
                return v;
            }
        throw UsageError(fmt::format("--{}: '{}' is not one of {}", p.name, raw, fmt::join(p.choices, "|")));
    case Kind::flag:
        if (raw == "true" || raw == "1") v.b = true;
        else if (raw == "false" || raw == "0") v.b = false;
        else throw UsageError(fmt::format("--{}: expected true or false", p.name));
        return v;
    case Kind::text:
        v.s = raw;
        return v;
    }
    return v;
}

} // namespace cqedwb::cli
