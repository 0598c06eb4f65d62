#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

namespace cqedwb::cli {

using Cell = std::variant<double, long long, bool, std::string>;
using Row = std::vector<Cell>;

struct Table {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", x);
}

inline std::string format_cell(const Cell& c) {
    struct V {
        std::string operator()(double x) const { return format_double(x); }
        std::string operator()(long long x) const { return std::to_string(x); }
        std::string operator()(bool x) const { return x ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_quote(t.columns[i]);
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            const bool text = std::holds_alternative<std::string>(r[i]);
            os << (i ? "," : "") << (text ? csv_quote(std::get<std::string>(r[i])) : format_cell(r[i]));
        }
        os << '\n';
    }
}

// Reverses format_cell: integers and reals by syntax, then booleans, else text.
inline Cell parse_cell(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "-0") return -0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && s.find_first_of(".eE") == std::string::npos) {
        long long v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec == std::errc() && p == e) return v;
    }
    double d = 0;
    auto [p, ec] = std::from_chars(b, e, d);
    if (ec == std::errc() && p == e && !s.empty()) return d;
    return s;
}

inline std::vector<std::vector<std::string>> split_csv(std::istream& in) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    char ch;
    while (in.get(ch)) {
        any = true;
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            rec.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            rec.push_back(std::move(field));
            field.clear();
            out.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else if (ch != '\r') {
            field += ch;
        }
    }
    if (quoted) throw std::runtime_error("csv: unterminated quote");
    if (any) {
        rec.push_back(std::move(field));
        out.push_back(std::move(rec));
    }
    return out;
}

inline Table read_csv(std::istream& in) {
    auto recs = split_csv(in);
    if (recs.empty()) throw std::runtime_error("csv: missing header");
    Table t;
    t.columns = recs.front();
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i].size() != t.columns.size())
            throw std::runtime_error(fmt::format("csv: record {} has {} fields, header has {}", i, recs[i].size(), t.columns.size()));
        Row r;
        for (const auto& f : recs[i]) r.push_back(parse_cell(f));
        t.rows.push_back(std::move(r));
    }
    return t;
}

// Numeric cells compare by value so 1 and 1.0 agree; NaN matches NaN.
inline bool same_cell(const Cell& a, const Cell& b) {
    auto num = [](const Cell& c, double& out) {
        if (auto d = std::get_if<double>(&c)) return out = *d, true;
        if (auto i = std::get_if<long long>(&c)) return out = static_cast<double>(*i), true;
        return false;
    };
    double x, y;
    if (num(a, x) && num(b, y)) return (std::isnan(x) && std::isnan(y)) || x == y;
    return a == b;
}

inline bool same_table(const Table& a, const Table& b) {
    if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].size() != b.rows[i].size()) return false;
        for (std::size_t j = 0; j < a.rows[i].size(); ++j)
            if (!same_cell(a.rows[i][j], b.rows[i][j])) return false;
    }
    return true;
}

} // namespace cqedwb::cli
