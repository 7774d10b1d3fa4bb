// SPDX-License-Identifier: Apache-2.0
#pragma once

// CPLEX LP-format export and import for MilpModel, plus the solution-file
// format spoken by external solver adapters. The writer emits full-precision
// coefficients (%.17g) so a write/parse round trip reproduces every double
// bit-exactly.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgsched/milp.hpp"

namespace mgsched {

namespace lp_detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void append_term(std::string& line, std::ostream& os, double coeff,
                        const std::string& name, bool first) {
    std::string term;
    if (first) {
        term = (coeff < 0 ? "- " : "") + fmt(std::abs(coeff)) + " " + name;
    } else {
        term = (coeff < 0 ? "- " : "+ ") + fmt(std::abs(coeff)) + " " + name;
    }
    if (line.size() + term.size() > 200) {
        os << line << "\n";
        line = "   ";
    }
    line += " " + term;
}

}  // namespace lp_detail

inline void write_lp(const MilpModel& model, std::ostream& os) {
    using lp_detail::fmt;
    os << "\\ LP export\n";
    os << "Minimize\n";
    {
        std::string line = " obj:";
        bool first = true;
        for (int j = 0; j < model.n_cols(); ++j) {
            const auto& v = model.variables[j];
            if (v.objective == 0.0) continue;
            lp_detail::append_term(line, os, v.objective, v.name, first);
            first = false;
        }
        if (first) line += " 0 " + (model.n_cols() ? model.variables[0].name : std::string("x0"));
        os << line << "\n";
    }
    os << "Subject To\n";
    for (const auto& row : model.constraints) {
        std::string line = " " + row.name + ":";
        bool first = true;
        for (const auto& e : row.entries) {
            if (e.coeff == 0.0) continue;
            lp_detail::append_term(line, os, e.coeff, model.variables[e.column].name, first);
            first = false;
        }
        if (first) line += " 0 " + (model.n_cols() ? model.variables[0].name : std::string("x0"));
        const char* rel = row.sense == RowSense::LessEqual  ? "<="
                          : row.sense == RowSense::Equal    ? "="
                                                            : ">=";
        os << line << " " << rel << " " << fmt(row.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : model.variables) {
        // LP default is [0, +inf); emit anything else explicitly.
        if (v.lower == 0.0 && v.upper == kInf) continue;
        if (v.lower == -kInf && v.upper == kInf) {
            os << " " << v.name << " free\n";
        } else if (v.upper == kInf) {
            os << " " << v.name << " >= " << fmt(v.lower) << "\n";
        } else if (v.lower == -kInf) {
            os << " " << v.name << " <= " << fmt(v.upper) << "\n";
        } else {
            os << " " << fmt(v.lower) << " <= " << v.name << " <= " << fmt(v.upper) << "\n";
        }
    }
    bool any_bin = false;
    for (const auto& v : model.variables)
        if (v.kind == VarKind::Binary) any_bin = true;
    if (any_bin) {
        os << "Binaries\n";
        std::string line;
        for (const auto& v : model.variables) {
            if (v.kind != VarKind::Binary) continue;
            if (line.size() + v.name.size() > 200) {
                os << line << "\n";
                line.clear();
            }
            line += " " + v.name;
        }
        if (!line.empty()) os << line << "\n";
    }
    os << "End\n";
}

inline void write_lp_file(const MilpModel& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ModelError("cannot open LP file for writing: " + path);
    write_lp(model, os);
}

// ---------------------------------------------------------------------------
// Parser. Accepts the standard LP subset the writer emits: Minimize/Maximize,
// Subject To, Bounds, Binaries/Binary/Bin, General(s), End; inline comments
// introduced by '\'.

struct LpParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace lp_detail {

struct Token {
    std::string text;
};

inline bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' ||
           c == ']' || c == '(' || c == ')' || c == '#';
}

inline std::vector<Token> tokenize(std::istream& is) {
    std::vector<Token> out;
    std::string line;
    while (std::getline(is, line)) {
        auto cut = line.find('\\');
        if (cut != std::string::npos) line.resize(cut);
        std::size_t i = 0;
        while (i < line.size()) {
            char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '<' || c == '>' || c == '=') {
                std::string op(1, c);
                if (i + 1 < line.size() && line[i + 1] == '=') {
                    op += '=';
                    ++i;
                }
                out.push_back({op});
                ++i;
                continue;
            }
            if (c == '+' || c == '-' || c == ':') {
                out.push_back({std::string(1, c)});
                ++i;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t j = i;
                while (j < line.size() &&
                       (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.' ||
                        line[j] == 'e' || line[j] == 'E' ||
                        ((line[j] == '+' || line[j] == '-') && j > i &&
                         (line[j - 1] == 'e' || line[j - 1] == 'E'))))
                    ++j;
                out.push_back({line.substr(i, j - i)});
                i = j;
                continue;
            }
            if (is_name_start(c)) {
                std::size_t j = i;
                while (j < line.size() && is_name_char(line[j])) ++j;
                out.push_back({line.substr(i, j - i)});
                i = j;
                continue;
            }
            throw LpParseError("unexpected character '" + std::string(1, c) + "' in LP input");
        }
    }
    return out;
}

inline bool ieq(const std::string& a, const char* b) {
    if (a.size() != std::string(b).size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

inline bool is_number(const std::string& s) {
    if (s.empty()) return false;
    char c = s[0];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
}

}  // namespace lp_detail

// Parses an LP document into a MilpModel. Variables keep their textual names;
// column order is order of first appearance.
inline MilpModel parse_lp(std::istream& is) {
    using namespace lp_detail;
    std::vector<Token> toks = tokenize(is);
    std::size_t pos = 0;
    auto peek = [&]() -> const std::string& {
        static const std::string empty;
        return pos < toks.size() ? toks[pos].text : empty;
    };
    auto next = [&]() -> std::string {
        if (pos >= toks.size()) throw LpParseError("unexpected end of LP input");
        return toks[pos++].text;
    };

    MilpModel model;
    std::unordered_map<std::string, int> col_of;
    auto column = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it != col_of.end()) return it->second;
        int j = model.add_variable(name, VarKind::Continuous, 0.0, kInf, 0.0);
        col_of.emplace(name, j);
        return j;
    };

    auto section_starts = [&](const std::string& t) {
        return ieq(t, "minimize") || ieq(t, "maximize") || ieq(t, "min") || ieq(t, "max") ||
               ieq(t, "subject") || ieq(t, "st") || ieq(t, "s.t.") || ieq(t, "bounds") ||
               ieq(t, "binaries") || ieq(t, "binary") || ieq(t, "bin") || ieq(t, "general") ||
               ieq(t, "generals") || ieq(t, "end");
    };

    // Reads a linear expression (sum of optionally-signed, optionally-scaled
    // names) until a relational operator or section keyword.
    auto parse_expr = [&](std::vector<RowEntry>& entries, double& constant) {
        double sign = 1.0;
        bool pending_sign = false;
        while (pos < toks.size()) {
            const std::string& t = peek();
            if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") break;
            if (!pending_sign && section_starts(t)) break;
            if (t == "+") {
                sign = 1.0;
                pending_sign = true;
                ++pos;
                continue;
            }
            if (t == "-") {
                sign = (pending_sign ? -sign : -1.0);
                pending_sign = true;
                ++pos;
                continue;
            }
            if (is_number(t)) {
                double value = sign * std::stod(next());
                if (pos < toks.size() && !section_starts(peek()) && !is_number(peek()) &&
                    peek() != "+" && peek() != "-" && peek() != "<=" && peek() != ">=" &&
                    peek() != "=" && peek() != "<" && peek() != ">") {
                    entries.push_back({column(next()), value});
                } else {
                    constant += value;
                }
                sign = 1.0;
                pending_sign = false;
                continue;
            }
            entries.push_back({column(next()), sign});
            sign = 1.0;
            pending_sign = false;
        }
    };

    double obj_sign = 1.0;
    while (pos < toks.size()) {
        std::string t = next();
        if (ieq(t, "minimize") || ieq(t, "min")) {
            obj_sign = 1.0;
        } else if (ieq(t, "maximize") || ieq(t, "max")) {
            obj_sign = -1.0;
        } else {
            throw LpParseError("LP input must start with Minimize or Maximize");
        }
        // optional label
        if (pos + 1 < toks.size() && toks[pos + 1].text == ":") pos += 2;
        std::vector<RowEntry> entries;
        double constant = 0.0;
        parse_expr(entries, constant);
        for (const auto& e : entries) model.variables[e.column].objective += obj_sign * e.coeff;
        break;
    }

    while (pos < toks.size()) {
        std::string t = next();
        if (ieq(t, "end")) break;
        if (ieq(t, "subject")) {
            if (pos < toks.size() && ieq(peek(), "to")) ++pos;
            int unnamed = 0;
            while (pos < toks.size() && !section_starts(peek())) {
                std::string name;
                if (pos + 1 < toks.size() && toks[pos + 1].text == ":") {
                    name = next();
                    ++pos;  // ':'
                } else {
                    name = "c" + std::to_string(unnamed++);
                }
                std::vector<RowEntry> entries;
                double constant = 0.0;
                parse_expr(entries, constant);
                std::string rel = next();
                RowSense sense = rel == "<=" || rel == "<"   ? RowSense::LessEqual
                                 : rel == ">=" || rel == ">" ? RowSense::GreaterEqual
                                                             : RowSense::Equal;
                // LP format allows only a signed constant on the rhs.
                double rhs_sign = 1.0;
                while (peek() == "-" || peek() == "+") {
                    if (next() == "-") rhs_sign = -rhs_sign;
                }
                std::string rhs_tok = next();
                if (!is_number(rhs_tok))
                    throw LpParseError("constraint " + name + " rhs must be a constant");
                model.add_constraint(name, std::move(entries), sense,
                                     rhs_sign * std::stod(rhs_tok) - constant);
            }
            continue;
        }
        if (ieq(t, "bounds")) {
            while (pos < toks.size() && !section_starts(peek())) {
                // forms: `a <= x <= b`, `x <= b`, `x >= a`, `x = a`, `x free`
                if (is_number(peek()) || peek() == "-" || peek() == "+") {
                    std::vector<RowEntry> dummy;
                    double lo = 0.0;
                    {
                        double sign = 1.0;
                        while (peek() == "-" || peek() == "+") {
                            if (next() == "-") sign = -sign;
                        }
                        std::string n = next();
                        lo = ieq(n, "inf") || ieq(n, "infinity") ? kInf : std::stod(n);
                        lo *= sign;
                    }
                    if (next() != "<=" ) throw LpParseError("malformed bound line");
                    int j = column(next());
                    model.variables[j].lower = lo;
                    if (pos < toks.size() && peek() == "<=") {
                        ++pos;
                        double sign = 1.0;
                        while (peek() == "-" || peek() == "+") {
                            if (next() == "-") sign = -sign;
                        }
                        std::string n = next();
                        double up = ieq(n, "inf") || ieq(n, "infinity") ? kInf : std::stod(n);
                        model.variables[j].upper = sign * up;
                    }
                } else {
                    int j = column(next());
                    std::string op = next();
                    if (ieq(op, "free")) {
                        model.variables[j].lower = -kInf;
                        model.variables[j].upper = kInf;
                        continue;
                    }
                    double sign = 1.0;
                    while (peek() == "-" || peek() == "+") {
                        if (next() == "-") sign = -sign;
                    }
                    std::string n = next();
                    double value = ieq(n, "inf") || ieq(n, "infinity") ? kInf : std::stod(n);
                    value *= sign;
                    if (op == "<=" || op == "<") model.variables[j].upper = value;
                    else if (op == ">=" || op == ">") model.variables[j].lower = value;
                    else if (op == "=") model.variables[j].lower = model.variables[j].upper = value;
                    else throw LpParseError("malformed bound operator " + op);
                }
            }
            continue;
        }
        if (ieq(t, "binaries") || ieq(t, "binary") || ieq(t, "bin")) {
            while (pos < toks.size() && !section_starts(peek())) {
                int j = column(next());
                auto& var = model.variables[j];
                var.kind = VarKind::Binary;
                // Unbounded-above parser default; binaries live in [0,1].
                if (var.lower < 0.0) var.lower = 0.0;
                if (var.upper > 1.0) var.upper = 1.0;
            }
            continue;
        }
        if (ieq(t, "general") || ieq(t, "generals")) {
            while (pos < toks.size() && !section_starts(peek())) next();
            continue;
        }
        throw LpParseError("unexpected token '" + t + "' in LP input");
    }
    return model;
}

inline MilpModel parse_lp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw LpParseError("cannot open LP file: " + path);
    return parse_lp(is);
}

// ---------------------------------------------------------------------------
// Adapter solution files: a `status <word>` line, an optional
// `objective <value>` line, then `<column name> <value>` lines.

struct SolutionFile {
    std::string status;
    double objective = 0.0;
    bool has_objective = false;
    std::vector<std::pair<std::string, double>> values;
};

inline void write_solution_file(const SolutionFile& sol, std::ostream& os) {
    os << "status " << sol.status << "\n";
    if (sol.has_objective) os << "objective " << lp_detail::fmt(sol.objective) << "\n";
    for (const auto& [name, value] : sol.values)
        os << name << " " << lp_detail::fmt(value) << "\n";
}

inline SolutionFile parse_solution_file(std::istream& is) {
    SolutionFile out;
    std::string line;
    bool saw_status = false;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "status") {
            ls >> out.status;
            saw_status = true;
        } else if (key == "objective") {
            ls >> out.objective;
            out.has_objective = true;
        } else {
            double value = 0.0;
            if (!(ls >> value))
                throw LpParseError("malformed solution line: " + line);
            out.values.emplace_back(key, value);
        }
    }
    if (!saw_status) throw LpParseError("solution file missing status line");
    return out;
}

}  // namespace mgsched
