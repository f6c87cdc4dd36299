#pragma once

// JSON/CSV ingestion of specs, distributions, metric spaces and payoffs, and report emission.
// Numbers in CSV use 17 significant digits; non-finite values are written as inf, -inf, nan.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "concentration.hpp"
#include "convex_core.hpp"
#include "measures.hpp"
#include "options.hpp"
#include "profiles.hpp"
#include "risk.hpp"
#include "transport.hpp"

namespace liqrisk {

using Json = nlohmann::ordered_json;

/// A data error pinned to a source location: "file:line: message" (line 0 when unknown).
struct ParseError : InvalidInput {
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : InvalidInput(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          file_(file), line_(line) {}
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// JSON has no infinities: finite values stay numbers, the rest become "inf", "-inf" or "nan".
inline Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

inline Json numbers_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

inline double parse_number(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        throw InvalidInput("not a number: '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw InvalidInput("not a number: '" + s + "'");
    return v;
}

namespace detail {

inline double json_number(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            return parse_number(j.get<std::string>());
        } catch (const InvalidInput&) {
        }
    }
    throw InvalidInput(where + ": expected a number");
}

inline std::vector<double> json_numbers(const Json& j, const std::string& where) {
    if (!j.is_array()) throw InvalidInput(where + ": expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(json_number(j[i], where + "/" + std::to_string(i)));
    return v;
}

inline Matrix json_matrix(const Json& j, const std::string& where) {
    if (!j.is_array()) throw InvalidInput(where + ": expected an array of rows");
    Matrix m;
    for (std::size_t i = 0; i < j.size(); ++i) m.push_back(json_numbers(j[i], where + "/" + std::to_string(i)));
    return m;
}

inline double param(const Json& j, const char* key, double fallback) {
    if (!j.is_object() || !j.contains("params") || !j["params"].contains(key)) return fallback;
    return json_number(j["params"][key], std::string("/params/") + key);
}

inline std::vector<Node> json_nodes(const Json& j) {
    if (!j.contains("grid")) throw InvalidInput("tabulated function needs a grid of [x, f(x)] pairs");
    std::vector<Node> nodes;
    const auto& g = j["grid"];
    if (!g.is_array()) throw InvalidInput("/grid: expected an array of [x, f(x)] pairs");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto pair = json_numbers(g[i], "/grid/" + std::to_string(i));
        if (pair.size() != 2) throw InvalidInput("/grid/" + std::to_string(i) + ": expected [x, f(x)]");
        nodes.emplace_back(pair[0], pair[1]);
    }
    return nodes;
}

inline Json nodes_json(const std::vector<Node>& nodes) {
    Json g = Json::array();
    for (const auto& [x, f] : nodes) g.push_back(Json::array({number_json(x), number_json(f)}));
    return g;
}

inline std::string kind_of(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw InvalidInput("function spec needs a string 'kind'");
    return j["kind"].get<std::string>();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// ---- function specs: {kind, params, grid?} ----

inline Json to_json(const ShapeFunction& g) {
    Json j;
    j["kind"] = g.describe();
    if (g.kind() == ShapeFunction::Kind::tabulated) {
        j["grid"] = detail::nodes_json(g.nodes());
        return j;
    }
    Json p;
    p["a"] = g.coefficient();
    if (g.kind() == ShapeFunction::Kind::power) p["q"] = g.exponent();
    p["shift"] = g.shift();
    j["params"] = p;
    return j;
}

inline ShapeFunction shape_from_json(const Json& j) {
    const auto k = detail::kind_of(j);
    const double a = detail::param(j, "a", 1.0), shift = detail::param(j, "shift", 0.0);
    if (k == "quadratic") return ShapeFunction::quadratic(a, shift);
    if (k == "linear") return ShapeFunction::linear(a, shift);
    if (k == "power") return ShapeFunction::power(detail::param(j, "q", 2.0), a, shift);
    if (k == "tabulated") return ShapeFunction::tabulated(detail::json_nodes(j));
    throw InvalidInput("unknown shape kind '" + k + "'");
}

inline Json to_json(const LossFunction& l) {
    Json j;
    j["kind"] = l.describe();
    if (l.kind() == LossFunction::Kind::power_hinge) j["params"] = {{"p", l.exponent()}};
    if (l.kind() == LossFunction::Kind::tabulated) j["grid"] = detail::nodes_json(l.nodes());
    return j;
}

inline LossFunction loss_from_json(const Json& j) {
    const auto k = detail::kind_of(j);
    if (k == "exponential") return LossFunction::exponential();
    if (k == "hinge") return LossFunction::hinge();
    if (k == "power-hinge") return LossFunction::power_hinge(detail::param(j, "p", 2.0));
    if (k == "tabulated") return LossFunction::tabulated(detail::json_nodes(j));
    throw InvalidInput("unknown loss kind '" + k + "'");
}

inline Json to_json(const OceFunction& f) {
    Json j;
    j["kind"] = f.describe();
    if (f.kind() == OceFunction::Kind::power || f.kind() == OceFunction::Kind::renyi)
        j["params"] = {{"p", f.exponent()}};
    if (f.kind() == OceFunction::Kind::tabulated) j["grid"] = detail::nodes_json(f.nodes());
    return j;
}

inline OceFunction oce_from_json(const Json& j) {
    const auto k = detail::kind_of(j);
    if (k == "exponential") return OceFunction::exponential();
    if (k == "power") return OceFunction::power(detail::param(j, "p", 2.0));
    if (k == "renyi") return OceFunction::renyi(detail::param(j, "p", 2.0));
    if (k == "tabulated") return OceFunction::tabulated(detail::json_nodes(j));
    throw InvalidInput("unknown oce kind '" + k + "'");
}

/// {kind, params: {loss | phi}, tolerances: {root, bracket_expansion_limit}}
inline Json to_json(const RiskMeasureSpec& s) {
    Json j;
    switch (s.kind) {
        case RiskMeasureSpec::Kind::entropic: j["kind"] = "entropic"; j["params"] = Json::object(); break;
        case RiskMeasureSpec::Kind::shortfall: j["kind"] = "shortfall"; j["params"] = {{"loss", to_json(*s.loss)}}; break;
        case RiskMeasureSpec::Kind::oce: j["kind"] = "oce"; j["params"] = {{"phi", to_json(*s.phi)}}; break;
    }
    j["tolerances"] = {{"root", s.root_tolerance}, {"bracket_expansion_limit", s.bracket_expansion_limit}};
    return j;
}

inline RiskMeasureSpec risk_spec_from_json(const Json& j) {
    const auto k = detail::kind_of(j);
    RiskMeasureSpec s;
    if (k == "entropic") {
        s = RiskMeasureSpec::entropic();
    } else if (k == "shortfall") {
        if (!j.contains("params") || !j["params"].contains("loss")) throw InvalidInput("shortfall spec needs params.loss");
        s = RiskMeasureSpec::shortfall(loss_from_json(j["params"]["loss"]));
    } else if (k == "oce") {
        if (!j.contains("params") || !j["params"].contains("phi")) throw InvalidInput("oce spec needs params.phi");
        s = RiskMeasureSpec::oce(oce_from_json(j["params"]["phi"]));
    } else {
        throw InvalidInput("unknown risk kind '" + k + "'");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (t.contains("root")) s.root_tolerance = detail::json_number(t["root"], "/tolerances/root");
        if (t.contains("bracket_expansion_limit")) s.bracket_expansion_limit = t["bracket_expansion_limit"].get<int>();
        if (!(s.root_tolerance >= 0)) throw InvalidSpec("root tolerance must be nonnegative");
    }
    return s;
}

// ---- command-line shorthands: "kind[:p1[:p2]]" or inline JSON ----

inline ShapeFunction parse_shape(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return shape_from_json(Json::parse(arg));
    const auto parts = detail::split(arg, ':');
    auto num = [&](std::size_t i, double fallback) { return parts.size() > i ? parse_number(parts[i]) : fallback; };
    if (parts[0] == "quadratic") return ShapeFunction::quadratic(num(1, 1.0), num(2, 0.0));
    if (parts[0] == "linear") return ShapeFunction::linear(num(1, 1.0), num(2, 0.0));
    if (parts[0] == "power") return ShapeFunction::power(num(1, 2.0), num(2, 1.0), num(3, 0.0));
    throw InvalidInput("unknown shape '" + arg + "' (quadratic[:a[:shift]], linear[:a[:shift]], power[:q[:a[:shift]]])");
}

inline LossFunction parse_loss(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return loss_from_json(Json::parse(arg));
    const auto parts = detail::split(arg, ':');
    if (parts[0] == "exponential" || parts[0] == "exp") return LossFunction::exponential();
    if (parts[0] == "hinge") return LossFunction::hinge();
    if (parts[0] == "power-hinge") return LossFunction::power_hinge(parts.size() > 1 ? parse_number(parts[1]) : 2.0);
    throw InvalidInput("unknown loss '" + arg + "' (exponential, hinge, power-hinge[:p])");
}

inline OceFunction parse_oce(const std::string& arg) {
    const auto parts = detail::split(arg, ':');
    const double p = parts.size() > 1 ? parse_number(parts[1]) : 2.0;
    if (parts[0] == "exponential" || parts[0] == "exp") return OceFunction::exponential();
    if (parts[0] == "power") return OceFunction::power(p);
    if (parts[0] == "renyi") return OceFunction::renyi(p);
    throw InvalidInput("unknown oce function '" + arg + "' (exponential, power[:p], renyi[:p])");
}

/// "entropic", "shortfall:<loss>", "oce:<phi>" or inline JSON.
inline RiskMeasureSpec parse_risk(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return risk_spec_from_json(Json::parse(arg));
    const auto colon = arg.find(':');
    const std::string head = arg.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : arg.substr(colon + 1);
    if (head == "entropic") return RiskMeasureSpec::entropic();
    if (head == "shortfall") return RiskMeasureSpec::shortfall(parse_loss(rest.empty() ? "exponential" : rest));
    if (head == "oce") return RiskMeasureSpec::oce(parse_oce(rest.empty() ? "exponential" : rest));
    throw InvalidInput("unknown risk measure '" + arg + "' (entropic, shortfall:<loss>, oce:<phi>)");
}

/// Lambda grids: "default", "battery", "geom:lo:hi:per_decade", "lin:lo:hi:n" or "v0,v1,...".
/// Geometric grids get 0 prepended since profiles start at λ = 0.
inline std::vector<double> parse_grid(const std::string& arg) {
    if (arg.empty() || arg == "default") return default_lambda_grid();
    if (arg == "battery") return detail::battery_grid();
    const auto parts = detail::split(arg, ':');
    std::vector<double> g;
    if (parts[0] == "geom") {
        if (parts.size() != 4) throw InvalidInput("grid 'geom' needs geom:lo:hi:per_decade");
        g.push_back(0.0);
        const auto geo = geometric_grid(parse_number(parts[1]), parse_number(parts[2]),
                                        static_cast<int>(parse_number(parts[3])));
        g.insert(g.end(), geo.begin(), geo.end());
    } else if (parts[0] == "lin") {
        if (parts.size() != 4) throw InvalidInput("grid 'lin' needs lin:lo:hi:n");
        const double lo = parse_number(parts[1]), hi = parse_number(parts[2]);
        const int n = static_cast<int>(parse_number(parts[3]));
        if (n < 2 || !(hi > lo)) throw InvalidInput("grid 'lin' needs n >= 2 and hi > lo");
        for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
        g.back() = hi;
    } else {
        for (const auto& s : detail::split(arg, ',')) g.push_back(parse_number(detail::trim(s)));
    }
    detail::validate_grid(g);
    return g;
}

// ---- files ----

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses JSON, reporting syntax errors with their line.
inline Json parse_json_text(const std::string& text, const std::string& file) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ParseError(file, line, std::string("malformed JSON: ") + e.what());
    }
}

inline Json load_json(const std::string& path) { return parse_json_text(read_text(path), path); }

/// Numeric CSV rows with their 1-based source lines. Blank lines and '#' comments are skipped;
/// a first row that does not parse as numbers is taken as a header.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;
};

inline CsvData parse_csv_text(const std::string& text, const std::string& file) {
    CsvData out;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto s = detail::trim(raw);
        if (s.empty() || s[0] == '#') continue;
        const auto cells = detail::split(s, ',');
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            try {
                row.push_back(parse_number(detail::trim(c)));
            } catch (const InvalidInput&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (out.rows.empty() && out.header.empty()) {
                for (const auto& c : cells) out.header.push_back(detail::trim(c));
                continue;
            }
            throw ParseError(file, line, "non-numeric cell in '" + s + "'");
        }
        if (!out.rows.empty() && row.size() != out.rows.front().size())
            throw ParseError(file, line, "expected " + std::to_string(out.rows.front().size()) + " columns, got " +
                                             std::to_string(row.size()));
        out.rows.push_back(std::move(row));
        out.lines.push_back(line);
    }
    if (out.rows.empty()) throw ParseError(file, line, "no data rows");
    return out;
}

namespace detail {

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Weights must be positive and sum to 1 within 1e-9; they are then renormalized exactly.
inline std::vector<double> checked_weights(std::vector<double> w, const std::string& file,
                                           const std::vector<std::size_t>& lines) {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0) || !std::isfinite(w[i]))
            throw ParseError(file, lines.empty() ? 0 : lines[i],
                             "atom " + std::to_string(i) + ": weight must be finite and strictly positive");
        s += w[i];
    }
    if (std::abs(s - 1) > 1e-9) throw ParseError(file, 0, "weights sum to " + format_number(s) + ", expected 1");
    for (auto& v : w) v /= s;
    return w;
}

}  // namespace detail

// ---- distributions: {atoms: [[value..., weight]], label} or CSV rows "value...,weight" ----

inline Json to_json(const DiscreteDistribution& p) {
    Json atoms = Json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        Json row = numbers_json(p.points()[i]);
        row.push_back(p.weights()[i]);
        atoms.push_back(row);
    }
    Json j;
    j["atoms"] = atoms;
    j["label"] = p.label();
    return j;
}

inline DiscreteDistribution distribution_from_json(const Json& j, const std::string& file = "<json>") {
    if (!j.is_object() || !j.contains("atoms")) throw ParseError(file, 0, "distribution needs an 'atoms' array");
    const auto& a = j["atoms"];
    if (!a.is_array() || a.empty()) throw ParseError(file, 0, "/atoms: expected a nonempty array");
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string where = "/atoms/" + std::to_string(i);
        std::vector<double> row;
        try {
            row = detail::json_numbers(a[i], where);
        } catch (const InvalidInput& e) {
            throw ParseError(file, 0, e.what());
        }
        if (row.size() < 2) throw ParseError(file, 0, where + ": expected [value..., weight]");
        w.push_back(row.back());
        row.pop_back();
        pts.push_back(std::move(row));
    }
    const std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>() : "";
    try {
        return DiscreteDistribution(std::move(pts), detail::checked_weights(std::move(w), file, {}), label);
    } catch (const ParseError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ParseError(file, 0, e.what());
    }
}

/// One atom per row: coordinates then the weight. A single column means equally weighted values.
inline DiscreteDistribution distribution_from_csv(const std::string& text, const std::string& file = "<csv>") {
    const auto d = parse_csv_text(text, file);
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    const std::size_t cols = d.rows.front().size();
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        auto row = d.rows[i];
        for (double v : row)
            if (!std::isfinite(v)) throw ParseError(file, d.lines[i], "atom values must be finite");
        if (cols == 1) {
            w.push_back(1.0 / static_cast<double>(d.rows.size()));
        } else {
            w.push_back(row.back());
            row.pop_back();
        }
        pts.push_back(std::move(row));
    }
    return DiscreteDistribution(std::move(pts), detail::checked_weights(std::move(w), file, d.lines), file);
}

inline DiscreteDistribution load_distribution(const std::string& path) {
    const auto text = read_text(path);
    if (detail::ends_with(path, ".csv")) return distribution_from_csv(text, path);
    return distribution_from_json(parse_json_text(text, path), path);
}

/// A family file: {"family": [distribution...]}, a bare array of distributions, or one distribution.
inline std::vector<DiscreteDistribution> family_from_json(const Json& j, const std::string& file = "<json>") {
    const Json* arr = &j;
    if (j.is_object() && j.contains("family")) arr = &j["family"];
    if (!arr->is_array()) return {distribution_from_json(j, file)};
    std::vector<DiscreteDistribution> out;
    for (const auto& m : *arr) out.push_back(distribution_from_json(m, file));
    if (out.empty()) throw ParseError(file, 0, "empty family");
    return out;
}

inline std::vector<DiscreteDistribution> load_family(const std::string& path) {
    if (detail::ends_with(path, ".csv")) return {load_distribution(path)};
    return family_from_json(load_json(path), path);
}

// ---- tilts: {densities: [[z...]]} or {probabilities: [[q...]]}, aligned with the atoms ----

inline Json to_json(const TiltedMeasure& q) { return Json{{"density", numbers_json(q.density())}}; }

inline std::vector<TiltedMeasure> tilts_from_json(const Json& j, const std::vector<double>& base_weights,
                                                  const std::string& file = "<json>") {
    std::vector<TiltedMeasure> out;
    const bool probs = j.contains("probabilities");
    const char* key = probs ? "probabilities" : "densities";
    if (!j.contains(key)) throw ParseError(file, 0, "tilt file needs 'densities' or 'probabilities'");
    Matrix rows;
    try {
        rows = detail::json_matrix(j[key], std::string("/") + key);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != base_weights.size())
                throw InvalidInput(std::string("/") + key + "/" + std::to_string(i) + ": length differs from atom count");
            out.push_back(probs ? TiltedMeasure::from_probabilities(base_weights, rows[i])
                                : TiltedMeasure(base_weights, rows[i]));
        }
    } catch (const InvalidInput& e) {
        throw ParseError(file, 0, e.what());
    }
    return out;
}

// ---- metric spaces and costs: {labels?, distances} | {points} | {cost}; CSV square matrices ----

inline Json to_json(const FiniteMetricSpace& s) {
    Json j;
    j["labels"] = s.labels();
    Json d = Json::array();
    for (const auto& row : s.matrix()) d.push_back(numbers_json(row));
    j["distances"] = d;
    return j;
}

inline FiniteMetricSpace metric_from_json(const Json& j, const std::string& file = "<json>") {
    try {
        if (j.contains("points")) return FiniteMetricSpace::euclidean(detail::json_matrix(j["points"], "/points"));
        if (!j.contains("distances")) throw InvalidInput("metric space needs 'distances' or 'points'");
        const auto d = detail::json_matrix(j["distances"], "/distances");
        std::vector<std::string> labels;
        if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
        return FiniteMetricSpace(std::move(labels), d);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(file, 0, e.what());
    }
}

inline Matrix matrix_from_csv(const std::string& text, const std::string& file = "<csv>") { return parse_csv_text(text, file).rows; }

inline FiniteMetricSpace load_metric(const std::string& path) {
    const auto text = read_text(path);
    if (!detail::ends_with(path, ".csv")) return metric_from_json(parse_json_text(text, path), path);
    const auto d = parse_csv_text(text, path);
    try {
        return FiniteMetricSpace(d.header, d.rows);
    } catch (const std::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

// ---- payoffs: {kind: call|put|basket|min-of-affine|max-of-affine|distance|random-lipschitz, ...} ----

inline Json to_json(const OptionPayoff& f) {
    Json j;
    switch (f.kind()) {
        case OptionPayoff::Kind::call:
        case OptionPayoff::Kind::put:
            j["kind"] = f.kind() == OptionPayoff::Kind::call ? "call" : "put";
            j["asset"] = f.asset();
            j["strike"] = f.strike();
            break;
        case OptionPayoff::Kind::basket:
            j["kind"] = "basket";
            j["weights"] = numbers_json(f.pieces().front().a);
            break;
        case OptionPayoff::Kind::distance:
            j["kind"] = "distance";
            j["point"] = numbers_json(f.pieces().front().a);
            break;
        case OptionPayoff::Kind::affine_min:
        case OptionPayoff::Kind::affine_max: {
            j["kind"] = f.kind() == OptionPayoff::Kind::affine_min ? "min-of-affine" : "max-of-affine";
            Json ps = Json::array();
            for (const auto& p : f.pieces()) ps.push_back({{"a", numbers_json(p.a)}, {"b", p.b}});
            j["pieces"] = ps;
            j["floor"] = f.floored();
            break;
        }
    }
    return j;
}

inline OptionPayoff payoff_from_json(const Json& j) {
    const auto k = detail::kind_of(j);
    auto num = [&](const char* key) {
        if (!j.contains(key)) throw InvalidInput("payoff '" + k + "' needs '" + key + "'");
        return detail::json_number(j[key], std::string("/") + key);
    };
    if (k == "call") return OptionPayoff::call(static_cast<std::size_t>(num("asset")), num("strike"));
    if (k == "put") return OptionPayoff::put(static_cast<std::size_t>(num("asset")), num("strike"));
    if (k == "basket") return OptionPayoff::basket(detail::json_numbers(j.at("weights"), "/weights"));
    if (k == "distance") return OptionPayoff::distance(detail::json_numbers(j.at("point"), "/point"));
    if (k == "random-lipschitz")
        return random_lipschitz(static_cast<std::size_t>(num("n")), static_cast<std::size_t>(num("pieces")),
                                static_cast<std::uint64_t>(num("seed")));
    if (k == "min-of-affine" || k == "max-of-affine") {
        std::vector<OptionPayoff::Piece> ps;
        for (const auto& p : j.at("pieces")) ps.push_back({detail::json_numbers(p.at("a"), "/a"), detail::json_number(p.at("b"), "/b")});
        const bool floor = j.contains("floor") && j["floor"].get<bool>();
        return k == "min-of-affine" ? OptionPayoff::affine_min(std::move(ps), floor)
                                    : OptionPayoff::affine_max(std::move(ps), floor);
    }
    throw InvalidInput("unknown payoff kind '" + k + "'");
}

// ---- reports ----

inline Json to_json(const RiskProfile& p) {
    Json j;
    j["lambda"] = numbers_json(p.lambda_grid);
    j["value"] = numbers_json(p.values);
    j["centered"] = p.centered;
    j["convex"] = p.convex;
    j["normalized"] = p.normalized;
    j["mean"] = number_json(p.mean);
    return j;
}

inline Json to_json(const ConditionResult& c) {
    Json j;
    j["id"] = c.id;
    j["verdict"] = to_string(c.verdict);
    j["note"] = c.note;
    j["x"] = numbers_json(c.x);
    j["values"] = numbers_json(c.values);
    return j;
}

inline Json to_json(const MembershipReport& m) {
    Json j;
    j["is_member"] = m.is_member;
    j["verdict"] = to_string(m.verdict);
    j["branch"] = m.branch;
    j["witness_constant"] = number_json(m.witness_constant);
    Json cs = Json::array();
    for (const auto& c : m.conditions) cs.push_back(to_json(c));
    j["conditions"] = cs;
    return j;
}

inline Json to_json(const BatteryCondition& c) {
    return Json{{"id", c.id}, {"found", c.found}, {"c", number_json(c.c)}, {"kappa", number_json(c.kappa())}};
}

inline Json to_json(const BatteryArrow& a) {
    return Json{{"check", a.name}, {"asserted", a.asserted}, {"holds", a.holds}, {"note", a.note}};
}

namespace detail {
template <class T>
Json array_json(const std::vector<T>& v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(to_json(x));
    return a;
}
}  // namespace detail

inline Json to_json(const BatteryReport& r) {
    Json j;
    j["members"] = r.members;
    j["conditions"] = detail::array_json(r.conditions);
    j["arrows"] = detail::array_json(r.arrows);
    j["markov_violations"] = r.markov_violations;
    j["max_moment_log"] = number_json(r.max_moment_log);
    j["lgamma"] = to_json(r.lgamma);
    j["class_h"] = to_json(r.class_h);
    j["violation"] = r.violation();
    return j;
}

inline Json to_json(const OptionBatteryReport& r) {
    Json j;
    j["strike"] = r.strike;
    j["conditions"] = detail::array_json(r.conditions);
    j["arrows"] = detail::array_json(r.arrows);
    j["premise"] = r.premise;
    j["moment_log"] = number_json(r.moment_log);
    Json ps = Json::array();
    for (std::size_t i = 0; i < r.payoff_names.size(); ++i)
        ps.push_back({{"payoff", r.payoff_names[i]}, {"witness_c", number_json(r.payoff_witness[i])}});
    j["payoffs"] = ps;
    j["lambda"] = numbers_json(r.lambda_grid);
    j["call_put_envelope"] = numbers_json(r.call_put_envelope);
    j["lgamma"] = to_json(r.lgamma);
    j["class_h"] = to_json(r.class_h);
    j["violation"] = r.violation();
    return j;
}

/// A table of preformatted cells, written as RFC 4180-style CSV without quoting (cells never contain commas).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    void add_numbers(const std::vector<double>& row) {
        std::vector<std::string> r;
        for (double v : row) r.push_back(format_number(v));
        rows.push_back(std::move(r));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

/// lambda, value, gamma_bound = γ(cλ), gap = bound − value.
inline CsvTable profile_csv(const RiskProfile& p, const ShapeFunction* g = nullptr, double c = 1) {
    CsvTable t{{"lambda", "value", "gamma_bound", "gap"}, {}};
    for (std::size_t i = 0; i < p.lambda_grid.size(); ++i) {
        const double b = g ? (*g)(c * p.lambda_grid[i]) : kInf;
        t.add_numbers({p.lambda_grid[i], p.values[i], b, b - p.values[i]});
    }
    return t;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, 0, "cannot open for writing");
    out << text;
    if (!out) throw ParseError(path, 0, "write failed");
}

}  // namespace liqrisk
