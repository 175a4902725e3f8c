#include "circlelab/io.hpp"

#include "circlelab/errors.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace circlelab::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void emit(const Json& j, int indent, int level, std::string& out) {
    const bool pretty = indent >= 0;
    auto newline = [&](int lv) {
        if (!pretty) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * lv), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            first = false;
            newline(level + 1);
            out += Json(it.key()).dump();
            out += pretty ? ": " : ":";
            emit(it.value(), indent, level + 1, out);
        }
        newline(level);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // arrays of scalars stay on one line
        bool flat = true;
        for (const auto& v : j)
            if (v.is_structured()) flat = false;
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat && pretty ? ", " : ",";
            first = false;
            if (!flat) newline(level + 1);
            emit(v, indent, level + 1, out);
        }
        if (!flat) newline(level);
        out += ']';
        return;
    }
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? format_double(x) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

bool is_int(const Json& j) { return j.is_number_integer(); }

}  // namespace

std::string dump(const Json& j, int indent) {
    std::string out;
    emit(j, indent, 0, out);
    return out;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

std::string cell(double x) { return format_double(x); }
std::string cell(long long x) { return std::to_string(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "1" : "0"; }

Json cf_to_json(const arith::ContinuedFraction& cf) {
    Json j;
    const auto& tail = cf.tail();
    Json quotients = Json::array();
    if (tail.kind != arith::TailKind::generated)
        for (const auto& q : cf.stored()) quotients.push_back(*q.exact);
    Json t;
    switch (tail.kind) {
    case arith::TailKind::finite:
        j["quotients"] = quotients;
        t["kind"] = "finite";
        break;
    case arith::TailKind::periodic:
        j["quotients"] = quotients;
        t["kind"] = "periodic";
        t["start"] = tail.start;
        t["period"] = tail.period;
        break;
    case arith::TailKind::generated:
        t["kind"] = "rule";
        t["name"] = arith::rule_name(tail.rule);
        t["a1"] = tail.a1;
        if (tail.rule == arith::Rule::exp_power || tail.rule == arith::Rule::log_q_power) t["c"] = tail.param;
        break;
    }
    j["tail"] = t;
    return j;
}

std::optional<arith::ContinuedFraction> cf_from_json(const Json& j, const std::string& path, Problems& problems) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "golden") return arith::ContinuedFraction::golden_mean();
        if (name == "silver") return arith::ContinuedFraction::silver_mean();
        problems.push_back(path + ": unknown named number '" + name + "' (golden, silver)");
        return std::nullopt;
    }
    if (!j.is_object()) {
        problems.push_back(path + ": expected an object or a named number");
        return std::nullopt;
    }
    const std::size_t before = problems.size();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "quotients" && it.key() != "tail") problems.push_back(path + "." + it.key() + ": unknown field");
    std::vector<std::uint64_t> quotients;
    if (j.contains("quotients")) {
        const Json& qs = j["quotients"];
        if (!qs.is_array()) {
            problems.push_back(path + ".quotients: expected an array");
        } else {
            for (std::size_t i = 0; i < qs.size(); ++i) {
                if (!is_int(qs[i]) || qs[i].get<long long>() < 1)
                    problems.push_back(path + ".quotients[" + std::to_string(i) + "]: expected an integer >= 1");
                else
                    quotients.push_back(qs[i].get<std::uint64_t>());
            }
        }
    }
    std::string kind = "finite";
    Json tail = Json::object();
    if (j.contains("tail")) {
        tail = j["tail"];
        if (!tail.is_object() || !tail.contains("kind") || !tail["kind"].is_string()) {
            problems.push_back(path + ".tail: expected an object with a string 'kind'");
            return std::nullopt;
        }
        kind = tail["kind"].get<std::string>();
    }
    auto int_field = [&](const char* key, long long fallback) -> long long {
        if (!tail.contains(key)) return fallback;
        if (!is_int(tail[key])) {
            problems.push_back(path + ".tail." + key + ": expected an integer");
            return fallback;
        }
        return tail[key].get<long long>();
    };
    try {
        if (kind == "finite") {
            if (quotients.empty() && problems.size() == before)
                problems.push_back(path + ".quotients: a finite fraction needs at least one quotient");
            if (problems.size() != before) return std::nullopt;
            return arith::ContinuedFraction::finite(quotients);
        }
        if (kind == "periodic") {
            const long long start = int_field("start", 1);
            const long long period = int_field("period", static_cast<long long>(quotients.size()));
            if (problems.size() != before) return std::nullopt;
            return arith::ContinuedFraction::periodic(quotients, static_cast<int>(start), static_cast<int>(period));
        }
        if (kind == "rule") {
            if (!tail.contains("name") || !tail["name"].is_string()) {
                problems.push_back(path + ".tail.name: expected a rule name");
                return std::nullopt;
            }
            const long long a1 = int_field("a1", 1);
            double c = 0.5;
            if (tail.contains("c")) {
                if (!tail["c"].is_number())
                    problems.push_back(path + ".tail.c: expected a number");
                else
                    c = tail["c"].get<double>();
            }
            if (a1 < 1) problems.push_back(path + ".tail.a1: expected an integer >= 1");
            if (problems.size() != before) return std::nullopt;
            return arith::ContinuedFraction::generated(arith::rule_from_name(tail["name"].get<std::string>()),
                                                       static_cast<std::uint64_t>(a1), c);
        }
        problems.push_back(path + ".tail.kind: unknown kind '" + kind + "' (finite, periodic, rule)");
    } catch (const Error& e) {
        problems.push_back(path + ": " + e.what());
    }
    return std::nullopt;
}

Json map_to_json(const MapSpec& spec) {
    Json j;
    if (spec.family) {
        Json fam;
        fam["kind"] = "arnold";
        if (spec.a) fam["a"] = *spec.a;
        fam["b"] = spec.b;
        j["family"] = fam;
        return j;
    }
    j["c"] = spec.map.mean_shift();
    Json modes = Json::array();
    for (int k = 1; k <= spec.map.degree(); ++k) {
        const Complex v = spec.map.mode(k);
        if (v == Complex(0.0, 0.0)) continue;
        modes.push_back(Json{{"k", k}, {"re", v.real()}, {"im", v.imag()}});
    }
    j["modes"] = modes;
    j["family"] = nullptr;
    return j;
}

std::optional<MapSpec> map_from_json(const Json& j, const std::string& path, Problems& problems) {
    if (!j.is_object()) {
        problems.push_back(path + ": expected an object");
        return std::nullopt;
    }
    const std::size_t before = problems.size();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "c" && it.key() != "modes" && it.key() != "family")
            problems.push_back(path + "." + it.key() + ": unknown field");
    MapSpec spec;
    if (j.contains("family") && !j["family"].is_null()) {
        const Json& fam = j["family"];
        const std::string fp = path + ".family";
        if (!fam.is_object()) {
            problems.push_back(fp + ": expected an object or null");
            return std::nullopt;
        }
        if (!fam.contains("kind") || fam["kind"] != "arnold") problems.push_back(fp + ".kind: only 'arnold' is supported");
        for (auto it = fam.begin(); it != fam.end(); ++it)
            if (it.key() != "kind" && it.key() != "a" && it.key() != "b")
                problems.push_back(fp + "." + it.key() + ": unknown field");
        spec.family = true;
        if (!fam.contains("b") || !fam["b"].is_number()) {
            problems.push_back(fp + ".b: expected a number");
        } else {
            spec.b = fam["b"].get<double>();
            if (!(std::abs(spec.b) < 1.0))
                problems.push_back(fp + ".b: |b| >= 1 is not a diffeomorphism (Df vanishes)");
        }
        if (fam.contains("a")) {
            if (!fam["a"].is_number())
                problems.push_back(fp + ".a: expected a number");
            else
                spec.a = fam["a"].get<double>();
        }
        if (j.contains("c") || j.contains("modes")) problems.push_back(path + ": give either a family or c/modes, not both");
        if (problems.size() != before) return std::nullopt;
        return spec;
    }
    double c = 0.0;
    if (!j.contains("c") || !j["c"].is_number())
        problems.push_back(path + ".c: expected a number");
    else
        c = j["c"].get<double>();
    std::vector<Complex> modes;
    if (j.contains("modes")) {
        const Json& ms = j["modes"];
        if (!ms.is_array()) {
            problems.push_back(path + ".modes: expected an array");
        } else {
            std::set<long long> seen;
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const std::string mp = path + ".modes[" + std::to_string(i) + "]";
                const Json& m = ms[i];
                if (!m.is_object() || !m.contains("k") || !is_int(m["k"]) || m["k"].get<long long>() < 1 ||
                    m["k"].get<long long>() > 4096) {
                    problems.push_back(mp + ".k: expected an integer in [1, 4096]");
                    continue;
                }
                const long long k = m["k"].get<long long>();
                if (!seen.insert(k).second) problems.push_back(mp + ".k: duplicate mode " + std::to_string(k));
                double re = 0.0, im = 0.0;
                if (m.contains("re")) {
                    if (!m["re"].is_number()) problems.push_back(mp + ".re: expected a number");
                    else re = m["re"].get<double>();
                }
                if (m.contains("im")) {
                    if (!m["im"].is_number()) problems.push_back(mp + ".im: expected a number");
                    else im = m["im"].get<double>();
                }
                if (static_cast<std::size_t>(k) > modes.size()) modes.resize(static_cast<std::size_t>(k));
                modes[static_cast<std::size_t>(k - 1)] = Complex(re, im);
            }
        }
    }
    if (problems.size() != before) return std::nullopt;
    spec.map = AnalyticCircleMap(c, std::move(modes));
    if (!certify_diffeomorphism(spec.map).certified)
        problems.push_back(path + ": not a diffeomorphism (Df is not certified positive)");
    if (problems.size() != before) return std::nullopt;
    return spec;
}

AnalyticCircleMap realize(const MapSpec& spec) {
    if (!spec.family) return spec.map;
    if (!spec.a) throw PreconditionViolation("family parameter a is not fixed");
    return AnalyticCircleMap::arnold(*spec.a, spec.b);
}

}  // namespace circlelab::io
