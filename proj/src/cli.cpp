#include "circlelab/cli.hpp"

#include "circlelab/errors.hpp"
#include "circlelab/rotation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace circlelab::cli {

using io::Json;
using io::Problems;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"classify", "rotnum",     "tune",      "kam",
                                                "geometry", "tongue-scan", "bootstrap", "validate"};
    return names;
}

ExperimentConfig::ExperimentConfig() {
    map.family = true;
    map.b = 0.3;
}

kernels::Exec ExperimentConfig::exec() const {
    if (workers == 1) return kernels::Exec::serial();
    return kernels::Exec{true, workers};
}

namespace {

// Reads the fields of one JSON object, recording type errors and unknown keys.
class Section {
public:
    Section(const Json& doc, std::string path, Problems& problems) : path_(std::move(path)), problems_(problems) {
        if (doc.is_null()) return;
        if (!doc.is_object()) {
            problems_.push_back(path_ + ": expected an object");
            return;
        }
        j_ = &doc;
    }
    ~Section() {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!known_.count(it.key())) problems_.push_back(at(it.key()) + ": unknown field");
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json* get(const std::string& key) {
        known_.insert(key);
        if (!j_ || !j_->contains(key)) return nullptr;
        return &(*j_)[key];
    }
    void number(const std::string& key, double& dst) {
        if (const Json* v = get(key)) {
            if (v->is_number())
                dst = v->get<double>();
            else
                problems_.push_back(at(key) + ": expected a number");
        }
    }
    template <class Int>
    void integer(const std::string& key, Int& dst) {
        if (const Json* v = get(key)) {
            if (v->is_number_integer() && (std::is_signed_v<Int> || v->get<long long>() >= 0))
                dst = v->template get<Int>();
            else
                problems_.push_back(at(key) + ": expected an integer");
        }
    }
    void string(const std::string& key, std::string& dst) {
        if (const Json* v = get(key)) {
            if (v->is_string())
                dst = v->get<std::string>();
            else
                problems_.push_back(at(key) + ": expected a string");
        }
    }
    const Json& child(const std::string& key) {
        static const Json null_json;
        const Json* v = get(key);
        return v ? *v : null_json;
    }

private:
    const Json* j_ = nullptr;
    std::string path_;
    Problems& problems_;
    std::set<std::string> known_;
};

void require(bool ok, Problems& p, const std::string& msg) {
    if (!ok) p.push_back(msg);
}

}  // namespace

ExperimentConfig resolve_config(const Json& doc, Problems& problems) {
    ExperimentConfig c;
    Section top(doc, "", problems);
    top.string("subcommand", c.subcommand);
    top.integer("seed", c.seed);
    top.integer("workers", c.workers);
    top.string("out", c.out);
    if (const Json* t = top.get("target"))
        if (auto cf = io::cf_from_json(*t, "target", problems)) c.target = *cf;
    if (const Json* m = top.get("map"))
        if (auto spec = io::map_from_json(*m, "map", problems)) c.map = *spec;
    {
        Section s(top.child("arithmetic"), "arithmetic", problems);
        s.number("sigma", c.arithmetic.sigma);
        s.number("gamma_floor", c.arithmetic.gamma_floor);
        s.integer("diophantine_depth", c.arithmetic.diophantine_depth);
        s.integer("brjuno_depth", c.arithmetic.brjuno_depth);
        Section h(s.child("h"), "arithmetic.h", problems);
        h.integer("m_max", c.arithmetic.h.m_max);
        h.integer("k_max", c.arithmetic.h.k_max);
        h.integer("b_depth", c.arithmetic.h.b_depth);
        h.number("b_max", c.arithmetic.h.b_max);
    }
    {
        Section s(top.child("rotation"), "rotation", problems);
        s.number("x0", c.rotation.x0);
        s.integer("depth", c.rotation.depth);
        s.integer("n_max", c.rotation.n_max);
        s.integer("birkhoff_n", c.rotation.birkhoff_n);
        s.number("tol", c.rotation.tol);
    }
    {
        Section s(top.child("kam"), "kam", problems);
        s.number("nu0", c.kam.nu0);
        s.integer("max_steps", c.kam.max_steps);
        s.integer("n_cap", c.kam.n_cap);
        s.number("divisor_floor", c.kam.divisor_floor);
        s.number("threshold", c.kam.threshold);
        s.number("alias_fraction", c.kam.alias_fraction);
        if (const Json* v = s.get("truncation")) {
            if (!v->is_array()) problems.push_back("kam.truncation: expected an array");
            else
                for (std::size_t i = 0; i < v->size(); ++i) {
                    if ((*v)[i].is_number_integer()) c.kam.truncation.push_back((*v)[i].get<int>());
                    else problems.push_back("kam.truncation[" + std::to_string(i) + "]: expected an integer");
                }
        }
        if (const Json* v = s.get("strips")) {
            if (!v->is_array()) problems.push_back("kam.strips: expected an array");
            else
                for (std::size_t i = 0; i < v->size(); ++i) {
                    if ((*v)[i].is_number()) c.kam.strips.push_back((*v)[i].get<double>());
                    else problems.push_back("kam.strips[" + std::to_string(i) + "]: expected a number");
                }
        }
    }
    {
        Section s(top.child("geometry"), "geometry", problems);
        s.integer("n_min", c.geometry.n_min);
        s.integer("n_max", c.geometry.n_max);
        s.integer("k_smoothness", c.geometry.k_smoothness);
        s.integer("grid", c.geometry.partition.grid);
    }
    {
        Section s(top.child("tongue"), "tongue", problems);
        s.number("a_min", c.tongue.a_min);
        s.number("a_max", c.tongue.a_max);
        s.integer("a_cells", c.tongue.a_cells);
        s.number("b_min", c.tongue.b_min);
        s.number("b_max", c.tongue.b_max);
        s.integer("b_cells", c.tongue.b_cells);
        s.integer("depth", c.tongue.depth);
        s.integer("n_max", c.tongue.n_max);
        s.integer("birkhoff_n", c.tongue.birkhoff_n);
    }
    {
        Section s(top.child("bootstrap"), "bootstrap", problems);
        s.number("r", c.bootstrap.r);
        s.number("sigma", c.bootstrap.sigma);
        s.number("gamma0", c.bootstrap.gamma0);
        s.integer("steps", c.bootstrap.steps);
    }

    // cross-field checks
    if (!c.subcommand.empty()) {
        const auto& names = subcommands();
        require(std::find(names.begin(), names.end(), c.subcommand) != names.end(), problems,
                "subcommand: unknown subcommand '" + c.subcommand + "'");
    }
    require(c.workers >= 0, problems, "workers: must be >= 0");
    require(c.arithmetic.sigma >= 0.0, problems, "arithmetic.sigma: must be >= 0");
    require(c.arithmetic.gamma_floor > 0.0, problems, "arithmetic.gamma_floor: must be > 0");
    require(c.arithmetic.diophantine_depth >= 1, problems, "arithmetic.diophantine_depth: must be >= 1");
    require(c.arithmetic.brjuno_depth >= 2, problems, "arithmetic.brjuno_depth: must be >= 2");
    require(c.arithmetic.h.m_max >= 0, problems, "arithmetic.h.m_max: must be >= 0");
    require(c.arithmetic.h.k_max >= 0, problems, "arithmetic.h.k_max: must be >= 0");
    require(c.arithmetic.h.b_depth >= 1, problems, "arithmetic.h.b_depth: must be >= 1");
    require(c.arithmetic.h.b_max > 0.0, problems, "arithmetic.h.b_max: must be > 0");
    require(c.rotation.x0 >= 0.0 && c.rotation.x0 < 1.0, problems, "rotation.x0: must lie in [0, 1)");
    require(c.rotation.depth >= 1, problems, "rotation.depth: must be >= 1");
    require(c.rotation.n_max >= 2, problems, "rotation.n_max: must be >= 2");
    require(c.rotation.birkhoff_n >= 1, problems, "rotation.birkhoff_n: must be >= 1");
    require(c.rotation.tol > 0.0, problems, "rotation.tol: must be > 0");
    c.kam.alpha = c.target;
    for (const auto& msg : validate(c.kam)) problems.push_back(msg);
    require(c.geometry.n_min >= 0 && c.geometry.n_max >= c.geometry.n_min, problems,
            "geometry.n_max: needs 0 <= n_min <= n_max");
    require(c.geometry.k_smoothness >= 2, problems, "geometry.k_smoothness: must be >= 2");
    require(c.geometry.partition.grid >= 16, problems, "geometry.grid: must be >= 16");
    c.geometry.partition.x0 = c.rotation.x0;
    require(c.tongue.a_cells >= 1, problems, "tongue.a_cells: must be >= 1");
    require(c.tongue.b_cells >= 1, problems, "tongue.b_cells: must be >= 1");
    require(c.tongue.a_max >= c.tongue.a_min, problems, "tongue.a_max: must be >= a_min");
    require(c.tongue.b_max >= c.tongue.b_min, problems, "tongue.b_max: must be >= b_min");
    require(std::abs(c.tongue.b_min) < 1.0 && std::abs(c.tongue.b_max) < 1.0, problems,
            "tongue.b_max: |b| >= 1 is not a diffeomorphism (Df vanishes)");
    require(c.tongue.depth >= 1, problems, "tongue.depth: must be >= 1");
    require(c.tongue.n_max >= 2, problems, "tongue.n_max: must be >= 2");
    require(c.tongue.birkhoff_n >= 1, problems, "tongue.birkhoff_n: must be >= 1");
    c.tongue.seed = c.seed;
    require(c.bootstrap.sigma >= 0.0, problems, "bootstrap.sigma: must be >= 0");
    require(c.bootstrap.r > 2.0 + c.bootstrap.sigma, problems, "bootstrap.r: the window r > 2 + sigma is empty");
    require(c.bootstrap.gamma0 >= 0.0 && c.bootstrap.gamma0 <= c.bootstrap.r - 2.0 - c.bootstrap.sigma, problems,
            "bootstrap.gamma0: must lie in [0, r - 2 - sigma]");
    require(c.bootstrap.steps >= 0, problems, "bootstrap.steps: must be >= 0");
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["subcommand"] = c.subcommand;
    j["seed"] = c.seed;
    j["target"] = io::cf_to_json(c.target);
    j["map"] = io::map_to_json(c.map);
    j["arithmetic"] = {{"sigma", c.arithmetic.sigma},
                       {"gamma_floor", c.arithmetic.gamma_floor},
                       {"diophantine_depth", c.arithmetic.diophantine_depth},
                       {"brjuno_depth", c.arithmetic.brjuno_depth},
                       {"h",
                        {{"m_max", c.arithmetic.h.m_max},
                         {"k_max", c.arithmetic.h.k_max},
                         {"b_depth", c.arithmetic.h.b_depth},
                         {"b_max", c.arithmetic.h.b_max}}}};
    j["rotation"] = {{"x0", c.rotation.x0},
                     {"depth", c.rotation.depth},
                     {"n_max", c.rotation.n_max},
                     {"birkhoff_n", c.rotation.birkhoff_n},
                     {"tol", c.rotation.tol}};
    Json kam = {{"nu0", c.kam.nu0},
                {"max_steps", c.kam.max_steps},
                {"n_cap", c.kam.n_cap},
                {"divisor_floor", c.kam.divisor_floor},
                {"threshold", c.kam.threshold},
                {"alias_fraction", c.kam.alias_fraction}};
    kam["truncation"] = c.kam.truncation;
    kam["strips"] = c.kam.strips;
    j["kam"] = kam;
    j["geometry"] = {{"n_min", c.geometry.n_min},
                     {"n_max", c.geometry.n_max},
                     {"k_smoothness", c.geometry.k_smoothness},
                     {"grid", c.geometry.partition.grid}};
    j["tongue"] = {{"a_min", c.tongue.a_min},   {"a_max", c.tongue.a_max},   {"a_cells", c.tongue.a_cells},
                   {"b_min", c.tongue.b_min},   {"b_max", c.tongue.b_max},   {"b_cells", c.tongue.b_cells},
                   {"depth", c.tongue.depth},   {"n_max", c.tongue.n_max},   {"birkhoff_n", c.tongue.birkhoff_n}};
    j["bootstrap"] = {{"r", c.bootstrap.r},
                      {"sigma", c.bootstrap.sigma},
                      {"gamma0", c.bootstrap.gamma0},
                      {"steps", c.bootstrap.steps}};
    return j;
}

Problems validate_config(const std::string& path) {
    Problems problems;
    std::ifstream in(path);
    if (!in) {
        problems.push_back(path + ": cannot open");
        return problems;
    }
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const std::exception& e) {
        problems.push_back(path + ": JSON parse error: " + e.what());
        return problems;
    }
    resolve_config(doc, problems);
    return problems;
}

void apply_overrides(Json& doc, const std::string& sub, const Overrides& o) {
    if (!doc.is_object()) return;
    if (o.out) doc["out"] = *o.out;
    if (o.workers) doc["workers"] = *o.workers;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.depth) {
        if (sub == "classify") {
            doc["arithmetic"]["diophantine_depth"] = *o.depth;
            doc["arithmetic"]["brjuno_depth"] = *o.depth;
        } else if (sub == "kam") {
            doc["kam"]["max_steps"] = *o.depth;
        } else if (sub == "geometry") {
            doc["geometry"]["n_max"] = *o.depth;
        } else if (sub == "tongue-scan") {
            doc["tongue"]["depth"] = *o.depth;
        } else if (sub == "bootstrap") {
            doc["bootstrap"]["steps"] = *o.depth;
        } else {
            doc["rotation"]["depth"] = *o.depth;
        }
    }
    if (o.tol) {
        if (sub == "kam")
            doc["kam"]["threshold"] = *o.tol;
        else
            doc["rotation"]["tol"] = *o.tol;
    }
    if (o.nmax) {
        if (sub == "tongue-scan")
            doc["tongue"]["n_max"] = *o.nmax;
        else
            doc["rotation"]["n_max"] = *o.nmax;
    }
}

namespace {

struct Output {
    std::string primary_name;
    std::vector<std::pair<std::string, std::string>> files;  // name, content
    int exit_code = kExitOk;

    void add(const std::string& name, std::string content, bool primary = false) {
        if (primary || primary_name.empty()) primary_name = name;
        files.emplace_back(name, std::move(content));
    }
};

Json estimate_json(const RotationEstimate& e) {
    Json j;
    j["method"] = to_string(e.method);
    j["value"] = e.value;
    j["lift_value"] = e.lift_value;
    j["error_bound"] = e.error_bound;
    j["lo"] = e.lo;
    j["hi"] = e.hi;
    j["n"] = e.n;
    j["depth"] = e.depth;
    Json qs = Json::array();
    for (auto a : e.quotients) qs.push_back(a);
    j["quotients"] = qs;
    j["return_times"] = e.return_times;
    j["downgraded"] = e.downgraded;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

Json verdict_json(const arith::ArithmeticVerdict& v) {
    Json j;
    j["diophantine"] = {{"pass", v.diophantine},
                        {"sigma", v.sigma},
                        {"gamma_floor", v.gamma_floor},
                        {"gamma_hat", v.dio.gamma_hat},
                        {"attained_at", v.dio.attained_at},
                        {"gamma_liminf", v.dio.gamma_liminf},
                        {"depth", v.dio.depth}};
    j["brjuno_sum"] = {{"value", v.brjuno.value}, {"diverging", v.brjuno.diverging}, {"depth", v.brjuno.depth}};
    j["brjuno_B"] = {{"value", v.brjuno_b.value}, {"tail_bound", v.brjuno_b.tail_bound}, {"terms", v.brjuno_b.terms}};
    Json h;
    h["kind"] = v.not_brjuno ? std::string("skipped") : arith::to_string(v.h.kind);
    h["m_max"] = v.h.m_max;
    h["k_max"] = v.h.k_max;
    h["b_depth"] = v.h.b_depth;
    if (v.h.kind == arith::HKind::fail_at) h["fail_m"] = v.h.fail_m;
    Json recs = Json::array();
    for (const auto& r : v.h.records)
        recs.push_back({{"m", r.m},
                        {"passed", r.passed},
                        {"pass_k", r.pass_k},
                        {"k_evaluated", r.k_evaluated},
                        {"min_margin", r.min_margin},
                        {"max_tail", r.max_tail},
                        {"certified_fail", r.certified_fail}});
    h["records"] = recs;
    j["condition_h"] = h;
    j["not_brjuno"] = v.not_brjuno;
    j["consistency_adjusted"] = v.consistency_adjusted;
    return j;
}

// The concrete map of the run, tuning the family onto the target when its
// parameter is left open.
struct ResolvedMap {
    AnalyticCircleMap f;
    std::optional<TuneResult> tuned;
};

ResolvedMap resolve_map(const ExperimentConfig& c) {
    if (c.map.family && !c.map.a) {
        TuneResult t = tune_parameter(MapFamily::arnold(c.map.b), c.target, c.rotation.tol, c.rotation.n_max);
        return {AnalyticCircleMap::arnold(t.a, c.map.b), t};
    }
    return {io::realize(c.map), std::nullopt};
}

Json tune_json(const TuneResult& t) {
    return {{"a", t.a}, {"target", t.target}, {"bisection_steps", t.bisection_steps}, {"achieved", estimate_json(t.achieved)}};
}

Output run_classify(const ExperimentConfig& c, const Json& cfg) {
    const arith::ArithmeticVerdict v = arith::classify(c.target, c.arithmetic);
    Json doc;
    doc["config"] = cfg;
    doc["number"] = io::cf_to_json(c.target);
    doc["verdict"] = verdict_json(v);
    Output out;
    out.add("classify.json", io::dump(doc) + "\n");
    if (v.not_brjuno || v.h.kind == arith::HKind::fail_at) out.exit_code = kExitNegative;
    return out;
}

Output run_rotnum(const ExperimentConfig& c, const Json& cfg) {
    if (c.map.family && !c.map.a)
        throw PreconditionViolation("rotnum needs a fixed map; set map.family.a or give c/modes");
    const AnalyticCircleMap f = io::realize(c.map);
    Json doc;
    doc["config"] = cfg;
    doc["birkhoff"] = estimate_json(rotation_number_birkhoff(f, c.rotation.x0, c.rotation.birkhoff_n));
    try {
        doc["closest_return"] = estimate_json(rotation_number_closest_return(f, c.rotation.x0, c.rotation.depth, c.rotation.n_max));
        doc["locked"] = nullptr;
    } catch (const PeriodicOrbitDetected& e) {
        doc["closest_return"] = nullptr;
        doc["locked"] = {{"p", e.p}, {"q", e.q}};
    }
    Output out;
    out.add("rotnum.json", io::dump(doc) + "\n");
    return out;
}

Output run_tune(const ExperimentConfig& c, const Json& cfg) {
    if (!c.map.family) throw PreconditionViolation("tune needs map.family");
    const TuneResult t = tune_parameter(MapFamily::arnold(c.map.b), c.target, c.rotation.tol, c.rotation.n_max);
    Json doc;
    doc["config"] = cfg;
    doc["tune"] = tune_json(t);
    Output out;
    out.add("tune.json", io::dump(doc) + "\n");
    return out;
}

Output run_kam(const ExperimentConfig& c, const Json& cfg) {
    const ResolvedMap rm = resolve_map(c);
    KamConfig kc = c.kam;
    kc.alpha = c.target;
    const KamResult r = kam_iterate(rm.f, kc);

    Json summary;
    summary["verdict"] = to_string(r.verdict);
    summary["reason"] = r.reason;
    summary["steps"] = r.steps;
    summary["final_defect"] = r.final_defect;
    summary["decay_exponent"] = r.decay_exponent;
    summary["decay_pairs"] = r.decay_pairs;
    summary["max_quad_constant"] = r.max_quad_constant;
    summary["max_mean_shift_constant"] = r.max_mean_shift_constant;
    summary["strip_final"] = r.strip_final;
    summary["brjuno_strip"] = r.brjuno_strip;
    summary["h_tail_energy"] = r.h_tail_energy;
    if (rm.tuned) summary["tuned"] = tune_json(*rm.tuned);

    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"step", "norm_v", "norm_w", "mean_shift", "tail_energy", "min_divisor", "truncation", "nu",
           "quad_constant", "min_dh"});
    for (const auto& s : r.trace)
        w.row({io::cell(s.step), io::cell(s.norm_v), io::cell(s.norm_w), io::cell(s.mean_shift),
               io::cell(s.tail_energy), io::cell(s.min_divisor), io::cell(s.truncation), io::cell(s.nu),
               io::cell(s.quad_constant), io::cell(s.min_dh)});
    Json footer = summary;
    footer["config"] = cfg;
    csv << "# " << io::dump(footer, -1) << "\n";

    Json doc;
    doc["config"] = cfg;
    for (auto it = summary.begin(); it != summary.end(); ++it) doc[it.key()] = it.value();
    Json trace = Json::array();
    for (const auto& s : r.trace)
        trace.push_back({{"step", s.step},
                         {"truncation", s.truncation},
                         {"nu", s.nu},
                         {"norm_v", s.norm_v},
                         {"norm_w", s.norm_w},
                         {"mean_shift", s.mean_shift},
                         {"tail_energy", s.tail_energy},
                         {"min_divisor", s.min_divisor},
                         {"quad_constant", s.quad_constant},
                         {"min_dh", s.min_dh}});
    doc["trace"] = trace;

    Output out;
    out.add("kam.csv", csv.str(), true);
    out.add("kam.json", io::dump(doc) + "\n");
    out.primary_name = "kam.csv";
    if (r.verdict != KamVerdict::linearized) out.exit_code = kExitNegative;
    return out;
}

Output run_geometry(const ExperimentConfig& c, const Json& cfg) {
    const ResolvedMap rm = resolve_map(c);
    geometry::GeometryConfig gc = c.geometry;
    gc.partition.exec = c.exec();
    const geometry::GeometryReport rep = geometry::geometry_report(rm.f, gc);

    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"n", "q_n", "q_n1", "alpha_n", "M_n", "m_n", "ratio", "denjoy_residual", "improved_denjoy_C",
           "estimate_C_r1", "beta_recursion_C", "tiling_total", "M_upper", "m_lower"});
    Json rows = Json::array();
    for (const auto& row : rep.rows) {
        const auto& L = row.level;
        const double bc = row.recursion ? row.recursion->C : std::nan("");
        w.row({io::cell(L.n), io::cell(L.q_n), io::cell(L.q_next), io::cell(L.qn_distance), io::cell(L.M),
               io::cell(L.m), io::cell(row.ratio), io::cell(row.denjoy.classical_residual),
               io::cell(row.denjoy.improved_C), io::cell(row.growth_r1.C), io::cell(bc), io::cell(L.tiling_total),
               io::cell(L.M_upper), io::cell(L.m_lower)});
        Json r = {{"n", L.n},
                  {"q_n", L.q_n},
                  {"q_n1", L.q_next},
                  {"alpha_n", L.qn_distance},
                  {"M_n", L.M},
                  {"m_n", L.m},
                  {"ratio", row.ratio},
                  {"sandwich", L.m <= L.qn_distance && L.qn_distance <= L.M},
                  {"tiling_total", L.tiling_total},
                  {"tiling_overlap", L.tiling_overlap},
                  {"denjoy_max_log_df", row.denjoy.max_log_df},
                  {"denjoy_residual", row.denjoy.classical_residual},
                  {"improved_denjoy_C", row.denjoy.improved_C},
                  {"estimate_C_r1", row.growth_r1.C},
                  {"lemma_C1", row.growth_r1.lemma_C1},
                  {"lemma_C2", row.growth_r1.lemma_C2}};
        if (row.recursion)
            r["beta_recursion"] = {{"C", row.recursion->C},
                                   {"M_bound", row.recursion->M_bound},
                                   {"m_bound", row.recursion->m_bound},
                                   {"M_respected", row.recursion->M_respected},
                                   {"m_respected", row.recursion->m_respected},
                                   {"vacuous", row.recursion->vacuous}};
        rows.push_back(r);
    }
    Json doc;
    doc["config"] = cfg;
    if (rm.tuned) doc["tuned"] = tune_json(*rm.tuned);
    doc["rho"] = rep.rho;
    doc["variation"] = rep.variation;
    doc["trend"] = geometry::to_string(rep.trend);
    doc["denjoy_ok"] = rep.denjoy_ok;
    doc["levels"] = rows;

    Output out;
    out.add("geometry.csv", csv.str(), true);
    out.add("geometry.json", io::dump(doc) + "\n");
    out.primary_name = "geometry.csv";
    if (rep.trend == geometry::Trend::growing_trend || !rep.denjoy_ok) out.exit_code = kExitNegative;
    return out;
}

Output run_tongue(const ExperimentConfig& c, const Json& cfg) {
    const auto cells = kernels::tongue_scan(c.tongue, c.exec());
    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"i", "j", "a", "b", "x0", "rho", "error_bound", "birkhoff", "locked", "p", "q", "depth"});
    long long locked = 0;
    for (const auto& cell : cells) {
        locked += cell.locked ? 1 : 0;
        w.row({io::cell(cell.i), io::cell(cell.j), io::cell(cell.a), io::cell(cell.b), io::cell(cell.x0),
               io::cell(cell.rho), io::cell(cell.error_bound), io::cell(cell.birkhoff), io::cell(cell.locked),
               io::cell(cell.p), io::cell(cell.q), io::cell(cell.depth)});
    }
    Json doc;
    doc["config"] = cfg;
    doc["cells"] = static_cast<long long>(cells.size());
    doc["locked_cells"] = locked;
    Output out;
    out.add("tongue.csv", csv.str(), true);
    out.add("tongue.json", io::dump(doc) + "\n");
    out.primary_name = "tongue.csv";
    return out;
}

Output run_bootstrap(const ExperimentConfig& c, const Json& cfg) {
    const auto& b = c.bootstrap;
    const auto gamma = geometry::bootstrap_schedule(b.r, b.sigma, b.gamma0, b.steps);
    const double fixed = b.r - 2.0 - b.sigma;
    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"step", "gamma", "gap"});
    for (std::size_t k = 0; k < gamma.size(); ++k)
        w.row({io::cell(static_cast<long long>(k)), io::cell(gamma[k]), io::cell(fixed - gamma[k])});
    Json doc;
    doc["config"] = cfg;
    doc["fixed_point"] = fixed;
    doc["gamma"] = gamma;
    Output out;
    out.add("bootstrap.csv", csv.str(), true);
    out.add("bootstrap.json", io::dump(doc) + "\n");
    out.primary_name = "bootstrap.csv";
    return out;
}

}  // namespace

int run(const std::string& sub, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), sub) == names.end()) {
        err << "error: unknown subcommand '" << sub << "'\n";
        return kExitError;
    }
    Json doc = Json::object();
    if (overrides.config) {
        std::ifstream in(*overrides.config);
        if (!in) {
            err << "error: cannot open config " << *overrides.config << "\n";
            return kExitError;
        }
        try {
            doc = Json::parse(in);
        } catch (const std::exception& e) {
            err << "error: " << *overrides.config << ": JSON parse error: " << e.what() << "\n";
            return kExitError;
        }
    }
    apply_overrides(doc, sub, overrides);
    Problems problems;
    ExperimentConfig config = resolve_config(doc, problems);

    if (sub == "validate") {
        for (const auto& p : problems) out << p << "\n";
        if (problems.empty()) out << "config OK\n";
        return problems.empty() ? kExitOk : kExitError;
    }
    if (!problems.empty()) {
        for (const auto& p : problems) err << "config error: " << p << "\n";
        return kExitError;
    }
    config.subcommand = sub;
    const Json cfg = to_json(config);

    try {
        Output o;
        if (sub == "classify") o = run_classify(config, cfg);
        else if (sub == "rotnum") o = run_rotnum(config, cfg);
        else if (sub == "tune") o = run_tune(config, cfg);
        else if (sub == "kam") o = run_kam(config, cfg);
        else if (sub == "geometry") o = run_geometry(config, cfg);
        else if (sub == "tongue-scan") o = run_tongue(config, cfg);
        else o = run_bootstrap(config, cfg);

        if (config.out.empty()) {
            for (const auto& [name, content] : o.files)
                if (name == o.primary_name) out << content;
        } else {
            std::filesystem::create_directories(config.out);
            for (const auto& [name, content] : o.files) {
                const auto path = std::filesystem::path(config.out) / name;
                std::ofstream f(path, std::ios::binary);
                f << content;
                if (!f) throw std::runtime_error("cannot write " + path.string());
            }
        }
        return o.exit_code;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

}  // namespace circlelab::cli
