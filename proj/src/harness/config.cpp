#include "shelab/harness/config.hpp"

#include "shelab/coeff/constants.hpp"
#include "shelab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace shelab::harness {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.contains(k)) reject(where.empty() ? k : where + "." + k, "unknown field");
    }
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) reject(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) reject(field, "must be finite");
    return d;
}

// Numbers, or the strings "inf" / "-inf" for unbounded indicator ends.
double extended(const json& v, const std::string& field) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        reject(field, "expected a number, \"inf\" or \"-inf\"");
    }
    return number(v, field);
}

json extended_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return v;
}

std::uint64_t unsigned_int(const json& v, const std::string& field) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        reject(field, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& v, const std::string& field) {
    if (!v.is_array()) reject(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

// Accepts "text", {"expr": "text", ...} or {"builtin": name, ...}; returns the
// object form with every parameter spelled out.
json normalize_coefficient(const json& v, const std::string& field) {
    json out;
    if (v.is_string()) {
        out["expr"] = v.get<std::string>();
    } else if (v.is_object() && v.contains("expr")) {
        only_keys(v, field, {"expr", "L", "sup"});
        if (!v["expr"].is_string()) reject(field + ".expr", "expected a string");
        out["expr"] = v["expr"];
    } else if (v.is_object() && v.contains("builtin")) {
        if (!v["builtin"].is_string()) reject(field + ".builtin", "expected a string");
        const auto name = v["builtin"].get<std::string>();
        out["builtin"] = name;
        auto param = [&](const char* key, double fallback) {
            out[key] = v.contains(key) ? number(v[key], field + "." + key) : fallback;
        };
        if (name == "constant") {
            only_keys(v, field, {"builtin", "value", "L", "sup"});
            param("value", 0.0);
        } else if (name == "linear") {
            only_keys(v, field, {"builtin", "slope", "L", "sup"});
            param("slope", 1.0);
        } else if (name == "affine") {
            only_keys(v, field, {"builtin", "intercept", "slope", "L", "sup"});
            param("intercept", 0.0);
            param("slope", 1.0);
        } else if (name == "clipped_polynomial") {
            only_keys(v, field, {"builtin", "coefficients", "clip", "L", "sup"});
            if (!v.contains("coefficients")) reject(field + ".coefficients", "required");
            out["coefficients"] = number_list(v["coefficients"], field + ".coefficients");
            param("clip", 1.0);
            if (!(out["clip"].get<double>() > 0.0)) reject(field + ".clip", "must be > 0");
        } else if (name == "oscillator") {
            only_keys(v, field, {"builtin", "amplitude", "frequency", "L", "sup"});
            param("amplitude", 1.0);
            param("frequency", 1000.0);
        } else {
            reject(field + ".builtin", "unknown builtin '" + name + "'");
        }
    } else {
        reject(field, "expected an expression string or an object with \"expr\" or \"builtin\"");
    }
    for (const char* key : {"L", "sup"}) {
        if (v.is_object() && v.contains(key)) {
            const double d = number(v[key], field + "." + key);
            if (d < 0.0) reject(field + "." + key, "must be >= 0");
            out[key] = d;
        }
    }
    try {
        (void)make_coefficient(out);
    } catch (const Error& e) {
        reject(field, e.what());
    }
    return out;
}

json normalize_initial(const json& v) {
    if (v.is_number()) return json{{"kind", "constant"}, {"value", number(v, "u0")}};
    if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string()) {
        reject("u0", "expected an object with a \"kind\" field");
    }
    const auto kind = v["kind"].get<std::string>();
    json out{{"kind", kind}};
    if (kind == "constant") {
        only_keys(v, "u0", {"kind", "value"});
        out["value"] = v.contains("value") ? number(v["value"], "u0.value") : 0.0;
    } else if (kind == "indicator") {
        only_keys(v, "u0", {"kind", "lo", "hi"});
        const double lo = v.contains("lo") ? extended(v["lo"], "u0.lo") : -std::numeric_limits<double>::infinity();
        const double hi = v.contains("hi") ? extended(v["hi"], "u0.hi") : std::numeric_limits<double>::infinity();
        if (!(lo <= hi)) reject("u0", "indicator needs lo <= hi");
        out["lo"] = extended_json(lo);
        out["hi"] = extended_json(hi);
    } else if (kind == "expression") {
        only_keys(v, "u0", {"kind", "source", "bound"});
        if (!v.contains("source") || !v["source"].is_string()) reject("u0.source", "expected a string");
        if (!v.contains("bound")) reject("u0.bound", "an expression initial condition needs a declared bound");
        out["source"] = v["source"];
        out["bound"] = number(v["bound"], "u0.bound");
    } else {
        reject("u0.kind", "unknown kind '" + kind + "'");
    }
    try {
        (void)make_initial(out);
    } catch (const Error& e) {
        reject("u0", e.what());
    }
    return out;
}

} // namespace

coeff::Coefficient make_coefficient(const json& spec) {
    using namespace coeff;
    Coefficient c = [&] {
        if (spec.contains("expr")) return Coefficient::from_source(spec["expr"].get<std::string>());
        const auto name = spec["builtin"].get<std::string>();
        if (name == "constant") return Coefficient::from_builtin(builtin::Constant{spec["value"]}, spec.dump());
        if (name == "linear") return Coefficient::from_builtin(builtin::Linear{spec["slope"]}, spec.dump());
        if (name == "affine") {
            return Coefficient::from_builtin(builtin::Affine{spec["intercept"], spec["slope"]}, spec.dump());
        }
        if (name == "clipped_polynomial") {
            return Coefficient::from_builtin(
                builtin::ClippedPolynomial{spec["coefficients"].get<std::vector<double>>(), spec["clip"]},
                spec.dump());
        }
        if (name == "oscillator") {
            return Coefficient::from_builtin(builtin::Oscillator{spec["amplitude"], spec["frequency"]}, spec.dump());
        }
        throw ConfigError("unknown builtin '" + name + "'");
    }();
    if (spec.contains("L")) c.metadata().linear_growth = spec["L"].get<double>();
    if (spec.contains("sup")) c.metadata().sup_norm = spec["sup"].get<double>();
    return c;
}

kernel::InitialCondition make_initial(const json& spec) {
    const auto kind = spec["kind"].get<std::string>();
    if (kind == "constant") return kernel::InitialCondition::constant(spec["value"]);
    if (kind == "indicator") {
        return kernel::InitialCondition::indicator(extended(spec["lo"], "u0.lo"), extended(spec["hi"], "u0.hi"));
    }
    return kernel::InitialCondition::expression(spec["source"].get<std::string>(), spec["bound"]);
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) reject("config", "expected a JSON object");
    only_keys(doc, "",
              {"b", "sigma", "u0", "grid", "replications", "levels", "orders", "seed", "bounded_sigma", "constants",
               "probes", "check", "max_order"});
    ExperimentConfig c;
    for (const char* key : {"b", "sigma", "u0"}) {
        if (!doc.contains(key)) reject(key, "required");
    }
    c.b = normalize_coefficient(doc["b"], "b");
    c.sigma = normalize_coefficient(doc["sigma"], "sigma");
    c.u0 = normalize_initial(doc["u0"]);

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        if (!g.is_object()) reject("grid", "expected an object");
        only_keys(g, "grid", {"R", "dx", "dt", "T", "boundary"});
        if (g.contains("R")) c.grid.R = number(g["R"], "grid.R");
        if (g.contains("dx")) c.grid.dx = number(g["dx"], "grid.dx");
        if (g.contains("dt")) c.grid.dt = number(g["dt"], "grid.dt");
        if (g.contains("T")) c.grid.T = number(g["T"], "grid.T");
        if (g.contains("boundary")) {
            if (!g["boundary"].is_string()) reject("grid.boundary", "expected a string");
            try {
                c.grid.boundary = solver::boundary_from_string(g["boundary"].get<std::string>());
            } catch (const Error& e) {
                reject("grid.boundary", e.what());
            }
        }
    }
    try {
        c.grid.validate();
    } catch (const Error& e) {
        reject("grid", e.what());
    }

    if (doc.contains("replications")) c.replications = unsigned_int(doc["replications"], "replications");
    if (c.replications == 0) reject("replications", "must be >= 1");
    if (doc.contains("seed")) c.seed = unsigned_int(doc["seed"], "seed");
    if (doc.contains("bounded_sigma")) {
        if (!doc["bounded_sigma"].is_boolean()) reject("bounded_sigma", "expected a boolean");
        c.bounded_sigma = doc["bounded_sigma"].get<bool>();
    }
    if (doc.contains("max_order")) c.max_order = number(doc["max_order"], "max_order");
    if (!(c.max_order >= 1.0)) reject("max_order", "must be >= 1");

    if (doc.contains("levels")) c.levels = number_list(doc["levels"], "levels");
    if (c.levels.empty()) reject("levels", "at least one level is required");
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
        if (c.levels[i] < 0.0) reject("levels[" + std::to_string(i) + "]", "truncation levels must be >= 0");
    }
    if (doc.contains("orders")) c.orders = number_list(doc["orders"], "orders");
    if (c.orders.empty()) reject("orders", "at least one order is required");
    for (std::size_t i = 0; i < c.orders.size(); ++i) {
        const std::string f = "orders[" + std::to_string(i) + "]";
        if (c.orders[i] < 1.0) reject(f, "moment orders must be >= 1");
        if (c.orders[i] > c.max_order) reject(f, "exceeds max_order " + std::to_string(c.max_order));
    }

    if (doc.contains("constants")) {
        const json& k = doc["constants"];
        if (!k.is_object()) reject("constants", "expected an object");
        only_keys(k, "constants", {"c", "L_b", "L_sigma", "sigma_sup", "inflate_sigma"});
        if (k.contains("c")) c.constants.c = number(k["c"], "constants.c");
        if (!(c.constants.c > 1.0)) reject("constants.c", "must be > 1");
        auto opt = [&](const char* key, std::optional<double>& dst) {
            if (!k.contains(key) || k[key].is_null()) return;
            const double d = number(k[key], std::string("constants.") + key);
            if (d < 0.0) reject(std::string("constants.") + key, "must be >= 0");
            dst = d;
        };
        opt("L_b", c.constants.L_b);
        opt("L_sigma", c.constants.L_sigma);
        opt("sigma_sup", c.constants.sigma_sup);
        if (k.contains("inflate_sigma")) {
            if (!k["inflate_sigma"].is_boolean()) reject("constants.inflate_sigma", "expected a boolean");
            c.constants.inflate_sigma = k["inflate_sigma"].get<bool>();
        }
    }
    if (c.constants.sigma_sup && !c.bounded_sigma) {
        reject("constants.sigma_sup", "given while bounded_sigma is false");
    }

    if (doc.contains("probes")) {
        const json& p = doc["probes"];
        if (!p.is_object()) reject("probes", "expected an object");
        only_keys(p, "probes", {"times", "x", "stride", "n_times"});
        if (p.contains("times")) c.probes.times = number_list(p["times"], "probes.times");
        if (p.contains("x")) c.probes.x = number_list(p["x"], "probes.x");
        if (p.contains("stride")) c.probes.stride = unsigned_int(p["stride"], "probes.stride");
        if (p.contains("n_times")) c.probes.n_times = unsigned_int(p["n_times"], "probes.n_times");
    }
    try {
        (void)make_probes(c);
    } catch (const Error& e) {
        reject("probes", e.what());
    }

    if (doc.contains("check")) {
        const json& k = doc["check"];
        if (!k.is_object()) reject("check", "expected an object");
        only_keys(k, "check", {"levels", "step", "tolerance"});
        if (k.contains("levels")) c.check.levels = number_list(k["levels"], "check.levels");
        if (k.contains("step")) c.check.step = number(k["step"], "check.step");
        if (k.contains("tolerance")) c.check.tolerance = number(k["tolerance"], "check.tolerance");
        if (!(c.check.step > 0.0)) reject("check.step", "must be > 0");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    json k{{"c", c.constants.c}, {"inflate_sigma", c.constants.inflate_sigma}};
    k["L_b"] = c.constants.L_b ? json(*c.constants.L_b) : json(nullptr);
    k["L_sigma"] = c.constants.L_sigma ? json(*c.constants.L_sigma) : json(nullptr);
    k["sigma_sup"] = c.constants.sigma_sup ? json(*c.constants.sigma_sup) : json(nullptr);
    return json{
        {"b", c.b},
        {"sigma", c.sigma},
        {"u0", c.u0},
        {"grid",
         {{"R", c.grid.R},
          {"dx", c.grid.dx},
          {"dt", c.grid.dt},
          {"T", c.grid.T},
          {"boundary", solver::to_string(c.grid.boundary)}}},
        {"replications", c.replications},
        {"levels", c.levels},
        {"orders", c.orders},
        {"seed", c.seed},
        {"bounded_sigma", c.bounded_sigma},
        {"constants", k},
        {"probes",
         {{"times", c.probes.times}, {"x", c.probes.x}, {"stride", c.probes.stride}, {"n_times", c.probes.n_times}}},
        {"check", {{"levels", c.check.levels}, {"step", c.check.step}, {"tolerance", c.check.tolerance}}},
        {"max_order", c.max_order},
    };
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

solver::Problem make_problem(const ExperimentConfig& config) {
    return solver::Problem{make_coefficient(config.b), make_coefficient(config.sigma), make_initial(config.u0),
                           config.grid};
}

estimators::ProbeSet make_probes(const ExperimentConfig& config) {
    return estimators::ProbeSet::make(config.grid, config.probes.times, config.probes.x, config.probes.stride,
                                      config.probes.n_times);
}

ResolvedConstants resolve_constants(const ExperimentConfig& config, const solver::Problem& problem) {
    ResolvedConstants r;
    bounds::ProblemConstants& k = r.constants;
    const coeff::Interval wide{-1000.0, 1000.0};
    constexpr double step = 1e-2;

    auto growth = [&](const std::optional<double>& declared, const coeff::Coefficient& psi, const char* name) {
        if (declared) {
            r.notes.push_back(std::string(name) + " declared in config");
            return *declared;
        }
        if (psi.metadata().linear_growth) {
            r.notes.push_back(std::string(name) + " from coefficient metadata");
            return *psi.metadata().linear_growth;
        }
        r.notes.push_back(std::string(name) + " estimated on [-1000, 1000] (a lower bound)");
        return coeff::linear_growth_constant(psi, wide, step);
    };
    k.L_b = growth(config.constants.L_b, problem.drift, "L_b");
    k.L_sigma = growth(config.constants.L_sigma, problem.diffusion, "L_sigma");
    k.u0_norm = problem.u0.bound();
    k.c = config.constants.c;
    k.inflate_sigma = config.constants.inflate_sigma;
    if (config.bounded_sigma) {
        if (config.constants.sigma_sup) {
            k.sigma_sup = config.constants.sigma_sup;
            r.notes.push_back("||sigma|| declared in config");
        } else if (problem.diffusion.metadata().sup_norm) {
            k.sigma_sup = problem.diffusion.metadata().sup_norm;
            r.notes.push_back("||sigma|| from coefficient metadata");
        } else {
            k.sigma_sup = coeff::sup_norm(problem.diffusion, wide, step);
            r.notes.push_back("||sigma|| estimated on [-1000, 1000] (a lower bound)");
        }
    }
    if (k.inflate_sigma && k.effective_L_sigma() != k.L_sigma) {
        r.notes.push_back("L_sigma inflated to " + std::to_string(k.effective_L_sigma()));
    }
    return r;
}

} // namespace shelab::harness
