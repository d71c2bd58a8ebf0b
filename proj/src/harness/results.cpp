#include "shelab/harness/results.hpp"

#include "shelab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace shelab::harness {

using nlohmann::json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

json num(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

double get_num(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
        throw ConfigError("bad number '" + s + "' in results");
    }
    return v.get<double>();
}

std::optional<double> get_opt(const json& v) {
    if (v.is_null()) return std::nullopt;
    return get_num(v);
}

} // namespace

void write_csv(std::ostream& out, const ResultSet& results) {
    out << kCsvHeader << '\n';
    for (const Record& r : results.records) {
        out << quoted(r.experiment) << ',' << field(r.N) << ',' << field(r.k) << ',' << field(r.t) << ','
            << field(r.x) << ',' << field(r.estimate) << ',' << field(r.ci_lo) << ',' << field(r.ci_hi) << ','
            << field(r.bound_log) << ',' << quoted(r.verdict) << ',' << r.seed << ',' << r.config_hash << '\n';
    }
}

void write_plot_csv(std::ostream& out, const ResultSet& results) {
    out << "N,k,N_three_halves,log_difference\n";
    for (const ConvergenceRow& row : results.convergence) {
        out << format_number(row.N) << ',' << format_number(row.k) << ',' << format_number(std::pow(row.N, 1.5))
            << ',' << format_number(std::log(row.value)) << '\n';
    }
}

json to_json(const ResultSet& r) {
    json records = json::array();
    for (const Record& rec : r.records) {
        records.push_back({{"experiment", rec.experiment},
                           {"N", opt(rec.N)},
                           {"k", opt(rec.k)},
                           {"t", opt(rec.t)},
                           {"x", opt(rec.x)},
                           {"estimate", opt(rec.estimate)},
                           {"ci_lo", opt(rec.ci_lo)},
                           {"ci_hi", opt(rec.ci_hi)},
                           {"bound_log", opt(rec.bound_log)},
                           {"verdict", rec.verdict},
                           {"seed", rec.seed},
                           {"config_hash", rec.config_hash}});
    }
    json conv = json::array();
    for (const ConvergenceRow& c : r.convergence) conv.push_back({{"N", num(c.N)}, {"k", num(c.k)}, {"value", num(c.value)}});
    json fits = json::array();
    for (const DecayFit& f : r.fits) {
        fits.push_back({{"k", num(f.k)},
                        {"active_levels", f.active_levels},
                        {"slope", opt(f.slope)},
                        {"intercept", opt(f.intercept)},
                        {"plateau", opt(f.plateau)},
                        {"nonincreasing", f.nonincreasing}});
    }
    return json{{"experiment", r.experiment},
                {"provenance",
                 {{"config_hash", r.provenance.config_hash},
                  {"version", r.provenance.version},
                  {"seed", r.provenance.seed},
                  {"replications", r.provenance.replications},
                  {"config", r.provenance.config}}},
                {"records", records},
                {"convergence", conv},
                {"fits", fits},
                {"notes", r.notes},
                {"aborted", r.aborted},
                {"details", r.details}};
}

ResultSet result_set_from_json(const json& doc) {
    ResultSet r;
    try {
        r.experiment = doc.at("experiment").get<std::string>();
        const json& p = doc.at("provenance");
        r.provenance.config_hash = p.at("config_hash").get<std::string>();
        r.provenance.version = p.at("version").get<std::string>();
        r.provenance.seed = p.at("seed").get<std::uint64_t>();
        r.provenance.replications = p.at("replications").get<std::size_t>();
        r.provenance.config = p.at("config");
        for (const json& j : doc.at("records")) {
            Record rec;
            rec.experiment = j.at("experiment").get<std::string>();
            rec.N = get_opt(j.at("N"));
            rec.k = get_opt(j.at("k"));
            rec.t = get_opt(j.at("t"));
            rec.x = get_opt(j.at("x"));
            rec.estimate = get_opt(j.at("estimate"));
            rec.ci_lo = get_opt(j.at("ci_lo"));
            rec.ci_hi = get_opt(j.at("ci_hi"));
            rec.bound_log = get_opt(j.at("bound_log"));
            rec.verdict = j.at("verdict").get<std::string>();
            rec.seed = j.at("seed").get<std::uint64_t>();
            rec.config_hash = j.at("config_hash").get<std::string>();
            r.records.push_back(std::move(rec));
        }
        for (const json& j : doc.at("convergence")) {
            r.convergence.push_back({get_num(j.at("N")), get_num(j.at("k")), get_num(j.at("value"))});
        }
        for (const json& j : doc.at("fits")) {
            DecayFit f;
            f.k = get_num(j.at("k"));
            f.active_levels = j.at("active_levels").get<std::size_t>();
            f.slope = get_opt(j.at("slope"));
            f.intercept = get_opt(j.at("intercept"));
            f.plateau = get_opt(j.at("plateau"));
            f.nonincreasing = j.at("nonincreasing").get<bool>();
            r.fits.push_back(f);
        }
        r.notes = doc.at("notes").get<std::vector<std::string>>();
        r.aborted = doc.at("aborted").get<std::size_t>();
        r.details = doc.at("details");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed result set: ") + e.what());
    }
    return r;
}

std::vector<std::filesystem::path> export_results(const ResultSet& results, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::filesystem::path& path, auto&& writer) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        writer(out);
        if (!out) throw IoError("failed writing " + path.string());
        written.push_back(path);
    };
    emit(dir / (results.experiment + ".csv"), [&](std::ostream& o) { write_csv(o, results); });
    emit(dir / (results.experiment + ".json"), [&](std::ostream& o) { o << to_json(results).dump(2) << '\n'; });
    if (!results.convergence.empty()) {
        emit(dir / (results.experiment + "_plot.csv"), [&](std::ostream& o) { write_plot_csv(o, results); });
    }
    return written;
}

ResultSet import_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return result_set_from_json(doc);
}

} // namespace shelab::harness
