#include "qkr/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qkr/errors.hpp"
#include "qkr/version.hpp"

namespace qkr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string series_csv(const ObservableSeries& series) {
    std::string out = "t,xi,n2,w\n";
    for (const ObservableRecord& rec : series.records) {
        out += std::to_string(rec.t);
        out += ',';
        out += format_double(rec.xi);
        out += ',';
        out += format_double(rec.second_moment);
        out += ',';
        out += format_double(rec.w);
        out += '\n';
    }
    return out;
}

std::string scan_csv(const ScanResult& result) {
    std::string out = "k,xi_mean,xi_stderr,w_mean,w_stderr\n";
    for (const ScanPoint& pt : result.points) {
        out += format_double(pt.k);
        out += ',';
        out += format_double(pt.xi_mean);
        out += ',';
        out += format_double(pt.xi_stderr);
        out += ',';
        out += format_double(pt.w_mean);
        out += ',';
        out += format_double(pt.w_stderr);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

static_assert(std::endian::native == std::endian::little,
              "profile dumps are raw little-endian doubles");

void write_profile_dump(const std::string& path, const std::vector<double>& profile) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(profile.data()),
            static_cast<std::streamsize>(profile.size() * sizeof(double)));
    if (!f) throw Error("write failed: " + path);
}

std::vector<double> read_profile_dump(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw Error("cannot open for reading: " + path);
    const std::streamsize bytes = f.tellg();
    if (bytes % sizeof(double) != 0) throw Error("profile dump has a partial record: " + path);
    std::vector<double> out(static_cast<std::size_t>(bytes) / sizeof(double));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(out.data()), bytes);
    if (!f) throw Error("read failed: " + path);
    return out;
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

const char* const kKnownKeys[] = {
    "mode",         "out_dir",      "n_q",          "k",           "gamma_target",
    "m_pairs",      "seed",         "engine",       "phases_source", "epsilon",
    "mu",           "t_max",        "record_every", "n0",          "keep_profile",
    "k_grid",       "k_min",        "k_max",        "k_points",    "realizations",
    "tail_fraction", "epsilon_list", "critical_method", "k_gate_count", "points",
    "points_csv",
};

} // namespace

std::vector<double> ExperimentConfig::resolved_k_grid() const {
    if (!k_grid.empty()) return k_grid;
    std::vector<double> grid(k_points);
    for (int i = 0; i < k_points; ++i) {
        grid[i] = k_min + static_cast<double>(i) * (k_max - k_min) / (k_points - 1);
    }
    return grid;
}

double ExperimentConfig::resolved_k_gate_count() const {
    if (k_gate_count > 0.0) return k_gate_count;
    const std::vector<double> grid = resolved_k_grid();
    return 0.5 * (grid.front() + grid.back());
}

void ExperimentConfig::validate() const {
    if (mode != "evolve" && mode != "scan" && mode != "critical" && mode != "scaling") {
        throw ConfigError("config field 'mode': expected evolve, scan, critical or scaling, got '" +
                          mode + "'");
    }
    if (out_dir.empty()) throw ConfigError("config field 'out_dir': must not be empty");
    if (mode == "scaling") return; // no model parameters involved

    engine_from_name(engine); // throws on junk
    if (phases_source != "circuit" && phases_source != "uniform") {
        throw ConfigError("config field 'phases_source': expected circuit or uniform");
    }
    if (critical_method != "ipr" && critical_method != "w") {
        throw ConfigError("config field 'critical_method': expected ipr or w");
    }
    if (epsilon < 0.0 || mu < 0.0) {
        throw ConfigError("config fields 'epsilon'/'mu': strengths must be >= 0");
    }
    if (engine == "oracle" && (epsilon != 0.0 || mu != 0.0) && mode == "evolve") {
        throw ConfigError("imperfect runs need engine = circuit");
    }
    if (t_max < 0) throw ConfigError("config field 't_max': must be >= 0");
    if (record_every < 1) throw ConfigError("config field 'record_every': must be >= 1");
    if (realizations < 1) throw ConfigError("config field 'realizations': must be >= 1");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw ConfigError("config field 'tail_fraction': must be in (0, 1]");
    }
    if (k_grid.empty()) {
        if (k_points < 2) throw ConfigError("config field 'k_points': must be >= 2");
        if (!(k_min < k_max)) throw ConfigError("config fields 'k_min'/'k_max': need k_min < k_max");
    }
    const std::size_t dim = std::size_t{1} << n_q;
    if (n0 >= dim) throw ConfigError("config field 'n0': outside the momentum register");
    ModelParams probe{n_q, mode == "evolve" ? k : resolved_k_grid().front(), gamma_target, m_pairs,
                      seed};
    probe.validate();
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : kKnownKeys) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown config field '" + item.key() + "'");
    }

    ExperimentConfig c;
    read_field(j, "mode", c.mode);
    read_field(j, "out_dir", c.out_dir);
    read_field(j, "n_q", c.n_q);
    read_field(j, "k", c.k);
    read_field(j, "gamma_target", c.gamma_target);
    read_field(j, "m_pairs", c.m_pairs);
    read_field(j, "seed", c.seed);
    read_field(j, "engine", c.engine);
    read_field(j, "phases_source", c.phases_source);
    read_field(j, "epsilon", c.epsilon);
    read_field(j, "mu", c.mu);
    read_field(j, "t_max", c.t_max);
    read_field(j, "record_every", c.record_every);
    read_field(j, "n0", c.n0);
    read_field(j, "keep_profile", c.keep_profile);
    read_field(j, "k_grid", c.k_grid);
    read_field(j, "k_min", c.k_min);
    read_field(j, "k_max", c.k_max);
    read_field(j, "k_points", c.k_points);
    read_field(j, "realizations", c.realizations);
    read_field(j, "tail_fraction", c.tail_fraction);
    read_field(j, "epsilon_list", c.epsilon_list);
    read_field(j, "critical_method", c.critical_method);
    read_field(j, "k_gate_count", c.k_gate_count);
    read_field(j, "points_csv", c.points_csv);
    if (j.contains("points")) {
        std::vector<std::vector<double>> raw;
        read_field(j, "points", raw);
        for (const auto& pair : raw) {
            if (pair.size() != 2) {
                throw ConfigError("config field 'points': each entry must be [eps_tilde, delta_kc]");
            }
            c.points.push_back({pair[0], pair[1]});
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

namespace {

json config_json(const ExperimentConfig& c) {
    json j;
    j["mode"] = c.mode;
    j["out_dir"] = c.out_dir;
    j["n_q"] = c.n_q;
    j["k"] = c.k;
    j["gamma_target"] = c.gamma_target;
    j["m_pairs"] = c.m_pairs;
    j["seed"] = c.seed;
    j["engine"] = c.engine;
    j["phases_source"] = c.phases_source;
    j["epsilon"] = c.epsilon;
    j["mu"] = c.mu;
    j["t_max"] = c.t_max;
    j["record_every"] = c.record_every;
    j["n0"] = c.n0;
    j["keep_profile"] = c.keep_profile;
    j["k_grid"] = c.resolved_k_grid();
    j["realizations"] = c.realizations;
    j["tail_fraction"] = c.tail_fraction;
    j["epsilon_list"] = c.epsilon_list;
    j["critical_method"] = c.critical_method;
    j["k_gate_count"] = c.resolved_k_gate_count();
    if (!c.points.empty()) {
        json pts = json::array();
        for (const ScalingPoint& p : c.points) pts.push_back({p.eps_tilde, p.delta_k_c});
        j["points"] = pts;
    }
    j["points_csv"] = c.points_csv;
    return j;
}

json phase_generator_json(const PhaseGeneratorSpec& spec) {
    json j;
    j["n_q"] = spec.n_q;
    j["phi"] = spec.phi;
    json pairs = json::array();
    for (const auto& p : spec.pairs) pairs.push_back({p.control, p.target, p.phase});
    j["pairs"] = pairs;
    return j;
}

json profile_json(const ImperfectionProfile& profile) {
    json j;
    j["seed"] = profile.seed;
    j["epsilon"] = profile.epsilon;
    j["mu"] = profile.mu;
    j["eta"] = profile.etas();
    j["mu_couplings"] = profile.mu_couplings();
    return j;
}

/// Tracks produced artifacts and keeps the MANIFEST current after each file.
class ArtifactSink {
  public:
    ArtifactSink(const ExperimentConfig& config)
        : out_dir_(config.out_dir), mode_(config.mode) {
        fs::create_directories(out_dir_);
        flush_manifest("incomplete", "");
    }

    void add_text(const std::string& name, const std::string& content) {
        write_text_file((out_dir_ / name).string(), content);
        files_.push_back(name);
        flush_manifest("incomplete", "");
    }

    void add_profile(const std::string& name, const std::vector<double>& profile) {
        write_profile_dump((out_dir_ / name).string(), profile);
        files_.push_back(name);
        flush_manifest("incomplete", "");
    }

    void complete() { flush_manifest("complete", ""); }
    void fail(const std::string& message) { flush_manifest("incomplete", message); }

    const std::vector<std::string>& files() const { return files_; }
    fs::path dir() const { return out_dir_; }

  private:
    void flush_manifest(const std::string& status, const std::string& error) {
        json m;
        m["status"] = status;
        m["mode"] = mode_;
        m["files"] = files_;
        if (!error.empty()) m["error"] = error;
        write_text_file((out_dir_ / "MANIFEST").string(), m.dump(2) + "\n");
    }

    fs::path out_dir_;
    std::string mode_;
    std::vector<std::string> files_;
};

ScanConfig scan_config_from(const ExperimentConfig& c, double epsilon, double mu) {
    ScanConfig sc;
    sc.n_q = c.n_q;
    sc.k_grid = c.resolved_k_grid();
    sc.t_max = c.t_max;
    sc.n_realizations = c.realizations;
    sc.engine = engine_from_name(c.engine);
    sc.epsilon = epsilon;
    sc.mu = mu;
    sc.gamma_target = c.gamma_target;
    sc.m_pairs = c.m_pairs;
    sc.seed = c.seed;
    sc.tail_fraction = c.tail_fraction;
    return sc;
}

json scan_metadata(const ExperimentConfig& c, double epsilon, double mu) {
    json j;
    json reals = json::array();
    for (int r = 0; r < c.realizations; ++r) {
        json entry;
        entry["realization"] = r;
        RngStream disorder = make_stream(c.seed, StreamPurpose::Disorder, r);
        ModelParams params{c.n_q, c.k, c.gamma_target, c.m_pairs, c.seed};
        entry["phase_generator"] =
            phase_generator_json(build_phase_generator(c.n_q, params.pairs(), disorder));
        if (engine_from_name(c.engine) == Engine::Circuit) {
            entry["profile"] = profile_json(
                make_imperfection_profile(c.n_q, epsilon, mu, c.seed, r));
        }
        reals.push_back(entry);
    }
    j["realizations"] = reals;
    return j;
}

void run_evolve(const ExperimentConfig& c, ArtifactSink& sink) {
    ModelParams params{c.n_q, c.k, c.gamma_target, c.m_pairs, c.seed};
    const PhaseGeneratorSpec spec = build_phase_generator(params);
    StateVector state = StateVector::basis_state(c.n_q, c.n0);

    json meta;
    meta["version"] = kVersion;
    meta["config"] = config_json(c);
    meta["phase_generator"] = phase_generator_json(spec);

    ObservableSeries series;
    if (engine_from_name(c.engine) == Engine::Circuit) {
        const ImperfectionProfile profile =
            make_imperfection_profile(c.n_q, c.epsilon, c.mu, c.seed, 0);
        meta["profile"] = profile_json(profile);
        sink.add_text("metadata.json", meta.dump(2) + "\n");
        series = circuit_evolve(state, params, spec, profile, c.t_max, c.record_every, c.n0,
                                c.keep_profile);
    } else {
        const OraclePhases phases = c.phases_source == "uniform"
                                        ? OraclePhases::independent_uniform(c.n_q, c.seed, 0)
                                        : OraclePhases::from_circuit(spec);
        meta["phases_seed"] = phases.seed;
        sink.add_text("metadata.json", meta.dump(2) + "\n");
        series = oracle_evolve(state, phases, params, c.t_max, c.record_every, c.n0,
                               c.keep_profile);
    }

    sink.add_text("series.csv", series_csv(series));
    if (c.keep_profile) {
        char name[32];
        for (const ObservableRecord& rec : series.records) {
            std::snprintf(name, sizeof(name), "profile_%06d.bin", rec.t);
            sink.add_profile(name, rec.profile);
        }
    }
}

void run_scan(const ExperimentConfig& c, ArtifactSink& sink) {
    json meta;
    meta["version"] = kVersion;
    meta["config"] = config_json(c);
    meta["scan"] = scan_metadata(c, c.epsilon, c.mu);
    sink.add_text("metadata.json", meta.dump(2) + "\n");

    const ScanResult result = scan_k(scan_config_from(c, c.epsilon, c.mu));
    sink.add_text("scan.csv", scan_csv(result));
}

void run_critical(const ExperimentConfig& c, ArtifactSink& sink) {
    std::vector<double> eps_list = c.epsilon_list;
    if (eps_list.empty()) eps_list.push_back(0.0);

    json meta;
    meta["version"] = kVersion;
    meta["config"] = config_json(c);
    json per_eps = json::array();
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        json entry;
        entry["epsilon"] = eps_list[i];
        entry["scan"] = scan_metadata(c, eps_list[i], c.mu);
        per_eps.push_back(entry);
    }
    meta["per_epsilon"] = per_eps;
    sink.add_text("metadata.json", meta.dump(2) + "\n");

    ModelParams count_params{c.n_q, c.resolved_k_gate_count(), c.gamma_target, c.m_pairs, c.seed};

    std::string csv = "epsilon,eps_tilde,kc_ipr,kc_ipr_stderr,kc_w,kc_w_stderr,delta_kc\n";
    double reference = std::numeric_limits<double>::quiet_NaN();
    char name[48];
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double eps = eps_list[i];
        const ScanResult scan = scan_k(scan_config_from(c, eps, c.mu));
        std::snprintf(name, sizeof(name), "scan_eps_%02zu.csv", i);
        sink.add_text(name, scan_csv(scan));

        double kc_ipr = std::numeric_limits<double>::quiet_NaN();
        double kc_ipr_err = kc_ipr;
        double kc_w = kc_ipr;
        double kc_w_err = kc_ipr;
        try {
            const CriticalPoint p = find_critical_point(scan, CriticalMethod::IprMidpoint);
            kc_ipr = p.k_c;
            kc_ipr_err = p.stderr;
        } catch (const NoTransitionInRange&) {
        }
        try {
            const CriticalPoint p = find_critical_point(scan, CriticalMethod::WThreshold);
            kc_w = p.k_c;
            kc_w_err = p.stderr;
        } catch (const NoTransitionInRange&) {
        }

        const double kc_for_delta = c.critical_method == "w" ? kc_w : kc_ipr;
        if (i == 0) reference = kc_for_delta;
        const double delta = reference - kc_for_delta;

        csv += format_double(eps);
        csv += ',';
        csv += format_double(epsilon_tilde(eps, count_params));
        csv += ',';
        csv += format_double(kc_ipr);
        csv += ',';
        csv += format_double(kc_ipr_err);
        csv += ',';
        csv += format_double(kc_w);
        csv += ',';
        csv += format_double(kc_w_err);
        csv += ',';
        csv += format_double(delta);
        csv += '\n';
    }
    sink.add_text("critical.csv", csv);
}

std::vector<ScalingPoint> points_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("points CSV is empty");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    int col_eps = -1;
    int col_delta = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "eps_tilde") col_eps = static_cast<int>(i);
        if (header[i] == "delta_kc") col_delta = static_cast<int>(i);
    }
    if (col_eps < 0 || col_delta < 0) {
        throw ConfigError("points CSV needs 'eps_tilde' and 'delta_kc' columns");
    }
    std::vector<ScalingPoint> points;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) <= std::max(col_eps, col_delta)) {
            throw ConfigError("points CSV line " + std::to_string(line_no) + ": too few columns");
        }
        ScalingPoint p;
        p.eps_tilde = std::strtod(cells[col_eps].c_str(), nullptr);
        p.delta_k_c = std::strtod(cells[col_delta].c_str(), nullptr);
        if (std::isnan(p.eps_tilde) || std::isnan(p.delta_k_c)) continue; // failed estimates
        points.push_back(p);
    }
    return points;
}

void run_scaling(const ExperimentConfig& c, ArtifactSink& sink) {
    std::vector<ScalingPoint> points = c.points;
    if (!c.points_csv.empty()) {
        const std::vector<ScalingPoint> extra = points_from_csv(read_text_file(c.points_csv));
        points.insert(points.end(), extra.begin(), extra.end());
    }
    const ScalingFit fit = fit_scaling(points);

    json meta;
    meta["version"] = kVersion;
    meta["config"] = config_json(c);
    meta["n_points_used"] = fit.used.size();
    meta["n_points_excluded"] = fit.n_excluded;
    sink.add_text("metadata.json", meta.dump(2) + "\n");

    std::string fit_csv = "A,A_stderr,alpha,alpha_stderr,n_used,n_excluded\n";
    fit_csv += format_double(fit.a);
    fit_csv += ',';
    fit_csv += format_double(fit.a_stderr);
    fit_csv += ',';
    fit_csv += format_double(fit.alpha);
    fit_csv += ',';
    fit_csv += format_double(fit.alpha_stderr);
    fit_csv += ',';
    fit_csv += std::to_string(fit.used.size());
    fit_csv += ',';
    fit_csv += std::to_string(fit.n_excluded);
    fit_csv += '\n';
    sink.add_text("scaling.csv", fit_csv);

    std::string pts_csv = "eps_tilde,delta_kc,fit\n";
    for (const ScalingPoint& p : fit.used) {
        pts_csv += format_double(p.eps_tilde);
        pts_csv += ',';
        pts_csv += format_double(p.delta_k_c);
        pts_csv += ',';
        pts_csv += format_double(fit.predict(p.eps_tilde));
        pts_csv += '\n';
    }
    sink.add_text("scaling_points.csv", pts_csv);
}

} // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& config) {
    config.validate();
    ArtifactSink sink(config);
    try {
        if (config.mode == "evolve") {
            run_evolve(config, sink);
        } else if (config.mode == "scan") {
            run_scan(config, sink);
        } else if (config.mode == "critical") {
            run_critical(config, sink);
        } else {
            run_scaling(config, sink);
        }
    } catch (const std::exception& e) {
        sink.fail(e.what());
        throw;
    }
    sink.complete();
    ExperimentArtifacts artifacts;
    artifacts.out_dir = sink.dir().string();
    artifacts.files = sink.files();
    return artifacts;
}

} // namespace qkr
