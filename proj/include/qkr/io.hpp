#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkr/observables.hpp"
#include "qkr/transition_lab.hpp"

namespace qkr {

/// Full-precision decimal form (%.17g): round-trips doubles exactly.
std::string format_double(double v);

std::string series_csv(const ObservableSeries& series);
std::string scan_csv(const ScanResult& result);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// N raw little-endian doubles, no header.
void write_profile_dump(const std::string& path, const std::vector<double>& profile);
std::vector<double> read_profile_dump(const std::string& path);

/// One experiment run, parsed from JSON. Fields the file leaves out keep
/// their defaults; unknown fields are rejected.
struct ExperimentConfig {
    std::string mode = "evolve"; // evolve | scan | critical | scaling
    std::string out_dir = "out";

    int n_q = 6;
    double k = 1.8;
    double gamma_target = 0.2;
    int m_pairs = -1;
    std::uint64_t seed = 1;

    std::string engine = "oracle";          // oracle | circuit
    std::string phases_source = "circuit";  // circuit | uniform (oracle engine)
    double epsilon = 0.0;
    double mu = 0.0;

    int t_max = 10;
    int record_every = 1;
    std::size_t n0 = 0;
    bool keep_profile = false;

    std::vector<double> k_grid; // explicit grid wins over k_min/k_max/k_points
    double k_min = 1.0;
    double k_max = 2.6;
    int k_points = 17;
    int realizations = 4;
    double tail_fraction = 0.1;

    std::vector<double> epsilon_list;      // critical mode
    std::string critical_method = "ipr";   // ipr | w, used for the delta column
    double k_gate_count = 0.0;             // k plugged into n_g for eps_tilde; 0 -> grid midpoint

    std::vector<ScalingPoint> points; // scaling mode, inline points
    std::string points_csv;           // or a CSV with eps_tilde/delta_kc columns

    std::vector<double> resolved_k_grid() const;
    double resolved_k_gate_count() const;
    void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct ExperimentArtifacts {
    std::string out_dir;
    std::vector<std::string> files; // paths relative to out_dir
};

/// Executes the configured pipeline and writes CSV/JSON/binary artifacts
/// plus a MANIFEST. On error the MANIFEST is left marking the run incomplete
/// with the partial file list, and the error propagates.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);

} // namespace qkr
