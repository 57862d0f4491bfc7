#pragma once

#include "prbm/profile.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace prbm {

struct ExperimentConfig {
    std::string experiment_id = "scan";
    std::vector<double> alpha;
    std::vector<int> W;
    int N = 0;
    int replicas = 1;
    double kappa = 0.1;
    std::vector<double> eta;
    std::vector<double> E;
    double mass = 0.5;
    std::uint64_t root_seed = 0;
    std::string output = ".";
    std::string profile = "power_law";   // power_law | student_t | cauchy

    // Throws InvalidArgument on unknown keys or violated invariants.
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_json() const;
    void validate() const;
    void require_spectral_grid() const;   // non-empty eta and E grids
};

VarianceProfile profile_for(const ExperimentConfig& cfg, double alpha, int W);

// A scan result: fixed columns, rows already formatted, cells that threw.
struct ScanTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> cells_failed;

    void write_csv(std::ostream& out) const;
    std::string csv() const;
};

ScanTable run_localization_scan(const ExperimentConfig& cfg, int threads = 1);
ScanTable run_local_law_scan(const ExperimentConfig& cfg, int threads = 1);
ScanTable run_diffusion_scan(const ExperimentConfig& cfg, int threads = 1);
// Per-seed mean spacing ratios; GUE reference rows carry kind "gue".
ScanTable run_universality_scan(const ExperimentConfig& cfg, int threads = 1);

struct LocalizationSample {
    double alpha;
    int W;
    int N;
    std::uint64_t seed;
    double median_loc_len;
};

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double r2 = 0.0;
    int points = 0;
    std::vector<int> widths_used;
    std::string to_json() const;
};

std::vector<LocalizationSample> parse_localization_csv(std::istream& in);
// OLS of log median-l on log W over unsaturated cells (median < N/4) with a percentile
// bootstrap over replicas. Throws InvalidArgument with fewer than 3 usable widths.
ExponentFit fit_exponent(const std::vector<LocalizationSample>& samples, double alpha, int resamples = 1000,
                         std::uint64_t seed = 0);

// FNV-1a of the canonical config JSON.
std::string config_hash(const ExperimentConfig& cfg);
std::string code_version();

// Writes <output>/<experiment_id>_<table>.csv plus <experiment_id>_manifest.json.
void write_scan_outputs(const ExperimentConfig& cfg, const std::vector<ScanTable>& tables,
                        const std::string& started, const std::string& finished);
std::string utc_timestamp();

} // namespace prbm
