#include "prbm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "prbm/ensemble.hpp"
#include "prbm/parallel.hpp"
#include "prbm/resolvent.hpp"
#include "prbm/spectral.hpp"

#ifndef PRBM_CODE_VERSION
#define PRBM_CODE_VERSION "unknown"
#endif

namespace prbm {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {"experiment_id", "alpha", "W",    "N",          "replicas", "kappa",
                                           "eta",           "E",     "mass", "root_seed", "output",   "profile"};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw InvalidArgument("median of an empty set");
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Cell {
    double alpha;
    int W;
    size_t index;
    std::string label() const { return "alpha=" + fmt(alpha) + ",W=" + std::to_string(W); }
};

std::vector<Cell> cells_of(const ExperimentConfig& cfg)
{
    std::vector<Cell> out;
    for (double a : cfg.alpha)
        for (int w : cfg.W)
            out.push_back({a, w, out.size()});
    return out;
}

std::uint64_t replica_seed(const ExperimentConfig& cfg, size_t cell, int replica)
{
    return derive_seed(cfg.root_seed, cell, static_cast<std::uint64_t>(replica));
}

// Runs body(cell, replica) -> rows over the grid. A throwing replica fails its whole cell.
template <class Body>
ScanTable run_grid(const ExperimentConfig& cfg, int threads, ScanTable table, Body body)
{
    const auto cells = cells_of(cfg);
    const size_t R = static_cast<size_t>(cfg.replicas);
    std::vector<std::vector<std::vector<std::string>>> slots(cells.size() * R);
    std::vector<std::string> errors(cells.size() * R);
    parallel_for(slots.size(), threads, [&](size_t i) {
        const Cell& c = cells[i / R];
        try {
            slots[i] = body(c, static_cast<int>(i % R));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& c : cells) {
        bool failed = false;
        for (size_t r = 0; r < R; ++r)
            if (!errors[c.index * R + r].empty()) {
                failed = true;
                table.cells_failed.push_back(c.label() + ": " + errors[c.index * R + r]);
                break;
            }
        if (failed)
            continue;
        for (size_t r = 0; r < R; ++r)
            for (auto& row : slots[c.index * R + r])
                table.rows.push_back(std::move(row));
    }
    return table;
}

template <class T>
std::vector<T> json_list(const json& j, const char* key)
{
    if (!j.contains(key))
        return {};
    if (j[key].is_array())
        return j[key].get<std::vector<T>>();
    return {j[key].get<T>()};
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object())
        throw InvalidArgument("config: top level must be an object");
    for (const auto& [key, _] : j.items())
        if (!kConfigKeys.count(key))
            throw InvalidArgument("config: unknown key '" + key + "'");
    ExperimentConfig c;
    try {
        c.experiment_id = j.value("experiment_id", c.experiment_id);
        c.alpha = json_list<double>(j, "alpha");
        c.W = json_list<int>(j, "W");
        c.N = j.value("N", 0);
        c.replicas = j.value("replicas", 1);
        c.kappa = j.value("kappa", c.kappa);
        c.eta = json_list<double>(j, "eta");
        c.E = json_list<double>(j, "E");
        c.mass = j.value("mass", c.mass);
        c.root_seed = j.value("root_seed", std::uint64_t{0});
        c.output = j.value("output", c.output);
        c.profile = j.value("profile", c.profile);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: wrong field type: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json() const
{
    json j = {{"experiment_id", experiment_id}, {"alpha", alpha}, {"W", W},
              {"N", N},                         {"replicas", replicas}, {"kappa", kappa},
              {"eta", eta},                     {"E", E},       {"mass", mass},
              {"root_seed", root_seed},         {"output", output}, {"profile", profile}};
    return j.dump();
}

void ExperimentConfig::validate() const
{
    if (alpha.empty() || W.empty())
        throw InvalidArgument("config: alpha and W lists must be non-empty");
    if (N < 2)
        throw InvalidArgument("config: N must be at least 2");
    if (replicas < 1)
        throw InvalidArgument("config: replicas must be at least 1");
    for (int w : W)
        if (w < 1 || 2 * w > N)
            throw InvalidArgument("config: every W must satisfy 1 <= W <= N/2");
    if (!(kappa > 0.0 && kappa <= 2.0))
        throw InvalidArgument("config: kappa must lie in (0, 2]");
    if (!(mass > 0.0 && mass <= 1.0))
        throw InvalidArgument("config: mass must lie in (0, 1]");
    if (profile != "power_law" && profile != "student_t" && profile != "cauchy")
        throw InvalidArgument("config: profile must be power_law, student_t or cauchy");
    if (profile == "cauchy")
        for (double a : alpha)
            if (a != 1.0)
                throw InvalidArgument("config: the cauchy profile has alpha = 1");
}

void ExperimentConfig::require_spectral_grid() const
{
    if (eta.empty() || E.empty())
        throw InvalidArgument("config: eta and E grids must be non-empty for this scan");
    for (double e : eta)
        if (!(e > 0.0))
            throw InvalidArgument("config: eta values must be positive");
}

VarianceProfile profile_for(const ExperimentConfig& cfg, double alpha, int W)
{
    if (cfg.profile == "student_t")
        return build_profile_function(ProfileDensity::student_t(alpha), W, cfg.N);
    if (cfg.profile == "cauchy")
        return build_profile_function(ProfileDensity::cauchy(), W, cfg.N);
    return build_power_law_profile(alpha, W, cfg.N);
}

void ScanTable::write_csv(std::ostream& out) const
{
    for (size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i)
            out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

std::string ScanTable::csv() const
{
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

ScanTable run_localization_scan(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    ScanTable t{"localization", {"alpha", "W", "N", "seed", "median_loc_len", "median_sup_norm_sq"}, {}, {}};
    return run_grid(cfg, threads, t, [&](const Cell& c, int r) {
        const auto profile = profile_for(cfg, c.alpha, c.W);
        const auto seed = replica_seed(cfg, c.index, r);
        RngStream rng(seed, 0);
        auto sample = sample_prbm(profile, rng);
        auto d = eigendecompose(sample);
        const auto rep = localization_report(d, cfg.kappa, cfg.mass);
        std::vector<double> ell, sup;
        for (const auto& e : rep.entries)
            if (e.is_bulk) {
                ell.push_back(e.loc_len);
                sup.push_back(e.sup_norm_sq);
            }
        return std::vector<std::vector<std::string>>{{fmt(c.alpha), std::to_string(c.W), std::to_string(cfg.N),
                                                      std::to_string(seed), fmt(median(ell)), fmt(median(sup))}};
    });
}

ScanTable run_local_law_scan(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    cfg.require_spectral_grid();
    ScanTable t{"locallaw", {"alpha", "W", "N", "seed", "E", "eta", "entrywise_max", "entrywise_mean", "averaged_max"},
                {}, {}};
    return run_grid(cfg, threads, t, [&](const Cell& c, int r) {
        const auto profile = profile_for(cfg, c.alpha, c.W);
        const ShapeParameters shape(profile);
        const auto seed = replica_seed(cfg, c.index, r);
        RngStream rng(seed, 0);
        const auto d = eigendecompose(sample_prbm(profile, rng));
        std::vector<std::vector<std::string>> rows;
        for (double E : cfg.E)
            for (double eta : cfg.eta) {
                const cplx z(E, eta);
                const auto R = resolvent(d, z);
                const auto res = entrywise_local_law_residual(R.G, profile, m_sc(z), shape, eta);
                rows.push_back({fmt(c.alpha), std::to_string(c.W), std::to_string(cfg.N), std::to_string(seed),
                                fmt(E), fmt(eta), fmt(res.entrywise_max), fmt(res.entrywise_mean),
                                fmt(res.averaged_max)});
            }
        return rows;
    });
}

ScanTable run_diffusion_scan(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    cfg.require_spectral_grid();
    ScanTable t{"diffusion",
                {"alpha", "W", "N", "seed", "E", "eta", "loop_max", "loop_mean", "tvar_max", "tvar_mean",
                 "normalizer_id"},
                {},
                {}};
    return run_grid(cfg, threads, t, [&](const Cell& c, int r) {
        const auto profile = profile_for(cfg, c.alpha, c.W);
        const ShapeParameters shape(profile);
        const auto seed = replica_seed(cfg, c.index, r);
        RngStream rng(seed, 0);
        const auto d = eigendecompose(sample_prbm(profile, rng));
        std::vector<std::vector<std::string>> rows;
        for (double E : cfg.E)
            for (double eta : cfg.eta) {
                SamplingPlan plan;
                plan.seed = seed;
                const auto res = diffusion_residual(resolvent(d, cplx(E, eta)), profile, shape, plan);
                rows.push_back({fmt(c.alpha), std::to_string(c.W), std::to_string(cfg.N), std::to_string(seed),
                                fmt(E), fmt(eta), fmt(res.loop.max), fmt(res.loop.mean), fmt(res.tvar.max),
                                fmt(res.tvar.mean), res.normalizer_id});
            }
        return rows;
    });
}

ScanTable run_universality_scan(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    ScanTable t{"universality", {"kind", "alpha", "W", "N", "seed", "mean_spacing_ratio"}, {}, {}};
    t = run_grid(cfg, threads, t, [&](const Cell& c, int r) {
        const auto profile = profile_for(cfg, c.alpha, c.W);
        const auto seed = replica_seed(cfg, c.index, r);
        RngStream rng(seed, 0);
        const double ratio = spacing_ratio_statistic(eigenvalues_only(sample_prbm(profile, rng).matrix), cfg.kappa);
        return std::vector<std::vector<std::string>>{{"prbm", fmt(c.alpha), std::to_string(c.W),
                                                      std::to_string(cfg.N), std::to_string(seed), fmt(ratio)}};
    });
    // GUE reference at matched N, seeds from a cell index no scan cell uses
    const std::uint64_t gue_cell = 0xFFFFFFFFull;
    std::vector<std::vector<std::string>> gue(cfg.replicas);
    std::vector<std::string> errors(cfg.replicas);
    parallel_for(gue.size(), threads, [&](size_t r) {
        const auto seed = derive_seed(cfg.root_seed, gue_cell, r);
        try {
            RngStream rng(seed, 0);
            const double ratio =
                spacing_ratio_statistic(eigenvalues_only(sample_gue(cfg.N, rng).matrix), cfg.kappa);
            gue[r] = {"gue", "nan", "0", std::to_string(cfg.N), std::to_string(seed), fmt(ratio)};
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });
    bool gue_failed = false;
    for (size_t r = 0; r < gue.size(); ++r)
        if (!errors[r].empty()) {
            if (!gue_failed)
                t.cells_failed.push_back("gue reference (replica " + std::to_string(r) + "): " + errors[r]);
            gue_failed = true;
        }
    if (!gue_failed)
        for (auto& row : gue)
            t.rows.push_back(std::move(row));
    return t;
}

std::vector<LocalizationSample> parse_localization_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InvalidArgument("localization CSV: empty input");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ','))
            header.push_back(col);
    }
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw InvalidArgument("localization CSV: missing column " + name);
        return static_cast<size_t>(it - header.begin());
    };
    const size_t ia = col("alpha"), iw = col("W"), in_ = col("N"), is = col("seed"), il = col("median_loc_len");
    std::vector<LocalizationSample> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string v;
        while (std::getline(ss, v, ','))
            f.push_back(v);
        if (f.size() != header.size())
            throw InvalidArgument("localization CSV: ragged row: " + line);
        out.push_back({std::stod(f[ia]), std::stoi(f[iw]), std::stoi(f[in_]), std::stoull(f[is]), std::stod(f[il])});
    }
    return out;
}

namespace {

struct Ols {
    double slope, intercept, r2;
};

Ols ols(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double b = sxy / sxx;
    return {b, my - b * mx, syy > 0 ? sxy * sxy / (sxx * syy) : 1.0};
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

} // namespace

ExponentFit fit_exponent(const std::vector<LocalizationSample>& samples, double alpha, int resamples,
                         std::uint64_t seed)
{
    std::map<int, std::vector<double>> by_w;
    int N = 0;
    for (const auto& s : samples)
        if (std::abs(s.alpha - alpha) < 1e-9) {
            by_w[s.W].push_back(s.median_loc_len);
            N = s.N;
        }
    std::vector<int> widths;
    std::vector<std::vector<double>> reps;
    for (auto& [w, v] : by_w)
        if (median(v) < N / 4.0) {
            widths.push_back(w);
            reps.push_back(v);
        }
    if (widths.size() < 3)
        throw InvalidArgument("fit_exponent: fewer than 3 unsaturated widths (median l < N/4) for alpha = " +
                              fmt(alpha));
    std::vector<double> lx, ly;
    for (size_t i = 0; i < widths.size(); ++i) {
        lx.push_back(std::log(widths[i]));
        ly.push_back(std::log(median(reps[i])));
    }
    const Ols fit = ols(lx, ly);

    RngStream rng(seed, 0xB0075);
    std::vector<double> slopes;
    std::vector<double> y(widths.size());
    for (int b = 0; b < resamples; ++b) {
        for (size_t i = 0; i < widths.size(); ++i) {
            std::uniform_int_distribution<size_t> pick(0, reps[i].size() - 1);
            std::vector<double> boot(reps[i].size());
            for (auto& v : boot)
                v = reps[i][pick(rng)];
            y[i] = std::log(median(boot));
        }
        slopes.push_back(ols(lx, y).slope);
    }
    ExponentFit out;
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.r2 = fit.r2;
    out.points = static_cast<int>(widths.size());
    out.widths_used = widths;
    out.ci_low = resamples > 0 ? std::min(quantile(slopes, 0.025), fit.slope) : fit.slope;
    out.ci_high = resamples > 0 ? std::max(quantile(slopes, 0.975), fit.slope) : fit.slope;
    return out;
}

std::string ExponentFit::to_json() const
{
    json j = {{"slope", slope}, {"intercept", intercept}, {"ci95", {ci_low, ci_high}},
              {"r2", r2},       {"points", points},       {"widths", widths_used}};
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : cfg.to_json()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string code_version() { return PRBM_CODE_VERSION; }

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_scan_outputs(const ExperimentConfig& cfg, const std::vector<ScanTable>& tables,
                        const std::string& started, const std::string& finished)
{
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output);
    json manifest = {{"config_hash", config_hash(cfg)}, {"code_version", code_version()},
                     {"started", started},              {"finished", finished},
                     {"rng", RngStream::algorithm_id},  {"cells_failed", json::array()},
                     {"tables", json::object()}};
    for (const auto& t : tables) {
        const fs::path path = fs::path(cfg.output) / (cfg.experiment_id + "_" + t.name + ".csv");
        std::ofstream out(path);
        if (!out)
            throw InvalidArgument("cannot write " + path.string());
        t.write_csv(out);
        manifest["tables"][t.name] = {{"path", path.filename().string()}, {"columns", t.columns}};
        for (const auto& f : t.cells_failed)
            manifest["cells_failed"].push_back(t.name + ": " + f);
    }
    std::ofstream out(fs::path(cfg.output) / (cfg.experiment_id + "_manifest.json"));
    out << manifest.dump(2) << '\n';
}

} // namespace prbm
