#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "prbm/certify.hpp"
#include "prbm/ensemble.hpp"
#include "prbm/experiments.hpp"
#include "prbm/flow.hpp"
#include "prbm/kloop.hpp"
#include "prbm/spectral.hpp"

using namespace prbm;

namespace {

struct ModelArgs {
    double alpha = 1.5;
    int W = 16;
    int N = 256;
    std::string density = "power_law";
};

void add_model(CLI::App* app, ModelArgs& m)
{
    app->add_option("--alpha", m.alpha, "tail exponent");
    app->add_option("--W", m.W, "bandwidth");
    app->add_option("--N", m.N, "matrix size");
    app->add_option("--density", m.density, "power_law | student_t | cauchy")
        ->check(CLI::IsMember({"power_law", "student_t", "cauchy"}));
}

VarianceProfile make_profile(const ModelArgs& m)
{
    if (m.density == "student_t")
        return build_profile_function(ProfileDensity::student_t(m.alpha), m.W, m.N);
    if (m.density == "cauchy")
        return build_profile_function(ProfileDensity::cauchy(), m.W, m.N);
    return build_power_law_profile(m.alpha, m.W, m.N);
}

// stdout when path is empty or "-"
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_)
                throw InvalidArgument("cannot open output " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out)
{
    if (path.empty())
        throw InvalidArgument("--config is required");
    auto cfg = ExperimentConfig::from_file(path);
    if (seed)
        cfg.root_seed = *seed;
    if (!out.empty())
        cfg.output = out;
    return cfg;
}

int finish_scan(const ExperimentConfig& cfg, const std::vector<ScanTable>& tables, const std::string& started)
{
    write_scan_outputs(cfg, tables, started, utc_timestamp());
    int failed = 0;
    for (const auto& t : tables)
        for (const auto& f : t.cells_failed) {
            std::cerr << "cell failed [" << t.name << "] " << f << '\n';
            ++failed;
        }
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Power-law random band matrices: sampling, spectra, loops and scans"};
    app.require_subcommand(1);

    std::string config_path, out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config JSON");
        sub->add_option("--seed", seed, "root seed override");
        sub->add_option("--out", out, "output file or directory");
        sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    };

    ModelArgs model;
    auto* profile_cmd = app.add_subcommand("profile", "print a variance profile as JSON");
    add_model(profile_cmd, model);
    common(profile_cmd);

    auto* sample_cmd = app.add_subcommand("sample", "write one PRBM sample as little-endian complex64");
    add_model(sample_cmd, model);
    common(sample_cmd);
    std::uint64_t stream = 0;
    sample_cmd->add_option("--stream", stream, "stream index");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of one sample");
    add_model(spectrum_cmd, model);
    common(spectrum_cmd);

    auto* loc_cmd = app.add_subcommand("localization", "localization-length scan from a config");
    common(loc_cmd);
    auto* ll_cmd = app.add_subcommand("locallaw", "local-law residual scan from a config");
    common(ll_cmd);
    auto* diff_cmd = app.add_subcommand("diffusion", "quantum-diffusion residual scan from a config");
    common(diff_cmd);

    auto* scan_cmd = app.add_subcommand("scan", "run several scans from one config");
    common(scan_cmd);
    std::vector<std::string> kinds{"localization"};
    scan_cmd->add_option("--kind", kinds, "localization, locallaw, diffusion, universality")
        ->check(CLI::IsMember({"localization", "locallaw", "diffusion", "universality"}));

    auto* fit_cmd = app.add_subcommand("fit", "exponent fit of a localization scan CSV");
    std::string fit_in;
    double fit_alpha = 0.0;
    int resamples = 1000;
    fit_cmd->add_option("--in", fit_in, "localization CSV")->required();
    fit_cmd->add_option("--alpha", fit_alpha, "alpha filter")->required();
    fit_cmd->add_option("--resamples", resamples, "bootstrap resamples");
    common(fit_cmd);

    auto* kloop_cmd = app.add_subcommand("kloops", "deterministic K-loops: Ward check and tree-bound constant");
    add_model(kloop_cmd, model);
    common(kloop_cmd);
    double kE = 0.0, kt = 0.5;
    std::string kcharges = "+-";
    kloop_cmd->add_option("--E", kE, "flow energy in (-2, 2)");
    kloop_cmd->add_option("--t", kt, "flow time in [0, 1)");
    kloop_cmd->add_option("--charges", kcharges, "charge string such as +-+");

    auto* flow_cmd = app.add_subcommand("flow", "flow distributional check or observable tracking");
    add_model(flow_cmd, model);
    common(flow_cmd);
    double zre = 0.3, zim = 0.2;
    int replicas = 1000;
    bool track = false;
    flow_cmd->add_option("--zre", zre, "Re z");
    flow_cmd->add_option("--zim", zim, "Im z");
    flow_cmd->add_option("--replicas", replicas, "replicas per arm");
    flow_cmd->add_flag("--track", track, "track loop and T residuals along one flow run instead");

    auto* cert_cmd = app.add_subcommand("certify", "fit the constants of the propagator bound families");
    add_model(cert_cmd, model);
    common(cert_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        const std::uint64_t s = seed.value_or(0);
        if (profile_cmd->parsed()) {
            Output o(out);
            o.stream() << make_profile(model).to_json().dump(2) << '\n';
        } else if (sample_cmd->parsed()) {
            RngStream rng(s, stream);
            const auto h = sample_prbm(make_profile(model), rng);
            if (out.empty() || out == "-")
                throw InvalidArgument("sample needs --out <file>");
            Output o(out);
            write_binary(h, o.stream());
        } else if (spectrum_cmd->parsed()) {
            RngStream rng(s, 0);
            const auto ev = eigenvalues_only(sample_prbm(make_profile(model), rng).matrix);
            Output o(out);
            o.stream().precision(15);
            o.stream() << "k,lambda\n";
            for (int k = 0; k < ev.size(); ++k)
                o.stream() << k << ',' << ev[k] << '\n';
        } else if (loc_cmd->parsed() || ll_cmd->parsed() || diff_cmd->parsed() || scan_cmd->parsed()) {
            const auto cfg = load_config(config_path, seed, out);
            const auto started = utc_timestamp();
            std::vector<std::string> todo = kinds;
            if (loc_cmd->parsed())
                todo = {"localization"};
            if (ll_cmd->parsed())
                todo = {"locallaw"};
            if (diff_cmd->parsed())
                todo = {"diffusion"};
            std::vector<ScanTable> tables;
            for (const auto& k : todo) {
                if (k == "localization")
                    tables.push_back(run_localization_scan(cfg, threads));
                else if (k == "locallaw")
                    tables.push_back(run_local_law_scan(cfg, threads));
                else if (k == "diffusion")
                    tables.push_back(run_diffusion_scan(cfg, threads));
                else
                    tables.push_back(run_universality_scan(cfg, threads));
            }
            return finish_scan(cfg, tables, started);
        } else if (fit_cmd->parsed()) {
            std::ifstream in(fit_in);
            if (!in)
                throw InvalidArgument("cannot open " + fit_in);
            const auto fit = fit_exponent(parse_localization_csv(in), fit_alpha, resamples, s);
            Output o(out);
            o.stream() << fit.to_json() << '\n';
        } else if (kloop_cmd->parsed()) {
            const auto profile = make_profile(model);
            const auto charges = charges_from_string(kcharges);
            Output o(out);
            if (charges.size() >= 2 && charges.front() != charges.back())
                o.stream() << "ward_residual," << kloop_ward_check(profile, kE, kt, charges) << '\n';
            if (profile.alpha() >= 1.0) {
                TreeBoundReport::write_csv_header(o.stream());
                verify_tree_bound(profile, kE, kt, charges, {}, s).write_csv(o.stream());
            }
        } else if (flow_cmd->parsed()) {
            const auto profile = make_profile(model);
            RngStream rng(s, 0);
            Output o(out);
            const cplx z(zre, zim);
            if (track) {
                const auto fp = flow_params_for_target(z);
                const auto run = simulate_flow(profile, fp.E, default_checkpoints(fp.t_final, 6), rng);
                const int N = profile.size();
                std::vector<LoopObservable> loops;
                std::vector<TObservable> tvars;
                for (Charge a : {Charge::Plus, Charge::Minus})
                    for (Charge b : {Charge::Plus, Charge::Minus}) {
                        loops.push_back({0, N / 4, a, b});
                        tvars.push_back({0, N / 4, N / 4, a, b});
                    }
                write_flow_csv(track_observables(profile, run, loops, tvars), o.stream());
            } else {
                o.stream() << distributional_check(profile, z, replicas, rng, threads).to_json() << '\n';
            }
        } else if (cert_cmd->parsed()) {
            const auto profile = make_profile(model);
            const auto rep = certify_assumption_bounds(profile, default_t_grid(model.N),
                                                       default_xi_grid(CertificationOptions{}.c0, 24));
            Output o(out);
            rep.write_csv(o.stream());
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedRegime& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
