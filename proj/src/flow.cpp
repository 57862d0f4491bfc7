#include "prbm/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "prbm/ensemble.hpp"
#include "prbm/parallel.hpp"

namespace prbm {

cplx z_flow(double E, double t)
{
    if (t < 0.0 || t > 1.0)
        throw InvalidArgument("z_flow: t must lie in [0, 1]");
    if (!(std::abs(E) < 2.0))
        throw InvalidArgument("z_flow: E must lie in the bulk (-2, 2)");
    return E + (1.0 - t) * m_sc(E);
}

FlowParams flow_params_for_target(cplx z)
{
    if (z.imag() < kFlowEtaFloor)
        throw InvalidArgument("flow_params_for_target: Im z below the floor 1e-3");
    const cplx m = m_sc(z);
    const double tf = std::norm(m);
    const double E = -2.0 * m.real() / std::abs(m);
    const cplx lhs = z_flow(E, tf);
    const cplx rhs = std::sqrt(tf) * z;
    if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) {
        std::ostringstream os;
        os.precision(17);
        os << "flow_params_for_target: z_tf(E) = " << lhs << " differs from sqrt(t_f) z = " << rhs << " (z = " << z
           << ", t_f = " << tf << ", E = " << E << ")";
        throw NumericalError(os.str());
    }
    return {tf, E};
}

Resolvent FlowState::resolvent() const
{
    if (!decomposition)
        throw InvalidArgument("FlowState::resolvent: state was simulated without decomposition");
    return prbm::resolvent(*decomposition, z);
}

FlowRun simulate_flow(const VarianceProfile& profile, double E, const std::vector<double>& checkpoints,
                      RngStream& rng, bool decompose)
{
    for (size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 0.0 || checkpoints[i] >= 1.0)
            throw InvalidArgument("simulate_flow: checkpoints must lie in [0, 1)");
        if (i > 0 && checkpoints[i] < checkpoints[i - 1])
            throw InvalidArgument("simulate_flow: checkpoints must be ascending");
    }
    const int N = profile.size();
    FlowRun run;
    run.seed = rng.root_seed();
    run.stream = rng.stream_index();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
    double prev = 0.0;
    for (double t : checkpoints) {
        if (t > prev)
            H += sample_mbm_increment(profile, t - prev, rng).matrix;
        prev = t;
        FlowState s;
        s.t = t;
        s.H = H;
        s.E = E;
        s.z = z_flow(E, t);
        if (decompose) {
            s.decomposition = eigendecompose(H);
            s.decomposition->sample_seed = run.seed;
            s.decomposition->sample_stream = run.stream;
        }
        run.states.push_back(std::move(s));
    }
    return run;
}

std::vector<double> default_checkpoints(double t_final, int count)
{
    std::vector<double> out;
    for (int k = 0; k < count; ++k)
        out.push_back((1.0 - std::ldexp(1.0, -k)) * t_final);
    return out;
}

namespace {

bool flow_flat(const ShapeParameters& shape, double t)
{
    return shape.alpha() < 1.0 && 1.0 - t <= static_cast<double>(shape.W()) / shape.N();
}

} // namespace

double flow_loop_normalizer(const ShapeParameters& shape, double t, int r)
{
    const double a = shape.alpha();
    if (flow_flat(shape, t))
        return (a < 0.0 ? 0.0 : std::pow(shape.W(), -1.2)) + std::pow(shape.N() * (1.0 - t), -1.75);
    if (a < 0.0)
        throw UnsupportedRegime("flow loop normalizer for alpha < 0 is only defined in the flat regime");
    const double p = a >= 1.0 ? 1.0 : 0.2;
    return std::pow(shape.B_t(t, 0), p) * shape.B_t(t, r);
}

double flow_tvar_normalizer(const ShapeParameters& shape, double t, int r1, int r2)
{
    const double a = shape.alpha();
    if (flow_flat(shape, t))
        return (a < 0.0 ? 0.0 : std::pow(shape.W(), -1.2)) + std::pow(shape.N() * (1.0 - t), -1.5);
    if (a < 0.0)
        throw UnsupportedRegime("flow T normalizer for alpha < 0 is only defined in the flat regime");
    if (a >= 1.0)
        return std::sqrt(shape.B_t(t, 0) * shape.B_t(t, r1) * shape.B_t(t, r2));
    return std::pow(shape.B_t(t, 0), 0.7) * std::sqrt(shape.B_t(t, std::min(r1, r2)));
}

std::vector<FlowResidualRow> track_observables(const VarianceProfile& profile, const FlowRun& run,
                                               const std::vector<LoopObservable>& loops,
                                               const std::vector<TObservable>& tvars)
{
    const ShapeParameters shape(profile);
    const int N = profile.size();
    std::vector<FlowResidualRow> rows;
    for (const auto& st : run.states) {
        const Resolvent R = st.resolvent();
        const cplx m = bulk_m(st.E);
        for (const auto& o : loops) {
            const cplx L = l_loop_2(R, profile, o.x, o.y, o.s1, o.s2);
            const cplx K = kloop2_from_product(profile, st.t, charged(m, o.s1) * charged(m, o.s2))(o.x, o.y);
            std::ostringstream id;
            id << "L" << charge_char(o.s1) << charge_char(o.s2) << "_" << o.x << "_" << o.y;
            rows.push_back({run.seed, st.t, id.str(), std::abs(L - K),
                            flow_loop_normalizer(shape, st.t, periodic_distance(o.x, o.y, N))});
        }
        for (const auto& o : tvars) {
            const cplx T = t_variable(R, profile, o.x, o.y, o.yp, o.s1, o.s2);
            const cplx Th = o.y == o.yp ? theta_propagator(profile, st.t, o.s1, o.s2, st.E)(o.x, o.y) : cplx(0.0);
            std::ostringstream id;
            id << "T" << charge_char(o.s1) << charge_char(o.s2) << "_" << o.x << "_" << o.y << "_" << o.yp;
            rows.push_back({run.seed, st.t, id.str(), std::abs(T - Th),
                            flow_tvar_normalizer(shape, st.t, periodic_distance(o.x, o.y, N),
                                                 periodic_distance(o.x, o.yp, N))});
        }
    }
    return rows;
}

void write_flow_csv(const std::vector<FlowResidualRow>& rows, std::ostream& out)
{
    out << "seed,t,spec_id,residual,normalizer\n";
    out.precision(12);
    for (const auto& r : rows)
        out << r.seed << ',' << r.t << ',' << r.spec_id << ',' << r.residual << ',' << r.normalizer << '\n';
}

double DistributionalReport::max_abs_standardized() const
{
    double w = 0.0;
    for (const auto& s : stats)
        w = std::max(w, std::abs(s.standardized_diff));
    return w;
}

std::string DistributionalReport::to_json() const
{
    nlohmann::json j;
    j["z"] = {z.real(), z.imag()};
    j["t_final"] = t_final;
    j["E"] = E;
    j["replicas"] = replicas;
    for (const auto& s : stats)
        j["stats"].push_back({{"id", s.id},
                              {"mean_direct", s.mean_direct},
                              {"mean_flow", s.mean_flow},
                              {"var_direct", s.var_direct},
                              {"var_flow", s.var_flow},
                              {"standardized_diff", s.standardized_diff}});
    return j.dump(2);
}

namespace {

constexpr int kStatCount = 5;

std::array<double, kStatCount> statistics(const Eigen::MatrixXcd& G)
{
    const int N = static_cast<int>(G.rows());
    const cplx tr = G.trace() / static_cast<double>(N);
    return {tr.real(), tr.imag(), G(0, 0).real(), G(0, 0).imag(), G(N / 2, N / 2).imag()};
}

Eigen::MatrixXcd green(const Eigen::MatrixXcd& H, cplx z)
{
    Eigen::MatrixXcd A = H;
    A.diagonal().array() -= z;
    return A.partialPivLu().inverse();
}

} // namespace

DistributionalReport distributional_check(const VarianceProfile& profile, cplx z, int replicas, RngStream& rng,
                                          int threads)
{
    if (replicas < 100)
        throw InvalidArgument("distributional_check: needs at least 100 replicas");
    const FlowParams fp = flow_params_for_target(z);
    const std::uint64_t root = (static_cast<std::uint64_t>(rng()) << 32) | rng();
    const double tf = fp.t_final;
    const cplx ztf = z_flow(fp.E, tf);

    std::vector<std::array<double, kStatCount>> direct(replicas), flow(replicas);
    parallel_for(static_cast<size_t>(replicas), threads, [&](size_t i) {
        RngStream rd(derive_seed(root, 0, i), 0);
        direct[i] = statistics(green(sample_prbm(profile, rd).matrix, z));

        RngStream rf(derive_seed(root, 1, i), 0);
        Eigen::MatrixXcd H = sample_mbm_increment(profile, 0.5 * tf, rf).matrix;
        H += sample_mbm_increment(profile, tf - 0.5 * tf, rf).matrix;
        flow[i] = statistics(std::sqrt(tf) * green(H, ztf));
    });

    static const char* ids[kStatCount] = {"trG_re", "trG_im", "G00_re", "G00_im", "ImG_mid"};
    DistributionalReport rep{z, tf, fp.E, replicas, {}};
    const double n = replicas;
    for (int s = 0; s < kStatCount; ++s) {
        double md = 0, mf = 0, vd = 0, vf = 0;
        for (int i = 0; i < replicas; ++i) {
            md += direct[i][s];
            mf += flow[i][s];
        }
        md /= n;
        mf /= n;
        for (int i = 0; i < replicas; ++i) {
            vd += (direct[i][s] - md) * (direct[i][s] - md);
            vf += (flow[i][s] - mf) * (flow[i][s] - mf);
        }
        vd /= n - 1;
        vf /= n - 1;
        const double se = std::sqrt(vd / n + vf / n);
        rep.stats.push_back({ids[s], md, mf, vd, vf, se > 0 ? (md - mf) / se : 0.0});
    }
    return rep;
}

} // namespace prbm
