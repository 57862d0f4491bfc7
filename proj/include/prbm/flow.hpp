#pragma once

#include "prbm/resolvent.hpp"
#include "prbm/spectral.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prbm {

// E + (1 - t) m(E); throws outside the bulk.
cplx z_flow(double E, double t);

struct FlowParams {
    double t_final;
    double E;
};

// t_f = |m(z)|^2 and E = -2 Re m(z) / |m(z)|, checked against z_{t_f}(E) = sqrt(t_f) z.
FlowParams flow_params_for_target(cplx z);

constexpr double kFlowEtaFloor = 1e-3;

struct FlowState {
    double t = 0.0;
    Eigen::MatrixXcd H;
    double E = 0.0;
    cplx z;
    std::optional<SpectralDecomposition> decomposition;

    double eta() const { return z.imag(); }
    Resolvent resolvent() const;
};

struct FlowRun {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<FlowState> states;
};

// Exact sampling of the matrix Brownian motion at ascending checkpoints in [0, 1).
FlowRun simulate_flow(const VarianceProfile& profile, double E, const std::vector<double>& checkpoints,
                      RngStream& rng, bool decompose = true);

// (1 - 2^{-k}) t_f for k = 0..count-1.
std::vector<double> default_checkpoints(double t_final, int count);

struct LoopObservable {
    int x, y;
    Charge s1, s2;
};
struct TObservable {
    int x, y, yp;
    Charge s1, s2;
};

struct FlowResidualRow {
    std::uint64_t seed;
    double t;
    std::string spec_id;
    double residual;     // |L - K| or |T - Theta|
    double normalizer;
    double normalized() const { return residual / normalizer; }
};

// Regime normalizers along the flow: B_t = B(1 - t, .), flat forms once 1 - t <= W/N for alpha < 1.
double flow_loop_normalizer(const ShapeParameters& shape, double t, int r);
double flow_tvar_normalizer(const ShapeParameters& shape, double t, int r1, int r2);

std::vector<FlowResidualRow> track_observables(const VarianceProfile& profile, const FlowRun& run,
                                               const std::vector<LoopObservable>& loops,
                                               const std::vector<TObservable>& tvars);
void write_flow_csv(const std::vector<FlowResidualRow>& rows, std::ostream& out);

struct StatisticComparison {
    std::string id;
    double mean_direct, mean_flow;
    double var_direct, var_flow;
    double standardized_diff;   // (mean_direct - mean_flow) / sqrt(var_d / n + var_f / n)
};

struct DistributionalReport {
    cplx z;
    double t_final;
    double E;
    int replicas;
    std::vector<StatisticComparison> stats;
    double max_abs_standardized() const;
    std::string to_json() const;
};

// Direct arm: G(z) of a PRBM sample. Flow arm: sqrt(t_f) G_{t_f}(z_{t_f}) along a two-step
// Brownian path. The arms draw from disjoint streams derived from one root seed taken from rng.
DistributionalReport distributional_check(const VarianceProfile& profile, cplx z, int replicas, RngStream& rng,
                                          int threads = 1);

} // namespace prbm
