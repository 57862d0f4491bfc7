#pragma once

#include "prbm/deterministic.hpp"
#include "prbm/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace prbm {

// G(z) = (H - z)^{-1} together with G(conj z) = G(z)^*.
struct Resolvent {
    cplx z;
    Eigen::MatrixXcd G;
    Eigen::MatrixXcd Gadj;
    std::string source = "decomposition";

    int size() const { return static_cast<int>(G.rows()); }
    double eta() const { return z.imag(); }
    const Eigen::MatrixXcd& operator[](Charge s) const { return s == Charge::Plus ? G : Gadj; }
};

Resolvent resolvent(const SpectralDecomposition& d, cplx z);
// max |((H - z) G - I)_xy|
double identity_residual(const Eigen::MatrixXcd& H, const Resolvent& R);

struct LocalLawResidual {
    double entrywise_max;    // max |G_xy - m delta_xy|^2 / B(eta, |x-y|)
    double entrywise_mean;
    double averaged_max;     // max_x |sum_y S_xy G_yy - m| / B(eta, 0)
};
LocalLawResidual entrywise_local_law_residual(const Eigen::MatrixXcd& G, const VarianceProfile& profile, cplx m,
                                              const ShapeParameters& shape, double eta);

// sum_{a,b} S_xa S_yb G(s1)_ba G(s2)_ab
cplx l_loop_2(const Resolvent& R, const VarianceProfile& profile, int x, int y, Charge s1, Charge s2);
// all (x, y) at once: S P S with P_ab = G(s2)_ab G(s1)_ba
Eigen::MatrixXcd l_loop_matrix(const Resolvent& R, const VarianceProfile& profile, Charge s1, Charge s2);

// Flow version (m(E) with time t) and spectral-parameter version (m(z_sigma), t = 1).
cplx k_loop_2(const VarianceProfile& profile, double E, double t, int x, int y, Charge s1, Charge s2);
Circulant k_loop_2_at(const VarianceProfile& profile, cplx z, Charge s1, Charge s2);
Circulant theta_at(const VarianceProfile& profile, cplx z, Charge s1, Charge s2);

// sum_a S_xa G(s1)_ya G(s2)_ay'
cplx t_variable(const Resolvent& R, const VarianceProfile& profile, int x, int y, int yp, Charge s1, Charge s2);

struct LoopSpec {
    Charges charges;
    std::vector<int> sites;
};

constexpr int kDefaultLoopCap = 6;

// Tr prod_i G(s_i) S^{(x_i)}
cplx n_loop(const Resolvent& R, const VarianceProfile& profile, const LoopSpec& spec, int cap = kDefaultLoopCap);
// (G(s_1) S^{(x_1)} G(s_2) ... S^{(x_{n-1})} G(s_n))_ab; spec.sites holds x_1..x_{n-1}.
cplx n_chain(const Resolvent& R, const VarianceProfile& profile, const LoopSpec& spec, int a, int b,
             int cap = kDefaultLoopCap);

struct WardResiduals {
    double green;   // sum_x |G_xy|^2 vs Im G_yy / eta
    double loop;    // sum_y L^{(-,+)}_xy vs Im Tr(G S^x) / eta
    double tvar;    // sum_x T^{(s,-s)}_{x,yy'} vs (Im G)_yy' / eta
};
// Relative residuals: max deviation divided by max |right-hand side|.
WardResiduals ward_identity_residuals(const Resolvent& R, const VarianceProfile& profile);

struct SamplingPlan {
    int random_tuples = 256;
    int lattice_stride = 0;   // 0 picks max(1, N/8); lattice covers all four charge pairs
    std::uint64_t seed = 0;
};

struct ResidualStats {
    double max = 0.0;
    double mean = 0.0;
    double p99 = 0.0;
    int count = 0;
};
ResidualStats summarize(std::vector<double> values);

struct DiffusionResidual {
    ResidualStats loop;
    ResidualStats tvar;
    std::string normalizer_id;
    SamplingPlan plan;
};

// (L - K) / normalizer and (T - Theta) / normalizer on sampled tuples. Normalizers use
// B(1 - |m(z)|^2, .) and switch to the flat forms when Im z <= eta_flat for alpha < 1.
DiffusionResidual diffusion_residual(const Resolvent& R, const VarianceProfile& profile, const ShapeParameters& shape,
                                     const SamplingPlan& plan = {});

double loop_normalizer(const ShapeParameters& shape, cplx z, int r, std::string* id = nullptr);
double tvar_normalizer(const ShapeParameters& shape, cplx z, int r1, int r2, std::string* id = nullptr);

} // namespace prbm
