#include "prbm/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace prbm {

Resolvent resolvent(const SpectralDecomposition& d, cplx z)
{
    if (!(z.imag() > 0.0))
        throw InvalidArgument("resolvent: Im z must be positive");
    Eigen::VectorXcd inv(d.size());
    for (int k = 0; k < d.size(); ++k)
        inv(k) = 1.0 / (d.eigenvalues(k) - z);
    Resolvent R;
    R.z = z;
    R.G = (d.eigenvectors * inv.asDiagonal()) * d.eigenvectors.adjoint();
    R.Gadj = R.G.adjoint();
    return R;
}

double identity_residual(const Eigen::MatrixXcd& H, const Resolvent& R)
{
    const int N = R.size();
    Eigen::MatrixXcd A = H;
    A.diagonal().array() -= R.z;
    return (A * R.G - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
}

LocalLawResidual entrywise_local_law_residual(const Eigen::MatrixXcd& G, const VarianceProfile& profile, cplx m,
                                              const ShapeParameters& shape, double eta)
{
    const int N = static_cast<int>(G.rows());
    std::vector<double> inv_env(N / 2 + 1);
    for (int r = 0; r <= N / 2; ++r)
        inv_env[r] = 1.0 / shape.B(eta, r);
    LocalLawResidual out{0.0, 0.0, 0.0};
    double sum = 0.0;
    for (int y = 0; y < N; ++y)
        for (int x = 0; x < N; ++x) {
            const cplx d = x == y ? G(x, y) - m : G(x, y);
            const double v = std::norm(d) * inv_env[periodic_distance(x, y, N)];
            out.entrywise_max = std::max(out.entrywise_max, v);
            sum += v;
        }
    out.entrywise_mean = sum / (static_cast<double>(N) * N);
    const double B0 = shape.B(eta, 0);
    for (int x = 0; x < N; ++x) {
        // rows of S sum to 1, so this is sum_y S_xy G_yy - m
        cplx s = 0.0;
        for (int y = 0; y < N; ++y)
            s += profile(x, y) * (G(y, y) - m);
        out.averaged_max = std::max(out.averaged_max, std::abs(s) / B0);
    }
    return out;
}

cplx l_loop_2(const Resolvent& R, const VarianceProfile& profile, int x, int y, Charge s1, Charge s2)
{
    const auto& A = R[s1];
    const auto& B = R[s2];
    const int N = R.size();
    cplx total = 0.0;
    for (int b = 0; b < N; ++b) {
        const double syb = profile(y, b);
        if (syb == 0.0)
            continue;
        cplx inner = 0.0;
        for (int a = 0; a < N; ++a)
            inner += profile(x, a) * A(b, a) * B(a, b);
        total += syb * inner;
    }
    return total;
}

Eigen::MatrixXcd l_loop_matrix(const Resolvent& R, const VarianceProfile& profile, Charge s1, Charge s2)
{
    const Eigen::MatrixXcd P = R[s2].cwiseProduct(R[s1].transpose());
    const Eigen::MatrixXd S = profile.dense();
    return S * P * S;
}

cplx k_loop_2(const VarianceProfile& profile, double E, double t, int x, int y, Charge s1, Charge s2)
{
    const cplx m = bulk_m(E);
    return kloop2_from_product(profile, t, charged(m, s1) * charged(m, s2))(x, y);
}

static cplx charge_product_at(cplx z, Charge s1, Charge s2)
{
    const cplx m = m_sc(z);
    return charged(m, s1) * charged(m, s2);
}

Circulant k_loop_2_at(const VarianceProfile& profile, cplx z, Charge s1, Charge s2)
{
    return kloop2_from_product(profile, 1.0, charge_product_at(z, s1, s2));
}

Circulant theta_at(const VarianceProfile& profile, cplx z, Charge s1, Charge s2)
{
    return theta_from_product(profile, 1.0, charge_product_at(z, s1, s2));
}

cplx t_variable(const Resolvent& R, const VarianceProfile& profile, int x, int y, int yp, Charge s1, Charge s2)
{
    const auto& A = R[s1];
    const auto& B = R[s2];
    cplx s = 0.0;
    for (int a = 0; a < R.size(); ++a)
        s += profile(x, a) * A(y, a) * B(a, yp);
    return s;
}

static void check_spec(const LoopSpec& spec, int n_sites, int cap, int N)
{
    const int n = static_cast<int>(spec.charges.size());
    if (n < 1 || n > cap)
        throw InvalidArgument("loop length " + std::to_string(n) + " outside [1, " + std::to_string(cap) + "]");
    if (static_cast<int>(spec.sites.size()) != n_sites)
        throw InvalidArgument("loop spec: wrong number of sites");
    for (int x : spec.sites)
        if (x < 0 || x >= N)
            throw InvalidArgument("loop spec: site out of range");
}

cplx n_loop(const Resolvent& R, const VarianceProfile& profile, const LoopSpec& spec, int cap)
{
    const int N = R.size();
    const int n = static_cast<int>(spec.charges.size());
    check_spec(spec, n, cap, N);
    Eigen::MatrixXcd M = R[spec.charges[0]];
    for (int i = 0; i < n; ++i) {
        if (i > 0)
            M = M * R[spec.charges[i]];
        for (int a = 0; a < N; ++a)
            M.col(a) *= profile(spec.sites[i], a);
    }
    return M.trace();
}

cplx n_chain(const Resolvent& R, const VarianceProfile& profile, const LoopSpec& spec, int a, int b, int cap)
{
    const int N = R.size();
    const int n = static_cast<int>(spec.charges.size());
    check_spec(spec, n - 1, cap, N);
    Eigen::RowVectorXcd v = R[spec.charges[0]].row(a);
    for (int i = 1; i < n; ++i) {
        for (int c = 0; c < N; ++c)
            v(c) *= profile(spec.sites[i - 1], c);
        v = v * R[spec.charges[i]];
    }
    return v(b);
}

WardResiduals ward_identity_residuals(const Resolvent& R, const VarianceProfile& profile)
{
    const double eta = R.eta();
    const Eigen::MatrixXcd ImG = (R.G - R.Gadj) / cplx(0.0, 2.0);
    WardResiduals w{0.0, 0.0, 0.0};

    // sum_x |G_xy|^2 = Im G_yy / eta
    {
        const Eigen::VectorXd lhs = R.G.cwiseAbs2().colwise().sum().transpose();
        const Eigen::VectorXd rhs = ImG.diagonal().real() / eta;
        w.green = (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
    }
    // sum_y L^{(-,+)}_xy = sum_a S_xa Im G_aa / eta
    {
        const Eigen::MatrixXd S = profile.dense();
        const Eigen::MatrixXcd L = l_loop_matrix(R, profile, Charge::Minus, Charge::Plus);
        const Eigen::VectorXcd lhs = L.rowwise().sum();
        const Eigen::VectorXcd rhs = S * (ImG.diagonal() / eta);
        w.loop = (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
    }
    // sum_x T^{(s,-s)}_{x,yy'} = (G(s) G(-s))_yy' = (Im G)_yy' / eta, all (y, y')
    {
        double worst = 0.0;
        const double scale = (ImG / eta).cwiseAbs().maxCoeff();
        const Eigen::VectorXcd colsum = profile.dense().colwise().sum().transpose().cast<cplx>();
        for (Charge s : {Charge::Plus, Charge::Minus}) {
            const Eigen::MatrixXcd lhs = R[s] * colsum.asDiagonal() * R[flip(s)];
            worst = std::max(worst, (lhs - ImG / eta).cwiseAbs().maxCoeff() / scale);
        }
        w.tvar = worst;
    }
    return w;
}

ResidualStats summarize(std::vector<double> v)
{
    ResidualStats s;
    s.count = static_cast<int>(v.size());
    if (v.empty())
        return s;
    std::sort(v.begin(), v.end());
    s.max = v.back();
    double sum = 0.0;
    for (double x : v)
        sum += x;
    s.mean = sum / v.size();
    const size_t idx = static_cast<size_t>(std::ceil(0.99 * v.size())) - 1;
    s.p99 = v[std::min(idx, v.size() - 1)];
    return s;
}

namespace {

bool flat_regime(const ShapeParameters& shape, cplx z)
{
    return shape.alpha() < 1.0 && z.imag() <= shape.eta_flat();
}

} // namespace

double loop_normalizer(const ShapeParameters& shape, cplx z, int r, std::string* id)
{
    const double a = shape.alpha();
    const double Nim = shape.N() * z.imag();
    if (flat_regime(shape, z)) {
        if (id)
            *id = a < 0.0 ? "flat_neg" : "flat";
        return (a < 0.0 ? 0.0 : std::pow(shape.W(), -1.2)) + std::pow(Nim, -1.75);
    }
    if (a < 0.0)
        throw UnsupportedRegime("quantum diffusion normalizer for alpha < 0 is only defined in the flat regime");
    const double eta = 1.0 - std::norm(m_sc(z));
    if (a >= 1.0) {
        if (id)
            *id = "B0_Br";
        return shape.B(eta, 0) * shape.B(eta, r);
    }
    if (id)
        *id = "B0^(1/5)_Br";
    return std::pow(shape.B(eta, 0), 0.2) * shape.B(eta, r);
}

double tvar_normalizer(const ShapeParameters& shape, cplx z, int r1, int r2, std::string* id)
{
    const double a = shape.alpha();
    const double Nim = shape.N() * z.imag();
    if (flat_regime(shape, z)) {
        if (id)
            *id = a < 0.0 ? "flat_neg" : "flat";
        return (a < 0.0 ? 0.0 : std::pow(shape.W(), -1.2)) + std::pow(Nim, -1.5);
    }
    if (a < 0.0)
        throw UnsupportedRegime("T-variable normalizer for alpha < 0 is only defined in the flat regime");
    const double eta = 1.0 - std::norm(m_sc(z));
    if (a >= 1.0) {
        if (id)
            *id = "B0^(1/2)_(Br1_Br2)^(1/2)";
        return std::sqrt(shape.B(eta, 0) * shape.B(eta, r1) * shape.B(eta, r2));
    }
    if (id)
        *id = "B0^(7/10)_Bmin^(1/2)";
    return std::pow(shape.B(eta, 0), 0.7) * std::sqrt(shape.B(eta, std::min(r1, r2)));
}

DiffusionResidual diffusion_residual(const Resolvent& R, const VarianceProfile& profile, const ShapeParameters& shape,
                                     const SamplingPlan& plan)
{
    const int N = R.size();
    const cplx z = R.z;
    const Charge charges[2] = {Charge::Minus, Charge::Plus};
    Circulant K[2][2], Th[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            K[i][j] = k_loop_2_at(profile, z, charges[i], charges[j]);
            Th[i][j] = theta_at(profile, z, charges[i], charges[j]);
        }

    DiffusionResidual out;
    out.plan = plan;
    const int stride = plan.lattice_stride > 0 ? plan.lattice_stride : std::max(1, N / 8);
    out.plan.lattice_stride = stride;

    std::vector<double> loop_vals, tvar_vals;
    auto add_loop = [&](int x, int y, int i, int j) {
        const cplx L = l_loop_2(R, profile, x, y, charges[i], charges[j]);
        const int r = periodic_distance(x, y, N);
        loop_vals.push_back(std::abs(L - K[i][j](x, y)) / loop_normalizer(shape, z, r, &out.normalizer_id));
    };
    auto add_tvar = [&](int x, int y, int yp, int i, int j) {
        const cplx T = t_variable(R, profile, x, y, yp, charges[i], charges[j]);
        const cplx Theta = y == yp ? Th[i][j](x, y) : cplx(0.0);
        tvar_vals.push_back(std::abs(T - Theta) / tvar_normalizer(shape, z, periodic_distance(x, y, N),
                                                                  periodic_distance(x, yp, N)));
    };

    RngStream rng(plan.seed, 0x5A3D1E);
    std::uniform_int_distribution<int> site(0, N - 1), charge(0, 1);
    for (int k = 0; k < plan.random_tuples; ++k) {
        const int x = site(rng), y = site(rng), yp = site(rng);
        const int i = charge(rng), j = charge(rng);
        add_loop(x, y, i, j);
        add_tvar(x, y, yp, i, j);
    }
    for (int x = 0; x < N; x += stride)
        for (int y = 0; y < N; y += stride)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    add_loop(x, y, i, j);
                    add_tvar(x, y, y, i, j);
                }
    out.loop = summarize(std::move(loop_vals));
    out.tvar = summarize(std::move(tvar_vals));
    return out;
}

} // namespace prbm
