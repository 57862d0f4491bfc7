#include "prbm/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace prbm {

namespace {

void check_cap(int N, int cap)
{
    if (N > cap)
        throw InvalidArgument("eigendecompose: N=" + std::to_string(N) + " exceeds cap " + std::to_string(cap));
}

} // namespace

SpectralDecomposition eigendecompose(const Eigen::MatrixXcd& H, int cap)
{
    const int N = static_cast<int>(H.rows());
    check_cap(N, cap);
    SpectralDecomposition d;
    d.eigenvalues.resize(N);
    d.eigenvectors.resize(N, N);
    if (N == 0)
        return d;
    Eigen::MatrixXcd A = H;   // column-major, destroyed by the solver
    std::vector<lapack_int> isuppz(2 * N);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'U', N, reinterpret_cast<lapack_complex_double*>(A.data()), N, 0.0, 0.0, 0, 0,
        0.0, &found, d.eigenvalues.data(), reinterpret_cast<lapack_complex_double*>(d.eigenvectors.data()), N,
        isuppz.data());
    if (info != 0 || found != N)
        throw NumericalError("zheevr failed (info=" + std::to_string(info) + ")");
    return d;
}

SpectralDecomposition eigendecompose(const HermitianSample& sample, int cap)
{
    try {
        auto d = eigendecompose(sample.matrix, cap);
        d.sample_seed = sample.seed;
        d.sample_stream = sample.stream;
        return d;
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << e.what() << " for sample seed=" << sample.seed << " stream=" << sample.stream;
        throw NumericalError(os.str());
    }
}

Eigen::VectorXd eigenvalues_only(const Eigen::MatrixXcd& H, int cap)
{
    const int N = static_cast<int>(H.rows());
    check_cap(N, cap);
    Eigen::VectorXd w(N);
    if (N == 0)
        return w;
    Eigen::MatrixXcd A = H;
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', N, reinterpret_cast<lapack_complex_double*>(A.data()), N, w.data());
    if (info != 0)
        throw NumericalError("zheevd failed (info=" + std::to_string(info) + ")");
    return w;
}

double SpectralDecomposition::max_residual(const Eigen::MatrixXcd& H) const
{
    const Eigen::MatrixXcd R = H * eigenvectors - eigenvectors * eigenvalues.asDiagonal();
    return R.colwise().norm().maxCoeff();
}

double SpectralDecomposition::orthonormality_error() const
{
    const int N = size();
    return (eigenvectors.adjoint() * eigenvectors - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
}

int localization_length_weights(const std::vector<double>& w, double mass)
{
    const int N = static_cast<int>(w.size());
    if (N == 0)
        throw InvalidArgument("localization_length: empty vector");
    if (!(mass > 0.0 && mass <= 1.0))
        throw InvalidArgument("localization_length: mass must lie in (0, 1]");
    double total = 0.0;
    for (double v : w)
        total += v;
    if (std::abs(total - 1.0) > 1e-8)
        throw InvalidArgument("localization_length: vector is not normalized");

    // prefix over the doubled circle
    std::vector<double> pre(2 * N + 1, 0.0);
    for (int i = 0; i < 2 * N; ++i)
        pre[i + 1] = pre[i] + w[i % N];
    // exact ties count as reaching the threshold
    const double target = mass - 1e-12;
    auto reaches = [&](int l) {
        const int width = 2 * l + 1;
        if (width >= N)
            return true;
        for (int start = 0; start < N; ++start)
            if (pre[start + width] - pre[start] >= target)
                return true;
        return false;
    };
    int lo = 0, hi = N / 2;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (reaches(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

int localization_length(const Eigen::Ref<const Eigen::VectorXcd>& psi, double mass)
{
    std::vector<double> w(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        w[i] = std::norm(psi(i));
    return localization_length_weights(w, mass);
}

std::vector<int> bulk_filter(const Eigen::VectorXd& ev, double kappa)
{
    if (!(kappa > 0.0 && kappa <= 2.0))
        throw InvalidArgument("bulk_filter: kappa must lie in (0, 2]");
    std::vector<int> idx;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (std::abs(ev(k)) <= 2.0 - kappa)
            idx.push_back(static_cast<int>(k));
    return idx;
}

std::vector<int> bulk_filter(const SpectralDecomposition& d, double kappa) { return bulk_filter(d.eigenvalues, kappa); }

cplx que_observable(const VarianceProfile& profile, int x, const Eigen::Ref<const Eigen::VectorXcd>& psi_i,
                    const Eigen::Ref<const Eigen::VectorXcd>& psi_j, bool same_index)
{
    const int N = profile.size();
    if (psi_i.size() != N || psi_j.size() != N)
        throw InvalidArgument("que_observable: vector size does not match profile");
    cplx s = 0.0;
    for (int a = 0; a < N; ++a)
        s += profile(x, a) * std::conj(psi_i(a)) * psi_j(a);
    if (same_index)
        s -= 1.0 / N;
    return s;
}

double spacing_ratio_statistic(const Eigen::VectorXd& ev, double kappa)
{
    const auto bulk = bulk_filter(ev, kappa);
    if (bulk.size() < 50)
        throw InvalidArgument("spacing_ratio_statistic: fewer than 50 bulk eigenvalues");
    std::vector<double> lam;
    for (int k : bulk)
        lam.push_back(ev(k));
    std::sort(lam.begin(), lam.end());
    double sum = 0.0;
    int count = 0;
    for (size_t k = 0; k + 2 < lam.size(); ++k) {
        const double s1 = lam[k + 1] - lam[k];
        const double s2 = lam[k + 2] - lam[k + 1];
        const double hi = std::max(s1, s2);
        if (hi <= 0.0)
            continue;
        sum += std::min(s1, s2) / hi;
        ++count;
    }
    if (count == 0)
        throw InvalidArgument("spacing_ratio_statistic: no nondegenerate gaps");
    return sum / count;
}

LocalizationReport localization_report(const SpectralDecomposition& d, double kappa, double mass)
{
    LocalizationReport rep;
    rep.seed = d.sample_seed;
    const int N = d.size();
    for (int k = 0; k < N; ++k) {
        const auto psi = d.eigenvectors.col(k);
        rep.entries.push_back({k, d.eigenvalues(k), localization_length(psi, mass), psi.cwiseAbs2().maxCoeff(),
                               std::abs(d.eigenvalues(k)) <= 2.0 - kappa});
    }
    return rep;
}

void LocalizationReport::write_csv(std::ostream& out, bool header) const
{
    if (header)
        out << "seed,k,lambda,loc_len,sup_norm_sq,is_bulk\n";
    out.precision(12);
    for (const auto& e : entries)
        out << seed << ',' << e.k << ',' << e.lambda << ',' << e.loc_len << ',' << e.sup_norm_sq << ','
            << (e.is_bulk ? 1 : 0) << '\n';
}

double semicircle_cdf(double x)
{
    if (x <= -2.0)
        return 0.0;
    if (x >= 2.0)
        return 1.0;
    return 0.5 + (x * std::sqrt(4.0 - x * x) / 4.0 + std::asin(x / 2.0)) / std::numbers::pi;
}

double semicircle_ks_distance(std::vector<double> ev)
{
    if (ev.empty())
        throw InvalidArgument("semicircle_ks_distance: empty sample");
    std::sort(ev.begin(), ev.end());
    const double n = static_cast<double>(ev.size());
    double D = 0.0;
    for (size_t i = 0; i < ev.size(); ++i) {
        const double F = semicircle_cdf(ev[i]);
        D = std::max({D, std::abs((i + 1) / n - F), std::abs(F - i / n)});
    }
    return D;
}

} // namespace prbm
