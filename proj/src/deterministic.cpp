#include "prbm/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prbm {

cplx m_sc(cplx z)
{
    if (z.imag() < 0.0)
        throw InvalidArgument("m_sc: Im z must be nonnegative");
    if (z.imag() == 0.0) {
        const double E = z.real();
        if (std::abs(E) < 2.0)
            return cplx(-E / 2.0, std::sqrt(4.0 - E * E) / 2.0);
        const double sgn = E > 0 ? 1.0 : -1.0;
        return cplx((-E + sgn * std::sqrt(E * E - 4.0)) / 2.0, 0.0);
    }
    // roots of m^2 + z m + 1 = 0 multiply to 1; compute the large one without cancellation
    const cplx s = std::sqrt(z * z - 4.0);
    const cplx a = (-z + s) / 2.0;
    const cplx b = (-z - s) / 2.0;
    const cplx big = std::abs(a) >= std::abs(b) ? a : b;
    cplx m = 1.0 / big;
    if (m.imag() <= 0.0)
        m = big;
    for (int i = 0; i < 2; ++i)
        m -= (m * m + z * m + 1.0) / (2.0 * m + z);
    return m;
}

cplx bulk_m(double E)
{
    if (!(std::abs(E) < 2.0)) {
        std::ostringstream os;
        os << "energy " << E << " is outside the bulk (-2, 2)";
        throw InvalidArgument(os.str());
    }
    return m_sc(E);
}

cplx m_t(cplx z, double t)
{
    if (!(z.imag() > 0.0))
        throw InvalidArgument("m_t: Im z must be positive");
    if (t < 0.0 || t > 1.0)
        throw InvalidArgument("m_t: t must lie in [0, 1]");
    if (t == 0.0)
        return -1.0 / z;
    cplx m = m_sc(z);
    for (int it = 0; it < 200; ++it) {
        if (std::abs(m + 1.0 / (z + t * m)) <= 1e-13 && m.imag() > 0.0)
            return m;
        m -= (t * m * m + z * m + 1.0) / (2.0 * t * m + z);
    }
    std::ostringstream os;
    os << "m_t: Newton did not converge for z=" << z << ", t=" << t;
    throw NumericalError(os.str());
}

ShapeParameters::ShapeParameters(double alpha, int W, int N) : alpha_(alpha), W_(W), N_(N)
{
    if (!(alpha > -1.0))
        throw InvalidArgument("ShapeParameters: alpha must exceed -1");
    if (W < 1 || N < 2 || W > N)
        throw InvalidArgument("ShapeParameters: need 1 <= W <= N");
}

double ShapeParameters::ell(double eta) const
{
    if (!(eta > 0.0))
        throw InvalidArgument("ell: eta must be positive");
    if (alpha_ <= 0.0)
        return N_;
    return std::min(W_ * std::pow(eta, -1.0 / std::min(alpha_, 2.0)), static_cast<double>(N_));
}

double ShapeParameters::B(double eta, double r) const
{
    const double W = W_, N = N_, a = alpha_;
    if (a <= 0.0)
        return std::pow(N / W, a) / W * std::pow(r / W + 1.0, -1.0 - a) + 1.0 / (N * eta);
    const double l = ell(eta);
    if (a < 1.0)
        return (std::pow(r / W + 1.0, a - 1.0) / W + 1.0 / (N * eta)) * std::pow(r / l + 1.0, -2.0 * a);
    return 1.0 / (eta * l) * std::pow(r / l + 1.0, -1.0 - a);
}

double ShapeParameters::Bcirc(double /*eta*/, double r) const
{
    const double W = W_, N = N_, a = alpha_;
    if (a < 0.0)
        throw UnsupportedRegime("zero-mode-removed shape parameter is not defined for alpha < 0");
    if (a < 1.0)
        return std::pow(r / W + 1.0, a - 1.0) / W;
    return std::pow(N / W, std::min(a, 2.0)) / N;
}

double ShapeParameters::R(double eta, double r) const
{
    const double W = W_, a = alpha_;
    if (a <= 0.0)
        throw UnsupportedRegime("difference parameter is only defined for alpha > 0");
    if (a < 1.0)
        return 1.0 / (W * (r / W + 1.0));
    const double l = ell(eta);
    if (a < 2.0)
        return std::pow(W, a - 2.0) * std::pow(l, 1.0 - a) * std::pow(r / W + 1.0, a - 2.0) *
               std::pow(r / l + 1.0, 1.0 - a);
    return 1.0 / (l * (r / l + 1.0));
}

double ShapeParameters::eta_star() const
{
    const double W = W_, N = N_, a = alpha_;
    if (a <= 1.0)
        return 1.0 / N;
    if (a < 2.0)
        return std::pow(W, -a / (a - 1.0)) + 1.0 / N;
    return 1.0 / (W * W) + 1.0 / N;
}

double ShapeParameters::W_c() const
{
    const double N = N_, a = alpha_;
    if (a <= 1.0)
        return 1.0;
    if (a < 2.0)
        return std::pow(N, 1.0 - 1.0 / a);
    return std::sqrt(N);
}

double ShapeParameters::eta_flat() const
{
    const double ratio = static_cast<double>(W_) / N_;
    if (alpha_ < 0.0)
        return std::pow(ratio, 1.0 + alpha_);
    if (alpha_ < 1.0)
        return ratio;
    return std::pow(ratio, std::min(alpha_, 2.0));
}

CriticalScales critical_scales(const ShapeParameters& p) { return {p.eta_star(), p.W_c()}; }

namespace {

std::vector<cplx> denominators(const VarianceProfile& profile, double t, cplx c)
{
    const auto psi = profile_eigenvalues(profile);
    std::vector<cplx> d(psi.size());
    for (size_t k = 0; k < psi.size(); ++k) {
        d[k] = 1.0 - t * c * psi[k];
        if (std::abs(d[k]) < 1e-10) {
            std::ostringstream os;
            os << "near-singular propagator: |1 - t c psi(p)| < 1e-10 at k=" << k << " (t=" << t << ", c=" << c
               << ")";
            throw NumericalError(os.str());
        }
    }
    return d;
}

} // namespace

Circulant resolvent_from_product(const VarianceProfile& profile, double t, cplx c)
{
    auto d = denominators(profile, t, c);
    for (auto& v : d)
        v = 1.0 / v;
    return Circulant::from_symbol(d);
}

Circulant theta_from_product(const VarianceProfile& profile, double t, cplx c)
{
    const auto psi = profile_eigenvalues(profile);
    auto d = denominators(profile, t, c);
    for (size_t k = 0; k < d.size(); ++k)
        d[k] = c * psi[k] / d[k];
    return Circulant::from_symbol(d);
}

Circulant kloop2_from_product(const VarianceProfile& profile, double t, cplx c)
{
    const auto psi = profile_eigenvalues(profile);
    auto d = denominators(profile, t, c);
    for (size_t k = 0; k < d.size(); ++k)
        d[k] = c * psi[k] * psi[k] / d[k];
    return Circulant::from_symbol(d);
}

static cplx charge_product(Charge s1, Charge s2, double E)
{
    const cplx m = bulk_m(E);
    return charged(m, s1) * charged(m, s2);
}

Circulant theta_propagator(const VarianceProfile& profile, double t, Charge s1, Charge s2, double E)
{
    if (t < 0.0 || t >= 1.0)
        throw InvalidArgument("theta_propagator: t must lie in [0, 1)");
    return theta_from_product(profile, t, charge_product(s1, s2, E));
}

Circulant evolution_kernel(const VarianceProfile& profile, double s, double t, Charge s1, Charge s2, double E)
{
    if (!(0.0 <= s && s <= t && t < 1.0))
        throw InvalidArgument("evolution_kernel: need 0 <= s <= t < 1");
    auto U = theta_propagator(profile, t, s1, s2, E) * cplx(t - s);
    U.row[0] += 1.0;
    return U;
}

Circulant evolution_kernel_product_form(const VarianceProfile& profile, double s, double t, Charge s1, Charge s2,
                                        double E)
{
    if (!(0.0 <= s && s <= t && t < 1.0))
        throw InvalidArgument("evolution_kernel: need 0 <= s <= t < 1");
    const cplx c = charge_product(s1, s2, E);
    const auto psi = profile_eigenvalues(profile);
    auto d = denominators(profile, t, c);
    for (size_t k = 0; k < d.size(); ++k)
        d[k] = (1.0 - s * c * psi[k]) / d[k];
    return Circulant::from_symbol(d);
}

} // namespace prbm
