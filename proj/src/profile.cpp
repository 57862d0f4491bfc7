#include "prbm/profile.hpp"
#include "prbm/circulant.hpp"

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prbm {

std::string charges_to_string(const Charges& s)
{
    std::string out;
    for (auto c : s)
        out.push_back(charge_char(c));
    return out;
}

Charges charges_from_string(const std::string& s)
{
    Charges out;
    for (char ch : s) {
        if (ch == '+')
            out.push_back(Charge::Plus);
        else if (ch == '-')
            out.push_back(Charge::Minus);
        else
            throw InvalidArgument("charge string may only contain '+' and '-': " + s);
    }
    return out;
}

ProfileDensity ProfileDensity::student_t(double nu)
{
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw InvalidArgument("StudentT density needs nu > 0");
    return ProfileDensity(Family::StudentT, nu);
}

ProfileDensity ProfileDensity::cauchy() { return ProfileDensity(Family::Cauchy, 1.0); }

std::string ProfileDensity::id() const
{
    if (family_ == Family::Cauchy)
        return "Cauchy";
    std::ostringstream os;
    os << "StudentT(" << nu_ << ")";
    return os.str();
}

double ProfileDensity::pdf(double x) const
{
    if (family_ == Family::Cauchy)
        return boost::math::pdf(boost::math::cauchy_distribution<double>(), x);
    return boost::math::pdf(boost::math::students_t_distribution<double>(nu_), x);
}

double ProfileDensity::pdf_derivative(double x) const
{
    if (family_ == Family::Cauchy)
        return -2.0 * x / (1.0 + x * x) * pdf(x);
    return -(nu_ + 1.0) * x / (nu_ + x * x) * pdf(x);
}

double ProfileDensity::cdf(double x) const
{
    if (family_ == Family::Cauchy)
        return boost::math::cdf(boost::math::cauchy_distribution<double>(), x);
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu_), x);
}

double ProfileDensity::total_mass() const
{
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [this](double x) { return pdf(x); };
    return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

double power_law_normalizer(double alpha, int W, int N)
{
    double Z = 0.0;
    for (int r = 0; r < N; ++r)
        Z += std::pow(periodic_distance(0, r, N) / static_cast<double>(W) + 1.0, -1.0 - alpha);
    return Z;
}

static void check_size(int W, int N)
{
    if (N < 2)
        throw InvalidArgument("profile size N must be >= 2");
    if (W < 1 || 2 * W > N)
        throw InvalidArgument("band width must satisfy 1 <= W <= N/2 (W=" + std::to_string(W) +
                              ", N=" + std::to_string(N) + ")");
}

VarianceProfile build_power_law_profile(double alpha, int W, int N)
{
    if (!(alpha > -1.0))
        throw InvalidArgument("power-law profile needs alpha > -1");
    check_size(W, N);
    VarianceProfile p;
    p.alpha_ = alpha;
    p.W_ = W;
    p.kind_ = ProfileKind::PowerLawExact;
    p.Z_ = power_law_normalizer(alpha, W, N);
    p.kernel_.resize(N);
    for (int r = 0; r < N; ++r)
        p.kernel_[r] = std::pow(periodic_distance(0, r, N) / static_cast<double>(W) + 1.0, -1.0 - alpha) / p.Z_;
    return p;
}

namespace {

// sum_{n in Z} f((r + nN)/W), with the tail beyond |n| = K replaced by its integral
// and the stopping rule applied to the leading Euler-Maclaurin remainder.
double wrapped_density(const ProfileDensity& f, int r, int W, int N)
{
    constexpr double rel_tol = 1e-14;
    constexpr long max_wraps = 1000000;
    const double w = W, n = N;
    auto g = [&](double k) { return f.pdf((r + k * n) / w); };
    auto dg = [&](double k) { return (n / w) * f.pdf_derivative((r + k * n) / w); };

    double partial = g(0.0);
    for (long K = 1; K <= max_wraps; ++K) {
        partial += g(static_cast<double>(K)) + g(-static_cast<double>(K));
        const double a = (r + (K + 0.5) * n) / w;
        const double b = (r - (K + 0.5) * n) / w;
        const double tail = (w / n) * ((1.0 - f.cdf(a)) + f.cdf(b));
        const double remainder = (std::abs(dg(K + 0.5)) + std::abs(dg(-K - 0.5))) / 24.0;
        const double total = partial + tail;
        if (remainder < rel_tol * total)
            return total;
    }
    throw NumericalError("build_profile_function: wrap-sum tail bound not met within 1e6 wraps for " + f.id() +
                         " at r=" + std::to_string(r) + ", W=" + std::to_string(W) + ", N=" + std::to_string(N));
}

} // namespace

VarianceProfile build_profile_function(const ProfileDensity& density, int W, int N)
{
    check_size(W, N);
    const double mass = density.total_mass();
    if (std::abs(mass - 1.0) > 1e-8)
        throw InvalidArgument("profile density " + density.id() + " does not integrate to 1");

    VarianceProfile p;
    p.alpha_ = density.tail_exponent();
    p.W_ = W;
    p.kind_ = ProfileKind::ProfileFunction;
    p.density_ = density;
    p.kernel_.assign(N, 0.0);
    for (int r = 0; r <= N / 2; ++r) {
        const double v = wrapped_density(density, r, W, N);
        p.kernel_[r] = v;
        p.kernel_[(N - r) % N] = v;
    }
    double Z = 0.0;
    for (double v : p.kernel_)
        Z += v;
    for (auto& v : p.kernel_)
        v /= Z;
    p.Z_ = Z;
    return p;
}

VarianceProfile VarianceProfile::from_kernel(std::vector<double> kernel, double alpha, int W)
{
    const int N = static_cast<int>(kernel.size());
    check_size(W, N);
    double sum = 0.0;
    for (int r = 0; r < N; ++r) {
        if (kernel[r] < 0.0)
            throw InvalidArgument("kernel entries must be nonnegative");
        if (std::abs(kernel[r] - kernel[(N - r) % N]) > 1e-15)
            throw InvalidArgument("kernel must be symmetric under r -> N - r");
        sum += kernel[r];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidArgument("kernel must sum to 1");
    VarianceProfile p;
    p.alpha_ = alpha;
    p.W_ = W;
    p.kind_ = ProfileKind::ProfileFunction;
    p.kernel_ = std::move(kernel);
    p.Z_ = 1.0;
    return p;
}

Eigen::MatrixXd VarianceProfile::dense() const
{
    const int N = size();
    if (N > 4096)
        throw InvalidArgument("VarianceProfile::dense: refusing to materialize N > 4096");
    Eigen::MatrixXd S(N, N);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y)
            S(x, y) = (*this)(x, y);
    return S;
}

std::string VarianceProfile::id() const
{
    std::ostringstream os;
    if (kind_ == ProfileKind::PowerLawExact)
        os << "powerlaw";
    else
        os << (density_ ? density_->id() : std::string("kernel"));
    os << "_a" << alpha_ << "_W" << W_ << "_N" << size();
    return os.str();
}

double VarianceProfile::envelope_constant() const
{
    const double Za = power_law_normalizer(alpha_, W_, size());
    double C = 0.0;
    for (int r = 0; r < size(); ++r) {
        const double env = std::pow(periodic_distance(0, r, size()) / static_cast<double>(W_) + 1.0, -1.0 - alpha_) / Za;
        C = std::max(C, kernel_[r] / env);
    }
    return C;
}

nlohmann::json VarianceProfile::to_json() const
{
    nlohmann::json j;
    j["alpha"] = alpha_;
    j["W"] = W_;
    j["N"] = size();
    if (kind_ == ProfileKind::PowerLawExact) {
        j["kind"] = "PowerLawExact";
    } else {
        j["kind"] = "ProfileFunction";
        if (density_) {
            j["density"] = density_->family() == ProfileDensity::Family::Cauchy ? "Cauchy" : "StudentT";
            j["nu"] = density_->nu();
        }
    }
    j["normalizer"] = Z_;
    j["kernel"] = kernel_;
    return j;
}

VarianceProfile VarianceProfile::from_json(const nlohmann::json& j)
{
    const double alpha = j.at("alpha").get<double>();
    const int W = j.at("W").get<int>();
    const int N = j.at("N").get<int>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "PowerLawExact")
        return build_power_law_profile(alpha, W, N);
    if (kind != "ProfileFunction")
        throw InvalidArgument("unknown profile kind: " + kind);
    if (j.contains("density")) {
        const std::string d = j.at("density").get<std::string>();
        if (d == "Cauchy")
            return build_profile_function(ProfileDensity::cauchy(), W, N);
        if (d == "StudentT")
            return build_profile_function(ProfileDensity::student_t(j.at("nu").get<double>()), W, N);
        throw InvalidArgument("unknown density: " + d);
    }
    auto p = from_kernel(j.at("kernel").get<std::vector<double>>(), alpha, W);
    if (p.size() != N)
        throw InvalidArgument("kernel length does not match N");
    return p;
}

std::vector<double> profile_eigenvalues(const VarianceProfile& profile)
{
    auto s = dft_real(profile.kernel());
    std::vector<double> psi(s.size());
    for (size_t k = 0; k < s.size(); ++k)
        psi[k] = s[k].real();
    return psi;
}

} // namespace prbm
