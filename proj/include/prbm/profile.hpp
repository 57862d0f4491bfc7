#pragma once

#include "prbm/common.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prbm {

// Even probability density used to build circulant profiles by periodization.
class ProfileDensity {
public:
    enum class Family { StudentT, Cauchy };

    static ProfileDensity student_t(double nu);
    static ProfileDensity cauchy();

    Family family() const { return family_; }
    double nu() const { return nu_; }
    double tail_exponent() const { return family_ == Family::Cauchy ? 1.0 : nu_; }
    std::string id() const;

    double pdf(double x) const;
    double pdf_derivative(double x) const;
    double cdf(double x) const;

    // Integral over the real line by quadrature, for the validity check.
    double total_mass() const;

private:
    ProfileDensity(Family f, double nu) : family_(f), nu_(nu) {}
    Family family_;
    double nu_;
};

enum class ProfileKind { PowerLawExact, ProfileFunction };

// Doubly stochastic symmetric circulant S on Z_N, S_xy = kernel[|x-y|_N].
class VarianceProfile {
public:
    double alpha() const { return alpha_; }
    int bandwidth() const { return W_; }
    int size() const { return static_cast<int>(kernel_.size()); }
    ProfileKind kind() const { return kind_; }
    const std::optional<ProfileDensity>& density() const { return density_; }
    const std::vector<double>& kernel() const { return kernel_; }
    double normalizer() const { return Z_; }

    double operator()(int x, int y) const { return kernel_[wrap(static_cast<long long>(y) - x, size())]; }
    Eigen::MatrixXd dense() const;
    std::string id() const;

    // max_r kernel[r] Z_alpha (|r|_N/W + 1)^{1+alpha}; 1 for the exact power law.
    double envelope_constant() const;

    nlohmann::json to_json() const;
    static VarianceProfile from_json(const nlohmann::json& j);

    // Arbitrary circulant kernel, used for hand-built toy cases. Checked for
    // symmetry, nonnegativity and unit row sum.
    static VarianceProfile from_kernel(std::vector<double> kernel, double alpha, int W);

private:
    friend VarianceProfile build_power_law_profile(double, int, int);
    friend VarianceProfile build_profile_function(const ProfileDensity&, int, int);

    double alpha_ = 0.0;
    int W_ = 1;
    ProfileKind kind_ = ProfileKind::PowerLawExact;
    std::optional<ProfileDensity> density_;
    std::vector<double> kernel_;
    double Z_ = 1.0;
};

VarianceProfile build_power_law_profile(double alpha, int W, int N);
VarianceProfile build_profile_function(const ProfileDensity& density, int W, int N);

// psi(p_k) = sum_r kernel[r] e^{-i p_k r}, p_k = 2 pi k / N. Real for symmetric kernels.
std::vector<double> profile_eigenvalues(const VarianceProfile& profile);

// Z_alpha = sum_{x in Z_N} (|x|_N/W + 1)^{-1-alpha}
double power_law_normalizer(double alpha, int W, int N);

} // namespace prbm
