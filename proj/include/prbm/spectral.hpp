#pragma once

#include "prbm/ensemble.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace prbm {

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // columns
    std::uint64_t sample_seed = 0;
    std::uint64_t sample_stream = 0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
    // max_k |H u_k - lambda_k u_k|_2 and max |U^* U - I|
    double max_residual(const Eigen::MatrixXcd& H) const;
    double orthonormality_error() const;
};

SpectralDecomposition eigendecompose(const HermitianSample& sample, int cap = 8192);
SpectralDecomposition eigendecompose(const Eigen::MatrixXcd& H, int cap = 8192);
Eigen::VectorXd eigenvalues_only(const Eigen::MatrixXcd& H, int cap = 8192);

// Smallest l >= 0 such that some circular window of radius l carries at least `mass`
// of |psi|^2. Windows wider than the circle are the full circle, so l <= N/2.
int localization_length(const Eigen::Ref<const Eigen::VectorXcd>& psi, double mass = 0.5);
int localization_length_weights(const std::vector<double>& weights, double mass = 0.5);

std::vector<int> bulk_filter(const SpectralDecomposition& d, double kappa);
std::vector<int> bulk_filter(const Eigen::VectorXd& eigenvalues, double kappa);

// sum_a S_xa conj(psi_i(a)) psi_j(a) - delta_ij / N
cplx que_observable(const VarianceProfile& profile, int x, const Eigen::Ref<const Eigen::VectorXcd>& psi_i,
                    const Eigen::Ref<const Eigen::VectorXcd>& psi_j, bool same_index);

// Mean of min(s_k, s_{k+1}) / max(s_k, s_{k+1}) over consecutive gaps inside the bulk.
double spacing_ratio_statistic(const Eigen::VectorXd& eigenvalues, double kappa);
inline double spacing_ratio_statistic(const SpectralDecomposition& d, double kappa)
{
    return spacing_ratio_statistic(d.eigenvalues, kappa);
}

struct LocalizationEntry {
    int k;
    double lambda;
    int loc_len;
    double sup_norm_sq;
    bool is_bulk;
};

struct LocalizationReport {
    std::uint64_t seed = 0;
    std::vector<LocalizationEntry> entries;

    void write_csv(std::ostream& out, bool header = true) const;
};

LocalizationReport localization_report(const SpectralDecomposition& d, double kappa, double mass = 0.5);

// Kolmogorov-Smirnov distance between the empirical distribution and the semicircle law.
double semicircle_ks_distance(std::vector<double> eigenvalues);
double semicircle_cdf(double x);

} // namespace prbm
