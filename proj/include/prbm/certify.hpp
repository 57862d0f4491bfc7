#pragma once

#include "prbm/deterministic.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace prbm {

// Bound families of the propagator assumptions, by identifier:
//   upper       |(S/(1-tS))_xy| <= C B_t(|x-y|)
//   upper_xi    |(S/(1-t xi S))_xy| <= C B_0(|x-y|),  |xi| = 1, |xi - 1| >= c0
//   difference  first differences against |y-z|_W R_t B_t   (ell_t < N)
//   zero_mode   |(S/(1-tS))_xy - 1/(N(1-t))| <= C Bcirc_t  (ell_t >= N/2)
struct CertificationOptions {
    double c0 = 0.1;
    int xi_count = 24;
    double log_power = 0.0;   // ratios divided by (log N)^log_power
};

struct CertificationRow {
    std::string bound_id;
    double t;
    double fitted_C;
    int N;
    bool stable;
};

struct CertificationReport {
    int N = 0;
    std::vector<CertificationRow> rows;
    std::map<std::string, double> constants;   // max over the t-grid per family
    std::map<std::string, bool> stable;

    void write_csv(std::ostream& out) const;
};

// 1 - t in {1, 1/2, 1/4, ..., >= 1/N}
std::vector<double> default_t_grid(int N);
// xi = e^{i theta} on a uniform theta grid, keeping |xi - 1| >= c0
std::vector<cplx> default_xi_grid(double c0, int count);

CertificationReport certify_assumption_bounds(const VarianceProfile& profile, const std::vector<double>& t_grid,
                                              const std::vector<cplx>& xi_grid,
                                              const CertificationOptions& opts = {});

// Sets stable flags on both reports: C(2N) / C(N) <= 2 per family.
void mark_doubling_stability(CertificationReport& smaller, CertificationReport& larger);

} // namespace prbm
