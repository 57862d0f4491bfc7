#pragma once

#include "prbm/deterministic.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace prbm {

// Dense complex tensor over Z_N^n, last index fastest.
struct Tensor {
    int order = 0;
    int N = 0;
    std::vector<cplx> data;

    Tensor() = default;
    Tensor(int order_, int N_);

    size_t index(const std::vector<int>& x) const;
    std::vector<int> unindex(size_t flat) const;
    cplx& operator()(const std::vector<int>& x) { return data[index(x)]; }
    cplx operator()(const std::vector<int>& x) const { return data[index(x)]; }
    size_t numel() const { return data.size(); }
    double max_abs_diff(const Tensor& other) const;
};

// Whether a full order-n tensor at size N fits the memory caps (n <= 4 at N <= 32,
// n <= 3 at N <= 64, n <= 2 at N <= 4096).
bool full_tensor_allowed(int n, int N);

// Memoized evaluator of the K-hat tensors through the recursive relation.
class KHatEngine {
public:
    KHatEngine(const VarianceProfile& profile, double E, double t);

    double time() const { return t_; }
    cplx m(Charge s) const { return charged(m_, s); }
    const VarianceProfile& profile() const { return profile_; }

    // Full tensor of order n = charges.size(), within the full-tensor caps.
    const Tensor& tensor(const Charges& charges);
    // One entry; the top order is evaluated pointwise so N up to 128 is allowed at order <= 4.
    cplx value(const Charges& charges, const std::vector<int>& x);

private:
    const Tensor& lower(const Charges& charges);   // memo with the relaxed internal cap
    const Circulant& resolvent(cplx c);             // (1 - t c S)^{-1}
    cplx recursion_entry(const Charges& s, const std::vector<int>& x);
    Tensor compute(const Charges& s);

    VarianceProfile profile_;
    cplx m_;
    double t_;
    std::map<std::string, Tensor> memo_;
    std::vector<std::pair<cplx, Circulant>> resolvents_;
    // P_k tensors: S applied along the last axis of the order-k tensor
    std::map<std::string, Tensor> smoothed_last_;
    const Tensor& smoothed_last(const Charges& s);
};

cplx khat_recursive(const VarianceProfile& profile, double E, double t, const Charges& charges,
                    const std::vector<int>& x);

struct OdeOptions {
    double max_step = 0.02;      // initial step; halved until the halving test passes
    double halving_tol = 1e-9;   // relative to the largest entry
    int max_steps = 1 << 14;
};

// RK4 integration of the K-hat evolution system from the delta initial condition. The step count
// doubles until two successive solutions agree to halving_tol.
Tensor khat_ode_oracle(const VarianceProfile& profile, double E, double t, const Charges& charges,
                       const OdeOptions& opts = {});

// sum_a prod_i S_{x_i a_i} Khat(a)
Tensor kloop_from_khat(const Tensor& khat, const VarianceProfile& profile);
// Diagonal K-chain: S applied along the first n-1 axes only; entry (x_1..x_{n-1}, x) is K^C(x, x).
Tensor kchain_from_khat(const Tensor& khat, const VarianceProfile& profile);

// Max |sum_{x_n} K^(n) - (K^(n-1)_{+..} - K^(n-1)_{-..}) / (2 i eta_t)| over (x_1..x_{n-1}).
double kloop_ward_check(const VarianceProfile& profile, double E, double t, const Charges& charges);

struct NonCrossingTree {
    int n = 0;
    std::vector<std::pair<int, int>> edges;   // 0-based, i < j, lexicographic
};

bool is_noncrossing_tree(const NonCrossingTree& tree);
std::vector<NonCrossingTree> enumerate_noncrossing_trees(int n);

struct DecayFactors {
    double loop;   // cyclic product of D_t
    double tree;   // sum over non-crossing trees of products of D_t^2
};

// experimental=true switches alpha in (0,1) to the (r/W+1)^{(alpha-1)/2} (r/ell_t+1)^{-alpha} variant.
double decay_pair(const ShapeParameters& shape, double t, int r, bool experimental = false);
DecayFactors decay_factors(const ShapeParameters& shape, double t, const std::vector<int>& x,
                           bool experimental = false);

struct TreeBoundReport {
    int n = 0;
    double alpha = 0.0;
    double t = 0.0;
    int N = 0;
    double constant = 0.0;   // max |K| / (B_t(0)^{n-1} T)
    int tuples = 0;
    bool stable = false;

    static void write_csv_header(std::ostream& out);
    void write_csv(std::ostream& out) const;
};

// Tuples default to all of Z_N^n when N^n <= 2^16, otherwise 4096 seeded random tuples.
TreeBoundReport verify_tree_bound(const VarianceProfile& profile, double E, double t, const Charges& charges,
                                  const std::vector<std::vector<int>>& tuples = {}, std::uint64_t seed = 0);

// Marks both reports stable when C(2N) / C(N) <= 2.
void mark_doubling_stability(TreeBoundReport& smaller, TreeBoundReport& larger);

} // namespace prbm
