#pragma once

#include "prbm/circulant.hpp"
#include "prbm/profile.hpp"

namespace prbm {

// Stieltjes transform of the semicircle law; real arguments give boundary values.
cplx m_sc(cplx z);
inline cplx m_sc(double E) { return m_sc(cplx(E, 0.0)); }

// Solution of m = -1/(z + t m) with Im m > 0.
cplx m_t(cplx z, double t);

class ShapeParameters {
public:
    ShapeParameters(double alpha, int W, int N);
    explicit ShapeParameters(const VarianceProfile& p) : ShapeParameters(p.alpha(), p.bandwidth(), p.size()) {}

    double alpha() const { return alpha_; }
    int W() const { return W_; }
    int N() const { return N_; }

    double ell(double eta) const;
    double B(double eta, double r) const;
    double Bcirc(double eta, double r) const;
    double R(double eta, double r) const;

    // Flow versions: B_t = B(1 - t, .), ell_t = ell(1 - t).
    double ell_t(double t) const { return ell(1.0 - t); }
    double B_t(double t, double r) const { return B(1.0 - t, r); }
    double Bcirc_t(double t, double r) const { return Bcirc(1.0 - t, r); }
    double R_t(double t, double r) const { return R(1.0 - t, r); }

    double eta_star() const;
    double W_c() const;
    double eta_flat() const;

private:
    double alpha_;
    int W_;
    int N_;
};

struct CriticalScales {
    double eta_star;
    double W_c;
};
CriticalScales critical_scales(const ShapeParameters& p);

// c S (1 - t c S)^{-1} with c = m1 m2, as a circulant.
Circulant theta_from_product(const VarianceProfile& profile, double t, cplx c);
// c S^2 (1 - t c S)^{-1}
Circulant kloop2_from_product(const VarianceProfile& profile, double t, cplx c);
// (1 - t c S)^{-1}
Circulant resolvent_from_product(const VarianceProfile& profile, double t, cplx c);

// Flow versions with m(sigma) = m(E + i0) or its conjugate.
Circulant theta_propagator(const VarianceProfile& profile, double t, Charge s1, Charge s2, double E);
Circulant evolution_kernel(const VarianceProfile& profile, double s, double t, Charge s1, Charge s2, double E);
// (1 - s c S)(1 - t c S)^{-1}, the product form of the same kernel.
Circulant evolution_kernel_product_form(const VarianceProfile& profile, double s, double t, Charge s1, Charge s2,
                                        double E);

// Bulk boundary value m(E + i0); throws outside (-2, 2).
cplx bulk_m(double E);

} // namespace prbm
