#pragma once

#include "prbm/common.hpp"

#include <Eigen/Dense>

namespace prbm {

// A circulant matrix C_{xy} = row[(y - x) mod N], stored by its first row.
struct Circulant {
    std::vector<cplx> row;

    int size() const { return static_cast<int>(row.size()); }
    cplx operator()(int x, int y) const { return row[wrap(static_cast<long long>(y) - x, size())]; }
    Eigen::MatrixXcd dense() const;
    std::vector<cplx> symbol() const;   // eigenvalues, indexed by p = 2 pi k / N
    static Circulant from_symbol(const std::vector<cplx>& symbol);
    static Circulant identity(int N);

    Circulant operator*(const Circulant& other) const;
    Circulant operator+(const Circulant& other) const;
    Circulant operator*(cplx s) const;
    cplx row_sum() const;
};

// sum_r row[r] e^{-2 pi i k r / N}
std::vector<cplx> dft(const std::vector<cplx>& v);
std::vector<cplx> idft(const std::vector<cplx>& v);
std::vector<cplx> dft_real(const std::vector<double>& v);

// out[x] = sum_y k[(y - x) mod N] v[y], i.e. applying the circulant with first row k.
std::vector<cplx> circular_apply(const std::vector<double>& kernel, const std::vector<cplx>& v);

// Same product with the kernel symbol computed once.
class CirculantOperator {
public:
    explicit CirculantOperator(const Circulant& c) : symbol_(c.symbol()) {}
    explicit CirculantOperator(const std::vector<double>& kernel)
        : CirculantOperator(Circulant{std::vector<cplx>(kernel.begin(), kernel.end())})
    {
    }
    int size() const { return static_cast<int>(symbol_.size()); }
    std::vector<cplx> apply(const std::vector<cplx>& v) const;

private:
    std::vector<cplx> symbol_;
};

} // namespace prbm
