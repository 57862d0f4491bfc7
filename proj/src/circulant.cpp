#include "prbm/circulant.hpp"

#include <unsupported/Eigen/FFT>

namespace prbm {

std::vector<cplx> dft(const std::vector<cplx>& v)
{
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, v);
    return out;
}

std::vector<cplx> idft(const std::vector<cplx>& v)
{
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, v);
    return out;
}

std::vector<cplx> dft_real(const std::vector<double>& v)
{
    return dft(std::vector<cplx>(v.begin(), v.end()));
}

std::vector<cplx> Circulant::symbol() const
{
    // lambda_k = sum_r row[r] w^{kr}, w = e^{2 pi i / N}
    auto s = idft(row);
    for (auto& c : s)
        c *= static_cast<double>(row.size());
    return s;
}

Circulant Circulant::from_symbol(const std::vector<cplx>& symbol)
{
    auto r = dft(symbol);
    const double n = static_cast<double>(symbol.size());
    for (auto& c : r)
        c /= n;
    return Circulant{r};
}

Circulant Circulant::identity(int N)
{
    Circulant c{std::vector<cplx>(N, 0.0)};
    c.row[0] = 1.0;
    return c;
}

Eigen::MatrixXcd Circulant::dense() const
{
    const int N = size();
    if (N > 4096)
        throw InvalidArgument("Circulant::dense: refusing to materialize N > 4096");
    Eigen::MatrixXcd M(N, N);
    for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y)
            M(x, y) = (*this)(x, y);
    return M;
}

Circulant Circulant::operator*(const Circulant& other) const
{
    if (other.size() != size())
        throw InvalidArgument("Circulant product: size mismatch");
    auto a = symbol();
    auto b = other.symbol();
    for (size_t k = 0; k < a.size(); ++k)
        a[k] *= b[k];
    return from_symbol(a);
}

Circulant Circulant::operator+(const Circulant& other) const
{
    if (other.size() != size())
        throw InvalidArgument("Circulant sum: size mismatch");
    Circulant c = *this;
    for (size_t k = 0; k < row.size(); ++k)
        c.row[k] += other.row[k];
    return c;
}

Circulant Circulant::operator*(cplx s) const
{
    Circulant c = *this;
    for (auto& v : c.row)
        v *= s;
    return c;
}

cplx Circulant::row_sum() const
{
    cplx s = 0.0;
    for (auto v : row)
        s += v;
    return s;
}

std::vector<cplx> circular_apply(const std::vector<double>& kernel, const std::vector<cplx>& v)
{
    const size_t N = kernel.size();
    if (v.size() != N)
        throw InvalidArgument("circular_apply: size mismatch");
    const auto sym = Circulant{std::vector<cplx>(kernel.begin(), kernel.end())}.symbol();
    // (Cv)^_j = lambda_j V_j with V = dft(v)
    auto V = dft(v);
    for (size_t j = 0; j < N; ++j)
        V[j] *= sym[j];
    return idft(V);
}

std::vector<cplx> CirculantOperator::apply(const std::vector<cplx>& v) const
{
    if (v.size() != symbol_.size())
        throw InvalidArgument("CirculantOperator::apply: size mismatch");
    auto V = dft(v);
    for (size_t j = 0; j < V.size(); ++j)
        V[j] *= symbol_[j];
    return idft(V);
}

} // namespace prbm
