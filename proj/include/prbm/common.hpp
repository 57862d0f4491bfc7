#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace prbm {

using cplx = std::complex<double>;

// Bad arguments or a violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A formula was requested outside the range of alpha where it is defined.
class UnsupportedRegime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Iterations that did not converge, near-singular solves, failed postconditions.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Charge : int { Minus = -1, Plus = 1 };

using Charges = std::vector<Charge>;

inline Charge flip(Charge c) { return c == Charge::Plus ? Charge::Minus : Charge::Plus; }

// m(+) = m, m(-) = conj(m).
inline cplx charged(cplx m, Charge c) { return c == Charge::Plus ? m : std::conj(m); }

inline char charge_char(Charge c) { return c == Charge::Plus ? '+' : '-'; }

std::string charges_to_string(const Charges& s);
Charges charges_from_string(const std::string& s);

inline int periodic_distance(int x, int y, int N)
{
    int d = x > y ? x - y : y - x;
    d %= N;
    return d < N - d ? d : N - d;
}

// Nonnegative remainder.
inline int wrap(long long x, int N)
{
    long long r = x % N;
    return static_cast<int>(r < 0 ? r + N : r);
}

} // namespace prbm
