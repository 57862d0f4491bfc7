#include "prbm/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace prbm {

std::vector<double> default_t_grid(int N)
{
    std::vector<double> grid;
    for (double gap = 1.0; gap >= 1.0 / N - 1e-15; gap /= 2.0)
        grid.push_back(1.0 - gap);
    return grid;
}

std::vector<cplx> default_xi_grid(double c0, int count)
{
    std::vector<cplx> xi;
    for (int k = 0; k < count; ++k) {
        const double theta = 2.0 * std::numbers::pi * (k + 0.5) / count;
        const cplx v = std::polar(1.0, theta);
        if (std::abs(v - 1.0) >= c0)
            xi.push_back(v);
    }
    return xi;
}

CertificationReport certify_assumption_bounds(const VarianceProfile& profile, const std::vector<double>& t_grid,
                                              const std::vector<cplx>& xi_grid, const CertificationOptions& opts)
{
    const int N = profile.size();
    const ShapeParameters shape(profile);
    const double logc = opts.log_power == 0.0 ? 1.0 : std::pow(std::log(static_cast<double>(N)), opts.log_power);
    for (double t : t_grid)
        if (t < 0.0 || t > 1.0 - 1.0 / N + 1e-12)
            throw InvalidArgument("certify: t-grid must lie in [0, 1 - 1/N]");
    for (cplx xi : xi_grid)
        if (std::abs(std::abs(xi) - 1.0) > 1e-12 || std::abs(xi - 1.0) < opts.c0 - 1e-12)
            throw InvalidArgument("certify: xi must satisfy |xi| = 1 and |xi - 1| >= c0");

    CertificationReport rep;
    rep.N = N;
    auto record = [&](const std::string& id, double t, double C) {
        rep.rows.push_back({id, t, C / logc, N, false});
        auto it = rep.constants.find(id);
        if (it == rep.constants.end())
            rep.constants[id] = C / logc;
        else
            it->second = std::max(it->second, C / logc);
    };

    const bool has_diff = shape.alpha() > 0.0;
    const bool has_zero = shape.alpha() >= 0.0;

    for (double t : t_grid) {
        const auto theta = theta_from_product(profile, t, 1.0);
        std::vector<double> row(N);
        for (int y = 0; y < N; ++y)
            row[y] = theta.row[y].real();

        double C = 0.0;
        for (int y = 0; y < N; ++y)
            C = std::max(C, std::abs(theta.row[y]) / shape.B_t(t, periodic_distance(0, y, N)));
        record("upper", t, C);

        double Cxi = 0.0;
        for (cplx xi : xi_grid) {
            const auto th = theta_from_product(profile, t, xi);
            for (int y = 0; y < N; ++y)
                Cxi = std::max(Cxi, std::abs(th.row[y]) / shape.B(1.0, periodic_distance(0, y, N)));
        }
        if (!xi_grid.empty())
            record("upper_xi", t, Cxi);

        const double ell = shape.ell_t(t);
        if (has_diff && ell < N) {
            double Cd = 0.0;
            for (int y = 0; y < N; ++y) {
                const int dy = periodic_distance(0, y, N);
                for (int z = y + 1; z < N; ++z) {
                    const int dz = periodic_distance(0, z, N);
                    const double env = (periodic_distance(y, z, N) + shape.W()) *
                                       shape.R_t(t, std::max(dy, dz)) * shape.B_t(t, std::min(dy, dz));
                    Cd = std::max(Cd, std::abs(row[y] - row[z]) / env);
                }
            }
            record("difference", t, Cd);
        }
        if (has_zero && ell >= N / 2.0) {
            const double zero = 1.0 / (N * (1.0 - t));
            double Cz = 0.0;
            for (int y = 0; y < N; ++y)
                Cz = std::max(Cz, std::abs(row[y] - zero) / shape.Bcirc_t(t, periodic_distance(0, y, N)));
            record("zero_mode", t, Cz);
        }
    }
    for (const auto& [id, C] : rep.constants)
        rep.stable[id] = std::isfinite(C);
    return rep;
}

void mark_doubling_stability(CertificationReport& smaller, CertificationReport& larger)
{
    if (larger.N != 2 * smaller.N)
        throw InvalidArgument("mark_doubling_stability: reports must be at N and 2N");
    for (auto& [id, C] : smaller.constants) {
        auto it = larger.constants.find(id);
        bool ok = it != larger.constants.end() && std::isfinite(C) && std::isfinite(it->second) && C > 0.0 &&
                  it->second / C <= 2.0;
        smaller.stable[id] = ok;
        larger.stable[id] = ok;
    }
    for (auto* rep : {&smaller, &larger}) {
        for (auto& [id, ok] : rep->stable)
            if (!smaller.constants.count(id) || !larger.constants.count(id))
                ok = false;
        for (auto& r : rep->rows)
            r.stable = rep->stable[r.bound_id];
    }
}

void CertificationReport::write_csv(std::ostream& out) const
{
    out << "bound_id,t,fitted_C,N,stable_flag\n";
    out.precision(12);
    for (const auto& r : rows)
        out << r.bound_id << ',' << r.t << ',' << r.fitted_C << ',' << r.N << ',' << (r.stable ? 1 : 0) << '\n';
}

} // namespace prbm
