#include "prbm/kloop.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "prbm/rng.hpp"

namespace prbm {

Tensor::Tensor(int order_, int N_) : order(order_), N(N_)
{
    size_t n = 1;
    for (int i = 0; i < order; ++i)
        n *= static_cast<size_t>(N);
    data.assign(n, 0.0);
}

size_t Tensor::index(const std::vector<int>& x) const
{
    size_t flat = 0;
    for (int i = 0; i < order; ++i)
        flat = flat * N + static_cast<size_t>(x[i]);
    return flat;
}

std::vector<int> Tensor::unindex(size_t flat) const
{
    std::vector<int> x(order);
    for (int i = order - 1; i >= 0; --i) {
        x[i] = static_cast<int>(flat % N);
        flat /= N;
    }
    return x;
}

double Tensor::max_abs_diff(const Tensor& other) const
{
    if (other.data.size() != data.size())
        throw InvalidArgument("Tensor::max_abs_diff: shape mismatch");
    double d = 0.0;
    for (size_t i = 0; i < data.size(); ++i)
        d = std::max(d, std::abs(data[i] - other.data[i]));
    return d;
}

bool full_tensor_allowed(int n, int N)
{
    if (n <= 2)
        return N <= 4096;
    if (n == 3)
        return N <= 64;
    if (n == 4)
        return N <= 32;
    return false;
}

namespace {

bool internal_allowed(int n, int N) { return full_tensor_allowed(n, N) || (n == 3 && N <= 128); }

Charges slice(const Charges& s, int from, int to)   // inclusive, 0-based
{
    return Charges(s.begin() + from, s.begin() + to + 1);
}

// S applied along one axis (S symmetric: sum_y S_{xy} A(.., y, ..)).
void apply_axis(Tensor& T, int axis, const CirculantOperator& op)
{
    const int N = T.N;
    size_t stride = 1;
    for (int i = axis + 1; i < T.order; ++i)
        stride *= N;
    const size_t block = stride * N;
    std::vector<cplx> fiber(N);
    for (size_t base = 0; base < T.numel(); base += block)
        for (size_t off = 0; off < stride; ++off) {
            for (int j = 0; j < N; ++j)
                fiber[j] = T.data[base + off + j * stride];
            const auto out = op.apply(fiber);
            for (int j = 0; j < N; ++j)
                T.data[base + off + j * stride] = out[j];
        }
}

} // namespace

KHatEngine::KHatEngine(const VarianceProfile& profile, double E, double t) : profile_(profile), m_(bulk_m(E)), t_(t)
{
    if (t < 0.0 || t >= 1.0)
        throw InvalidArgument("KHatEngine: t must lie in [0, 1)");
}

const Circulant& KHatEngine::resolvent(cplx c)
{
    for (const auto& [key, val] : resolvents_)
        if (key == c)
            return val;
    resolvents_.emplace_back(c, resolvent_from_product(profile_, t_, c));
    return resolvents_.back().second;
}

const Tensor& KHatEngine::lower(const Charges& s)
{
    const std::string key = charges_to_string(s);
    auto it = memo_.find(key);
    if (it != memo_.end())
        return it->second;
    if (!internal_allowed(static_cast<int>(s.size()), profile_.size()))
        throw InvalidArgument("K-hat tensor of order " + std::to_string(s.size()) + " at N=" +
                              std::to_string(profile_.size()) + " exceeds the memory caps");
    Tensor T = compute(s);
    return memo_.emplace(key, std::move(T)).first->second;
}

const Tensor& KHatEngine::tensor(const Charges& s)
{
    if (s.empty())
        throw InvalidArgument("K-hat: empty charge vector");
    if (!full_tensor_allowed(static_cast<int>(s.size()), profile_.size()))
        throw InvalidArgument("full K-hat tensor of order " + std::to_string(s.size()) + " at N=" +
                              std::to_string(profile_.size()) + " exceeds the caps");
    return lower(s);
}

const Tensor& KHatEngine::smoothed_last(const Charges& s)
{
    const std::string key = charges_to_string(s);
    auto it = smoothed_last_.find(key);
    if (it != smoothed_last_.end())
        return it->second;
    Tensor P = lower(s);
    apply_axis(P, P.order - 1, CirculantOperator(profile_.kernel()));
    return smoothed_last_.emplace(key, std::move(P)).first->second;
}

Tensor KHatEngine::compute(const Charges& s)
{
    const int M = static_cast<int>(s.size());
    const int N = profile_.size();
    Tensor out(M, N);
    if (M == 1) {
        std::fill(out.data.begin(), out.data.end(), m(s[0]));
        return out;
    }
    const cplx m1 = m(s[0]);
    const Circulant& R = resolvent(m1 * m(s[M - 1]));

    // boundary term: m1 K^{(M-1)}_{(s2..sM)}(x2..x_{M-1}, x1) R(x1, xM)
    const Tensor& prev = lower(slice(s, 1, M - 1));
    for (size_t flat = 0; flat < out.numel(); ++flat) {
        const auto x = out.unindex(flat);
        std::vector<int> idx(x.begin() + 1, x.end() - 1);
        idx.push_back(x[0]);
        out.data[flat] = m1 * prev(idx) * R(x[0], x[M - 1]);
    }

    // splitting terms, k = 2..M-1 (1-based)
    std::vector<cplx> f(N);
    for (int k = 2; k <= M - 1; ++k) {
        const Tensor& P = smoothed_last(slice(s, 0, k - 1));   // (x1..x_{k-1}, x)
        const Tensor& Q = lower(slice(s, k - 1, M - 1));       // (x_k..x_{M-1}, x)
        const size_t heads = out.numel() / N;                  // (x1..x_{M-1})
        for (size_t h = 0; h < heads; ++h) {
            const auto x = out.unindex(h * N);
            std::vector<int> a(x.begin(), x.begin() + (k - 1));
            std::vector<int> b(x.begin() + (k - 1), x.end() - 1);
            a.push_back(0);
            b.push_back(0);
            const size_t pa = P.index(a), qb = Q.index(b);
            for (int y = 0; y < N; ++y)
                f[y] = P.data[pa + y] * Q.data[qb + y];
            for (int xm = 0; xm < N; ++xm) {
                cplx acc = 0.0;
                for (int y = 0; y < N; ++y)
                    acc += f[y] * R(y, xm);
                out.data[h * N + xm] += t_ * m1 * acc;
            }
        }
    }
    return out;
}

cplx KHatEngine::recursion_entry(const Charges& s, const std::vector<int>& x)
{
    const int M = static_cast<int>(s.size());
    const int N = profile_.size();
    if (M == 1)
        return m(s[0]);
    const cplx m1 = m(s[0]);
    const Circulant& R = resolvent(m1 * m(s[M - 1]));
    std::vector<int> idx(x.begin() + 1, x.end() - 1);
    idx.push_back(x[0]);
    cplx v = m1 * lower(slice(s, 1, M - 1))(idx) * R(x[0], x[M - 1]);
    for (int k = 2; k <= M - 1; ++k) {
        const Tensor& P = smoothed_last(slice(s, 0, k - 1));
        const Tensor& Q = lower(slice(s, k - 1, M - 1));
        std::vector<int> a(x.begin(), x.begin() + (k - 1));
        std::vector<int> b(x.begin() + (k - 1), x.end() - 1);
        a.push_back(0);
        b.push_back(0);
        const size_t pa = P.index(a), qb = Q.index(b);
        cplx acc = 0.0;
        for (int y = 0; y < N; ++y)
            acc += P.data[pa + y] * Q.data[qb + y] * R(y, x[M - 1]);
        v += t_ * m1 * acc;
    }
    return v;
}

cplx KHatEngine::value(const Charges& s, const std::vector<int>& x)
{
    const int M = static_cast<int>(s.size());
    const int N = profile_.size();
    if (M < 1 || M > 4 || N > 128)
        throw InvalidArgument("pointwise K-hat needs order <= 4 and N <= 128");
    if (static_cast<int>(x.size()) != M)
        throw InvalidArgument("K-hat: index tuple length does not match the charges");
    for (int v : x)
        if (v < 0 || v >= N)
            throw InvalidArgument("K-hat: site out of range");
    return recursion_entry(s, x);
}

cplx khat_recursive(const VarianceProfile& profile, double E, double t, const Charges& charges,
                    const std::vector<int>& x)
{
    KHatEngine eng(profile, E, t);
    return eng.value(charges, x);
}

// ---------------------------------------------------------------------------
// ODE oracle

namespace {

struct Pair {
    int k, l;   // 1-based, k < l
};

Charges left_charges(const Charges& s, int k, int l)
{
    const int n = static_cast<int>(s.size());
    Charges out(s.begin() + (l - 1), s.begin() + n);
    out.insert(out.end(), s.begin(), s.begin() + k);
    return out;
}

Charges right_charges(const Charges& s, int k, int l) { return Charges(s.begin() + (k - 1), s.begin() + l); }

void collect_closure(const Charges& s, std::map<std::string, Charges>& set)
{
    if (s.size() < 2)
        return;
    const auto key = charges_to_string(s);
    if (set.count(key))
        return;
    set[key] = s;
    const int n = static_cast<int>(s.size());
    for (int k = 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            collect_closure(left_charges(s, k, l), set);
            collect_closure(right_charges(s, k, l), set);
        }
}

} // namespace

Tensor khat_ode_oracle(const VarianceProfile& profile, double E, double t, const Charges& charges,
                       const OdeOptions& opts)
{
    const int n = static_cast<int>(charges.size());
    const int N = profile.size();
    if (n < 2 || n > 3 || N > 32)
        throw InvalidArgument("khat_ode_oracle: needs 2 <= n <= 3 and N <= 32");
    if (t < 0.0 || t >= 1.0)
        throw InvalidArgument("khat_ode_oracle: t must lie in [0, 1)");
    const cplx m = bulk_m(E);

    std::map<std::string, Charges> closure;
    collect_closure(charges, closure);
    std::vector<Charges> tuples;
    std::map<std::string, int> slot;
    for (const auto& [key, s] : closure) {
        slot[key] = static_cast<int>(tuples.size());
        tuples.push_back(s);
    }
    const CirculantOperator Sop(profile.kernel());

    using State = std::vector<Tensor>;
    State init;
    for (const auto& s : tuples) {
        Tensor T(static_cast<int>(s.size()), N);
        cplx prod = 1.0;
        for (auto c : s)
            prod *= charged(m, c);
        for (int x = 0; x < N; ++x)
            T(std::vector<int>(s.size(), x)) = prod;
        init.push_back(std::move(T));
    }

    auto rhs = [&](const State& K) {
        State Q = K;
        for (auto& T : Q)
            apply_axis(T, T.order - 1, Sop);
        State out;
        for (size_t i = 0; i < tuples.size(); ++i) {
            const auto& s = tuples[i];
            const int ord = static_cast<int>(s.size());
            Tensor D(ord, N);
            for (int k = 1; k <= ord; ++k)
                for (int l = k + 1; l <= ord; ++l) {
                    const Tensor& KL = K[slot.at(charges_to_string(left_charges(s, k, l)))];
                    const Tensor& QR = Q[slot.at(charges_to_string(right_charges(s, k, l)))];
                    // KL is indexed by (x_l..x_ord, x_1..x_{k-1}, y), QR by (x_k..x_{l-1}, y)
                    std::array<size_t, 4> sa{}, sb{};
                    size_t stride = N;
                    for (int j = k - 1; j >= 1; --j, stride *= N)
                        sa[j - 1] = stride;
                    for (int j = ord; j >= l; --j, stride *= N)
                        sa[j - 1] = stride;
                    stride = N;
                    for (int j = l - 1; j >= k; --j, stride *= N)
                        sb[j - 1] = stride;
                    std::array<int, 4> x{};
                    for (size_t flat = 0; flat < D.numel(); ++flat) {
                        size_t pa = 0, qb = 0;
                        for (int j = 0; j < ord; ++j) {
                            pa += sa[j] * x[j];
                            qb += sb[j] * x[j];
                        }
                        cplx acc = 0.0;
                        for (int y = 0; y < N; ++y)
                            acc += KL.data[pa + y] * QR.data[qb + y];
                        D.data[flat] += acc;
                        for (int j = ord - 1; j >= 0 && ++x[j] == N; --j)
                            x[j] = 0;
                    }
                }
            out.push_back(std::move(D));
        }
        return out;
    };

    auto axpy = [](const State& X, double h, const State& Y) {
        State Z = X;
        for (size_t i = 0; i < Z.size(); ++i)
            for (size_t j = 0; j < Z[i].numel(); ++j)
                Z[i].data[j] += h * Y[i].data[j];
        return Z;
    };

    auto integrate = [&](int steps) {
        State K = init;
        if (t == 0.0)
            return K;
        const double h = t / steps;
        for (int s = 0; s < steps; ++s) {
            const State k1 = rhs(K);
            const State k2 = rhs(axpy(K, h / 2, k1));
            const State k3 = rhs(axpy(K, h / 2, k2));
            const State k4 = rhs(axpy(K, h, k3));
            for (size_t i = 0; i < K.size(); ++i)
                for (size_t j = 0; j < K[i].numel(); ++j)
                    K[i].data[j] += h / 6.0 * (k1[i].data[j] + 2.0 * k2[i].data[j] + 2.0 * k3[i].data[j] +
                                               k4[i].data[j]);
        }
        return K;
    };

    int steps = std::max(1, static_cast<int>(std::ceil(t / opts.max_step - 1e-9)));
    const int target = slot.at(charges_to_string(charges));
    Tensor coarse = integrate(steps)[target];
    Tensor fine = integrate(2 * steps)[target];
    double diff = 0.0;
    for (;;) {
        double scale = 1.0;
        for (const auto& v : fine.data)
            scale = std::max(scale, std::abs(v));
        diff = coarse.max_abs_diff(fine);
        if (diff <= opts.halving_tol * scale)
            break;
        steps *= 2;
        if (2 * steps > opts.max_steps)
            throw NumericalError("khat_ode_oracle: step halving still changes the solution by " +
                                 std::to_string(diff) + " at " + std::to_string(steps) + " steps");
        coarse = std::move(fine);
        fine = integrate(2 * steps)[target];
    }
    return fine;
}

// ---------------------------------------------------------------------------

Tensor kloop_from_khat(const Tensor& khat, const VarianceProfile& profile)
{
    if (khat.N != profile.size())
        throw InvalidArgument("kloop_from_khat: size mismatch");
    Tensor T = khat;
    const CirculantOperator op(profile.kernel());
    for (int axis = 0; axis < T.order; ++axis)
        apply_axis(T, axis, op);
    return T;
}

Tensor kchain_from_khat(const Tensor& khat, const VarianceProfile& profile)
{
    if (khat.N != profile.size())
        throw InvalidArgument("kchain_from_khat: size mismatch");
    Tensor T = khat;
    const CirculantOperator op(profile.kernel());
    for (int axis = 0; axis + 1 < T.order; ++axis)
        apply_axis(T, axis, op);
    return T;
}

double kloop_ward_check(const VarianceProfile& profile, double E, double t, const Charges& s)
{
    const int n = static_cast<int>(s.size());
    if (n < 2)
        throw InvalidArgument("kloop_ward_check: n must be at least 2");
    if (s.front() == s.back())
        throw InvalidArgument("kloop_ward_check: needs sigma_1 != sigma_n");
    const cplx m = bulk_m(E);
    const double eta_t = (1.0 - t) * m.imag();
    const int N = profile.size();

    KHatEngine eng(profile, E, t);
    const Tensor K = kloop_from_khat(eng.tensor(s), profile);

    Charges plus(s.begin(), s.end() - 1), minus(s.begin(), s.end() - 1);
    plus[0] = Charge::Plus;
    minus[0] = Charge::Minus;
    Tensor Kp, Km;
    if (n - 1 >= 2) {
        Kp = kloop_from_khat(eng.tensor(plus), profile);
        Km = kloop_from_khat(eng.tensor(minus), profile);
    }

    Tensor lhs(n - 1, N);
    for (size_t flat = 0; flat < K.numel(); ++flat)
        lhs.data[flat / N] += K.data[flat];

    double worst = 0.0;
    const cplx denom(0.0, 2.0 * eta_t);
    for (size_t i = 0; i < lhs.numel(); ++i) {
        const cplx rhs = n - 1 >= 2 ? (Kp.data[i] - Km.data[i]) / denom : (m - std::conj(m)) / denom;
        worst = std::max(worst, std::abs(lhs.data[i] - rhs));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Non-crossing trees

namespace {

bool crosses(std::pair<int, int> e, std::pair<int, int> f)
{
    auto [i, j] = e;
    auto [k, l] = f;
    return (i < k && k < j && j < l) || (k < i && i < l && l < j);
}

int find_root(std::vector<int>& parent, int v)
{
    while (parent[v] != v)
        v = parent[v] = parent[parent[v]];
    return v;
}

} // namespace

bool is_noncrossing_tree(const NonCrossingTree& T)
{
    const int n = T.n;
    if (n < 1 || static_cast<int>(T.edges.size()) != n - 1)
        return false;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& [i, j] : T.edges) {
        if (!(0 <= i && i < j && j < n))
            return false;
        const int a = find_root(parent, i), b = find_root(parent, j);
        if (a == b)
            return false;
        parent[a] = b;
    }
    for (size_t a = 0; a < T.edges.size(); ++a)
        for (size_t b = a + 1; b < T.edges.size(); ++b)
            if (crosses(T.edges[a], T.edges[b]))
                return false;
    return true;
}

std::vector<NonCrossingTree> enumerate_noncrossing_trees(int n)
{
    if (n < 1 || n > 9)
        throw InvalidArgument("enumerate_noncrossing_trees: n must lie in [1, 9]");
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            all.emplace_back(i, j);

    std::vector<NonCrossingTree> out;
    std::vector<std::pair<int, int>> chosen;
    // spanning-tree search over edge subsets in lexicographic order, pruning cycles and crossings
    std::function<void(size_t)> rec = [&](size_t start) {
        if (static_cast<int>(chosen.size()) == n - 1) {
            out.push_back({n, chosen});
            return;
        }
        const size_t need = static_cast<size_t>(n - 1) - chosen.size();
        for (size_t e = start; e + need <= all.size(); ++e) {
            bool ok = true;
            for (const auto& c : chosen)
                if (crosses(c, all[e])) {
                    ok = false;
                    break;
                }
            if (!ok)
                continue;
            std::vector<int> parent(n);
            std::iota(parent.begin(), parent.end(), 0);
            for (const auto& [i, j] : chosen)
                parent[find_root(parent, i)] = find_root(parent, j);
            if (find_root(parent, all[e].first) == find_root(parent, all[e].second))
                continue;
            chosen.push_back(all[e]);
            rec(e + 1);
            chosen.pop_back();
        }
    };
    rec(0);
    return out;
}

double decay_pair(const ShapeParameters& shape, double t, int r, bool experimental)
{
    const double a = shape.alpha();
    const double ell = shape.ell_t(t);
    if (a >= 1.0)
        return std::pow(r / ell + 1.0, -(1.0 + a) / 2.0);
    if (experimental && a > 0.0)
        return std::pow(r / static_cast<double>(shape.W()) + 1.0, 0.5 * (a - 1.0)) * std::pow(r / ell + 1.0, -a);
    throw UnsupportedRegime("decay factors are defined for alpha >= 1 (alpha in (0,1) only behind the experimental flag)");
}

DecayFactors decay_factors(const ShapeParameters& shape, double t, const std::vector<int>& x, bool experimental)
{
    const int n = static_cast<int>(x.size());
    if (n < 1)
        throw InvalidArgument("decay_factors: empty tuple");
    const int N = shape.N();
    DecayFactors out{1.0, 0.0};
    for (int i = 0; i < n; ++i)
        out.loop *= decay_pair(shape, t, periodic_distance(x[i], x[(i + 1) % n], N), experimental);
    if (n == 1) {
        out.tree = 1.0;
        return out;
    }
    static std::map<int, std::vector<NonCrossingTree>> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, enumerate_noncrossing_trees(n)).first;
    for (const auto& T : it->second) {
        double p = 1.0;
        for (const auto& [i, j] : T.edges) {
            const double d = decay_pair(shape, t, periodic_distance(x[i], x[j], N), experimental);
            p *= d * d;
        }
        out.tree += p;
    }
    return out;
}

TreeBoundReport verify_tree_bound(const VarianceProfile& profile, double E, double t, const Charges& charges,
                                  const std::vector<std::vector<int>>& tuples, std::uint64_t seed)
{
    const int n = static_cast<int>(charges.size());
    const int N = profile.size();
    const ShapeParameters shape(profile);
    if (shape.alpha() < 1.0)
        throw UnsupportedRegime("verify_tree_bound needs alpha >= 1");
    if (n < 1 || n > 4 || N > 64)
        throw InvalidArgument("verify_tree_bound needs n <= 4 and N <= 64");

    KHatEngine eng(profile, E, t);
    const Tensor K = kloop_from_khat(eng.tensor(charges), profile);
    const double Bn = std::pow(shape.B_t(t, 0), n - 1);

    std::vector<std::vector<int>> sample = tuples;
    if (sample.empty()) {
        if (K.numel() <= (1u << 16)) {
            for (size_t f = 0; f < K.numel(); ++f)
                sample.push_back(K.unindex(f));
        } else {
            RngStream rng(seed, 0x7EE);
            std::uniform_int_distribution<int> site(0, N - 1);
            for (int i = 0; i < 4096; ++i) {
                std::vector<int> x(n);
                for (auto& v : x)
                    v = site(rng);
                sample.push_back(x);
            }
        }
    }
    TreeBoundReport rep;
    rep.n = n;
    rep.alpha = shape.alpha();
    rep.t = t;
    rep.N = N;
    rep.tuples = static_cast<int>(sample.size());
    for (const auto& x : sample) {
        const auto d = decay_factors(shape, t, x);
        rep.constant = std::max(rep.constant, std::abs(K(x)) / (Bn * d.tree));
    }
    rep.stable = std::isfinite(rep.constant);
    return rep;
}

void mark_doubling_stability(TreeBoundReport& smaller, TreeBoundReport& larger)
{
    const bool ok = std::isfinite(smaller.constant) && std::isfinite(larger.constant) && smaller.constant > 0.0 &&
                    larger.constant / smaller.constant <= 2.0;
    smaller.stable = larger.stable = ok;
}

void TreeBoundReport::write_csv_header(std::ostream& out) { out << "n,alpha,t,N,constant,stable_flag\n"; }

void TreeBoundReport::write_csv(std::ostream& out) const
{
    out.precision(12);
    out << n << ',' << alpha << ',' << t << ',' << N << ',' << constant << ',' << (stable ? 1 : 0) << '\n';
}

} // namespace prbm
