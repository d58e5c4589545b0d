#include "ergo/returns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ergo/parallel.hpp"

namespace ergo {

// ------------------------------ ArcSet ----------------------------------------

ArcSet ArcSet::from_endpoints(const std::vector<std::pair<double, double>>& eps) {
    ArcSet s;
    for (auto& [lo, hi] : eps) {
        if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
            throw std::invalid_argument("arc endpoints must satisfy 0 <= lo < hi <= 1");
        U128 l = static_cast<U128>(Fixed64::from_double(lo).raw);
        U128 h = hi == 1.0 ? kTurn : static_cast<U128>(Fixed64::from_double(hi).raw);
        s.arcs.push_back({l, h});
    }
    std::sort(s.arcs.begin(), s.arcs.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < s.arcs.size(); ++i)
        if (s.arcs[i].lo < s.arcs[i - 1].hi)
            throw std::invalid_argument("arcs must be disjoint");
    return s;
}

ArcSet ArcSet::full_circle() {
    ArcSet s;
    s.arcs.push_back({0, kTurn});
    return s;
}

ArcSet::U128 ArcSet::raw_measure() const {
    U128 m = 0;
    for (auto& a : arcs) m += a.hi - a.lo;
    return m;
}

double ArcSet::measure() const { return static_cast<double>(raw_measure()) / static_cast<double>(kTurn); }

namespace {

// shift a sorted arc list by -t (mod 1), keeping arcs sorted and non-wrapping
std::vector<ArcSet::Arc> shifted_arcs(const std::vector<ArcSet::Arc>& arcs, std::uint64_t t) {
    std::vector<ArcSet::Arc> out;
    out.reserve(arcs.size() + 1);
    for (auto& a : arcs) {
        ArcSet::U128 len = a.hi - a.lo;
        std::uint64_t lo64 = static_cast<std::uint64_t>(a.lo) - t;
        ArcSet::U128 lo = lo64, hi = lo + len;
        if (hi <= ArcSet::kTurn) {
            out.push_back({lo, hi});
        } else {
            out.push_back({lo, ArcSet::kTurn});
            out.push_back({0, hi - ArcSet::kTurn});
        }
    }
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.lo < y.lo; });
    return out;
}

ArcSet::U128 intersect_length(const std::vector<ArcSet::Arc>& a, const std::vector<ArcSet::Arc>& b) {
    ArcSet::U128 len = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        auto lo = std::max(a[i].lo, b[j].lo);
        auto hi = std::min(a[i].hi, b[j].hi);
        if (hi > lo) len += hi - lo;
        if (a[i].hi < b[j].hi) ++i; else ++j;
    }
    return len;
}

std::vector<ArcSet::Arc> intersect_arcs(const std::vector<ArcSet::Arc>& a,
                                        const std::vector<ArcSet::Arc>& b) {
    std::vector<ArcSet::Arc> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        auto lo = std::max(a[i].lo, b[j].lo);
        auto hi = std::min(a[i].hi, b[j].hi);
        if (hi > lo) out.push_back({lo, hi});
        if (a[i].hi < b[j].hi) ++i; else ++j;
    }
    return out;
}

}  // namespace

double triple_return(const ArcSet& a, const Irrational& alpha, const Irrational& beta, long long n) {
    auto sa = shifted_arcs(a.arcs, alpha.fixed().times(n).raw);
    auto sb = shifted_arcs(a.arcs, beta.fixed().times(n).raw);
    auto ab = intersect_arcs(a.arcs, sa);
    ArcSet::U128 len = intersect_length(ab, sb);
    return static_cast<double>(len) / static_cast<double>(ArcSet::kTurn);
}

double double_return(const ArcSet& a, const Irrational& alpha, long long n) {
    auto sa = shifted_arcs(a.arcs, alpha.fixed().times(n).raw);
    return static_cast<double>(intersect_length(a.arcs, sa)) / static_cast<double>(ArcSet::kTurn);
}

// ------------------------------ scan ------------------------------------------

namespace {

System rotation_pair_system(const Irrational& alpha, const Irrational& beta) {
    System s = System::torus(1);
    s.add_transform("T", {alpha});
    s.add_transform("S", {beta});
    return s;
}

AuditReport pair_audit(const Irrational& alpha, const Irrational& beta) {
    System s = rotation_pair_system(alpha, beta);
    std::vector<ErgodicityClaim> claims;
    claims.push_back({{{"T", 1}}, true});
    claims.push_back({{{"S", 1}}, true});
    claims.push_back({{{"T", 1}, {"S", -1}}, true});
    return ergodicity_audit(s, claims);
}

}  // namespace

ReturnSetReport scan_large_returns(const ArcSet& a, const Irrational& alpha, const Irrational& beta,
                                   long long n_max, double eps) {
    if (n_max < 1) throw std::invalid_argument("scan needs n_max >= 1");
    ReturnSetReport rep;
    rep.eps = eps;
    rep.mu_a = a.measure();
    rep.threshold = rep.mu_a * rep.mu_a * rep.mu_a - eps;
    rep.n_max = n_max;
    rep.audit = pair_audit(alpha, beta);
    rep.hypotheses_verified = true;
    for (auto& e : rep.audit.entries)
        if (e.verdict != AuditVerdict::Pass) rep.hypotheses_verified = false;

    rep.member.assign(static_cast<std::size_t>(n_max) + 1, 0);
    rep.values.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    run_chunks(n_max, 2048, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            long long n = i + 1;
            double r = triple_return(a, alpha, beta, n);
            rep.values[static_cast<std::size_t>(n)] = r;
            rep.member[static_cast<std::size_t>(n)] = r > rep.threshold ? 1 : 0;
        }
    });

    long long members = 0, prev = 0, gap = 0;
    double proxy = 1.0;
    for (long long n = 1; n <= n_max; ++n) {
        if (rep.member[static_cast<std::size_t>(n)]) {
            ++members;
            gap = std::max(gap, n - prev);
            prev = n;
        }
        if (n >= n_max / 2)
            proxy = std::min(proxy, static_cast<double>(members) / static_cast<double>(n));
    }
    gap = std::max(gap, n_max - prev);
    rep.max_gap = gap;
    rep.density = static_cast<double>(members) / static_cast<double>(n_max);
    rep.lower_density_proxy = proxy;

    // Jensen witness on the rotation factor: the projection of the indicator
    // is the indicator itself, so the cube integral mu(A) dominates mu(A)^3
    rep.jensen_lhs = rep.mu_a;
    rep.jensen_rhs = rep.mu_a * rep.mu_a * rep.mu_a;
    return rep;
}

// ------------------------------ primes ----------------------------------------

PrimeTables sieve(long long n_limit) {
    if (n_limit < 2) throw std::invalid_argument("sieve needs a limit >= 2");
    if (n_limit > 100'000'000LL) throw std::invalid_argument("sieve budget is 1e8");
    PrimeTables t;
    t.limit = n_limit;
    t.is_prime.assign(static_cast<std::size_t>(n_limit) + 1, 1);
    t.is_prime[0] = t.is_prime[1] = 0;
    for (long long i = 2; i * i <= n_limit; ++i)
        if (t.is_prime[static_cast<std::size_t>(i)])
            for (long long j = i * i; j <= n_limit; j += i) t.is_prime[static_cast<std::size_t>(j)] = 0;
    t.lambda.assign(static_cast<std::size_t>(n_limit) + 1, 0.0);
    for (long long p = 2; p <= n_limit; ++p) {
        if (!t.is_prime[static_cast<std::size_t>(p)]) continue;
        t.primes.push_back(p);
        double lp = std::log(static_cast<double>(p));
        for (__int128 pk = p; pk <= n_limit; pk *= p) t.lambda[static_cast<std::size_t>(pk)] = lp;
    }
    // Chebyshev identity on the low range
    long long check_to = std::min<long long>(n_limit, 10'000);
    std::vector<double> acc(static_cast<std::size_t>(check_to) + 1, 0.0);
    for (long long d = 2; d <= check_to; ++d) {
        if (t.lambda[static_cast<std::size_t>(d)] == 0.0) continue;
        for (long long n = d; n <= check_to; n += d) acc[static_cast<std::size_t>(n)] += t.lambda[static_cast<std::size_t>(d)];
    }
    for (long long n = 2; n <= check_to; ++n)
        if (std::abs(acc[static_cast<std::size_t>(n)] - std::log(static_cast<double>(n))) > 1e-9)
            throw std::runtime_error("Chebyshev identity failed at n = " + std::to_string(n));
    return t;
}

long long PrimeTables::pi(long long n) const {
    auto it = std::upper_bound(primes.begin(), primes.end(), n);
    return static_cast<long long>(it - primes.begin());
}

double PrimeTables::lambda_prime(long long n) const {
    if (n < 0 || n > limit) throw std::out_of_range("Lambda' argument outside tables");
    return is_prime[static_cast<std::size_t>(n)] ? lambda[static_cast<std::size_t>(n)] : 0.0;
}

long long PrimeTables::nth_prime(long long k) const {
    if (k < 1 || k > static_cast<long long>(primes.size()))
        throw std::out_of_range("prime index outside tables");
    return primes[static_cast<std::size_t>(k - 1)];
}

namespace {
constexpr char kPrimeMagic[8] = {'E', 'R', 'G', 'O', 'P', 'R', 'M', '1'};
void put_u64(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 8);
}
std::uint64_t get_u64(std::ifstream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
}  // namespace

void PrimeTables::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write prime table cache: " + path);
    os.write(kPrimeMagic, 8);
    put_u64(os, 1);  // format version
    put_u64(os, static_cast<std::uint64_t>(limit));
    std::uint64_t count = 0;
    for (long long n = 0; n <= limit; ++n)
        if (lambda[static_cast<std::size_t>(n)] != 0.0) ++count;
    put_u64(os, count);
    for (long long n = 0; n <= limit; ++n) {
        double l = lambda[static_cast<std::size_t>(n)];
        if (l == 0.0) continue;
        put_u64(os, static_cast<std::uint64_t>(n));
        std::uint64_t bits;
        std::memcpy(&bits, &l, 8);
        put_u64(os, bits);
    }
}

PrimeTables PrimeTables::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read prime table cache: " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kPrimeMagic, 8) != 0) throw std::runtime_error("bad prime cache magic");
    std::uint64_t version = get_u64(is);
    if (version != 1) throw std::runtime_error("unsupported prime cache version");
    PrimeTables t;
    t.limit = static_cast<long long>(get_u64(is));
    std::uint64_t count = get_u64(is);
    t.lambda.assign(static_cast<std::size_t>(t.limit) + 1, 0.0);
    t.is_prime.assign(static_cast<std::size_t>(t.limit) + 1, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t n = get_u64(is);
        std::uint64_t bits = get_u64(is);
        double l;
        std::memcpy(&l, &bits, 8);
        if (n > static_cast<std::uint64_t>(t.limit)) throw std::runtime_error("prime cache record out of range");
        t.lambda[static_cast<std::size_t>(n)] = l;
        // n is prime exactly when Lambda(n) = log n
        if (std::abs(l - std::log(static_cast<double>(n))) < 1e-9) {
            t.is_prime[static_cast<std::size_t>(n)] = 1;
            t.primes.push_back(static_cast<long long>(n));
        }
    }
    if (!is) throw std::runtime_error("truncated prime cache");
    return t;
}

long long w_product(long long w) {
    long long big_w = 1;
    for (long long p = 2; p < w; ++p) {
        bool prime = p >= 2;
        for (long long d = 2; d * d <= p; ++d)
            if (p % d == 0) { prime = false; break; }
        if (prime) big_w *= p;
    }
    return big_w;
}

long long euler_phi(long long n) {
    long long result = n, m = n;
    for (long long p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        while (m % p == 0) m /= p;
        result -= result / p;
    }
    if (m > 1) result -= result / m;
    return result;
}

double mangoldt_w(long long w, long long r, long long n, const PrimeTables& t) {
    long long big_w = w_product(w);
    long long arg = big_w * n + r;
    if (arg < 0 || arg > t.limit) throw std::out_of_range("W n + r escapes the prime tables");
    return static_cast<double>(euler_phi(big_w)) / static_cast<double>(big_w) * t.lambda_prime(arg);
}

PrimeAverageReport prime_average_compare(const CorrelationSeries& a, std::vector<long long> caps,
                                         const PrimeTables& t) {
    PrimeAverageReport rep;
    for (auto cap : caps) {
        if (cap > t.limit) throw std::out_of_range("cap exceeds the prime tables");
        if (a.n_min > 0 || a.n_max < cap - 1) throw std::out_of_range("series does not cover [0, cap)");
        for (long long n = a.n_min; n < cap; ++n)
            if (std::abs(a.at(n)) > 1.0 + 1e-9)
                throw std::invalid_argument("prime average comparison requires |a| <= 1");
        NeumaierCSum ps, ws;
        long long count = 0;
        for (long long p : t.primes) {
            if (p >= cap) break;
            ps.add(a.at(p));
            ws.add(t.lambda[static_cast<std::size_t>(p)] * a.at(p));
            ++count;
        }
        PrimeAverageReport::Row row;
        row.n_cap = cap;
        row.prime_mean = count ? ps.value() / static_cast<double>(count) : std::complex<double>{0, 0};
        row.weighted_mean = ws.value() / static_cast<double>(cap);
        row.difference = std::abs(row.prime_mean - row.weighted_mean);
        rep.rows.push_back(row);
    }
    rep.decreasing = rep.rows.size() >= 2;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].difference >= rep.rows[i - 1].difference) rep.decreasing = false;
    return rep;
}

WtrickReport wtrick_average_compare(const System& sys, const Observable& f, const Observable& g,
                                    const std::string& label_t, const std::string& label_s,
                                    long long w, std::vector<long long> caps, const PrimeTables& t) {
    WtrickReport rep;
    rep.w = w;
    rep.big_w = w_product(w);
    const long long W = rep.big_w;
    if (W == 1) {
        rep.residues = {0};
    } else {
        for (long long r = 1; r < W; ++r)
            if (std::gcd(r, W) == 1) rep.residues.push_back(r);
    }
    const double phi_over_w = static_cast<double>(euler_phi(W)) / static_cast<double>(W);

    std::vector<Observable> fs = {constant_observable(sys, {1.0, 0.0}), f, g};
    std::vector<std::string> ts = {label_t, label_s};

    for (auto cap : caps) {
        WtrickReport::Row row;
        row.n_cap = cap;
        double mx = 0.0;
        for (long long r : rep.residues) {
            if (W * cap + r > t.limit) throw std::out_of_range("W n + r escapes the prime tables");
            // exponent polynomial W n + r on both transforms
            std::vector<std::vector<std::vector<long long>>> exps(
                2, std::vector<std::vector<long long>>(2));
            exps[0][0] = {r, W};  // f moved by T^{Wn+r}
            exps[1][1] = {r, W};  // g moved by S^{Wn+r}
            auto weight = [&](long long n) {
                return phi_over_w * t.lambda_prime(W * n + r) - 1.0;
            };
            AverageFunction diff = accumulate_average(sys, fs, ts, exps, 1, cap + 1, weight);
            double norm = diff.l2_norm();
            row.per_residue.push_back(norm);
            mx = std::max(mx, norm);
        }
        row.max_over_residues = mx;
        rep.rows.push_back(row);
    }
    rep.decreasing = rep.rows.size() >= 2;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].max_over_residues >= rep.rows[i - 1].max_over_residues) rep.decreasing = false;
    return rep;
}

ShiftedPrimeReport shifted_prime_returns(const ArcSet& a, const Irrational& alpha, const Irrational& beta,
                                         long long n_primes, double eps, const PrimeTables& t,
                                         int shift_sign) {
    if (shift_sign != -1 && shift_sign != 1)
        throw std::invalid_argument("shift sign must be -1 (p-1) or +1 (p+1)");
    if (n_primes > static_cast<long long>(t.primes.size()))
        throw std::out_of_range("tables hold fewer primes than requested");
    ShiftedPrimeReport rep;
    rep.eps = eps;
    rep.mu_a = a.measure();
    rep.threshold = rep.mu_a * rep.mu_a * rep.mu_a - eps;
    rep.count = n_primes;
    rep.shift_sign = shift_sign;
    rep.audit = pair_audit(alpha, beta);
    rep.hypotheses_verified = true;
    for (auto& e : rep.audit.entries)
        if (e.verdict != AuditVerdict::Pass) rep.hypotheses_verified = false;

    std::vector<std::uint8_t> member(static_cast<std::size_t>(n_primes), 0);
    run_chunks(n_primes, 2048, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            long long p = t.primes[static_cast<std::size_t>(i)];
            double r = triple_return(a, alpha, beta, p + shift_sign);
            member[static_cast<std::size_t>(i)] = r > rep.threshold ? 1 : 0;
        }
    });

    long long members = 0;
    rep.running_density.resize(static_cast<std::size_t>(n_primes));
    for (long long i = 0; i < n_primes; ++i) {
        members += member[static_cast<std::size_t>(i)];
        rep.running_density[static_cast<std::size_t>(i)] =
            static_cast<double>(members) / static_cast<double>(i + 1);
    }
    rep.fraction = static_cast<double>(members) / static_cast<double>(n_primes);
    double proxy = 1.0;
    for (long long i = n_primes / 2; i < n_primes; ++i)
        proxy = std::min(proxy, rep.running_density[static_cast<std::size_t>(i)]);
    rep.lower_density_proxy = proxy;
    return rep;
}

}  // namespace ergo
