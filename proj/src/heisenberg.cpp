#include "ergo/heisenberg.hpp"

#include <cmath>
#include <stdexcept>

#include "ergo/parallel.hpp"

namespace ergo {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

HeisenbergElement nil_mul(const HeisenbergElement& g, const HeisenbergElement& h) {
    return {g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y};
}

HeisenbergElement nil_inv(const HeisenbergElement& g) {
    return {-g.x, -g.y, -g.z + g.x * g.y};
}

HeisenbergElement nil_commutator(const HeisenbergElement& g, const HeisenbergElement& h) {
    return nil_mul(nil_mul(g, h), nil_inv(nil_mul(h, g)));
}

HeisenbergElement nil_pow(const HeisenbergElement& g, long long n) {
    double nn = static_cast<double>(n);
    double binom = 0.5 * nn * (nn - 1.0);
    return {nn * g.x, nn * g.y, nn * g.z + binom * g.x * g.y};
}

ReduceResult reduce(const HeisenbergElement& g) {
    ReduceResult r;
    r.b = -static_cast<long long>(std::floor(g.y));
    r.a = -static_cast<long long>(std::floor(g.x));
    double zb = g.z + g.x * static_cast<double>(r.b);
    r.c = -static_cast<long long>(std::floor(zb));
    r.rep.x = g.x + static_cast<double>(r.a);
    r.rep.y = g.y + static_cast<double>(r.b);
    r.rep.z = zb + static_cast<double>(r.c);
    // guard the half-open interval against outward rounding
    auto clamp01 = [](double& v, long long& gamma) {
        if (v >= 1.0) { v -= 1.0; gamma -= 1; }
        if (v < 0.0) { v += 1.0; gamma += 1; }
    };
    clamp01(r.rep.x, r.a);
    clamp01(r.rep.y, r.b);
    clamp01(r.rep.z, r.c);
    return r;
}

NilObservable NilObservable::character(int j, int k, std::complex<double> c) {
    NilObservable f;
    f.kind = Kind::FactorTorusTrigPoly;
    f.terms.push_back({{j, k}, c});
    return f;
}

std::complex<double> NilObservable::eval_reduced(const HeisenbergElement& rep) const {
    if (kind == Kind::FactorTorusTrigPoly) {
        std::complex<double> s{0.0, 0.0};
        for (auto& [jk, c] : terms) {
            double ang = kTwoPi * (jk.first * rep.x + jk.second * rep.y);
            s += c * std::complex<double>{std::cos(ang), std::sin(ang)};
        }
        return s;
    }
    if (grid <= 0 || table.size() != static_cast<std::size_t>(grid) * grid * grid)
        throw std::invalid_argument("reduced-coordinate table is not initialized");
    auto cell = [&](double v) {
        int i = static_cast<int>(v * grid);
        return std::min(std::max(i, 0), grid - 1);
    };
    std::size_t idx = (static_cast<std::size_t>(cell(rep.x)) * grid + cell(rep.y)) * grid + cell(rep.z);
    return table[idx];
}

std::complex<double> nilsequence(const NilObservable& f, const HeisenbergElement& a,
                                 const HeisenbergElement& x0, long long n) {
    return f.eval_reduced(reduce(nil_mul(nil_pow(a, n), x0)).rep);
}

EquidistributionReport equidistribution_report(const HeisenbergElement& a, const HeisenbergElement& x0,
                                               long long n_samples, int max_j, int max_k) {
    if (n_samples < 1) throw std::invalid_argument("equidistribution report needs n >= 1");
    EquidistributionReport rep;
    const int B = 16;
    rep.bins = static_cast<long long>(B) * B * B;
    rep.samples = n_samples;

    std::vector<std::pair<int, int>> freqs;
    for (int j = -max_j; j <= max_j; ++j)
        for (int k = -max_k; k <= max_k; ++k)
            if (j || k) freqs.push_back({j, k});

    const std::int64_t chunk = 8192;
    const std::int64_t nchunks = (n_samples + chunk - 1) / chunk;
    std::vector<std::vector<std::complex<double>>> sums(
        static_cast<std::size_t>(nchunks), std::vector<std::complex<double>>(freqs.size(), {0.0, 0.0}));
    std::vector<std::vector<long long>> hist(static_cast<std::size_t>(nchunks),
                                             std::vector<long long>(static_cast<std::size_t>(rep.bins), 0));

    run_chunks(n_samples, chunk, [&](std::size_t c, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t n = lo; n < hi; ++n) {
            HeisenbergElement rep_el = reduce(nil_mul(nil_pow(a, n), x0)).rep;
            for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
                double ang = kTwoPi * (freqs[fi].first * rep_el.x + freqs[fi].second * rep_el.y);
                sums[c][fi] += std::complex<double>{std::cos(ang), std::sin(ang)};
            }
            int bx = std::min(static_cast<int>(rep_el.x * B), B - 1);
            int by = std::min(static_cast<int>(rep_el.y * B), B - 1);
            int bz = std::min(static_cast<int>(rep_el.z * B), B - 1);
            ++hist[c][static_cast<std::size_t>((bx * B + by) * B + bz)];
        }
    });

    std::vector<std::complex<double>> total(freqs.size(), {0.0, 0.0});
    std::vector<long long> htotal(static_cast<std::size_t>(rep.bins), 0);
    for (std::size_t c = 0; c < sums.size(); ++c) {
        for (std::size_t fi = 0; fi < freqs.size(); ++fi) total[fi] += sums[c][fi];
        for (std::size_t b = 0; b < htotal.size(); ++b) htotal[b] += hist[c][b];
    }
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        std::complex<double> mean = total[fi] / static_cast<double>(n_samples);
        rep.weyl.push_back({freqs[fi].first, freqs[fi].second, mean});
        rep.max_weyl_modulus = std::max(rep.max_weyl_modulus, std::abs(mean));
    }
    double expect = static_cast<double>(n_samples) / static_cast<double>(rep.bins);
    double chi = 0.0;
    for (auto h : htotal) {
        double d = static_cast<double>(h) - expect;
        chi += d * d / expect;
    }
    rep.chi_square = chi;
    return rep;
}

}  // namespace ergo
