// parallel.hpp — worker pools with reproducible reductions.
//
// Work is split into chunks of a fixed size that does not depend on the
// worker count; chunk results are combined sequentially in index order.
// Numeric output is therefore a function of the input alone; --threads only
// changes wall time.

#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace ergo {

inline int& worker_count_ref() {
    static int n = static_cast<int>(std::thread::hardware_concurrency());
    return n;
}
inline void set_worker_count(int n) { worker_count_ref() = n > 0 ? n : 1; }
inline int worker_count() { return worker_count_ref() > 0 ? worker_count_ref() : 1; }

// Runs fn(chunk_index, begin, end) over [0, total) in fixed chunks.
// Each chunk must write only to its own slot; chunks are combined by the
// caller in index order afterwards.
inline void run_chunks(std::int64_t total, std::int64_t chunk,
                       const std::function<void(std::size_t, std::int64_t, std::int64_t)>& fn) {
    if (total <= 0) return;
    std::int64_t nchunks = (total + chunk - 1) / chunk;
    int workers = std::min<std::int64_t>(worker_count(), nchunks);
    if (workers <= 1) {
        for (std::int64_t c = 0; c < nchunks; ++c)
            fn(static_cast<std::size_t>(c), c * chunk, std::min(total, (c + 1) * chunk));
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto body = [&] {
        for (;;) {
            std::int64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(static_cast<std::size_t>(c), c * chunk, std::min(total, (c + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(body);
    for (auto& t : pool) t.join();
}

// Chunked parallel sum of complex-valued term(n) over n in [lo, hi).
// Within a chunk terms are added in index order; chunks are added in order.
inline std::complex<double> parallel_sum(std::int64_t lo, std::int64_t hi,
                                         const std::function<std::complex<double>(std::int64_t)>& term,
                                         std::int64_t chunk = 4096) {
    std::int64_t total = hi - lo;
    if (total <= 0) return {0.0, 0.0};
    std::int64_t nchunks = (total + chunk - 1) / chunk;
    std::vector<std::complex<double>> partial(static_cast<std::size_t>(nchunks), {0.0, 0.0});
    run_chunks(total, chunk, [&](std::size_t c, std::int64_t b, std::int64_t e) {
        std::complex<double> s{0.0, 0.0};
        for (std::int64_t n = b; n < e; ++n) s += term(lo + n);
        partial[c] = s;
    });
    std::complex<double> s{0.0, 0.0};
    for (auto& p : partial) s += p;
    return s;
}

// --------------------------- compensated summation ---------------------------

struct NeumaierSum {
    double s{0.0};
    double c{0.0};
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

struct NeumaierCSum {
    NeumaierSum re, im;
    void add(std::complex<double> z) { re.add(z.real()); im.add(z.imag()); }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

// ----------------------------- exact accumulator -----------------------------

// Order-independent sum of bounded terms: each term is quantized to a fixed
// unit and accumulated in 128-bit integers. The mean's quantization error is
// at most half a unit regardless of the term count, and sums over permuted
// term multisets are bit-identical. Unit = bound * 2^-62; supports ~2^33
// terms before overflow.
class ExactSum {
public:
    explicit ExactSum(double term_bound)
        : unit_(term_bound > 0 ? term_bound / 4611686018427387904.0 : 1.0 / 4611686018427387904.0) {}

    void add(double x) { acc_ += static_cast<__int128>(std::llrint(x / unit_)); ++count_; }
    double sum() const { return static_cast<double>(acc_) * unit_; }
    double mean() const { return count_ ? sum() / static_cast<double>(count_) : 0.0; }
    std::int64_t count() const { return count_; }

    void merge(const ExactSum& o) { acc_ += o.acc_; count_ += o.count_; }
    double unit() const { return unit_; }

private:
    __int128 acc_{0};
    std::int64_t count_{0};
    double unit_;
};

class ExactCSum {
public:
    explicit ExactCSum(double term_bound) : re_(term_bound), im_(term_bound) {}
    void add(std::complex<double> z) { re_.add(z.real()); im_.add(z.imag()); }
    std::complex<double> sum() const { return {re_.sum(), im_.sum()}; }
    std::complex<double> mean() const {
        auto n = re_.count();
        return n ? sum() / static_cast<double>(n) : std::complex<double>{0.0, 0.0};
    }
    void merge(const ExactCSum& o) { re_.merge(o.re_); im_.merge(o.im_); }

private:
    ExactSum re_, im_;
};

}  // namespace ergo
