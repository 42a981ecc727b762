#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

namespace oelab {

// 0 restores the OpenMP default
void set_threads(int n);
int thread_count();

inline constexpr uint64_t kBlock = 4096;

// Exceptions must not leave an OpenMP region. Bodies run through guard();
// the first exception is kept, the remaining iterations are skipped, and
// rethrow() raises it once the region has ended.
class ParallelErrors {
public:
    template <class F>
    void guard(F&& f) {
        if (failed_) return;
        try {
            f();
        } catch (...) {
            std::lock_guard lk(mu_);
            if (!err_) err_ = std::current_exception();
            failed_ = true;
        }
    }
    void rethrow() const {
        if (err_) std::rethrow_exception(err_);
    }

private:
    std::mutex mu_;
    std::exception_ptr err_;
    std::atomic<bool> failed_{false};
};

// Sum f(0..N-1) in fixed blocks combined in block order, so floating-point
// results do not depend on the number of threads.
template <class Acc, class F>
Acc block_reduce(uint64_t N, const Acc& zero, F&& f) {
    const int64_t nb = static_cast<int64_t>((N + kBlock - 1) / kBlock);
    std::vector<Acc> parts(nb, zero);
    ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
    for (int64_t b = 0; b < nb; ++b)
        errs.guard([&] {
            const uint64_t lo = static_cast<uint64_t>(b) * kBlock, hi = std::min<uint64_t>(N, lo + kBlock);
            for (uint64_t i = lo; i < hi; ++i) f(parts[b], i);
        });
    errs.rethrow();
    Acc total = zero;
    for (auto& p : parts) total += p;
    return total;
}

template <class Acc, class F>
Acc block_reduce_serial(uint64_t N, const Acc& zero, F&& f) {
    const uint64_t nb = (N + kBlock - 1) / kBlock;
    Acc total = zero;
    for (uint64_t b = 0; b < nb; ++b) {
        Acc part = zero;
        const uint64_t lo = b * kBlock, hi = std::min<uint64_t>(N, lo + kBlock);
        for (uint64_t i = lo; i < hi; ++i) f(part, i);
        total += part;
    }
    return total;
}

}  // namespace oelab
