#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mgt {

// 17 significant digits, lossless for doubles.
std::string fmt17(double x);

// Worker count: MGT_WORKERS if set and positive, else hardware concurrency.
int default_workers();

// Pairwise summation (order-stable, independent of worker count).
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double rms_residual = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index is handled exactly once;
// the first exception is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace mgt
