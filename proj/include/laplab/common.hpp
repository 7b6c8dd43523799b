#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace laplab {

using cplx = std::complex<double>;

constexpr double pi = 3.14159265358979323846;

// Thrown when an algorithm cannot reach its accuracy contract (quadrature
// refusing to converge, a Wronskian collapsing near a resonance, ...).
// Argument and domain problems use the std exceptions directly.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Japanese bracket <x> = (1 + x^2)^(1/2).
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }

inline double sq(double x) { return x * x; }

// Least-squares line y = a + b x; returns {a, b}.
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need two or more samples");
    double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    double b = (n * sxy - sx * sy) / det;
    double a = (sy - b * sx) / n;
    return {a, b};
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
// to per-index slots by the caller so the outcome is order independent.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mutex;
    int nt = std::min<std::size_t>(jobs, n);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!failed.exchange(true)) first_error = e.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed) throw numerical_error("parallel_for: worker failed: " + first_error);
}

} // namespace laplab
