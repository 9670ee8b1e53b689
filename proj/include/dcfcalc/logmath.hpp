// Log-domain helpers: log-binomials via lgamma and stable log-sum-exp.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace dcfcalc {

// log(n choose k) for integer n >= k >= 0.
inline double log_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

// log(e^a + e^b)
inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs)
        if (x > m) m = x;
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

// Cached log-factorials. Grown on demand; one instance per thread is cheap.
class LogFactorialTable {
public:
    double log_choose(std::int64_t n, std::int64_t k) {
        if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
        ensure(n);
        return lf_[std::size_t(n)] - lf_[std::size_t(k)] - lf_[std::size_t(n - k)];
    }

private:
    void ensure(std::int64_t n) {
        if (std::size_t(n) < lf_.size()) return;
        std::size_t old = lf_.size();
        lf_.resize(std::size_t(n) + 1);
        if (old == 0) {
            lf_[0] = 0.0;
            old = 1;
        }
        for (std::size_t i = old; i < lf_.size(); ++i)
            lf_[i] = lf_[i - 1] + std::log(double(i));
    }

    std::vector<double> lf_;
};

}  // namespace dcfcalc
