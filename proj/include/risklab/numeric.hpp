#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace risklab {

// Kahan-Babuska compensated accumulator; keeps long reductions accurate
// enough for the 1e-8 contracts at dimensions up to a few thousand.
class KahanAccumulator {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double total() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(const std::vector<double>& xs) {
    KahanAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.total();
}

// Sum of entrywise products, compensated. For symmetric a this is Tr(a*b).
inline double trace_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    KahanAccumulator acc;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            acc.add(a(i, j) * b(i, j));
    return acc.total();
}

inline double frobenius_sq(const Eigen::MatrixXd& a) { return trace_inner(a, a); }

inline double compensated_trace(const Eigen::MatrixXd& a) {
    KahanAccumulator acc;
    for (Eigen::Index i = 0; i < std::min(a.rows(), a.cols()); ++i) acc.add(a(i, i));
    return acc.total();
}

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
};

// Sample mean and standard error (sd / sqrt(count)); count >= 2 expected.
inline MeanStdErr mean_std_error(const std::vector<double>& xs) {
    const std::size_t m = xs.size();
    double mean = compensated_sum(xs) / static_cast<double>(m);
    KahanAccumulator dev;
    for (double x : xs) dev.add((x - mean) * (x - mean));
    double var = m > 1 ? dev.total() / static_cast<double>(m - 1) : 0.0;
    return {mean, var > 0.0 ? std::sqrt(var / static_cast<double>(m)) : 0.0};
}

// Number of worker threads: RISKLAB_THREADS if set, else hardware concurrency.
unsigned default_thread_count();

// Runs fn(i) for i in [0, count) on up to n_threads workers. Work items must
// be independent; callers write results by index so the schedule cannot
// change any output.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned n_threads = 0);

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace risklab
