#pragma once

// Seeded generators and small statistics helpers shared by the test binaries.

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "rtopk/core.hpp"

namespace testutil {

inline rtopk::Permutation random_perm(std::size_t m, rtopk::Rng& rng) {
    std::vector<std::size_t> v(m);
    std::iota(v.begin(), v.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    return rtopk::Permutation(std::move(v));
}

inline rtopk::RelevanceVector random_relevance(std::size_t m, int n, rtopk::Rng& rng) {
    std::vector<int> g(m);
    for (int& x : g) x = static_cast<int>(rng.below(static_cast<std::size_t>(n) + 1));
    return rtopk::RelevanceVector(std::move(g), n);
}

inline Eigen::VectorXd random_vector(std::size_t m, double lo, double hi, rtopk::Rng& rng) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

// Rows drawn Gaussian and scaled to unit norm.
inline Eigen::MatrixXd unit_rows(std::size_t m, std::size_t d, rtopk::Rng& rng) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
        x.row(i).normalize();
    }
    return x;
}

// Running mean and standard error per coordinate (Welford).
class MeanAccumulator {
public:
    explicit MeanAccumulator(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}
    void add(const Eigen::VectorXd& x) {
        ++n_;
        const Eigen::VectorXd delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta.cwiseProduct(x - mean_);
    }
    const Eigen::VectorXd& mean() const { return mean_; }
    Eigen::VectorXd standard_error() const {
        return (m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)).cwiseSqrt();
    }
    // Largest |mean - target| in units of standard error. Coordinates with
    // zero variance must match exactly (up to 1e-12).
    double max_z(const Eigen::VectorXd& target) const {
        const Eigen::VectorXd se = standard_error();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < mean_.size(); ++i) {
            const double diff = std::abs(mean_(i) - target(i));
            if (se(i) < 1e-15)
                worst = std::max(worst, diff < 1e-12 ? 0.0 : INFINITY);
            else
                worst = std::max(worst, diff / se(i));
        }
        return worst;
    }
    std::size_t count() const { return n_; }

private:
    std::size_t n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

}  // namespace testutil
