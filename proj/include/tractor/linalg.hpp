#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tractor/errors.hpp"

namespace tractor {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

inline double fro(const Mat& m) { return m.norm(); }

// uniform entries in [-1, 1], reproducible given the engine state
inline double unit_uniform(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}
inline Vec random_vec(int n, std::mt19937_64& rng) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = unit_uniform(rng);
    return v;
}
inline Mat random_mat(int r, int c, std::mt19937_64& rng) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = unit_uniform(rng);
    return m;
}

// Columns form a basis F with F^T G F = diag(-1..-1, +1..+1), negatives first.
// Throws NumericalError when G is singular at the requested tolerance.
Mat pseudo_orthonormal_frame(const Mat& G, int* negatives = nullptr);

// Numerical rank of the row span at a relative singular value cutoff.
struct RankResult {
    int rank = 0;
    std::vector<double> singular_values;  // descending
};
RankResult numerical_rank(const Mat& rows, double rel_tol);

// Matrix log via the truncated series on (M - I); requires ||M - I|| < 1.
Mat log_near_identity(const Mat& M);

uint64_t fnv1a(const std::string& s);

// Deterministic index-sliced parallel map; thread count capped by
// TRACTOR_THREADS (default 1).
void parallel_for(int count, const std::function<void(int)>& body);
int max_threads();

} // namespace tractor
