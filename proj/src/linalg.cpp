#include "tractor/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace tractor {

Mat pseudo_orthonormal_frame(const Mat& G, int* negatives) {
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Vec& ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (scale <= 0.0 || ev.cwiseAbs().minCoeff() < 1e-12 * scale)
        throw NumericalError("form is numerically singular, |lambda_min/lambda_max| = " +
                             std::to_string(ev.cwiseAbs().minCoeff() / scale));
    const int n = static_cast<int>(G.rows());
    // negatives first to match diag(-I_s, +I_r)
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return (ev(a) < 0) && (ev(b) >= 0);
    });
    Mat F(n, n);
    int negs = 0;
    for (int c = 0; c < n; ++c) {
        const int i = order[c];
        if (ev(i) < 0) ++negs;
        F.col(c) = es.eigenvectors().col(i) / std::sqrt(std::abs(ev(i)));
    }
    if (negatives) *negatives = negs;
    return F;
}

RankResult numerical_rank(const Mat& rows, double rel_tol) {
    RankResult out;
    if (rows.rows() == 0 || rows.cols() == 0) return out;
    Eigen::JacobiSVD<Mat> svd(rows);
    const Vec& sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double cutoff = rel_tol * (sv.size() ? sv(0) : 0.0);
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++out.rank;
    return out;
}

Mat log_near_identity(const Mat& M) {
    const int n = static_cast<int>(M.rows());
    const Mat E = M - Mat::Identity(n, n);
    const double nrm = E.norm();
    if (!(nrm < 1.0))
        throw NumericalError("matrix log series out of range, ||M - I|| = " + std::to_string(nrm));
    Mat term = E;
    Mat acc = E;
    for (int k = 2; k <= 80; ++k) {
        term = term * E;
        const Mat contrib = term / static_cast<double>(k);
        if (k % 2 == 0) acc -= contrib; else acc += contrib;
        if (contrib.norm() < 1e-17 * std::max(1.0, acc.norm())) break;
    }
    return acc;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

int max_threads() {
    const char* env = std::getenv("TRACTOR_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    if (v <= 0) return 1;
    return std::min(v, static_cast<int>(std::thread::hardware_concurrency() > 0
                                            ? std::thread::hardware_concurrency()
                                            : 1u));
}

void parallel_for(int count, const std::function<void(int)>& body) {
    const int threads = std::min(max_threads(), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace tractor
