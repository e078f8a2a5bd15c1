#include "mvg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mvg/errors.hpp"

namespace mvg::linalg {

Tensor identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t[i * n + i] = 1.0;
    return t;
}

Tensor mat_vec(const Tensor& a, const Tensor& x) {
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor y({m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * x[j];
        y[i] = acc;
    }
    return y;
}

double off_diag_norm(const Tensor& a) {
    const std::size_t n = a.dim(0);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
}

double asymmetry(const Tensor& a) {
    const std::size_t n = a.dim(0);
    double m = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            m = std::max(m, std::fabs(a[i * n + j] - a[j * n + i]));
    return m;
}

std::pair<Tensor, Tensor> sym_eig(const Tensor& a_in) {
    if (a_in.ndim() != 2 || a_in.dim(0) != a_in.dim(1))
        throw ShapeError("sym_eig: expects square matrix");
    const std::size_t n = a_in.dim(0);
    Tensor a = a_in;
    // symmetrize defensively against tiny numeric asymmetry
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    Tensor v = identity(n);
    double fro = 0;
    for (std::size_t i = 0; i < n * n; ++i) fro += a[i] * a[i];
    fro = std::sqrt(fro);
    const double tol = std::max(1e-300, 1e-14 * fro);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_diag_norm(a) <= tol) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::fabs(apq) <= 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1 + tau * tau));
                const double c = 1.0 / std::sqrt(1 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> evals(n);
    for (std::size_t i = 0; i < n; ++i) evals[i] = a[i * n + i];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return evals[x] > evals[y]; });

    Tensor vals({n});
    Tensor vecs({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        vals[j] = evals[order[j]];
        for (std::size_t i = 0; i < n; ++i) vecs[i * n + j] = v[i * n + order[j]];
    }
    return {vals, vecs};
}

} // namespace mvg::linalg
