#pragma once

// Lanczos three-term recursion with full reorthogonalization and a dense
// solve of the small tridiagonal matrix. The recursion builds
// alpha_n = <psi_n|H|psi_n> and beta_{n+1} = ||residual||, with beta_1 = 0;
// a beta below the breakdown tolerance signals an invariant subspace and
// ends the iteration early.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dtn/error.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

template <class T>
struct LanczosResult {
    double energy = 0.0;
    Tensor<T> vector;
    int vectors_used = 0;
};

// apply: Tensor<T> -> Tensor<T>, the action of a Hermitian operator.
template <class T, class Apply>
LanczosResult<T> lanczos_ground(Apply&& apply, const Tensor<T>& v0, int iters,
                                double breakdown_tol = 1e-13) {
    if (iters < 1) throw value_error("lanczos_ground: at least one iteration required");
    const double n0 = norm(v0);
    if (n0 == 0.0) throw numeric_error("lanczos_ground: zero input vector");

    std::vector<Tensor<T>> basis;
    basis.reserve(static_cast<index_t>(iters));
    {
        Tensor<T> v = v0;
        for (auto& x : v.data) x /= scalar_cast<T>(n0);
        basis.push_back(std::move(v));
    }

    std::vector<double> alpha, beta; // beta[j] couples vector j and j+1
    for (int it = 0; it < iters; ++it) {
        Tensor<T> w = apply(basis.back());
        const T a = dot(basis.back(), w);
        alpha.push_back(real_part(a));

        if (it + 1 == iters) break; // last alpha computed, no new vector needed
        // residual: w - alpha_n psi_n - beta_n psi_{n-1}
        for (index_t k = 0; k < w.size(); ++k) w.data[k] -= scalar_cast<T>(alpha.back()) * basis.back().data[k];
        if (it > 0) {
            const double b = beta.back();
            const auto& prev = basis[basis.size() - 2];
            for (index_t k = 0; k < w.size(); ++k) w.data[k] -= scalar_cast<T>(b) * prev.data[k];
        }
        // full reorthogonalization against every stored vector
        for (const auto& q : basis) {
            const T ov = dot(q, w);
            for (index_t k = 0; k < w.size(); ++k) w.data[k] -= ov * q.data[k];
        }
        const double b = norm(w);
        if (b < breakdown_tol) break; // invariant subspace reached
        beta.push_back(b);
        for (auto& x : w.data) x /= scalar_cast<T>(b);
        basis.push_back(std::move(w));
    }

    const int k = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        tri(i, i) = alpha[static_cast<index_t>(i)];
        if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<index_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    if (es.info() != Eigen::Success) throw numeric_error("lanczos_ground: tridiagonal solve failed");

    LanczosResult<T> out;
    out.energy = es.eigenvalues()(0);
    out.vectors_used = k;
    Tensor<T> combo(basis[0].dims);
    for (int j = 0; j < k; ++j) {
        const double c = es.eigenvectors()(j, 0);
        for (index_t x = 0; x < combo.size(); ++x)
            combo.data[x] += scalar_cast<T>(c) * basis[static_cast<index_t>(j)].data[x];
    }
    const double nc = norm(combo);
    if (nc > 0)
        for (auto& x : combo.data) x /= scalar_cast<T>(nc);
    out.vector = std::move(combo);
    return out;
}

} // namespace dtn
