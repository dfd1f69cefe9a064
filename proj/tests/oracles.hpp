#pragma once

// Test-only reference implementations. These stay independent of the library
// paths they check: everything here is plain index arithmetic and loops.

#include <complex>
#include <random>
#include <vector>

#include "dtn/tensor.hpp"

namespace oracle {

using dtn::cplx;
using dtn::index_t;
using dtn::Tensor;

inline std::vector<index_t> unflatten(index_t flat, const std::vector<index_t>& dims) {
    std::vector<index_t> idx(dims.size());
    for (index_t k = 0; k < dims.size(); ++k) {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    return idx;
}

inline index_t flatten(const std::vector<index_t>& idx, const std::vector<index_t>& dims) {
    index_t flat = 0, stride = 1;
    for (index_t k = 0; k < dims.size(); ++k) {
        flat += idx[k] * stride;
        stride *= dims[k];
    }
    return flat;
}

// naive element-by-element permutation
template <class T>
Tensor<T> permute_naive(const Tensor<T>& t, const std::vector<int>& order) {
    std::vector<index_t> odims(order.size());
    for (index_t k = 0; k < order.size(); ++k) odims[k] = t.dims[static_cast<index_t>(order[k])];
    Tensor<T> out(odims);
    for (index_t flat = 0; flat < t.size(); ++flat) {
        auto idx = unflatten(flat, t.dims);
        std::vector<index_t> oidx(order.size());
        for (index_t k = 0; k < order.size(); ++k) oidx[k] = idx[static_cast<index_t>(order[k])];
        out.data[flatten(oidx, out.dims)] = t.data[flat];
    }
    return out;
}

// fully explicit nested-sum contraction
template <class TA, class TB, class R = dtn::promote_t<TA, TB>>
Tensor<R> contract_naive(const Tensor<TA>& a, const std::vector<int>& axes_a,
                         const Tensor<TB>& b, const std::vector<int>& axes_b,
                         bool conj_a = false, bool conj_b = false) {
    std::vector<int> free_a, free_b;
    std::vector<char> ca(static_cast<index_t>(a.rank()), 0), cb(static_cast<index_t>(b.rank()), 0);
    for (int x : axes_a) ca[static_cast<index_t>(x)] = 1;
    for (int x : axes_b) cb[static_cast<index_t>(x)] = 1;
    for (int x = 0; x < a.rank(); ++x)
        if (!ca[static_cast<index_t>(x)]) free_a.push_back(x);
    for (int x = 0; x < b.rank(); ++x)
        if (!cb[static_cast<index_t>(x)]) free_b.push_back(x);

    std::vector<index_t> rdims;
    for (int x : free_a) rdims.push_back(a.dims[static_cast<index_t>(x)]);
    for (int x : free_b) rdims.push_back(b.dims[static_cast<index_t>(x)]);
    Tensor<R> out(rdims.empty() ? std::vector<index_t>{} : rdims);

    std::vector<index_t> cdims;
    for (int x : axes_a) cdims.push_back(a.dims[static_cast<index_t>(x)]);
    const index_t ncontr = cdims.empty() ? 1 : dtn::dim_product(cdims);

    const index_t nout = out.size();
    for (index_t of = 0; of < nout; ++of) {
        auto oidx = unflatten(of, out.dims);
        R acc{};
        for (index_t cf = 0; cf < ncontr; ++cf) {
            auto cidx = unflatten(cf, cdims);
            std::vector<index_t> ia(static_cast<index_t>(a.rank())), ib(static_cast<index_t>(b.rank()));
            for (index_t k = 0; k < free_a.size(); ++k) ia[static_cast<index_t>(free_a[k])] = oidx[k];
            for (index_t k = 0; k < free_b.size(); ++k) ib[static_cast<index_t>(free_b[k])] = oidx[free_a.size() + k];
            for (index_t k = 0; k < axes_a.size(); ++k) {
                ia[static_cast<index_t>(axes_a[k])] = cidx[k];
                ib[static_cast<index_t>(axes_b[k])] = cidx[k];
            }
            R va = dtn::scalar_cast<R>(dtn::conj_if(a.data[flatten(ia, a.dims)], conj_a));
            R vb = dtn::scalar_cast<R>(dtn::conj_if(b.data[flatten(ib, b.dims)], conj_b));
            acc += va * vb;
        }
        out.data[of] = acc;
    }
    return out;
}

template <class T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double m = 0;
    for (index_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// random shapes for property sweeps
inline std::vector<index_t> random_dims(std::mt19937_64& rng, int max_rank, index_t max_dim) {
    std::uniform_int_distribution<int> rr(1, max_rank);
    std::uniform_int_distribution<index_t> rd(1, max_dim);
    std::vector<index_t> dims(static_cast<index_t>(rr(rng)));
    for (auto& d : dims) d = rd(rng);
    return dims;
}

} // namespace oracle
