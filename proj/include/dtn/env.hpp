#pragma once

// Left and right environment caches for sandwiches <bra| H_1 ... H_k |ket>.
// A left environment at site i holds the contraction of everything strictly
// to its left with index order (dual link, mpo links 1..k, ket link); right
// environments hold everything strictly to the right in the mirrored order
// (ket link, mpo links k..1, dual link). Boundary environments are all-ones
// tensors with every dimension 1. Layer 1 is the MPO adjacent to the bra.

#include <numeric>
#include <vector>

#include "dtn/error.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

template <class T>
struct Environment {
    std::vector<Tensor<T>> tensors; // indexed by site

    Tensor<T>& at(int i) { return tensors[static_cast<index_t>(i)]; }
    const Tensor<T>& at(int i) const { return tensors[static_cast<index_t>(i)]; }
};

namespace detail {

template <class T>
Tensor<T> env_boundary(int nlayers) {
    Tensor<T> t(std::vector<index_t>(static_cast<index_t>(nlayers + 2), 1));
    t.data[0] = T{1};
    return t;
}

} // namespace detail

// Absorb site tensors into a left environment, bra side first, then each MPO
// layer, then the ket (the complexity-optimal order).
template <class T>
Tensor<T> env_update_left(const Tensor<T>& lenv, const Tensor<T>& bra,
                          const std::vector<const Tensor<T>*>& mpo_sites, const Tensor<T>& ket) {
    const int k = static_cast<int>(mpo_sites.size());
    if (k == 0) {
        auto tmp = contract(lenv, {1}, ket, {0});        // (a', sigma, b)
        return ccontract(bra, {0, 1}, tmp, {0, 1});      // (b', b)
    }
    if (k == 1) {
        const Tensor<T>& w = *mpo_sites[0];
        auto t = contract(lenv, {2}, ket, {0});          // (a', w, sigma, b)
        t = contract(t, {1, 2}, w, {0, 2});              // (a', b, sigma', w2)
        t = ccontract(bra, {0, 1}, t, {0, 2});           // (b', b, w2)
        return permute(t, {0, 2, 1});                    // (b', w2, b)
    }

    // generic layer loop; invariant before processing layer j (j = k..1):
    //   T = (a', b_1..b_{j}, sigma_cur, tail) with tail = (a_new, w'_k..w'_{j+1})
    auto t = contract(lenv, {k + 1}, ket, {0});
    for (int j = k; j >= 1; --j) {
        t = contract(t, {j, j + 1}, *mpo_sites[static_cast<index_t>(j - 1)], {0, 2});
        const int r = t.rank();
        std::vector<int> order;
        for (int x = 0; x < j; ++x) order.push_back(x);
        order.push_back(r - 2); // the new out-physical becomes sigma_cur
        for (int x = j; x < r - 2; ++x) order.push_back(x);
        order.push_back(r - 1); // the new mpo link joins the tail
        t = permute(t, order);
    }
    // T = (a', sigma'_1, a_new, w'_k..w'_1)
    t = ccontract(bra, {0, 1}, t, {0, 1});
    // (a'_new, a_new, w'_k..w'_1) -> (a'_new, w'_1..w'_k, a_new)
    std::vector<int> order{0};
    for (int j = k; j >= 1; --j) order.push_back(1 + j);
    order.push_back(1);
    return permute(t, order);
}

// Mirror image for right environments.
template <class T>
Tensor<T> env_update_right(const Tensor<T>& renv, const Tensor<T>& bra,
                           const std::vector<const Tensor<T>*>& mpo_sites, const Tensor<T>& ket) {
    const int k = static_cast<int>(mpo_sites.size());
    if (k == 0) {
        auto tmp = contract(ket, {2}, renv, {0});        // (a, sigma, a')
        return contractc(tmp, {1, 2}, bra, {1, 2});      // (a, a'_new)
    }
    if (k == 1) {
        const Tensor<T>& w = *mpo_sites[0];
        auto t = contract(ket, {2}, renv, {0});          // (a, sigma, w, a')
        t = contract(t, {1, 2}, w, {2, 3});              // (a, a', w1, sigma')
        t = contractc(t, {1, 3}, bra, {2, 1});           // (a, w1, a'_new)
        return t;
    }

    // invariant before processing layer j (j = k..1):
    //   T = (a_new, sigma_cur, b_j..b_1, a', tail) with tail = (w'_k..w'_{j+1})
    auto t = contract(ket, {2}, renv, {0});
    for (int j = k; j >= 1; --j) {
        t = contract(t, {1, 2}, *mpo_sites[static_cast<index_t>(j - 1)], {2, 3});
        const int r = t.rank();
        std::vector<int> order{0, r - 1}; // a_new, then the new sigma_cur
        for (int x = 1; x < r - 2; ++x) order.push_back(x);
        order.push_back(r - 2); // the new mpo link joins the tail
        t = permute(t, order);
    }
    // T = (a_new, sigma'_1, a', w'_k..w'_1); close with the conjugated bra
    return contractc(t, {1, 2}, bra, {1, 2}); // (a_new, w'_k..w'_1, a'_new)
}

// Initialize both environment stacks for a gauged MPS: right environments
// populated from the right edge down to oc+1, left ones up to oc-1.
template <class T>
std::pair<Environment<T>, Environment<T>> make_env(const Mps<T>& psi,
                                                   const std::vector<const Mpo<T>*>& mpos) {
    const int n = psi.size();
    const int k = static_cast<int>(mpos.size());
    Environment<T> lenv, renv;
    lenv.tensors.assign(static_cast<index_t>(n), Tensor<T>{});
    renv.tensors.assign(static_cast<index_t>(n), Tensor<T>{});

    lenv.at(0) = detail::env_boundary<T>(k);
    for (int i = 0; i < psi.oc; ++i) {
        std::vector<const Tensor<T>*> ws;
        for (const auto* m : mpos) ws.push_back(&m->site(i));
        lenv.at(i + 1) = env_update_left(lenv.at(i), psi.site(i), ws, psi.site(i));
    }
    renv.at(n - 1) = detail::env_boundary<T>(k);
    for (int i = n - 1; i > psi.oc; --i) {
        std::vector<const Tensor<T>*> ws;
        for (const auto* m : mpos) ws.push_back(&m->site(i));
        renv.at(i - 1) = env_update_right(renv.at(i), psi.site(i), ws, psi.site(i));
    }
    return {std::move(lenv), std::move(renv)};
}

} // namespace dtn
