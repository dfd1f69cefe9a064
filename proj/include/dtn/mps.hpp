#pragma once

// Matrix product state container and gauge handling. Every site tensor is
// rank-3 with index order (left link, physical, right link); the first left
// and last right links have dimension 1. Sites are 0-based. The tensor at
// `oc` is the orthogonality center: sites to its left are left-isometric,
// sites to its right are right-isometric.

#include <cmath>
#include <random>
#include <vector>

#include "dtn/decomp.hpp"
#include "dtn/error.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

template <class T>
struct Mps {
    using scalar = T;

    std::vector<Tensor<T>> tensors;
    int oc = 0;

    int size() const { return static_cast<int>(tensors.size()); }
    Tensor<T>& site(int i) { return tensors[static_cast<index_t>(i)]; }
    const Tensor<T>& site(int i) const { return tensors[static_cast<index_t>(i)]; }

    index_t phys_dim(int i) const { return site(i).dims[1]; }
    index_t link_dim(int bond) const { return site(bond).dims[2]; } // bond b sits between sites b and b+1

    void check_valid() const {
        const int n = size();
        if (n == 0) throw value_error("mps: empty chain");
        if (oc < 0 || oc >= n) throw value_error("mps: orthogonality center out of range");
        if (tensors.front().dims[0] != 1 || tensors.back().dims[2] != 1)
            throw shape_error("mps: boundary links must have dimension 1");
        for (int i = 0; i + 1 < n; ++i)
            if (site(i).dims[2] != site(i + 1).dims[0])
                throw shape_error("mps: adjacent link dimensions differ");
    }
};

// ---------------------------------------------------------------------------
// builders

// Classical product state from per-site unit vectors; all links are 1.
template <class T>
Mps<T> product_state(const std::vector<index_t>& phys_dims,
                     const std::vector<std::vector<T>>& locals, int oc = 0) {
    if (phys_dims.size() != locals.size() || phys_dims.empty())
        throw value_error("product_state: site count mismatch");
    Mps<T> psi;
    psi.oc = oc;
    for (index_t i = 0; i < phys_dims.size(); ++i) {
        const auto d = phys_dims[i];
        if (locals[i].size() != d) throw shape_error("product_state: local vector has wrong length");
        double n2 = 0;
        for (const T& x : locals[i]) n2 += std::norm(x);
        if (std::abs(n2 - 1.0) > 1e-12)
            throw value_error("product_state: local state is not normalized");
        Tensor<T> a({1, d, 1});
        for (index_t s = 0; s < d; ++s) a(index_t{0}, s, index_t{0}) = locals[i][s];
        psi.tensors.push_back(std::move(a));
    }
    psi.check_valid();
    if (oc < 0 || oc >= psi.size()) throw value_error("product_state: oc out of range");
    return psi;
}

// All sites in local basis state `which` (ferromagnetic-style start).
template <class T = double>
Mps<T> uniform_product_state(index_t d, int n, index_t which = 0, int oc = 0) {
    std::vector<T> loc(d, T{0});
    loc[which] = T{1};
    return product_state<T>(std::vector<index_t>(static_cast<index_t>(n), d),
                            std::vector<std::vector<T>>(static_cast<index_t>(n), loc), oc);
}

// Alternating local basis states 0,1,0,1,... (staggered magnetization start).
template <class T = double>
Mps<T> staggered_product_state(index_t d, int n, index_t a = 0, index_t b = 1, int oc = 0) {
    std::vector<std::vector<T>> locals;
    for (int i = 0; i < n; ++i) {
        std::vector<T> loc(d, T{0});
        loc[i % 2 == 0 ? a : b] = T{1};
        locals.push_back(std::move(loc));
    }
    return product_state<T>(std::vector<index_t>(static_cast<index_t>(n), d), locals, oc);
}

namespace detail {

inline std::vector<index_t> mps_link_dims(index_t d, int n, index_t m) {
    // links capped by m and by the entanglement bound d^min(k, N-k)
    std::vector<index_t> links(static_cast<index_t>(n + 1), 1);
    for (int k = 1; k < n; ++k) {
        index_t left = 1, right = 1;
        for (int j = 0; j < std::min(k, n - k); ++j) {
            left *= d;
            if (left >= m) { left = m; break; }
        }
        right = left;
        links[static_cast<index_t>(k)] = std::min(m, right);
    }
    return links;
}

} // namespace detail

// Seeded random MPS, gauged to `oc` and normalized.
template <class T = double>
Mps<T> rand_mps(index_t d, int n, index_t m, int oc, std::uint64_t seed) {
    if (m < 1) throw value_error("rand_mps: m must be >= 1");
    std::mt19937_64 rng(seed);
    auto links = detail::mps_link_dims(d, n, m);
    Mps<T> psi;
    psi.oc = n - 1;
    for (int i = 0; i < n; ++i) {
        auto t = random_tensor<T>({links[static_cast<index_t>(i)], d, links[static_cast<index_t>(i + 1)]}, rng);
        const double nn = norm(t);
        if (nn > 0)
            for (auto& x : t.data) x /= scalar_cast<T>(nn);
        psi.tensors.push_back(std::move(t));
    }
    move_oc(psi, 0);
    {
        auto& c = psi.site(0);
        const double nn = norm(c);
        if (nn == 0) throw numeric_error("rand_mps: zero state");
        for (auto& x : c.data) x /= scalar_cast<T>(nn);
    }
    move_oc(psi, oc);
    return psi;
}

// ---------------------------------------------------------------------------
// gauge movement

// Re-gauge so that `target` is the orthogonality center. QR steps move the
// center right, LQ steps move it left; the represented state is unchanged
// since no truncation occurs.
template <class T>
void move_oc(Mps<T>& psi, int target) {
    if (target < 0 || target >= psi.size())
        throw value_error("move_oc: site out of range");
    while (psi.oc < target) {
        const int i = psi.oc;
        auto f = qr(psi.site(i), {{0, 1}, {2}});
        psi.site(i) = std::move(f.Q);
        psi.site(i + 1) = contract(f.R, {1}, psi.site(i + 1), {0});
        ++psi.oc;
    }
    while (psi.oc > target) {
        const int i = psi.oc;
        auto f = lq(psi.site(i), {{0}, {1, 2}});
        psi.site(i) = std::move(f.Q);
        psi.site(i - 1) = contract(psi.site(i - 1), {2}, f.L, {0});
        --psi.oc;
    }
}

// <psi|psi> via the gauge: only the center tensor carries the norm.
template <class T>
double norm(const Mps<T>& psi) {
    return norm(psi.site(psi.oc));
}

template <class T>
void normalize(Mps<T>& psi) {
    auto& c = psi.site(psi.oc);
    const double n = norm(c);
    if (n == 0) throw numeric_error("normalize: zero-norm state");
    for (auto& x : c.data) x /= scalar_cast<T>(n);
}

// ---------------------------------------------------------------------------
// operator application

// Contract `op` onto the physical index at each listed site (ascending).
// A trail operator, when given, is applied to every site strictly left of
// each application site -- the fermion string. The state is renormalized.
template <class T>
void apply_local_ops(Mps<T>& psi, const std::vector<int>& sites, const Tensor<T>& op,
                     const Tensor<T>* trail = nullptr) {
    if (op.rank() != 2 || op.dims[0] != op.dims[1])
        throw shape_error("apply_local_ops: operator must be square rank-2");
    for (index_t k = 0; k + 1 < sites.size(); ++k)
        if (sites[k] > sites[k + 1]) throw value_error("apply_local_ops: sites must ascend");

    auto apply_site = [&](int j, const Tensor<T>& o) {
        // (sigma' sigma) x (a sigma b) -> (sigma' a b) -> (a sigma' b)
        ContractOpts<T> opts;
        opts.out_order = {1, 0, 2};
        psi.site(j) = contract(o, {1}, psi.site(j), {1}, opts);
    };

    for (int s : sites) {
        if (s < 0 || s >= psi.size()) throw value_error("apply_local_ops: site out of range");
        if (op.dims[0] != psi.phys_dim(s)) throw shape_error("apply_local_ops: operator dimension mismatch");
        apply_site(s, op);
        if (trail)
            for (int j = 0; j < s; ++j) apply_site(j, *trail);
    }

    // operator application breaks the isometries; re-gauge the whole chain
    const double n2 = mps_overlap_norm(psi);
    if (n2 < 1e-24) throw numeric_error("apply_local_ops: state has zero norm");
    psi.oc = psi.size() - 1;
    move_oc(psi, 0);
    normalize(psi);
}

// Full <psi|psi> without assuming any gauge (left-to-right transfer closure).
template <class T>
double mps_overlap_norm(const Mps<T>& psi) {
    Tensor<T> env({1, 1});
    env(index_t{0}, index_t{0}) = T{1};
    for (int i = 0; i < psi.size(); ++i) {
        auto tmp = contract(env, {1}, psi.site(i), {0});          // (a' , sigma, b)
        env = ccontract(psi.site(i), {0, 1}, tmp, {0, 1});        // (b', b)
    }
    return real_part(env(index_t{0}, index_t{0}));
}

} // namespace dtn
