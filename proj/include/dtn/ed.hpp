#pragma once

// Exact-diagonalization bridge for small systems: dense Hamiltonian assembly
// from an MPO, MPS <-> dense-vector conversion, and a restarted Lanczos
// ground-state search on dense operators. Basis ordering matches the tensor
// linearization everywhere: the site-0 physical index varies fastest.

#include <vector>

#include "dtn/decomp.hpp"
#include "dtn/error.hpp"
#include "dtn/lanczos.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

inline constexpr index_t kDefaultEdGuard = index_t{1} << 14;

namespace detail {

inline void check_guard(index_t dim, index_t guard, const char* what) {
    if (dim > guard) throw resource_error(std::string(what) + ": basis size exceeds the memory guard");
}

} // namespace detail

// Contract all MPO link indices into the dense d^N x d^N operator. Boundary
// links wider than 1 are resolved at the lower-left accumulation corner:
// bottom row on the first site, first column on the last.
template <class T>
Tensor<T> full_h(const Mpo<T>& mpo, index_t guard = kDefaultEdGuard) {
    const int n = mpo.size();
    index_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= mpo.phys_dim(i);
        detail::check_guard(dim, guard, "full_h");
    }

    // running tensor (OUT, IN, link)
    Tensor<T> acc;
    for (int i = 0; i < n; ++i) {
        Tensor<T> w = mpo.site(i);
        if (i == 0 && w.dims[0] > 1) {
            // keep the bottom block-row
            Tensor<T> sel({w.dims[0]});
            sel(w.dims[0] - 1) = T{1};
            w = contract(sel, {0}, w, {0});
            w = insert_unit_axis(w, 0);
        }
        if (i == n - 1 && w.dims[3] > 1) {
            // keep the first block-column
            Tensor<T> sel({w.dims[3]});
            sel(index_t{0}) = T{1};
            w = contract(w, {3}, sel, {0});
            w = insert_unit_axis(w, 3);
        }
        if (i == 0) {
            acc = reshape_group(permute(w, {0, 1, 2, 3}), {{0, 1}, {2}, {3}}); // (OUT, IN, link), left link is 1
        } else {
            auto t = contract(acc, {2}, w, {0});          // (OUT, IN, sigma', sigma, link)
            t = permute(t, {0, 2, 1, 3, 4});              // (OUT, sigma', IN, sigma, link)
            acc = reshape_group(t, {{0, 1}, {2, 3}, {4}});
        }
    }
    if (acc.dims[2] != 1) throw shape_error("full_h: unresolved right boundary link");
    return reshape_group(acc, {{0}, {1, 2}});
}

// Contract the MPS chain into the dense amplitude vector.
template <class T>
Tensor<T> full_psi(const Mps<T>& psi, index_t guard = kDefaultEdGuard) {
    const int n = psi.size();
    index_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= psi.phys_dim(i);
        detail::check_guard(dim, guard, "full_psi");
    }
    Tensor<T> acc = reshape_group(psi.site(0), {{0, 1}, {2}}); // (AMP, link)
    for (int i = 1; i < n; ++i) {
        auto t = contract(acc, {1}, psi.site(i), {0}); // (AMP, sigma, link)
        acc = reshape_group(t, {{0, 1}, {2}});
    }
    return reshape_group(acc, {{0, 1}}); // rank-1, right link is 1
}

// Split a dense wavefunction back into an MPS: QR steps when no truncation
// is requested, SVD steps otherwise; the center ends on the first site.
template <class T>
Mps<T> convert2mps(const Tensor<T>& vec, index_t d, int n, const TruncationSpec& spec = {}) {
    if (vec.rank() != 1) throw shape_error("convert2mps: rank-1 input required");
    index_t dim = 1;
    for (int i = 0; i < n; ++i) dim *= d;
    if (vec.size() != dim) throw shape_error("convert2mps: length != d^N");

    Mps<T> psi;
    Tensor<T> rest = unreshape(vec, {1, vec.size()}); // (link, remaining amplitudes)
    for (int i = 0; i + 1 < n; ++i) {
        const index_t a = rest.dims[0];
        const index_t tail = rest.dims[1] / d;
        auto blk = unreshape(rest, {a * d, tail});
        if (!spec.active()) {
            auto f = qr(blk, {{0}, {1}});
            index_t k = f.Q.dims[1];
            // trailing all-zero rows of R are numerical rank deficiency
            // (product-like inputs); dropping them keeps Q R exact
            std::vector<double> rows(k, 0.0);
            double maxrow = 0.0;
            for (index_t r = 0; r < k; ++r) {
                for (index_t c = 0; c < tail; ++c) rows[r] += std::norm(f.R(r, c));
                rows[r] = std::sqrt(rows[r]);
                maxrow = std::max(maxrow, rows[r]);
            }
            while (k > 1 && rows[k - 1] <= 1e-14 * maxrow) --k;
            if (k < f.Q.dims[1]) {
                Tensor<T> q({a * d, k}), r2({k, tail});
                for (index_t c = 0; c < k; ++c)
                    for (index_t r = 0; r < a * d; ++r) q(r, c) = f.Q(r, c);
                for (index_t c = 0; c < tail; ++c)
                    for (index_t r = 0; r < k; ++r) r2(r, c) = f.R(r, c);
                f.Q = std::move(q);
                f.R = std::move(r2);
            }
            psi.tensors.push_back(unreshape(f.Q, {a, d, k}));
            rest = std::move(f.R);
        } else {
            auto f = svd(blk, {{0}, {1}}, spec);
            const index_t k = f.U.dims[1];
            psi.tensors.push_back(unreshape(f.U, {a, d, k}));
            rest = contract(f.D, {1}, f.Vdag, {0});
        }
    }
    psi.tensors.push_back(unreshape(rest, {rest.dims[0], d, 1}));
    psi.oc = n - 1;
    move_oc(psi, 0);
    return psi;
}

template <class T>
struct KrylovResult {
    Tensor<T> vector;
    double energy = 0.0;
};

// Restarted Lanczos on a dense operator; restarts every 30 vectors keep the
// basis small and orthogonal.
template <class T>
KrylovResult<T> krylov_ground(const Tensor<T>& h, const Tensor<T>& v0, int maxiter,
                              double tol = 1e-12) {
    if (h.rank() != 2 || h.dims[0] != h.dims[1]) throw shape_error("krylov_ground: square operator required");
    if (v0.rank() != 1 || v0.dims[0] != h.dims[0]) throw shape_error("krylov_ground: vector length mismatch");
    if (norm(v0) == 0.0) throw numeric_error("krylov_ground: zero start vector");

    auto apply = [&](const Tensor<T>& v) { return contract(h, {1}, v, {0}); };

    constexpr int kBlock = 30;
    Tensor<T> v = v0;
    double energy = 0.0;
    bool have_energy = false;
    int used = 0;
    while (used < maxiter) {
        const int iters = std::min(kBlock, maxiter - used);
        auto r = lanczos_ground(apply, v, iters);
        used += r.vectors_used;
        v = std::move(r.vector);
        if (have_energy && std::abs(r.energy - energy) < tol) {
            energy = r.energy;
            break;
        }
        energy = r.energy;
        have_energy = true;
        if (r.vectors_used < iters) break; // invariant subspace
    }
    return {std::move(v), energy};
}

} // namespace dtn
