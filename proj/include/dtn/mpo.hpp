#pragma once

// Matrix product operators. Site tensors are rank-4 with index order
// (left link, out-physical, in-physical, right link). MPOs are built from
// block matrices of local operators; the Hamiltonian accumulates in the
// lower-left corner, so the first site keeps the bottom block-row and the
// last site keeps the first block-column.

#include <functional>
#include <vector>

#include "dtn/error.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

template <class T>
struct Mpo {
    std::vector<Tensor<T>> tensors;

    int size() const { return static_cast<int>(tensors.size()); }
    Tensor<T>& site(int i) { return tensors[static_cast<index_t>(i)]; }
    const Tensor<T>& site(int i) const { return tensors[static_cast<index_t>(i)]; }
    index_t phys_dim(int i) const { return site(i).dims[1]; }
};

// Block matrix of local operators; an empty tensor stands for the zero block.
template <class T>
struct OpBlock {
    index_t rows = 0, cols = 0;
    std::vector<Tensor<T>> ops; // row-major grid; rank-0 default tensor = zero

    OpBlock() = default;
    OpBlock(index_t r, index_t c) : rows(r), cols(c), ops(r * c) {}

    Tensor<T>& at(index_t r, index_t c) { return ops[r * cols + c]; }
    const Tensor<T>& at(index_t r, index_t c) const { return ops[r * cols + c]; }
    bool is_zero(index_t r, index_t c) const { return at(r, c).rank() == 0; }
};

// Assemble an MPO from per-site blocks. The physical dimension list cycles
// with its length; the block row/column counts must chain between neighbors.
template <class T>
Mpo<T> make_mpo(const std::function<OpBlock<T>(int)>& block_fn,
                const std::vector<index_t>& phys_dims, int n) {
    if (n < 1 || phys_dims.empty()) throw value_error("make_mpo: bad inputs");
    Mpo<T> mpo;
    index_t prev_cols = 0;
    for (int i = 0; i < n; ++i) {
        const OpBlock<T> blk = block_fn(i);
        const index_t d = phys_dims[static_cast<index_t>(i) % phys_dims.size()];
        if (blk.rows == 0 || blk.cols == 0) throw shape_error("make_mpo: empty block");
        if (i > 0 && blk.rows != prev_cols)
            throw shape_error("make_mpo: block shapes do not chain between sites");
        prev_cols = blk.cols;

        const index_t r0 = (i == 0) ? blk.rows - 1 : 0;      // first site: bottom row only
        const index_t rows = (i == 0) ? 1 : blk.rows;
        const index_t cols = (i == n - 1) ? 1 : blk.cols;    // last site: first column only

        Tensor<T> w({rows, d, d, cols});
        for (index_t r = 0; r < rows; ++r) {
            for (index_t c = 0; c < cols; ++c) {
                const auto& op = blk.at(r + r0, c);
                if (op.rank() == 0) continue;
                if (op.rank() != 2 || op.dims[0] != d || op.dims[1] != d)
                    throw shape_error("make_mpo: block entry is not a d x d operator");
                for (index_t so = 0; so < d; ++so)
                    for (index_t si = 0; si < d; ++si) w(r, so, si, c) = op(so, si);
            }
        }
        mpo.tensors.push_back(std::move(w));
    }
    return mpo;
}

// ---------------------------------------------------------------------------
// applyMPO

// Contract the MPO into the MPS site by site, fuse the doubled links, then
// restore the gauge with a left-to-right SVD pass. The result represents
// H|psi> and is deliberately not renormalized. When `spec` truncates, a
// reverse sweep applies it.
template <class TP, class TO, class R = promote_t<TP, TO>>
Mps<R> apply_mpo(const Mps<TP>& psi, const Mpo<TO>& mpo, const TruncationSpec& spec = {}) {
    if (psi.size() != mpo.size()) throw shape_error("apply_mpo: length mismatch");
    const int n = psi.size();

    Mps<R> out;
    out.tensors.reserve(static_cast<index_t>(n));
    for (int i = 0; i < n; ++i) {
        if (psi.phys_dim(i) != mpo.phys_dim(i)) throw shape_error("apply_mpo: physical dimension mismatch");
        // (a sigma b) x (w sigma' sigma w2) -> (a b w sigma' w2) -> ((w a) sigma' (w2 b))
        auto t = contract(psi.site(i), {1}, mpo.site(i), {2});
        t = permute(t, {2, 0, 3, 4, 1});
        out.tensors.push_back(reshape_group(t, {{0, 1}, {2}, {3, 4}}));
    }
    out.oc = 0;

    // left-to-right pass: left-normalize every site, dragging D V^dag right
    for (int i = 0; i + 1 < n; ++i) {
        auto f = svd(out.site(i), {{0, 1}, {2}});
        out.site(i) = std::move(f.U);
        auto dv = contract(f.D, {1}, f.Vdag, {0});
        out.site(i + 1) = contract(dv, {1}, out.site(i + 1), {0});
    }
    out.oc = n - 1;

    if (spec.active()) {
        // reverse sweep sets the truncation of the new MPS
        for (int i = n - 1; i > 0; --i) {
            auto f = svd(out.site(i), {{0}, {1, 2}}, spec);
            out.site(i) = std::move(f.Vdag);
            auto ud = contract(f.U, {1}, f.D, {0});
            out.site(i - 1) = contract(out.site(i - 1), {2}, ud, {0});
        }
        out.oc = 0;
    }
    return out;
}

} // namespace dtn
