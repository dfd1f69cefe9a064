#pragma once

// Local operator sets (spin-half and Jordan-Wigner fermions) and the model
// MPO builders used throughout: Heisenberg chain, transverse-field Ising,
// one-dimensional Hubbard, and the 2D Heisenberg lattice on a column-major
// snake path. Spin operators use the factor-of-a-half convention.

#include <functional>
#include <vector>

#include "dtn/error.hpp"
#include "dtn/mpo.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

struct SpinOps {
    Tensor<double> Sx, Sz, Sp, Sm, Id, O;
    Tensor<cplx> Sy;
};

// Basis (|up>, |down>); Sz|up> = +1/2 |up>, S+|down> = |up>.
inline SpinOps spin_ops() {
    SpinOps s;
    s.Sx = Tensor<double>({2, 2});
    s.Sx(0, 1) = 0.5;
    s.Sx(1, 0) = 0.5;
    s.Sz = Tensor<double>({2, 2});
    s.Sz(0, 0) = 0.5;
    s.Sz(1, 1) = -0.5;
    s.Sp = Tensor<double>({2, 2});
    s.Sp(0, 1) = 1.0;
    s.Sm = Tensor<double>({2, 2});
    s.Sm(1, 0) = 1.0;
    s.Id = identity_tensor<double>(2);
    s.O = Tensor<double>({2, 2});
    s.Sy = Tensor<cplx>({2, 2});
    s.Sy(0, 1) = cplx(0, -0.5);
    s.Sy(1, 0) = cplx(0, 0.5);
    return s;
}

struct FermionOps {
    Tensor<double> Cup, Cdn;     // annihilation
    Tensor<double> Cupdag, Cdndag;
    Tensor<double> Nup, Ndn, Ndens;
    Tensor<double> F;            // fermion sign operator
    Tensor<double> O, Id;
};

// Basis (|0>, |up>, |down>, |updown>). The sign on cdn^dag coupling
// |up> -> |updown> keeps the single-site anticommutators exact; inter-site
// anticommutation comes from F strings.
inline FermionOps fermion_ops() {
    FermionOps f;
    f.Cupdag = Tensor<double>({4, 4});
    f.Cupdag(1, 0) = 1.0;
    f.Cupdag(3, 2) = 1.0;
    f.Cdndag = Tensor<double>({4, 4});
    f.Cdndag(2, 0) = 1.0;
    f.Cdndag(3, 1) = -1.0;
    f.Cup = dagger(f.Cupdag);
    f.Cdn = dagger(f.Cdndag);
    f.Nup = matmul(f.Cupdag, f.Cup);
    f.Ndn = matmul(f.Cdndag, f.Cdn);
    f.Ndens = add(f.Nup, f.Ndn);
    f.F = Tensor<double>({4, 4});
    f.F(0, 0) = 1.0;
    f.F(1, 1) = -1.0;
    f.F(2, 2) = -1.0;
    f.F(3, 3) = 1.0;
    f.O = Tensor<double>({4, 4});
    f.Id = identity_tensor<double>(4);
    return f;
}

// ---------------------------------------------------------------------------
// model description with optional pinning fields

struct PinTerm {
    int site = 0;
    Tensor<cplx> op;    // local operator, complex to admit S^y pins
    double coeff = 0.0;
};

struct ModelSpec {
    enum class Kind { heisenberg, tfim, hubbard, heisenberg2d };
    Kind kind = Kind::heisenberg;
    double J = 1.0;
    double g = 0.5;
    double t = 1.0;
    double U = 0.0;
    double mu = 0.0;
    int N = 0;
    int Lx = 0, Ly = 0;
    std::vector<PinTerm> pins;

    int sites() const { return kind == Kind::heisenberg2d ? Lx * Ly : N; }
    index_t phys_dim() const { return kind == Kind::hubbard ? 4 : 2; }
};

inline ModelSpec add_pinning(ModelSpec spec, const std::vector<PinTerm>& terms) {
    for (const auto& p : terms) {
        if (p.site < 0 || p.site >= spec.sites()) throw value_error("add_pinning: site out of range");
        if (p.op.rank() != 2 || p.op.dims[0] != spec.phys_dim() || p.op.dims[1] != spec.phys_dim())
            throw shape_error("add_pinning: operator dimension mismatch");
        spec.pins.push_back(p);
    }
    return spec;
}

namespace detail {

// accumulated onsite pinning for one site, or a rank-0 tensor if none
template <class T>
Tensor<T> pin_entry(const ModelSpec& spec, int site) {
    Tensor<T> acc;
    bool any = false;
    for (const auto& p : spec.pins) {
        if (p.site != site || p.coeff == 0.0) continue;
        Tensor<T> term = scaled(tensor_cast<T>(p.op), scalar_cast<T>(p.coeff));
        if (!any) {
            acc = std::move(term);
            any = true;
        } else {
            acc = add(acc, term);
        }
    }
    return any ? acc : Tensor<T>{};
}

template <class T>
void add_into(Tensor<T>& slot, const Tensor<T>& extra) {
    if (extra.rank() == 0) return;
    if (slot.rank() == 0) slot = extra;
    else slot = add(slot, extra);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Heisenberg chain: H = J sum_i S_i . S_{i+1}; J > 0 is antiferromagnetic.
// Bulk link dimension 5.

template <class T = double>
Mpo<T> heisenberg_mpo(double J, int n, const ModelSpec* pins = nullptr) {
    if (n < 2) throw value_error("heisenberg_mpo: N >= 2 required");
    auto s = spin_ops();
    const auto Id = tensor_cast<T>(s.Id);
    const auto Sp = tensor_cast<T>(s.Sp);
    const auto Sm = tensor_cast<T>(s.Sm);
    const auto Sz = tensor_cast<T>(s.Sz);

    auto block = [=](int site) {
        OpBlock<T> w(5, 5);
        w.at(0, 0) = Id;
        w.at(1, 0) = scaled(Sp, T{0.5});
        w.at(2, 0) = scaled(Sm, T{0.5});
        w.at(3, 0) = Sz;
        w.at(4, 1) = scaled(Sm, scalar_cast<T>(J));
        w.at(4, 2) = scaled(Sp, scalar_cast<T>(J));
        w.at(4, 3) = scaled(Sz, scalar_cast<T>(J));
        w.at(4, 4) = Id;
        if (pins) detail::add_into(w.at(4, 0), detail::pin_entry<T>(*pins, site));
        return w;
    };
    return make_mpo<T>(block, {2}, n);
}

// ---------------------------------------------------------------------------
// Transverse-field Ising: H = sum_i S^z_i S^z_{i+1} + g sum_i S^x_i.
// Critical at g = 0.5 in the half-spin convention. Bulk link dimension 3.

template <class T = double>
Mpo<T> tfim_mpo(double g, int n, const ModelSpec* pins = nullptr) {
    if (n < 2) throw value_error("tfim_mpo: N >= 2 required");
    auto s = spin_ops();
    const auto Id = tensor_cast<T>(s.Id);
    const auto Sx = tensor_cast<T>(s.Sx);
    const auto Sz = tensor_cast<T>(s.Sz);

    auto block = [=](int site) {
        OpBlock<T> w(3, 3);
        w.at(0, 0) = Id;
        w.at(1, 0) = Sz;
        w.at(2, 0) = scaled(Sx, scalar_cast<T>(g));
        w.at(2, 1) = Sz;
        w.at(2, 2) = Id;
        if (pins) detail::add_into(w.at(2, 0), detail::pin_entry<T>(*pins, site));
        return w;
    };
    return make_mpo<T>(block, {2}, n);
}

// ---------------------------------------------------------------------------
// Hubbard chain: H = sum_{i,s} t (c^dag_{i,s} c_{i+1,s} + h.c.)
//                  + sum_i (U n_up n_dn + mu n). Bulk link dimension 6;
// fermion strings ride in the bottom-row entries.

template <class T = double>
Mpo<T> hubbard_mpo(double t, double U, double mu, int n, const ModelSpec* pins = nullptr) {
    if (n < 2) throw value_error("hubbard_mpo: N >= 2 required");
    auto f = fermion_ops();
    const auto Id = tensor_cast<T>(f.Id);
    auto onsite = add(scaled(f.Ndens, mu), scaled(matmul(f.Nup, f.Ndn), U));

    auto block = [=](int site) {
        OpBlock<T> w(6, 6);
        w.at(0, 0) = Id;
        w.at(1, 0) = tensor_cast<T>(scaled(f.Cupdag, -t));
        w.at(2, 0) = tensor_cast<T>(scaled(f.Cup, t));
        w.at(3, 0) = tensor_cast<T>(scaled(f.Cdndag, -t));
        w.at(4, 0) = tensor_cast<T>(scaled(f.Cdn, t));
        w.at(5, 0) = tensor_cast<T>(onsite);
        w.at(5, 1) = tensor_cast<T>(matmul(f.Cup, f.F));
        w.at(5, 2) = tensor_cast<T>(matmul(f.Cupdag, f.F));
        w.at(5, 3) = tensor_cast<T>(matmul(f.Cdn, f.F));
        w.at(5, 4) = tensor_cast<T>(matmul(f.Cdndag, f.F));
        w.at(5, 5) = Id;
        if (pins) detail::add_into(w.at(5, 0), detail::pin_entry<T>(*pins, site));
        return w;
    };
    return make_mpo<T>(block, {4}, n);
}

// ---------------------------------------------------------------------------
// 2D Heisenberg on an Lx x Ly lattice, flattened on the column-major snake:
// every column is traversed top to bottom, so vertical neighbors sit at path
// distance 1 and horizontal neighbors at distance Ly. Identity ladders carry
// the partner operator Ly-1 sites. Bulk link dimension 3*Ly + 2 (14 for
// Ly = 4); Ly = 1 degenerates to the chain builder's structure.

template <class T = double>
Mpo<T> heisenberg2d_mpo(double J, int lx, int ly, const ModelSpec* pins = nullptr) {
    if (lx < 1 || ly < 1 || lx * ly < 2) throw value_error("heisenberg2d_mpo: lattice too small");
    auto s = spin_ops();
    const auto Id = tensor_cast<T>(s.Id);
    const auto Sp = tensor_cast<T>(s.Sp);
    const auto Sm = tensor_cast<T>(s.Sm);
    const auto Sz = tensor_cast<T>(s.Sz);
    const int n = lx * ly;
    const index_t K = static_cast<index_t>(3 * ly + 2);

    auto block = [=](int site) {
        // site -> (row, col), both 0-based, column-major
        const int row = site % ly;
        const bool has_vertical = (row + 1 < ly) && (site + 1 < n);
        const bool has_horizontal = site + ly < n;

        OpBlock<T> w(K, K);
        w.at(0, 0) = Id;
        // terminator entries and identity ladders for the three channels
        const index_t lyu = static_cast<index_t>(ly);
        w.at(1, 0) = scaled(Sp, T{0.5});
        w.at(1 + lyu, 0) = scaled(Sm, T{0.5});
        w.at(1 + 2 * lyu, 0) = Sz;
        for (index_t j = 2; j <= lyu; ++j) {
            w.at(j, j - 1) = Id;
            w.at(lyu + j, lyu + j - 1) = Id;
            w.at(2 * lyu + j, 2 * lyu + j - 1) = Id;
        }
        w.at(K - 1, K - 1) = Id;
        if (has_vertical) {
            w.at(K - 1, 1) = scaled(Sm, scalar_cast<T>(J));
            w.at(K - 1, 1 + lyu) = scaled(Sp, scalar_cast<T>(J));
            w.at(K - 1, 1 + 2 * lyu) = scaled(Sz, scalar_cast<T>(J));
        }
        if (has_horizontal) {
            detail::add_into(w.at(K - 1, lyu), scaled(Sm, scalar_cast<T>(J)));
            detail::add_into(w.at(K - 1, 2 * lyu), scaled(Sp, scalar_cast<T>(J)));
            detail::add_into(w.at(K - 1, 3 * lyu), scaled(Sz, scalar_cast<T>(J)));
        }
        if (pins) detail::add_into(w.at(K - 1, 0), detail::pin_entry<T>(*pins, site));
        return w;
    };
    return make_mpo<T>(block, {2}, n);
}

// ---------------------------------------------------------------------------

template <class T = double>
Mpo<T> build_mpo(const ModelSpec& spec) {
    if constexpr (std::is_same_v<T, double>) {
        for (const auto& p : spec.pins)
            for (const auto& x : p.op.data)
                if (x.imag() != 0.0)
                    throw value_error("build_mpo: complex pinning term needs the complex scalar type");
    }
    switch (spec.kind) {
        case ModelSpec::Kind::heisenberg:
            return heisenberg_mpo<T>(spec.J, spec.N, &spec);
        case ModelSpec::Kind::tfim:
            return tfim_mpo<T>(spec.g, spec.N, &spec);
        case ModelSpec::Kind::hubbard:
            return hubbard_mpo<T>(spec.t, spec.U, spec.mu, spec.N, &spec);
        case ModelSpec::Kind::heisenberg2d:
            return heisenberg2d_mpo<T>(spec.J, spec.Lx, spec.Ly, &spec);
    }
    throw value_error("build_mpo: unknown model");
}

} // namespace dtn
