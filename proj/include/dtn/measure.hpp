#pragma once

// Observables on matrix product states: per-bond entanglement entropies,
// local expectation values, two-site correlation matrices, ordered r-point
// correlators, multi-MPO expectation values and transfer-matrix correlation
// lengths. Functions that need to move the gauge take the MPS by value and
// work on the copy.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dtn/decomp.hpp"
#include "dtn/env.hpp"
#include "dtn/error.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

// ---------------------------------------------------------------------------
// entanglement

struct EntropyProfile {
    std::vector<double> svn; // bond b sits between sites b and b+1

    double at_bond(int b) const { return svn[static_cast<index_t>(b)]; }
    int bonds() const { return static_cast<int>(svn.size()); }
};

inline double entropy_from_singular_values(const Tensor<double>& D) {
    double s = 0;
    for (index_t k = 0; k < D.dims[0]; ++k) {
        const double rho = D(k, k) * D(k, k);
        if (rho > 0) s -= rho * std::log(rho);
    }
    return s;
}

// von Neumann entropy across every bond, read off the SVD at each site.
template <class T>
EntropyProfile entanglement_profile(Mps<T> psi) {
    EntropyProfile out;
    const int n = psi.size();
    out.svn.resize(static_cast<index_t>(n - 1), 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        move_oc(psi, i);
        auto f = svd(psi.site(i), {{0, 1}, {2}});
        out.svn[static_cast<index_t>(i)] = entropy_from_singular_values(f.D);
    }
    return out;
}

// Schmidt spectrum (singular values) across one bond.
template <class T>
std::vector<double> schmidt_values(Mps<T> psi, int bond) {
    if (bond < 0 || bond + 1 >= psi.size()) throw value_error("schmidt_values: bond out of range");
    move_oc(psi, bond);
    auto f = svd(psi.site(bond), {{0, 1}, {2}});
    std::vector<double> s(f.D.dims[0]);
    for (index_t k = 0; k < f.D.dims[0]; ++k) s[k] = f.D(k, k);
    return s;
}

// ---------------------------------------------------------------------------
// local expectation values

// <psi| op_i |psi> for every site, using only the center tensor at each step.
template <class T>
std::vector<T> expect_local(Mps<T> psi, const Tensor<T>& op) {
    if (op.rank() != 2) throw shape_error("expect_local: operator must be rank-2");
    std::vector<T> out(static_cast<index_t>(psi.size()));
    for (int i = 0; i < psi.size(); ++i) {
        if (op.dims[0] != psi.phys_dim(i) || op.dims[1] != psi.phys_dim(i))
            throw shape_error("expect_local: operator dimension mismatch");
        move_oc(psi, i);
        ContractOpts<T> opts;
        opts.out_order = {1, 0, 2};
        auto c = contract(op, {1}, psi.site(i), {1}, opts);
        out[static_cast<index_t>(i)] = dot(psi.site(i), c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// correlation functions

namespace detail {

// one transfer step of a rank-2 boundary (dual, ket), optionally with an
// operator applied to the ket physical index
template <class T>
Tensor<T> boundary_step(const Tensor<T>& env, const Tensor<T>& site, const Tensor<T>* op) {
    Tensor<T> tmp;
    if (op) {
        ContractOpts<T> opts;
        opts.out_order = {1, 0, 2};
        Tensor<T> ket = contract(*op, {1}, site, {1}, opts);
        tmp = contract(env, {1}, ket, {0});
    } else {
        tmp = contract(env, {1}, site, {0});
    }
    return ccontract(site, {0, 1}, tmp, {0, 1}); // (b', b)
}

// closing a boundary against right-normalized sites reduces to the trace
template <class T>
T boundary_trace(const Tensor<T>& env) {
    T acc{};
    for (index_t i = 0; i < env.dims[0]; ++i) acc += env(i, i);
    return acc;
}

template <class T>
Tensor<T> unit_boundary() {
    Tensor<T> e({1, 1});
    e(index_t{0}, index_t{0}) = T{1};
    return e;
}

} // namespace detail

// N x N matrix of <opA_i opB_j>. For i < j the trail operator (fermion
// string) is applied to opA's site and every site between; the diagonal
// holds the one-site product <(opA opB)_i>; i > j is filled by conjugate
// symmetry, meaningful for Hermitian-symmetric operator pairs.
template <class T>
Tensor<T> correlation_matrix(Mps<T> psi, const Tensor<T>& opA, const Tensor<T>& opB,
                             const Tensor<T>* trail = nullptr) {
    if (opA.rank() != 2 || opB.rank() != 2)
        throw shape_error("correlation_matrix: rank-2 operators required");
    const int n = psi.size();
    move_oc(psi, 0);
    normalize(psi);
    Tensor<T> out({static_cast<index_t>(n), static_cast<index_t>(n)});

    const Tensor<T> AB = matmul(opA, opB);
    const Tensor<T> Astr = trail ? matmul(opA, *trail) : opA;

    auto plain = detail::unit_boundary<T>(); // sites < i, no operators
    for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<index_t>(i);
        out(iu, iu) = detail::boundary_trace(detail::boundary_step(plain, psi.site(i), &AB));

        auto strung = detail::boundary_step(plain, psi.site(i), &Astr);
        for (int j = i + 1; j < n; ++j) {
            const auto ju = static_cast<index_t>(j);
            out(iu, ju) = detail::boundary_trace(detail::boundary_step(strung, psi.site(j), &opB));
            out(ju, iu) = conj_if(out(iu, ju), true);
            if (j + 1 < n) strung = detail::boundary_step(strung, psi.site(j), trail);
        }
        if (i + 1 < n)
            plain = detail::boundary_step(plain, psi.site(i), static_cast<const Tensor<T>*>(nullptr));
    }
    return out;
}

// Ordered r-point correlator <op_0(i_0) op_1(i_1) ... op_{r-1}(i_{r-1})> over
// all site tuples i_0 <= i_1 <= ... <= i_{r-1}; other entries stay zero.
// Operators sharing a site multiply in the listed order; the trail string
// rides left of every operator, so a site crossed by q pending strings picks
// up trail^q. Left boundaries are shared across tuple prefixes.
template <class T>
Tensor<T> correlation(Mps<T> psi, const std::vector<const Tensor<T>*>& ops,
                      const Tensor<T>* trail = nullptr) {
    const int r = static_cast<int>(ops.size());
    if (r < 1) throw value_error("correlation: at least one operator required");
    const int n = psi.size();
    for (const auto* o : ops)
        if (!o || o->rank() != 2) throw shape_error("correlation: rank-2 operators required");
    move_oc(psi, 0);
    normalize(psi);

    // trail powers 0..r (power 0 = identity / absent)
    std::vector<std::optional<Tensor<T>>> trailpow(static_cast<index_t>(r + 1));
    if (trail)
        for (int p = 1; p <= r; ++p)
            trailpow[static_cast<index_t>(p)] =
                (p == 1) ? *trail : matmul(*trailpow[static_cast<index_t>(p - 1)], *trail);

    Tensor<T> out(std::vector<index_t>(static_cast<index_t>(r), static_cast<index_t>(n)));
    std::vector<index_t> tuple(static_cast<index_t>(r), 0);

    // place ops[k..] at sites >= s; E covers sites < s; pending = product of
    // operators already assigned to site s by shallower levels
    std::function<void(int, int, std::optional<Tensor<T>>, Tensor<T>)> place =
        [&](int k, int s, std::optional<Tensor<T>> pending, Tensor<T> E) {
            const int remaining = r - k; // ops still to place, strings crossing sites
            std::optional<Tensor<T>> pend = std::move(pending);
            Tensor<T> env = std::move(E);
            for (int t = s; t < n; ++t) {
                std::optional<Tensor<T>> here = pend;
                // operator k lands on site t
                Tensor<T> with_op = here ? matmul(*here, *ops[static_cast<index_t>(k)])
                                         : *ops[static_cast<index_t>(k)];
                tuple[static_cast<index_t>(k)] = static_cast<index_t>(t);
                if (k + 1 == r) {
                    auto closed = detail::boundary_step(env, psi.site(t), &with_op);
                    out.data[out.flat_index(tuple)] = detail::boundary_trace(closed);
                } else {
                    place(k + 1, t, with_op, env);
                }
                // op k moves past site t: absorb t with pending and the strings
                // of ops k..r-1, all of which now lie strictly to the right
                if (t + 1 < n) {
                    std::optional<Tensor<T>> absorbed = pend;
                    if (trailpow[static_cast<index_t>(remaining)]) {
                        absorbed = absorbed ? matmul(*absorbed, *trailpow[static_cast<index_t>(remaining)])
                                            : *trailpow[static_cast<index_t>(remaining)];
                    }
                    env = detail::boundary_step(env, psi.site(t), absorbed ? &*absorbed : nullptr);
                    pend.reset();
                }
            }
        };
    place(0, 0, std::nullopt, detail::unit_boundary<T>());
    return out;
}

// ---------------------------------------------------------------------------
// expectation values of whole-chain sandwiches

// <bra| H_1 ... H_k |ket>; with no MPOs this is the overlap <bra|ket>.
template <class T>
T expect(const Mps<T>& bra, const Mps<T>& ket, const std::vector<const Mpo<T>*>& mpos) {
    if (bra.size() != ket.size()) throw shape_error("expect: length mismatch");
    const int n = ket.size();
    const int k = static_cast<int>(mpos.size());
    for (const auto* m : mpos)
        if (m->size() != n) throw shape_error("expect: mpo length mismatch");

    Tensor<T> env = detail::env_boundary<T>(k);
    for (int i = 0; i < n; ++i) {
        std::vector<const Tensor<T>*> ws;
        ws.reserve(static_cast<index_t>(k));
        for (const auto* m : mpos) ws.push_back(&m->site(i));
        env = env_update_left(env, bra.site(i), ws, ket.site(i));
    }
    T acc{};
    for (const auto& x : env.data) acc += x; // every remaining dim is 1
    return acc;
}

template <class T>
T expect(const Mps<T>& psi) {
    return expect(psi, psi, std::vector<const Mpo<T>*>{});
}

template <class T>
T expect(const Mps<T>& psi, const Mpo<T>& m) {
    return expect(psi, psi, std::vector<const Mpo<T>*>{&m});
}

template <class T>
T expect(const Mps<T>& psi, const Mpo<T>& m1, const Mpo<T>& m2) {
    return expect(psi, psi, std::vector<const Mpo<T>*>{&m1, &m2});
}

template <class T>
T overlap(const Mps<T>& bra, const Mps<T>& ket) {
    return expect(bra, ket, std::vector<const Mpo<T>*>{});
}

// ---------------------------------------------------------------------------
// transfer matrices and correlation lengths

// Site range [i, j] of (tensor x conjugate tensor) contracted over the
// physical index; index order (dual-left, ket-left, dual-right, ket-right).
template <class T>
struct TransferMatrix {
    Tensor<T> t;
    int i = 0, j = -1;
};

template <class T>
TransferMatrix<T> transfer_matrix(const Mps<T>& psi, int i, int j,
                                  const TransferMatrix<T>* accumulate_onto = nullptr) {
    if (i < 0 || j >= psi.size() || i > j) throw value_error("transfer_matrix: bad site range");
    TransferMatrix<T> out;
    bool have = false;
    if (accumulate_onto) {
        if (accumulate_onto->j + 1 != i)
            throw value_error("transfer_matrix: accumulation range must be contiguous");
        out = *accumulate_onto;
        have = true;
    }
    for (int s = i; s <= j; ++s) {
        auto site_tm = ccontract(psi.site(s), {1}, psi.site(s), {1}); // (a', b', a, b)
        auto block = permute(site_tm, {0, 2, 1, 3});                  // (a', a, b', b)
        if (!have) {
            out.t = std::move(block);
            have = true;
        } else {
            out.t = contract(out.t, {2, 3}, block, {0, 1});
        }
    }
    out.i = accumulate_onto ? accumulate_onto->i : i;
    out.j = j;
    return out;
}

struct CorrelationLength {
    enum class Kind { finite, infinite, zero_range };
    Kind kind = Kind::finite;
    double xi = 0.0;       // decay length per transfer-matrix application
    double phase = 0.0;    // arg(lambda_2 / lambda_1); oscillatory decay when nonzero
    std::vector<cplx> spectrum; // eigenvalues sorted by magnitude
};

// Spectrum of the bond-space map (left pair) <- (right pair). Finite-MPS
// transfer matrices are not norm-1, so the dominant eigenvalue is divided
// out: 1/xi = -ln |lambda_2 / lambda_1|.
template <class T>
CorrelationLength correlation_length(const TransferMatrix<T>& tm) {
    if (tm.t.dims[0] * tm.t.dims[1] != tm.t.dims[2] * tm.t.dims[3])
        throw shape_error("correlation_length: transfer matrix is not square");
    auto e = eigen_general(tm.t, {{0, 1}, {2, 3}});

    CorrelationLength out;
    const index_t nk = e.D.dims[0];
    out.spectrum.resize(nk);
    for (index_t k = 0; k < nk; ++k) out.spectrum[k] = e.D(k, k);

    if (nk < 2 || std::abs(out.spectrum[1]) == 0.0) {
        out.kind = CorrelationLength::Kind::zero_range;
        out.xi = 0.0;
        return out;
    }
    const double r1 = std::abs(out.spectrum[0]);
    const double r2 = std::abs(out.spectrum[1]);
    if (r1 == 0.0) {
        out.kind = CorrelationLength::Kind::zero_range;
        return out;
    }
    if (std::abs(r1 - r2) <= 1e-12 * r1) {
        out.kind = CorrelationLength::Kind::infinite;
        out.xi = std::numeric_limits<double>::infinity();
        out.phase = std::arg(out.spectrum[1] / out.spectrum[0]);
        return out;
    }
    out.kind = CorrelationLength::Kind::finite;
    out.xi = -1.0 / std::log(r2 / r1);
    out.phase = std::arg(out.spectrum[1] / out.spectrum[0]);
    return out;
}

} // namespace dtn
