#pragma once

// Matrix-equivalent factorizations of tensors: truncated SVD, truncated
// (optionally generalized) eigen, QR, LQ and polar, all sharing one
// truncation rule. A decomposition splits the indices into two groups,
// factors the resulting matrix and unreshapes the factors back, exposing a
// new link index between them.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dtn/error.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

struct TruncationSpec {
    index_t m = 0;                 // max bond dimension; 0 = unlimited
    double cutoff = 0.0;           // allowed discarded density-matrix weight; 0 = none
    std::optional<double> mag;     // precomputed total weight, trusted verbatim when given

    bool active() const { return m > 0 || cutoff > 0.0; }
};

namespace detail {

template <class T>
using EMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::VectorXd;

template <class T>
Eigen::Map<const EMat<T>> as_matrix(const Tensor<T>& t) {
    return {t.data.data(), static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1])};
}

template <class T>
Tensor<T> from_matrix(const EMat<T>& m) {
    Tensor<T> t({static_cast<index_t>(m.rows()), static_cast<index_t>(m.cols())});
    Eigen::Map<EMat<T>>(t.data.data(), m.rows(), m.cols()) = m;
    return t;
}

// Split the indices into the two groups and return the matrix equivalent
// together with the grouped dimension lists.
template <class T>
void matrix_equivalent(const Tensor<T>& t, const std::vector<std::vector<int>>& groups,
                       Tensor<T>& mat, std::vector<index_t>& ldims, std::vector<index_t>& rdims) {
    if (groups.size() != 2 || groups[0].empty() || groups[1].empty())
        throw value_error("decompose: exactly two non-empty index groups required");
    Tensor<T> m2 = reshape_group(t, groups);
    ldims.clear();
    rdims.clear();
    for (int a : groups[0]) ldims.push_back(t.dims[static_cast<index_t>(a)]);
    for (int a : groups[1]) rdims.push_back(t.dims[static_cast<index_t>(a)]);
    mat = std::move(m2);
}

inline std::vector<index_t> with_link_right(std::vector<index_t> dims, index_t k) {
    dims.push_back(k);
    return dims;
}

inline std::vector<index_t> with_link_left(const std::vector<index_t>& dims, index_t k) {
    std::vector<index_t> out{k};
    out.insert(out.end(), dims.begin(), dims.end());
    return out;
}

} // namespace detail

struct TruncDecision {
    index_t kept = 0;
    double truncerr = 0.0;
    double mag = 0.0;
};

// Shared truncation rule over a descending weight spectrum (squared singular
// values, or raw eigenvalues). Discards the longest ascending suffix whose
// weight stays within cutoff*mag, clamps to m, and never splits a degenerate
// group across the boundary unless the k >= 1 floor forces it.
inline TruncDecision decide_truncation(const std::vector<double>& rho,
                                       const std::vector<double>& raw,
                                       const TruncationSpec& spec) {
    TruncDecision d;
    const index_t n = rho.size();
    double total = 0;
    for (double x : rho) total += x;
    d.mag = spec.mag.value_or(total);
    if (n == 0) return d;

    if (!spec.active()) {
        d.kept = n;
        return d;
    }

    // numerical rank deficiency: drop values below 1e-14 of the largest
    index_t k = n;
    const double floor_val = 1e-14 * std::abs(raw[0]);
    while (k > 1 && std::abs(raw[k - 1]) < floor_val) --k;

    if (spec.cutoff > 0.0) {
        const double budget = spec.cutoff * d.mag;
        double acc = 0;
        while (k > 1 && acc + rho[k - 1] <= budget) acc += rho[--k];
    }
    if (spec.m > 0 && k > spec.m) k = spec.m;

    // degeneracy tie-break at the boundary
    if (k < n) {
        auto same = [&](index_t i, index_t j) {
            const double scale = std::max(std::abs(rho[i]), std::abs(rho[j]));
            return std::abs(rho[i] - rho[j]) <= 1e-12 * std::max(scale, 1e-300);
        };
        if (same(k - 1, k)) {
            index_t lo = k - 1, hi = k;
            while (lo > 0 && same(lo - 1, lo)) --lo;
            while (hi + 1 < n && same(hi, hi + 1)) ++hi;
            if (spec.m == 0 || hi + 1 <= spec.m)
                k = hi + 1;        // keep the whole group
            else
                k = lo;            // discard the whole group
        }
    }
    if (k < 1) k = 1;

    d.kept = k;
    double discarded = 0;
    for (index_t i = k; i < n; ++i) discarded += rho[i];
    d.truncerr = d.mag > 0 ? discarded / d.mag : 0.0;
    return d;
}

// ---------------------------------------------------------------------------
// SVD backends

namespace detail {

template <class T>
bool svd_primary(const EMat<T>& M, EMat<T>& U, EVec& S, EMat<T>& V) {
    Eigen::BDCSVD<EMat<T>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) return false;
    U = svd.matrixU();
    S = svd.singularValues();
    V = svd.matrixV();
    return S.allFinite() && U.allFinite() && V.allFinite();
}

// Hermitian eigen of the super-matrix [[0, M^dag], [M, 0]]: eigenvalue +s
// carries the eigenvector (v; u)/sqrt(2).
template <class T>
bool svd_supermatrix(const EMat<T>& M, EMat<T>& U, EVec& S, EMat<T>& V) {
    const Eigen::Index a = M.rows(), b = M.cols(), k = std::min(a, b);
    EMat<T> super = EMat<T>::Zero(a + b, a + b);
    super.topRightCorner(b, a) = M.adjoint();
    super.bottomLeftCorner(a, b) = M;
    Eigen::SelfAdjointEigenSolver<EMat<T>> es(super);
    if (es.info() != Eigen::Success) return false;
    // eigenvalues ascending; the top k are the singular values descending
    U.resize(a, k);
    V.resize(b, k);
    S.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index col = a + b - 1 - i;
        S(i) = es.eigenvalues()(col);
        V.col(i) = es.eigenvectors().col(col).head(b) * std::sqrt(2.0);
        U.col(i) = es.eigenvectors().col(col).tail(a) * std::sqrt(2.0);
    }
    // zero singular values make the (v; u) split non-unique; re-normalize
    for (Eigen::Index i = 0; i < k; ++i) {
        const double nu = U.col(i).norm(), nv = V.col(i).norm();
        if (nu > 1e-300) U.col(i) /= nu;
        if (nv > 1e-300) V.col(i) /= nv;
        if (S(i) < 0) S(i) = 0;
    }
    return S.allFinite() && U.allFinite() && V.allFinite();
}

// Last resort: eigen of M M^dag and M^dag M.
template <class T>
bool svd_gram(const EMat<T>& M, EMat<T>& U, EVec& S, EMat<T>& V) {
    const Eigen::Index a = M.rows(), b = M.cols(), k = std::min(a, b);
    if (a <= b) {
        EMat<T> G = M * M.adjoint();
        Eigen::SelfAdjointEigenSolver<EMat<T>> es(G);
        if (es.info() != Eigen::Success) return false;
        U.resize(a, k);
        S.resize(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index col = a - 1 - i;
            S(i) = std::sqrt(std::max(0.0, es.eigenvalues()(col)));
            U.col(i) = es.eigenvectors().col(col);
        }
        V.resize(b, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (S(i) > 1e-300)
                V.col(i) = (M.adjoint() * U.col(i)) / S(i);
            else
                V.col(i).setZero();
        }
    } else {
        EMat<T> G = M.adjoint() * M;
        Eigen::SelfAdjointEigenSolver<EMat<T>> es(G);
        if (es.info() != Eigen::Success) return false;
        V.resize(b, k);
        S.resize(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index col = b - 1 - i;
            S(i) = std::sqrt(std::max(0.0, es.eigenvalues()(col)));
            V.col(i) = es.eigenvectors().col(col);
        }
        U.resize(a, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (S(i) > 1e-300)
                U.col(i) = (M * V.col(i)) / S(i);
            else
                U.col(i).setZero();
        }
    }
    return S.allFinite() && U.allFinite() && V.allFinite();
}

template <class T>
void svd_matrix(const EMat<T>& M, EMat<T>& U, EVec& S, EMat<T>& V) {
    if (svd_primary(M, U, S, V)) return;
    if (svd_supermatrix(M, U, S, V)) return;
    if (svd_gram(M, U, S, V)) return;
    throw numeric_error("svd: all factorization backends failed");
}

} // namespace detail

template <class T>
struct SvdResult {
    Tensor<T> U;          // left group dims + link
    Tensor<double> D;     // kept singular values, square diagonal
    Tensor<T> Vdag;       // link + right group dims
    double truncerr = 0;
    double mag = 0;
};

template <class T>
SvdResult<T> svd(const Tensor<T>& t, const std::vector<std::vector<int>>& groups,
                 const TruncationSpec& spec = {}) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);

    detail::EMat<T> U, V;
    detail::EVec S;
    detail::svd_matrix(detail::as_matrix(mat).eval(), U, S, V);

    std::vector<double> raw(S.data(), S.data() + S.size());
    std::vector<double> rho(raw.size());
    for (index_t i = 0; i < raw.size(); ++i) rho[i] = raw[i] * raw[i];
    const TruncDecision d = decide_truncation(rho, raw, spec);
    const auto k = static_cast<Eigen::Index>(d.kept);

    SvdResult<T> out;
    out.truncerr = d.truncerr;
    out.mag = d.mag;
    out.U = unreshape(detail::from_matrix<T>(U.leftCols(k)), detail::with_link_right(ldims, d.kept));
    out.Vdag = unreshape(detail::from_matrix<T>(V.leftCols(k).adjoint().eval()),
                         detail::with_link_left(rdims, d.kept));
    out.D = Tensor<double>({d.kept, d.kept});
    for (Eigen::Index i = 0; i < k; ++i) out.D(static_cast<index_t>(i), static_cast<index_t>(i)) = S(i);
    return out;
}

// ---------------------------------------------------------------------------
// eigen

struct EigenResult {
    Tensor<cplx> D;      // kept eigenvalues, square diagonal (real on the Hermitian path)
    Tensor<cplx> U;      // columns are eigenvectors, left group dims + link
    double truncerr = 0;
    double mag = 0;
    bool hermitian = false;
};

// Eigendecomposition of the square matrix-equivalent. Hermitian inputs (to
// 1e-10 relative) take the symmetric path with eigenvalues sorted descending
// and truncation summing the raw values; anything else takes the general
// path sorted by magnitude. An optional positive-definite overlap turns the
// problem into H u = lambda S u.
template <class T>
EigenResult eigen(const Tensor<T>& t, const std::vector<std::vector<int>>& groups,
                  const TruncationSpec& spec = {}, const Tensor<T>* overlap = nullptr) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);
    if (mat.dims[0] != mat.dims[1])
        throw shape_error("eigen: matrix-equivalent is not square");

    const auto M = detail::as_matrix(mat).eval();
    const double scale = M.norm();
    const double asym = (M - M.adjoint()).cwiseAbs().maxCoeff();
    const bool herm = asym <= 1e-10 * std::max(scale, 1e-300);

    EigenResult out;
    out.hermitian = herm;
    std::vector<double> vals_for_trunc;
    detail::EMat<cplx> vecs;
    std::vector<cplx> vals;

    if (overlap) {
        if (!herm) throw value_error("eigen: generalized form requires a Hermitian matrix");
        Tensor<T> omat;
        std::vector<index_t> ol, orr;
        detail::matrix_equivalent(*overlap, groups, omat, ol, orr);
        if (omat.dims != mat.dims) throw shape_error("eigen: overlap shape mismatch");
        Eigen::GeneralizedSelfAdjointEigenSolver<detail::EMat<T>> es(M, detail::as_matrix(omat).eval());
        if (es.info() != Eigen::Success) throw numeric_error("eigen: generalized solver failed");
        const Eigen::Index n = es.eigenvalues().size();
        vecs.resize(n, n);
        vals.resize(static_cast<index_t>(n));
        vals_for_trunc.resize(static_cast<index_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {      // descending
            const Eigen::Index col = n - 1 - i;
            vals[static_cast<index_t>(i)] = cplx(es.eigenvalues()(col), 0);
            vals_for_trunc[static_cast<index_t>(i)] = es.eigenvalues()(col);
            vecs.col(i) = es.eigenvectors().col(col).template cast<cplx>();
        }
    } else if (herm) {
        Eigen::SelfAdjointEigenSolver<detail::EMat<T>> es(M);
        if (es.info() != Eigen::Success) throw numeric_error("eigen: solver failed");
        const Eigen::Index n = es.eigenvalues().size();
        vecs.resize(n, n);
        vals.resize(static_cast<index_t>(n));
        vals_for_trunc.resize(static_cast<index_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index col = n - 1 - i;
            vals[static_cast<index_t>(i)] = cplx(es.eigenvalues()(col), 0);
            vals_for_trunc[static_cast<index_t>(i)] = es.eigenvalues()(col);
            vecs.col(i) = es.eigenvectors().col(col).template cast<cplx>();
        }
    } else {
        Eigen::ComplexEigenSolver<detail::EMat<cplx>> es(M.template cast<cplx>());
        if (es.info() != Eigen::Success) throw numeric_error("eigen: solver failed");
        const Eigen::Index n = es.eigenvalues().size();
        std::vector<Eigen::Index> idx(static_cast<index_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
            return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
        });
        vecs.resize(n, n);
        vals.resize(static_cast<index_t>(n));
        vals_for_trunc.resize(static_cast<index_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            vals[static_cast<index_t>(i)] = es.eigenvalues()(idx[static_cast<index_t>(i)]);
            vals_for_trunc[static_cast<index_t>(i)] = std::abs(es.eigenvalues()(idx[static_cast<index_t>(i)]));
            vecs.col(i) = es.eigenvectors().col(idx[static_cast<index_t>(i)]);
        }
    }

    // eigen truncation sums raw values, not squares
    const TruncDecision d = decide_truncation(vals_for_trunc, vals_for_trunc, spec);
    const auto k = static_cast<Eigen::Index>(d.kept);
    out.truncerr = d.truncerr;
    out.mag = d.mag;
    out.U = unreshape(detail::from_matrix<cplx>(vecs.leftCols(k)), detail::with_link_right(ldims, d.kept));
    out.D = Tensor<cplx>({d.kept, d.kept});
    for (Eigen::Index i = 0; i < k; ++i)
        out.D(static_cast<index_t>(i), static_cast<index_t>(i)) = vals[static_cast<index_t>(i)];
    return out;
}

// Forced general (non-Hermitian) eigendecomposition, eigenvalues sorted by
// magnitude. Transfer matrices take this route regardless of symmetry.
template <class T>
EigenResult eigen_general(const Tensor<T>& t, const std::vector<std::vector<int>>& groups) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);
    if (mat.dims[0] != mat.dims[1])
        throw shape_error("eigen_general: matrix-equivalent is not square");
    const auto M = detail::as_matrix(mat).eval();

    Eigen::ComplexEigenSolver<detail::EMat<cplx>> es(M.template cast<cplx>());
    if (es.info() != Eigen::Success) throw numeric_error("eigen_general: solver failed");
    const Eigen::Index n = es.eigenvalues().size();
    std::vector<Eigen::Index> idx(static_cast<index_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
        return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
    });

    EigenResult out;
    out.hermitian = false;
    detail::EMat<cplx> vecs(n, n);
    out.D = Tensor<cplx>({static_cast<index_t>(n), static_cast<index_t>(n)});
    for (Eigen::Index i = 0; i < n; ++i) {
        out.D(static_cast<index_t>(i), static_cast<index_t>(i)) = es.eigenvalues()(idx[static_cast<index_t>(i)]);
        vecs.col(i) = es.eigenvectors().col(idx[static_cast<index_t>(i)]);
    }
    out.U = unreshape(detail::from_matrix<cplx>(vecs), detail::with_link_right(ldims, static_cast<index_t>(n)));
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) total += std::abs(es.eigenvalues()(i));
    out.mag = total;
    return out;
}

// ---------------------------------------------------------------------------
// QR / LQ (never truncating; inner dimension = min of the two groups)

template <class T>
struct QrResult {
    Tensor<T> Q;
    Tensor<T> R;
};

template <class T>
struct LqResult {
    Tensor<T> L;
    Tensor<T> Q;
};

template <class T>
QrResult<T> qr(const Tensor<T>& t, const std::vector<std::vector<int>>& groups) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);
    const auto M = detail::as_matrix(mat);
    const Eigen::Index a = M.rows(), b = M.cols(), k = std::min(a, b);

    Eigen::HouseholderQR<detail::EMat<T>> f(M);
    detail::EMat<T> Q = f.householderQ() * detail::EMat<T>::Identity(a, k);
    detail::EMat<T> R = f.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    if (!Q.allFinite() || !R.allFinite()) throw numeric_error("qr: factorization failed");

    QrResult<T> out;
    out.Q = unreshape(detail::from_matrix<T>(Q), detail::with_link_right(ldims, static_cast<index_t>(k)));
    out.R = unreshape(detail::from_matrix<T>(R), detail::with_link_left(rdims, static_cast<index_t>(k)));
    return out;
}

template <class T>
LqResult<T> lq(const Tensor<T>& t, const std::vector<std::vector<int>>& groups) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);
    const auto M = detail::as_matrix(mat);
    const Eigen::Index a = M.rows(), b = M.cols(), k = std::min(a, b);

    Eigen::HouseholderQR<detail::EMat<T>> f(M.adjoint().eval());
    detail::EMat<T> Qd = f.householderQ() * detail::EMat<T>::Identity(b, k);
    detail::EMat<T> Rd = f.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    if (!Qd.allFinite() || !Rd.allFinite()) throw numeric_error("lq: factorization failed");

    LqResult<T> out;
    out.L = unreshape(detail::from_matrix<T>(Rd.adjoint().eval()),
                      detail::with_link_right(ldims, static_cast<index_t>(k)));
    out.Q = unreshape(detail::from_matrix<T>(Qd.adjoint().eval()),
                      detail::with_link_left(rdims, static_cast<index_t>(k)));
    return out;
}

// ---------------------------------------------------------------------------
// polar

template <class T>
struct PolarResult {
    Tensor<T> F1;
    Tensor<T> F2;
    double truncerr = 0;
    double mag = 0;
};

// right: M = (U V^dag)(V D V^dag); otherwise M = (U D U^dag)(U V^dag).
// The isometric factor keeps the exterior bases untouched.
template <class T>
PolarResult<T> polar(const Tensor<T>& t, const std::vector<std::vector<int>>& groups,
                     bool right_polar = true, const TruncationSpec& spec = {}) {
    Tensor<T> mat;
    std::vector<index_t> ldims, rdims;
    detail::matrix_equivalent(t, groups, mat, ldims, rdims);

    detail::EMat<T> U, V;
    detail::EVec S;
    detail::svd_matrix(detail::as_matrix(mat).eval(), U, S, V);

    std::vector<double> raw(S.data(), S.data() + S.size());
    std::vector<double> rho(raw.size());
    for (index_t i = 0; i < raw.size(); ++i) rho[i] = raw[i] * raw[i];
    const TruncDecision d = decide_truncation(rho, raw, spec);
    const auto k = static_cast<Eigen::Index>(d.kept);

    detail::EMat<T> Uk = U.leftCols(k), Vk = V.leftCols(k);
    detail::EVec Sk = S.head(k);

    PolarResult<T> out;
    out.truncerr = d.truncerr;
    out.mag = d.mag;
    if (right_polar) {
        detail::EMat<T> isom = Uk * Vk.adjoint();
        detail::EMat<T> core = Vk * Sk.asDiagonal() * Vk.adjoint();
        out.F1 = unreshape(detail::from_matrix<T>(isom), detail::with_link_right(ldims, mat.dims[1]));
        out.F2 = unreshape(detail::from_matrix<T>(core), detail::with_link_left(rdims, mat.dims[1]));
    } else {
        detail::EMat<T> core = Uk * Sk.asDiagonal() * Uk.adjoint();
        detail::EMat<T> isom = Uk * Vk.adjoint();
        out.F1 = unreshape(detail::from_matrix<T>(core), detail::with_link_right(ldims, mat.dims[0]));
        out.F2 = unreshape(detail::from_matrix<T>(isom), detail::with_link_left(rdims, mat.dims[0]));
    }
    return out;
}

} // namespace dtn
