#pragma once

// Rank-fluid dense tensor and the four basic operations: permute, reshape,
// contract (with conjugation / axpy / output-reorder variants) and norm.
// Storage is a flat scalar vector with the leftmost index varying fastest,
// so a rank-2 tensor maps onto a column-major matrix with no copy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "dtn/error.hpp"

namespace dtn {

using index_t = std::size_t;
using cplx = std::complex<double>;

template <class T>
inline constexpr bool is_tensor_scalar_v =
    std::is_same_v<T, double> || std::is_same_v<T, cplx>;

// Mixed real/complex arithmetic promotes to complex.
template <class A, class B>
using promote_t = std::conditional_t<std::is_same_v<A, cplx> || std::is_same_v<B, cplx>, cplx, double>;

template <class T>
struct Tensor {
    static_assert(is_tensor_scalar_v<T>, "Tensor scalar must be double or complex<double>");

    std::vector<index_t> dims;
    std::vector<T> data;

    Tensor() : data(1, T{}) {}
    explicit Tensor(std::vector<index_t> d)
        : dims(std::move(d)), data(checked_count(dims), T{}) {}
    Tensor(std::vector<index_t> d, std::vector<T> v) : dims(std::move(d)), data(std::move(v)) {
        if (checked_count(dims) != data.size())
            throw shape_error("tensor: prod(dims) != data length");
    }

    int rank() const { return static_cast<int>(dims.size()); }
    index_t size() const { return data.size(); }
    index_t dim(int axis) const { return dims[static_cast<index_t>(axis)]; }

    T& operator[](index_t flat) { return data[flat]; }
    const T& operator[](index_t flat) const { return data[flat]; }

    // Multi-index access, leftmost index fastest.
    template <class... I>
    T& operator()(I... is) { return data[flat_index({static_cast<index_t>(is)...})]; }
    template <class... I>
    const T& operator()(I... is) const { return data[flat_index({static_cast<index_t>(is)...})]; }

    index_t flat_index(std::initializer_list<index_t> idx) const {
        index_t flat = 0, stride = 1;
        auto it = dims.begin();
        for (index_t i : idx) {
            flat += i * stride;
            stride *= *it++;
        }
        return flat;
    }

    index_t flat_index(const std::vector<index_t>& idx) const {
        index_t flat = 0, stride = 1;
        for (index_t k = 0; k < idx.size(); ++k) {
            flat += idx[k] * stride;
            stride *= dims[k];
        }
        return flat;
    }

    static index_t checked_count(const std::vector<index_t>& d) {
        index_t n = 1;
        for (index_t x : d) {
            if (x == 0) throw shape_error("tensor: zero dimension");
            n *= x;
        }
        return n;
    }
};

inline index_t dim_product(const std::vector<index_t>& dims) {
    index_t n = 1;
    for (index_t d : dims) n *= d;
    return n;
}

// ---------------------------------------------------------------------------
// scalar helpers

inline double conj_if(double x, bool) { return x; }
inline cplx conj_if(const cplx& x, bool c) { return c ? std::conj(x) : x; }

inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

template <class To, class From>
inline To scalar_cast(const From& x) {
    if constexpr (std::is_same_v<To, From>) return x;
    else if constexpr (std::is_same_v<To, cplx>) return cplx(x, 0.0);
    else return x.real();
}

// ---------------------------------------------------------------------------
// permute

inline void check_permutation(const std::vector<int>& order, int rank, const char* what) {
    if (static_cast<int>(order.size()) != rank)
        throw value_error(std::string(what) + ": order length != rank");
    std::vector<char> seen(static_cast<index_t>(rank), 0);
    for (int p : order) {
        if (p < 0 || p >= rank || seen[static_cast<index_t>(p)])
            throw value_error(std::string(what) + ": invalid permutation");
        seen[static_cast<index_t>(p)] = 1;
    }
}

// Output axis k carries input axis order[k]; the element at the permuted
// multi-index equals the input element at the original one.
template <class T>
Tensor<T> permute(const Tensor<T>& t, const std::vector<int>& order) {
    const int r = t.rank();
    check_permutation(order, r, "permute");
    bool identity = true;
    for (int k = 0; k < r; ++k)
        if (order[static_cast<index_t>(k)] != k) { identity = false; break; }
    if (identity) return t;

    std::vector<index_t> odims(static_cast<index_t>(r));
    for (int k = 0; k < r; ++k) odims[static_cast<index_t>(k)] = t.dims[static_cast<index_t>(order[static_cast<index_t>(k)])];

    Tensor<T> out(odims);
    // Output strides of each input axis: in-axis j lands at out position inv[j].
    std::vector<index_t> ostride(static_cast<index_t>(r), 1);
    for (int k = 1; k < r; ++k)
        ostride[static_cast<index_t>(k)] = ostride[static_cast<index_t>(k - 1)] * odims[static_cast<index_t>(k - 1)];
    std::vector<index_t> w(static_cast<index_t>(r));
    for (int k = 0; k < r; ++k) w[static_cast<index_t>(order[static_cast<index_t>(k)])] = ostride[static_cast<index_t>(k)];

    // Odometer scan over the input, scattering into the output.
    std::vector<index_t> idx(static_cast<index_t>(r), 0);
    const index_t n = t.size();
    index_t oflat = 0;
    for (index_t flat = 0; flat < n; ++flat) {
        out.data[oflat] = t.data[flat];
        for (int j = 0; j < r; ++j) {
            const index_t ju = static_cast<index_t>(j);
            oflat += w[ju];
            if (++idx[ju] < t.dims[ju]) break;
            oflat -= w[ju] * t.dims[ju];
            idx[ju] = 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// reshape

// Join index groups. Groups that already enumerate 0..rank-1 in order touch
// only the dims; otherwise the tensor is permuted first.
template <class T>
Tensor<T> reshape_group(const Tensor<T>& t, const std::vector<std::vector<int>>& groups) {
    std::vector<int> flat;
    for (const auto& g : groups) {
        if (g.empty()) throw value_error("reshape_group: empty group");
        flat.insert(flat.end(), g.begin(), g.end());
    }
    check_permutation(flat, t.rank(), "reshape_group");

    bool sequential = true;
    for (index_t k = 0; k < flat.size(); ++k)
        if (flat[k] != static_cast<int>(k)) { sequential = false; break; }

    const Tensor<T>& src = sequential ? t : permute(t, flat);
    std::vector<index_t> odims;
    odims.reserve(groups.size());
    index_t pos = 0;
    for (const auto& g : groups) {
        index_t d = 1;
        for (index_t j = 0; j < g.size(); ++j) d *= src.dims[pos++];
        odims.push_back(d);
    }
    Tensor<T> out;
    out.dims = std::move(odims);
    out.data = src.data;
    return out;
}

// Replace the dims, keeping the data sequence; counts must match.
template <class T>
Tensor<T> unreshape(const Tensor<T>& t, std::vector<index_t> dims) {
    if (dim_product(dims) != t.size())
        throw shape_error("unreshape: element count mismatch");
    Tensor<T> out;
    out.dims = std::move(dims);
    out.data = t.data;
    return out;
}

template <class T>
Tensor<T> unreshape(Tensor<T>&& t, std::vector<index_t> dims) {
    if (dim_product(dims) != t.size())
        throw shape_error("unreshape: element count mismatch");
    t.dims = std::move(dims);
    return std::move(t);
}

// Dimension-1 bookkeeping; data untouched.
template <class T>
Tensor<T> insert_unit_axis(const Tensor<T>& t, int pos) {
    if (pos < 0 || pos > t.rank()) throw value_error("insert_unit_axis: position out of range");
    Tensor<T> out = t;
    out.dims.insert(out.dims.begin() + pos, 1);
    return out;
}

template <class T>
Tensor<T> drop_unit_axis(const Tensor<T>& t, int pos) {
    if (pos < 0 || pos >= t.rank() || t.dims[static_cast<index_t>(pos)] != 1)
        throw value_error("drop_unit_axis: axis is not dimension 1");
    Tensor<T> out = t;
    out.dims.erase(out.dims.begin() + pos);
    return out;
}

// ---------------------------------------------------------------------------
// contraction

namespace detail {

template <class T>
using EMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Copy one operand into the matrix-equivalent layout, fusing the scalar
// promotion and optional conjugation into the permutation pass.
// contracted_right: free axes first (rows), contracted axes last (cols);
// otherwise contracted first (rows), free last (cols).
template <class R, class T>
void matrix_operand(const Tensor<T>& t, const std::vector<int>& caxes, bool conj,
                    bool contracted_right, std::vector<R>& buf,
                    index_t& free_count, index_t& contracted_count,
                    std::vector<index_t>& free_dims) {
    const int r = t.rank();
    std::vector<char> is_c(static_cast<index_t>(r), 0);
    for (int a : caxes) {
        if (a < 0 || a >= r) throw value_error("contract: axis out of range");
        if (is_c[static_cast<index_t>(a)]) throw value_error("contract: repeated axis");
        is_c[static_cast<index_t>(a)] = 1;
    }
    std::vector<int> order;
    order.reserve(static_cast<index_t>(r));
    free_dims.clear();
    if (contracted_right) {
        for (int a = 0; a < r; ++a)
            if (!is_c[static_cast<index_t>(a)]) { order.push_back(a); free_dims.push_back(t.dims[static_cast<index_t>(a)]); }
        for (int a : caxes) order.push_back(a);
    } else {
        for (int a : caxes) order.push_back(a);
        for (int a = 0; a < r; ++a)
            if (!is_c[static_cast<index_t>(a)]) { order.push_back(a); free_dims.push_back(t.dims[static_cast<index_t>(a)]); }
    }
    free_count = dim_product(free_dims);
    contracted_count = t.size() / std::max<index_t>(free_count, 1);

    buf.resize(t.size());
    // permute scatter with fused cast/conj
    std::vector<index_t> odims(static_cast<index_t>(r));
    for (int k = 0; k < r; ++k) odims[static_cast<index_t>(k)] = t.dims[static_cast<index_t>(order[static_cast<index_t>(k)])];
    std::vector<index_t> ostride(static_cast<index_t>(r), 1);
    for (int k = 1; k < r; ++k)
        ostride[static_cast<index_t>(k)] = ostride[static_cast<index_t>(k - 1)] * odims[static_cast<index_t>(k - 1)];
    std::vector<index_t> w(static_cast<index_t>(r));
    for (int k = 0; k < r; ++k) w[static_cast<index_t>(order[static_cast<index_t>(k)])] = ostride[static_cast<index_t>(k)];

    std::vector<index_t> idx(static_cast<index_t>(r), 0);
    const index_t n = t.size();
    index_t oflat = 0;
    for (index_t flat = 0; flat < n; ++flat) {
        buf[oflat] = scalar_cast<R>(conj_if(t.data[flat], conj));
        for (int j = 0; j < r; ++j) {
            const index_t ju = static_cast<index_t>(j);
            oflat += w[ju];
            if (++idx[ju] < t.dims[ju]) break;
            oflat -= w[ju] * t.dims[ju];
            idx[ju] = 0;
        }
    }
}

} // namespace detail

template <class R>
struct ContractOpts {
    bool conj_a = false;
    bool conj_b = false;
    R alpha = R{1};
    R beta = R{0};
    const Tensor<R>* addend = nullptr;      // must match the natural result dims
    std::vector<int> out_order;             // applied as a final permute
};

// C = alpha * op(a) . op(b) + beta * addend, contracting axes_a[i] with
// axes_b[i]. Result indices are the free indices of a followed by those of b;
// the whole computation reduces to one matrix product.
template <class TA, class TB, class R = promote_t<TA, TB>>
Tensor<R> contract(const Tensor<TA>& a, const std::vector<int>& axes_a,
                   const Tensor<TB>& b, const std::vector<int>& axes_b,
                   const ContractOpts<R>& opts = {}) {
    if (axes_a.size() != axes_b.size())
        throw value_error("contract: axis lists differ in length");
    for (index_t i = 0; i < axes_a.size(); ++i) {
        const int aa = axes_a[i], ab = axes_b[i];
        if (aa < 0 || aa >= a.rank() || ab < 0 || ab >= b.rank())
            throw value_error("contract: axis out of range");
        if (a.dims[static_cast<index_t>(aa)] != b.dims[static_cast<index_t>(ab)])
            throw shape_error("contract: contracted dimensions differ");
    }

    std::vector<R> abuf, bbuf;
    index_t fa = 0, ka = 0, fb = 0, kb = 0;
    std::vector<index_t> fdims_a, fdims_b;
    detail::matrix_operand<R>(a, axes_a, opts.conj_a, true, abuf, fa, ka, fdims_a);
    detail::matrix_operand<R>(b, axes_b, opts.conj_b, false, bbuf, kb, fb, fdims_b);
    // note: for b the contracted axes sit first, so the counts swap roles
    std::swap(kb, fb);

    std::vector<index_t> rdims = fdims_a;
    rdims.insert(rdims.end(), fdims_b.begin(), fdims_b.end());
    Tensor<R> out(rdims);

    using Map = Eigen::Map<detail::EMat<R>>;
    using CMap = Eigen::Map<const detail::EMat<R>>;
    CMap A(abuf.data(), static_cast<Eigen::Index>(fa), static_cast<Eigen::Index>(ka));
    CMap B(bbuf.data(), static_cast<Eigen::Index>(kb), static_cast<Eigen::Index>(fb));
    Map C(out.data.data(), static_cast<Eigen::Index>(fa), static_cast<Eigen::Index>(fb));
    C.noalias() = A * B;

    if (opts.alpha != R{1})
        for (auto& x : out.data) x *= opts.alpha;
    if (opts.addend) {
        if (opts.addend->dims != out.dims)
            throw shape_error("contract: addend shape mismatch");
        if (opts.beta != R{0})
            for (index_t i = 0; i < out.size(); ++i) out.data[i] += opts.beta * opts.addend->data[i];
    }
    if (!opts.out_order.empty()) return permute(out, opts.out_order);
    return out;
}

// Convenience forms mirroring the conjugation shorthands.
template <class TA, class TB>
auto ccontract(const Tensor<TA>& a, const std::vector<int>& axes_a,
               const Tensor<TB>& b, const std::vector<int>& axes_b) {
    ContractOpts<promote_t<TA, TB>> o;
    o.conj_a = true;
    return contract(a, axes_a, b, axes_b, o);
}

template <class TA, class TB>
auto contractc(const Tensor<TA>& a, const std::vector<int>& axes_a,
               const Tensor<TB>& b, const std::vector<int>& axes_b) {
    ContractOpts<promote_t<TA, TB>> o;
    o.conj_b = true;
    return contract(a, axes_a, b, axes_b, o);
}

// <a|b>: full contraction with the left operand conjugated.
template <class TA, class TB>
promote_t<TA, TB> dot(const Tensor<TA>& a, const Tensor<TB>& b) {
    if (a.dims != b.dims) throw shape_error("dot: shape mismatch");
    using R = promote_t<TA, TB>;
    R acc{};
    for (index_t i = 0; i < a.size(); ++i)
        acc += scalar_cast<R>(conj_if(a.data[i], true)) * scalar_cast<R>(b.data[i]);
    return acc;
}

template <class T>
double norm(const Tensor<T>& t) {
    double acc = 0;
    for (const T& x : t.data) acc += std::norm(x);
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// small builders

template <class T = double>
Tensor<T> identity_tensor(index_t d) {
    Tensor<T> t({d, d});
    for (index_t i = 0; i < d; ++i) t(i, i) = T{1};
    return t;
}

template <class T>
void fill_random(Tensor<T>& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : t.data) {
        if constexpr (std::is_same_v<T, cplx>) x = cplx(u(rng), u(rng));
        else x = u(rng);
    }
}

template <class T>
Tensor<T> random_tensor(std::vector<index_t> dims, std::mt19937_64& rng) {
    Tensor<T> t(std::move(dims));
    fill_random(t, rng);
    return t;
}

template <class T>
Tensor<T> conj(const Tensor<T>& t) {
    Tensor<T> out = t;
    if constexpr (std::is_same_v<T, cplx>)
        for (auto& x : out.data) x = std::conj(x);
    return out;
}

// Operator adjoint of a rank-2 tensor.
template <class T>
Tensor<T> dagger(const Tensor<T>& t) {
    if (t.rank() != 2) throw shape_error("dagger: rank-2 tensor required");
    Tensor<T> out({t.dims[1], t.dims[0]});
    for (index_t j = 0; j < t.dims[1]; ++j)
        for (index_t i = 0; i < t.dims[0]; ++i)
            out(j, i) = conj_if(t(i, j), true);
    return out;
}

template <class T>
Tensor<T> scaled(const Tensor<T>& t, T factor) {
    Tensor<T> out = t;
    for (auto& x : out.data) x *= factor;
    return out;
}

template <class To, class From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
    Tensor<To> out;
    out.dims = t.dims;
    out.data.resize(t.size());
    for (index_t i = 0; i < t.size(); ++i) out.data[i] = scalar_cast<To>(t.data[i]);
    return out;
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, T fb = T{1}) {
    if (a.dims != b.dims) throw shape_error("add: shape mismatch");
    Tensor<T> out = a;
    for (index_t i = 0; i < out.size(); ++i) out.data[i] += fb * b.data[i];
    return out;
}

// Matrix product of two rank-2 tensors (operator composition).
template <class TA, class TB>
auto matmul(const Tensor<TA>& a, const Tensor<TB>& b) {
    if (a.rank() != 2 || b.rank() != 2) throw shape_error("matmul: rank-2 tensors required");
    return contract(a, {1}, b, {0});
}

} // namespace dtn
