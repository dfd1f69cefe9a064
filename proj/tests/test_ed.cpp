#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dtn/ed.hpp"
#include "dtn/measure.hpp"
#include "dtn/models.hpp"
#include "model_oracles.hpp"
#include "oracles.hpp"

using namespace dtn;

TEST_CASE("full_h: identity MPO, guard, corner extraction") {
    auto s = spin_ops();
    auto idblock = [&](int) {
        OpBlock<double> w(1, 1);
        w.at(0, 0) = s.Id;
        return w;
    };
    auto idmpo = make_mpo<double>(idblock, {2}, 3);
    auto H = full_h(idmpo);
    CHECK(oracle::max_abs_diff(H, identity_tensor<double>(8)) == 0.0);

    // guard
    CHECK_THROWS_AS(full_h(heisenberg_mpo(1.0, 20)), resource_error);

    // raw uniform MPO without boundary extraction: the lower-left corner is chosen
    auto blk = [&](int) {
        OpBlock<double> w(3, 3);
        w.at(0, 0) = s.Id;
        w.at(1, 0) = s.Sz;
        w.at(2, 0) = scaled(s.Sx, 0.3);
        w.at(2, 1) = s.Sz;
        w.at(2, 2) = s.Id;
        return w;
    };
    Mpo<double> raw;
    for (int i = 0; i < 3; ++i) {
        OpBlock<double> b = blk(i);
        Tensor<double> w({3, 2, 2, 3});
        for (index_t r = 0; r < 3; ++r)
            for (index_t c = 0; c < 3; ++c) {
                if (b.is_zero(r, c)) continue;
                for (index_t so = 0; so < 2; ++so)
                    for (index_t si = 0; si < 2; ++si) w(r, so, si, c) = b.at(r, c)(so, si);
            }
        raw.tensors.push_back(std::move(w));
    }
    auto Hraw = full_h(raw);
    auto Href = full_h(tfim_mpo(0.3, 3));
    CHECK(oracle::max_abs_diff(Hraw, Href) < 1e-14);
}

TEST_CASE("full_psi ordering and norm") {
    auto psi = uniform_product_state<double>(2, 3);
    auto v = full_psi(psi);
    CHECK(v(index_t{0}) == 1.0);

    auto r = rand_mps<cplx>(2, 6, 7, 3, 31);
    auto vr = full_psi(r);
    CHECK(norm(vr) == doctest::Approx(std::sqrt(real_part(expect(r)))).epsilon(1e-12));
}

TEST_CASE("convert2mps round trips") {
    // product vector -> all links 1
    auto up = uniform_product_state<double>(2, 4);
    auto psi = convert2mps(full_psi(up), 2, 4);
    for (int i = 0; i + 1 < psi.size(); ++i) CHECK(psi.link_dim(i) == 1);

    // random normalized 2^6 vector, untruncated round trip
    std::mt19937_64 rng(37);
    auto vec = random_tensor<cplx>({64}, rng);
    const double nn = norm(vec);
    for (auto& x : vec.data) x /= nn;
    auto m = convert2mps(vec, 2, 6);
    CHECK(m.oc == 0);
    auto back = full_psi(m);
    CHECK(oracle::max_abs_diff(back, vec) < 1e-12);

    // overlap form of the same identity
    auto m2 = convert2mps(back, 2, 6);
    CHECK(std::abs(overlap(m2, m) - cplx(1, 0)) < 1e-12);

    // singlet with m=1: half the weight is discarded
    Tensor<double> singlet({4});
    singlet(index_t{2}) = 1.0 / std::sqrt(2.0);
    singlet(index_t{1}) = -1.0 / std::sqrt(2.0);
    TruncationSpec spec;
    spec.m = 1;
    auto trunc = convert2mps(singlet, 2, 2, spec);
    CHECK(mps_overlap_norm(trunc) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(convert2mps(singlet, 2, 3), shape_error);
}

TEST_CASE("krylov_ground on dense operators") {
    // diagonal matrix, start on the lowest basis vector: one step
    Tensor<double> D({4, 4});
    D(0, 0) = -2.0;
    D(1, 1) = 1.0;
    D(2, 2) = 3.0;
    D(3, 3) = 5.0;
    Tensor<double> e0({4});
    e0(index_t{0}) = 1.0;
    auto r = krylov_ground(D, e0, 10);
    CHECK(r.energy == doctest::Approx(-2.0).epsilon(1e-14));

    // N=8 Heisenberg vs dense eigen
    auto H = full_h(heisenberg_mpo(1.0, 8));
    auto ed = eigen(H, {{0}, {1}});
    const double e_exact = ed.D(255, 255).real(); // descending order: last = lowest
    std::mt19937_64 rng(41);
    auto v0 = random_tensor<double>({256}, rng);
    auto g = krylov_ground(H, v0, 200);
    CHECK(g.energy == doctest::Approx(e_exact).epsilon(1e-8));

    // variational bound with a tiny Krylov space
    auto H10 = full_h(heisenberg_mpo(1.0, 10));
    auto ed10 = eigen(H10, {{0}, {1}});
    const double e10 = ed10.D(1023, 1023).real();
    auto v10 = random_tensor<double>({1024}, rng);
    auto g4 = krylov_ground(H10, v10, 4);
    CHECK(g4.energy >= e10 - 1e-12);

    Tensor<double> zero({4});
    CHECK_THROWS_AS(krylov_ground(D, zero, 5), numeric_error);
}

TEST_CASE("basis-ordering coherence: sandwich equals expect") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 3);
        auto psi = rand_mps<cplx>(2, n, 5, 0, rng());
        auto h = heisenberg_mpo<cplx>(0.7, n);
        auto H = full_h(h);
        auto v = full_psi(psi);
        auto hv = contract(H, {1}, v, {0});
        const cplx lhs = dot(v, hv);
        const cplx rhs = expect(psi, h);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("convert2mps after full_psi is the identity up to gauge") {
    auto psi = rand_mps<double>(2, 5, 4, 2, 47);
    auto vec = full_psi(psi);
    auto re = convert2mps(vec, 2, 5);
    CHECK(std::abs(overlap(re, psi) - 1.0) < 1e-12);
}
