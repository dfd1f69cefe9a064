#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "dtn/dmrg.hpp"
#include "dtn/ed.hpp"
#include "dtn/env.hpp"
#include "dtn/measure.hpp"
#include "dtn/models.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/storage.hpp"
#include "oracles.hpp"

using namespace dtn;

namespace {

template <class T>
double gauge_defect(const Mps<T>& psi) {
    // left-of-oc tensors contract with their conjugates to identity, right-of-oc mirrored
    double worst = 0;
    for (int i = 0; i < psi.size(); ++i) {
        if (i == psi.oc) continue;
        Tensor<T> g;
        if (i < psi.oc) g = ccontract(psi.site(i), {0, 1}, psi.site(i), {0, 1});
        else g = contractc(psi.site(i), {1, 2}, psi.site(i), {1, 2});
        for (index_t r = 0; r < g.dims[0]; ++r)
            for (index_t c = 0; c < g.dims[1]; ++c)
                worst = std::max(worst, std::abs(g(r, c) - (r == c ? T{1} : T{0})));
    }
    return worst;
}

} // namespace

TEST_CASE("product states assemble the expected wavefunctions") {
    auto psi = uniform_product_state<double>(2, 4);
    auto vec = full_psi(psi);
    CHECK(vec.size() == 16);
    CHECK(vec(index_t{0}) == 1.0);
    double rest = 0;
    for (index_t i = 1; i < 16; ++i) rest += std::abs(vec(i));
    CHECK(rest == 0.0);

    auto stag = staggered_product_state<double>(2, 2);
    auto v2 = full_psi(stag);
    // |up down> has site-0 index 0, site-1 index 1 -> flat 0 + 2*1 = 2
    CHECK(v2(index_t{2}) == 1.0);

    auto big = uniform_product_state<double>(2, 100);
    CHECK(norm(big) == doctest::Approx(1.0));
    auto profile = entanglement_profile(big);
    for (double s : profile.svn) CHECK(s == doctest::Approx(0.0));

    CHECK_THROWS_AS(product_state<double>({2}, {{0.5, 0.5}}), value_error);
}

TEST_CASE("rand_mps: determinism, caps, gauge") {
    auto a = rand_mps<double>(2, 10, 50, 3, 42);
    auto b = rand_mps<double>(2, 10, 50, 3, 42);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        REQUIRE(a.site(i).dims == b.site(i).dims);
        CHECK(oracle::max_abs_diff(a.site(i), b.site(i)) == 0.0);
    }
    auto c = rand_mps<double>(2, 10, 50, 3, 43);
    CHECK(oracle::max_abs_diff(a.site(5), c.site(5)) > 0.0);

    // m=1 collapses to a product state
    auto p = rand_mps<double>(2, 6, 1, 0, 7);
    for (int i = 0; i + 1 < p.size(); ++i) CHECK(p.link_dim(i) == 1);

    // link dims capped by both m and the entanglement bound
    auto q = rand_mps<double>(2, 10, 50, 0, 7);
    for (int i = 0; i + 1 < q.size(); ++i) {
        const int k = i + 1;
        index_t bound = 1;
        for (int j = 0; j < std::min(k, 10 - k); ++j) bound *= 2;
        CHECK(q.link_dim(i) <= std::min<index_t>(50, bound));
    }
    CHECK(norm(q) == doctest::Approx(1.0));
    CHECK(gauge_defect(q) < 1e-10);
}

TEST_CASE("move_oc preserves the full wavefunction") {
    auto psi = rand_mps<cplx>(2, 6, 8, 0, 11);
    auto before = full_psi(psi);

    move_oc(psi, psi.oc); // no-op
    auto psi2 = psi;
    move_oc(psi2, 5);
    move_oc(psi2, 0);
    auto after = full_psi(psi2);
    CHECK(oracle::max_abs_diff(before, after) < 1e-12);
    CHECK(gauge_defect(psi2) < 1e-10);

    move_oc(psi2, 3);
    CHECK(gauge_defect(psi2) < 1e-10);
    CHECK_THROWS_AS(move_oc(psi2, 6), value_error);
}

TEST_CASE("gauge theorem: norm lives on the center tensor") {
    auto psi = rand_mps<double>(2, 8, 10, 4, 13);
    const double full = mps_overlap_norm(psi);
    CHECK(full == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(psi.site(psi.oc)) == doctest::Approx(std::sqrt(full)).epsilon(1e-12));
}

TEST_CASE("make_mpo: shapes and boundary extraction") {
    auto hub = hubbard_mpo(1.0, 4.0, -2.0, 4);
    CHECK(hub.site(0).dims == std::vector<index_t>{1, 4, 4, 6});
    CHECK(hub.site(1).dims == std::vector<index_t>{6, 4, 4, 6});
    CHECK(hub.site(3).dims == std::vector<index_t>{6, 4, 4, 1});

    auto h2d = heisenberg2d_mpo(1.0, 4, 4);
    CHECK(h2d.site(7).dims == std::vector<index_t>{14, 2, 2, 14});

    auto h1 = heisenberg_mpo(1.0, 3);
    CHECK(h1.site(1).dims == std::vector<index_t>{5, 2, 2, 5});

    // N=2 Heisenberg: singlet/triplet split
    auto h = heisenberg_mpo(1.0, 2);
    auto H = full_h(h);
    auto e = eigen(H, {{0}, {1}});
    CHECK(e.D(3, 3).real() == doctest::Approx(-0.75).epsilon(1e-12));
    for (index_t i = 0; i < 3; ++i) CHECK(e.D(i, i).real() == doctest::Approx(0.25).epsilon(1e-12));

    // physical-dims cycling
    auto s = spin_ops();
    auto block = [&](int) {
        OpBlock<double> w(2, 2);
        w.at(0, 0) = s.Id;
        w.at(1, 0) = s.Sz;
        w.at(1, 1) = s.Id;
        return w;
    };
    auto cyc = make_mpo<double>(block, {2, 2, 2}, 5);
    CHECK(cyc.size() == 5);
}

TEST_CASE("apply_mpo: identity, expectation cross-checks") {
    auto psi = rand_mps<double>(2, 4, 6, 0, 17);
    auto s = spin_ops();

    // identity MPO
    auto idblock = [&](int) {
        OpBlock<double> w(1, 1);
        w.at(0, 0) = s.Id;
        return w;
    };
    auto idmpo = make_mpo<double>(idblock, {2}, 4);
    auto out = apply_mpo(psi, idmpo);
    CHECK(std::abs(overlap(out, psi) - 1.0) < 1e-10);

    auto h = heisenberg_mpo(1.0, 4);
    auto hpsi = apply_mpo(psi, h);
    const double e1 = overlap(hpsi, psi);
    const double e2 = expect(psi, h);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-10));

    // untruncated link dims grow to (mps link) x (mpo link) where allowed
    CHECK(hpsi.site(1).dims[0] <= psi.site(1).dims[0] * 5);

    auto psi6 = rand_mps<double>(2, 6, 4, 0, 19);
    auto h6 = heisenberg_mpo(1.0, 6);
    auto hpsi6 = apply_mpo(psi6, h6);
    const double n2 = expect(hpsi6);
    const double hh = expect(psi6, h6, h6);
    CHECK(n2 == doctest::Approx(hh).epsilon(1e-10));

    // truncating reverse sweep caps the bond dimension
    TruncationSpec spec;
    spec.m = 3;
    auto small = apply_mpo(psi6, h6, spec);
    for (int i = 0; i + 1 < small.size(); ++i) CHECK(small.link_dim(i) <= 3);
}

TEST_CASE("make_env initializes boundaries consistent with expect") {
    auto psi = rand_mps<double>(2, 5, 6, 2, 23);
    auto h = heisenberg_mpo(1.0, 5);
    auto [lenv, renv] = make_env(psi, {&h});

    // contract lenv(oc), both site blocks, renv(oc) around the center site
    const int i = psi.oc;
    TwoSiteProblem<double> prob{&lenv.at(i), &h.site(i), &h.site(i + 1), &renv.at(i + 1)};
    auto aa = contract(psi.site(i), {2}, psi.site(i + 1), {0});
    auto hv = heff_apply(prob, aa);
    CHECK(dot(aa, hv) == doctest::Approx(expect(psi, h)).epsilon(1e-10));

    // boundary environments are all-ones, all dims 1
    CHECK(lenv.at(0).size() == 1);
    CHECK(lenv.at(0).data[0] == 1.0);
    CHECK(renv.at(4).size() == 1);

    // two-MPO environments are rank-4
    auto [l2, r2] = make_env(psi, {&h, &h});
    CHECK(l2.at(0).rank() == 4);
    CHECK(l2.at(psi.oc).rank() == 4);
}

TEST_CASE("apply_local_ops: fermions with trails") {
    auto f = fermion_ops();

    // two up fermions on sites 1 and 3 of a 4-site vacuum
    auto vac = uniform_product_state<double>(4, 4);
    auto psi = vac;
    apply_local_ops(psi, {1, 3}, f.Cupdag, &f.F);
    CHECK(mps_overlap_norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
    auto nup = expect_local(psi, f.Nup);
    CHECK(nup[0] == doctest::Approx(0.0));
    CHECK(nup[1] == doctest::Approx(1.0));
    CHECK(nup[2] == doctest::Approx(0.0));
    CHECK(nup[3] == doctest::Approx(1.0));

    // trail = identity behaves as a plain application
    auto psi2 = vac;
    apply_local_ops(psi2, {2}, f.Cupdag);
    auto n2 = expect_local(psi2, f.Nup);
    CHECK(n2[2] == doctest::Approx(1.0));

    // Pauli exclusion: applying the same creation operator twice annihilates
    auto psi3 = vac;
    apply_local_ops(psi3, {1}, f.Cupdag, &f.F);
    CHECK_THROWS_AS(apply_local_ops(psi3, {1}, f.Cupdag, &f.F), numeric_error);
}

TEST_CASE("fermion application order flips the global sign") {
    auto f = fermion_ops();
    auto vac = uniform_product_state<double>(4, 4);

    auto a = vac;
    apply_local_ops(a, {1}, f.Cupdag, &f.F);
    apply_local_ops(a, {3}, f.Cupdag, &f.F);
    auto b = vac;
    apply_local_ops(b, {3}, f.Cupdag, &f.F);
    apply_local_ops(b, {1}, f.Cupdag, &f.F);

    auto va = full_psi(a);
    auto vb = full_psi(b);
    double worst = 0;
    for (index_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va(i) + vb(i)));
    CHECK(worst < 1e-12);
}

TEST_CASE("disk round trips are bit-exact and lazy") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "dtn_store_test";
    fs::remove_all(dir);

    auto psi = rand_mps<cplx>(2, 5, 6, 2, 29);
    auto store = disk_save(psi, dir.string());
    CHECK(store.size() == 5);
    CHECK(store.oc == 2);
    CHECK(store.tag == ScalarTag::complex64);

    // single-site load touches only one file
    auto t2 = disk_load<cplx>(store, 2);
    CHECK(t2.dims == psi.site(2).dims);
    CHECK(t2.data == psi.site(2).data);

    auto manifest = open_store((dir / "psi.manifest").string());
    auto loaded = load_mps<cplx>(manifest);
    CHECK(loaded.oc == psi.oc);
    for (int i = 0; i < 5; ++i) CHECK(loaded.site(i).data == psi.site(i).data);

    // scalar-tag mismatch is a format error
    CHECK_THROWS_AS(disk_load<double>(store, 0), io_error);

    // complex-typed MPO round trip preserves the tag
    auto h = heisenberg_mpo<cplx>(1.0, 4);
    auto mstore = disk_save(h, dir.string());
    CHECK(mstore.tag == ScalarTag::complex64);
    auto h2 = load_mpo<cplx>(open_store((dir / "mpo.manifest").string()));
    for (int i = 0; i < 4; ++i) CHECK(h2.site(i).data == h.site(i).data);

    // environments round trip too
    auto [lenv, renv] = make_env(psi, {});
    auto estore = disk_save(lenv, dir.string());
    auto lenv2 = load_env<cplx>(open_store((dir / "env.manifest").string()));
    CHECK(lenv2.tensors.size() == lenv.tensors.size());

    fs::remove_all(dir);
}
