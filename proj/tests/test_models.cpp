#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtn/ed.hpp"
#include "dtn/models.hpp"
#include "model_oracles.hpp"
#include "oracles.hpp"

using namespace dtn;

namespace {

template <class T>
double hermiticity_defect(const Tensor<T>& H) {
    double worst = 0;
    for (index_t i = 0; i < H.dims[0]; ++i)
        for (index_t j = 0; j < H.dims[1]; ++j)
            worst = std::max(worst, std::abs(H(i, j) - conj_if(H(j, i), true)));
    return worst;
}

} // namespace

TEST_CASE("spin operator algebra") {
    auto s = spin_ops();

    // S+- = Sx +- i Sy exactly
    for (index_t i = 0; i < 2; ++i)
        for (index_t j = 0; j < 2; ++j) {
            CHECK(cplx(s.Sp(i, j), 0) == cplx(s.Sx(i, j), 0) + cplx(0, 1) * s.Sy(i, j));
            CHECK(cplx(s.Sm(i, j), 0) == cplx(s.Sx(i, j), 0) - cplx(0, 1) * s.Sy(i, j));
        }

    // [Sx, Sy] = i Sz and cyclic
    auto sxc = tensor_cast<cplx>(s.Sx);
    auto szc = tensor_cast<cplx>(s.Sz);
    auto comm_xy = add(matmul(sxc, s.Sy), matmul(s.Sy, sxc), cplx(-1));
    for (index_t i = 0; i < 2; ++i)
        for (index_t j = 0; j < 2; ++j) CHECK(comm_xy(i, j) == cplx(0, 1) * szc(i, j));
    auto comm_yz = add(matmul(s.Sy, szc), matmul(szc, s.Sy), cplx(-1));
    for (index_t i = 0; i < 2; ++i)
        for (index_t j = 0; j < 2; ++j) CHECK(comm_yz(i, j) == cplx(0, 1) * sxc(i, j));

    // [Sz, S+-] = +- S+-
    auto zp = add(matmul(s.Sz, s.Sp), matmul(s.Sp, s.Sz), -1.0);
    auto zm = add(matmul(s.Sz, s.Sm), matmul(s.Sm, s.Sz), -1.0);
    CHECK(oracle::max_abs_diff(zp, s.Sp) == 0.0);
    CHECK(oracle::max_abs_diff(zm, scaled(s.Sm, -1.0)) == 0.0);

    // half-spin convention
    CHECK(s.Sz(0, 0) == 0.5);
    CHECK(s.Sz(1, 1) == -0.5);
}

TEST_CASE("fermion operator identities") {
    auto f = fermion_ops();

    // explicit matrix entries
    CHECK(f.Cupdag(1, 0) == 1.0);
    CHECK(f.Cupdag(3, 2) == 1.0);
    CHECK(f.Cdndag(2, 0) == 1.0);
    CHECK(f.Cdndag(3, 1) == -1.0);
    CHECK(f.F(0, 0) == 1.0);
    CHECK(f.F(1, 1) == -1.0);
    CHECK(f.F(2, 2) == -1.0);
    CHECK(f.F(3, 3) == 1.0);

    // F^2 = Id
    CHECK(oracle::max_abs_diff(matmul(f.F, f.F), f.Id) == 0.0);

    // single-site anticommutators {c, c^dag} = Id; (c^dag)^2 = 0
    for (const auto* pair : {&f.Cup, &f.Cdn}) {
        const auto& c = *pair;
        auto cd = dagger(c);
        auto anti = add(matmul(c, cd), matmul(cd, c));
        CHECK(oracle::max_abs_diff(anti, f.Id) == 0.0);
        auto sq = matmul(cd, cd);
        CHECK(norm(sq) == 0.0);
    }
    // cross-species anticommutators vanish on one site with the sign convention
    auto cross = add(matmul(f.Cupdag, f.Cdndag), matmul(f.Cdndag, f.Cupdag));
    CHECK(norm(cross) == 0.0);

    // F anticommutes with every single-fermion operator
    for (const auto* op : {&f.Cup, &f.Cdn, &f.Cupdag, &f.Cdndag}) {
        auto fc = matmul(f.F, *op);
        auto cf = matmul(*op, f.F);
        CHECK(oracle::max_abs_diff(fc, scaled(cf, -1.0)) == 0.0);
    }

    // number operators
    CHECK(f.Nup(1, 1) == 1.0);
    CHECK(f.Nup(3, 3) == 1.0);
    CHECK(f.Ndn(2, 2) == 1.0);
    CHECK(f.Ndn(3, 3) == 1.0);
}

TEST_CASE("heisenberg_mpo equals the kron oracle") {
    for (int n : {2, 3, 5, 8}) {
        auto H = full_h(heisenberg_mpo(1.0, n));
        auto K = oracle::heisenberg_kron(1.0, n);
        CHECK(oracle::max_abs_diff(H, K) < 1e-12);
        CHECK(hermiticity_defect(H) < 1e-14);
    }
    // J scales linearly; J=0 gives the zero matrix
    auto H0 = full_h(heisenberg_mpo(0.0, 3));
    CHECK(norm(H0) == 0.0);
    auto H2 = full_h(heisenberg_mpo(-2.5, 4));
    auto K2 = oracle::heisenberg_kron(-2.5, 4);
    CHECK(oracle::max_abs_diff(H2, K2) < 1e-12);
}

TEST_CASE("tfim_mpo equals the kron oracle") {
    for (int n : {2, 3, 6, 8}) {
        for (double g : {0.0, 0.25, 0.5, 2.0}) {
            auto H = full_h(tfim_mpo(g, n));
            auto K = oracle::tfim_kron(g, n);
            CHECK(oracle::max_abs_diff(H, K) < 1e-12);
            CHECK(hermiticity_defect(H) < 1e-14);
        }
    }
    // classical limit: all-up energy (N-1)/4
    auto vac = uniform_product_state<double>(2, 6);
    auto vec = full_psi(vac);
    auto H = full_h(tfim_mpo(0.0, 6));
    auto hv = contract(H, {1}, vec, {0});
    CHECK(dot(vec, hv) == doctest::Approx(5.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("hubbard_mpo equals the Jordan-Wigner kron oracle") {
    for (int n : {2, 3, 4}) {
        auto H = full_h(hubbard_mpo(1.0, 4.0, -2.0, n));
        auto K = oracle::hubbard_kron(1.0, 4.0, -2.0, n);
        CHECK(oracle::max_abs_diff(H, K) < 1e-12);
        CHECK(hermiticity_defect(H) < 1e-14);
    }

    // atomic limit: t=0 leaves a diagonal matrix with mu*n + U*nup*ndn sums
    auto Ha = full_h(hubbard_mpo(0.0, 4.0, -2.0, 2));
    for (index_t i = 0; i < 16; ++i)
        for (index_t j = 0; j < 16; ++j)
            if (i != j) CHECK(Ha(i, j) == 0.0);
    // |updn, 0> (site0 doubly occupied): mu*2 + U = 0 for U=4, mu=-2
    CHECK(Ha(index_t{3}, index_t{3}) == doctest::Approx(0.0));
    // |up, up>: flat = 1 + 4*1 = 5; energy 2*mu = -4
    CHECK(Ha(index_t{5}, index_t{5}) == doctest::Approx(-4.0));

    // N=2, U=0, mu=0: spectrum equals two decoupled single-species hopping chains
    auto Hf = full_h(hubbard_mpo(1.0, 0.0, 0.0, 2));
    auto ef = eigen(Hf, {{0}, {1}});
    // per species the 2-site hopping t(c^dag_1 c_2 + h.c.) has many-body
    // energies {0, +t, -t, 0}; combined spectrum is all pairwise sums
    std::vector<double> single{0.0, 1.0, -1.0, 0.0};
    std::vector<double> want;
    for (double a : single)
        for (double b : single) want.push_back(a + b);
    std::sort(want.rbegin(), want.rend());
    for (index_t i = 0; i < 16; ++i) CHECK(ef.D(i, i).real() == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("heisenberg2d_mpo equals the kron oracle on small lattices") {
    struct Case {
        int lx, ly;
    };
    for (auto c : {Case{2, 2}, Case{3, 2}, Case{2, 3}, Case{4, 2}, Case{2, 4}, Case{3, 3}}) {
        auto H = full_h(heisenberg2d_mpo(1.0, c.lx, c.ly));
        auto K = oracle::heisenberg2d_kron(1.0, c.lx, c.ly);
        CHECK(oracle::max_abs_diff(H, K) < 1e-12);
        CHECK(hermiticity_defect(H) < 1e-14);
    }

    // Ly=1 reduces to the chain builder structure (link dim 5)
    auto flat = heisenberg2d_mpo(1.0, 5, 1);
    CHECK(flat.site(2).dims == std::vector<index_t>{5, 2, 2, 5});
    auto H = full_h(flat);
    auto K = oracle::heisenberg_kron(1.0, 5);
    CHECK(oracle::max_abs_diff(H, K) < 1e-12);

    // bulk link dimension 14 on the 4x4 lattice
    auto big = heisenberg2d_mpo(1.0, 4, 4);
    CHECK(big.site(8).dims[0] == 14);
}

TEST_CASE("pinning fields enter the lower-left corner") {
    auto s = spin_ops();

    ModelSpec spec;
    spec.kind = ModelSpec::Kind::heisenberg;
    spec.J = 1.0;
    spec.N = 2;
    const double B = 0.7;
    spec = add_pinning(spec, {{0, tensor_cast<cplx>(s.Sz), B}});

    auto Hp = full_h(build_mpo<double>(spec));
    auto H = oracle::heisenberg_kron(1.0, 2);
    oracle::add_term(H, oracle::one_site(s.Sz, 0, 2, 2), B);
    CHECK(oracle::max_abs_diff(Hp, H) < 1e-12);

    // zero-coefficient pin leaves the MPO unchanged
    ModelSpec spec0 = spec;
    spec0.pins.clear();
    spec0 = add_pinning(spec0, {{0, tensor_cast<cplx>(s.Sz), 0.0}});
    auto H0 = full_h(build_mpo<double>(spec0));
    auto Hplain = full_h(heisenberg_mpo(1.0, 2));
    CHECK(oracle::max_abs_diff(H0, Hplain) == 0.0);

    // +-B Sy pins on opposite edges keep the Hamiltonian Hermitian (complex entries)
    ModelSpec spec2;
    spec2.kind = ModelSpec::Kind::heisenberg;
    spec2.N = 4;
    spec2 = add_pinning(spec2, {{0, s.Sy, 3.0}, {3, s.Sy, -3.0}});
    auto Hy = full_h(build_mpo<cplx>(spec2));
    CHECK(hermiticity_defect(Hy) < 1e-14);
    bool has_imag = false;
    for (const auto& x : Hy.data) has_imag |= x.imag() != 0.0;
    CHECK(has_imag);

    // the double builder rejects complex pins
    CHECK_THROWS_AS(build_mpo<double>(spec2), value_error);
    CHECK_THROWS_AS(add_pinning(spec2, {{9, s.Sy, 1.0}}), value_error);
}
