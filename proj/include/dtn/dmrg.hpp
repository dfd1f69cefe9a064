#pragma once

// Two-site DMRG ground-state sweeps. Each step contracts the two-site block,
// improves it with a few Lanczos iterations against the cached environments,
// splits it back with a truncated SVD (absorbing the weight matrix in the
// sweep direction), and pushes the environment boundary one site along. One
// sweep returns the orthogonality center to site 0. The engine is generic
// over the site store, so disk-backed chains run through the same code.

#include <cmath>
#include <limits>
#include <vector>

#include "dtn/decomp.hpp"
#include "dtn/env.hpp"
#include "dtn/error.hpp"
#include "dtn/lanczos.hpp"
#include "dtn/measure.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

struct ScheduleEntry {
    index_t m = 0;
    double cutoff = 0.0;
};

struct DmrgParams {
    int sweeps = 10;
    TruncationSpec spec;
    int lanczos_iters = 2;
    bool cvgE = true;            // converge on energy; false = entanglement at svn_bond
    double tol = 1e-8;
    std::optional<double> goal;  // optional energy target; stop once reached
    int svn_bond = -1;           // -1 = center bond
    std::vector<ScheduleEntry> schedule; // per-sweep overrides; tail inherits the last entry
};

struct DmrgReport {
    std::vector<double> energy;         // sweep-end energies
    std::vector<double> max_truncerr;   // worst split per sweep
    std::vector<double> svn_at_bond;    // entanglement at the monitored bond
    std::vector<index_t> final_bond_dims;
    int sweeps_run = 0;
    bool converged = false;
};

// ---------------------------------------------------------------------------
// store access: in-memory MPS directly, disk-backed stores by overload

template <class T>
const Tensor<T>& sget(const Mps<T>& s, int i) {
    return s.site(i);
}

template <class T>
void sset(Mps<T>& s, int i, Tensor<T> t) {
    s.site(i) = std::move(t);
}

// generic gauge move through the store interface
template <class Store>
void store_move_oc(Store& s, int target) {
    if (target < 0 || target >= s.size()) throw value_error("move_oc: site out of range");
    while (s.oc < target) {
        const int i = s.oc;
        auto f = qr(sget(s, i), {{0, 1}, {2}});
        sset(s, i, std::move(f.Q));
        sset(s, i + 1, contract(f.R, {1}, sget(s, i + 1), {0}));
        ++s.oc;
    }
    while (s.oc > target) {
        const int i = s.oc;
        auto f = lq(sget(s, i), {{0}, {1, 2}});
        sset(s, i, std::move(f.Q));
        sset(s, i - 1, contract(sget(s, i - 1), {2}, f.L, {0}));
        --s.oc;
    }
}

// ---------------------------------------------------------------------------
// the reduced two-site problem

template <class T>
struct TwoSiteProblem {
    const Tensor<T>* lenv; // (a', w, a)
    const Tensor<T>* w1;   // (w, s1', s1, w2)
    const Tensor<T>* w2;   // (w2, s2', s2, w3)
    const Tensor<T>* renv; // (b, w3, b')
};

// H_eff . v without materializing H_eff: left environment first, then the
// two MPO tensors, then the right environment.
template <class T>
Tensor<T> heff_apply(const TwoSiteProblem<T>& p, const Tensor<T>& v) {
    auto t = contract(*p.lenv, {2}, v, {0});      // (a', w, s1, s2, b)
    t = contract(t, {1, 2}, *p.w1, {0, 2});        // (a', s2, b, s1', w2)
    t = contract(t, {1, 4}, *p.w2, {2, 0});        // (a', b, s1', s2', w3)
    t = contract(t, {1, 4}, *p.renv, {0, 1});      // (a', s1', s2', b')
    return t;
}

namespace detail {

struct StepResult {
    double energy = std::numeric_limits<double>::quiet_NaN();
    double truncerr = 0.0;
    double svn = 0.0;
    index_t bond_dim = 0;
};

} // namespace detail

// One two-site update at sites (site, site+1). direction=+1 leaves the new
// center on site+1 and refreshes the left environment; direction=-1 mirrors.
// lanczos_iters = 0 degenerates to a pure gauge move (test hook).
template <class Store, class T = typename Store::scalar>
detail::StepResult dmrg_sweep_step(Store& psi, const Mpo<T>& mpo,
                                   Environment<T>& lenv, Environment<T>& renv, int site,
                                   int direction, const TruncationSpec& spec, int lanczos_iters) {
    const int i = site;
    detail::StepResult out;

    Tensor<T> aa = contract(sget(psi, i), {2}, sget(psi, i + 1), {0});
    TwoSiteProblem<T> prob{&lenv.at(i), &mpo.site(i), &mpo.site(i + 1), &renv.at(i + 1)};
    if (lanczos_iters > 0) {
        auto r = lanczos_ground([&](const Tensor<T>& v) { return heff_apply(prob, v); }, aa,
                                lanczos_iters);
        aa = std::move(r.vector);
        out.energy = r.energy;
    }

    auto f = svd(aa, {{0, 1}, {2, 3}}, spec);
    out.truncerr = f.truncerr;
    out.svn = entropy_from_singular_values(f.D);
    out.bond_dim = f.D.dims[0];

    if (direction >= 0) {
        auto dv = contract(f.D, {1}, f.Vdag, {0});
        lenv.at(i + 1) = env_update_left(lenv.at(i), f.U, {&mpo.site(i)}, f.U);
        sset(psi, i, std::move(f.U));
        sset(psi, i + 1, std::move(dv));
        psi.oc = i + 1;
    } else {
        auto ud = contract(f.U, {2}, f.D, {0});
        renv.at(i) = env_update_right(renv.at(i + 1), f.Vdag, {&mpo.site(i + 1)}, f.Vdag);
        sset(psi, i + 1, std::move(f.Vdag));
        sset(psi, i, std::move(ud));
        psi.oc = i;
    }
    return out;
}

// Full back-and-forth sweeps until the sweep budget or the convergence
// criterion is met. The MPS is mutated toward the ground state.
template <class Store, class T = typename Store::scalar>
DmrgReport dmrg(Store& psi, const Mpo<T>& mpo, const DmrgParams& params) {
    const int n = psi.size();
    if (n < 2) throw value_error("dmrg: at least two sites required");
    if (mpo.size() != n) throw shape_error("dmrg: mpo length mismatch");
    if (params.lanczos_iters < 1) throw value_error("dmrg: lanczos_iters must be >= 1");
    if (norm(sget(psi, psi.oc)) == 0.0) throw numeric_error("dmrg: zero-norm state");

    const int svn_bond = params.svn_bond >= 0 ? params.svn_bond : (n - 1) / 2;
    if (svn_bond < 0 || svn_bond >= n - 1) throw value_error("dmrg: svn bond out of range");

    store_move_oc(psi, 0);

    // environments, owned per bond: lenv.at(i) covers sites < i, renv.at(i) sites > i
    Environment<T> lenv, renv;
    lenv.tensors.assign(static_cast<index_t>(n), Tensor<T>{});
    renv.tensors.assign(static_cast<index_t>(n), Tensor<T>{});
    lenv.at(0) = detail::env_boundary<T>(1);
    renv.at(n - 1) = detail::env_boundary<T>(1);
    for (int i = n - 1; i > 0; --i) {
        const Tensor<T>& a = sget(psi, i);
        renv.at(i - 1) = env_update_right(renv.at(i), a, {&mpo.site(i)}, a);
    }

    DmrgReport report;
    double prev_energy = std::numeric_limits<double>::quiet_NaN();
    double prev_svn = std::numeric_limits<double>::quiet_NaN();

    for (int sweep = 0; sweep < params.sweeps; ++sweep) {
        TruncationSpec spec = params.spec;
        if (!params.schedule.empty()) {
            const auto& e = params.schedule[std::min<index_t>(static_cast<index_t>(sweep),
                                                              params.schedule.size() - 1)];
            spec.m = e.m;
            spec.cutoff = e.cutoff;
        }

        double energy = std::numeric_limits<double>::quiet_NaN();
        double max_err = 0.0;
        double svn = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            auto r = dmrg_sweep_step(psi, mpo, lenv, renv, i, +1, spec, params.lanczos_iters);
            energy = r.energy;
            max_err = std::max(max_err, r.truncerr);
            if (i == svn_bond) svn = r.svn;
        }
        for (int i = n - 2; i >= 0; --i) {
            auto r = dmrg_sweep_step(psi, mpo, lenv, renv, i, -1, spec, params.lanczos_iters);
            energy = r.energy;
            max_err = std::max(max_err, r.truncerr);
            if (i == svn_bond) svn = r.svn;
        }

        report.energy.push_back(energy);
        report.max_truncerr.push_back(max_err);
        report.svn_at_bond.push_back(svn);
        ++report.sweeps_run;

        bool stop = false;
        if (params.goal && energy <= *params.goal) stop = true;
        if (params.cvgE) {
            if (!std::isnan(prev_energy) && std::abs(energy - prev_energy) < params.tol) stop = true;
        } else {
            if (!std::isnan(prev_svn) && std::abs(svn - prev_svn) < params.tol) stop = true;
        }
        prev_energy = energy;
        prev_svn = svn;
        if (stop) {
            report.converged = true;
            break;
        }
    }

    report.final_bond_dims.resize(static_cast<index_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i)
        report.final_bond_dims[static_cast<index_t>(i)] = sget(psi, i).dims[2];
    return report;
}

} // namespace dtn
