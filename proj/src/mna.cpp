#include "vwsim/mna.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace vwsim {

const char* sim_type_name(SimType t) { return t == SimType::voltage ? "voltage" : "phase"; }

UnknownIndex assign_unknowns(const FlatCircuit& fc, Diagnostics& diags) {
    UnknownIndex ix;
    std::unordered_set<std::string> seen_nodes, seen_branches;
    for (const auto& occ : fc.occurrences) {
        for (const auto& n : occ.nodes) {
            if (n == kGround) continue;
            if (seen_nodes.insert(n).second) ix.node_names.push_back(n);
        }
    }
    for (const auto& occ : fc.occurrences) {
        for (const auto& b : occ.branches) {
            if (!seen_branches.insert(b).second)
                diag_error(diags, "mna", "branch name '" + b + "' is used twice", occ.line);
            else if (seen_nodes.count(b))
                diag_error(diags, "mna", "'" + b + "' names both a node and a branch",
                           occ.line);
            else if (branch_is_unknown(occ.kind))
                ix.branch_names.push_back(b);
        }
    }
    ix.names = ix.node_names;
    ix.names.insert(ix.names.end(), ix.branch_names.begin(), ix.branch_names.end());
    for (std::size_t i = 0; i < ix.names.size(); ++i)
        ix.index.emplace(ix.names[i], static_cast<int>(i));
    return ix;
}

namespace {

constexpr double kPi = std::numbers::pi;

const double* const_value(const TermPtr& t) {
    return t && t->kind == Term::Kind::constant ? &t->value : nullptr;
}

// k * t with constant folding; keeps symbolic values symbolic.
TermPtr scaled(double k, const TermPtr& t) {
    if (const double* v = const_value(t)) return make_const(k * *v);
    return t_mul(t_num(k), t);
}

struct CouplingGroup {
    std::vector<std::size_t> members;            // occurrence indices of the inductors
    std::vector<std::vector<double>> L;          // inductance matrix
    std::vector<std::vector<double>> inv;        // its inverse (phase mode)
};

struct Builder {
    const FlatCircuit& fc;
    SimType mode;
    Diagnostics& diags;
    SymbolicSystem sys;
    std::vector<std::map<int, TermPtr>> acc;

    // Shared subterm spines; structural sharing makes the sweep evaluate each
    // of these once per step no matter how many stamps use them.
    TermPtr hn = t_var("$hn$");
    TermPtr k_hn;    // Phi0/(pi*hn): voltage per unit phase-difference change
    TermPtr pi_hn;   // pi*hn/Phi0: the inverse, phase change per unit voltage
    TermPtr two_hn;  // 2/hn

    explicit Builder(const FlatCircuit& f, SimType m, Diagnostics& d)
        : fc(f), mode(m), diags(d) {
        sys.sim_type = m;
        k_hn = t_div(t_num(kPhi0 / kPi), hn);
        pi_hn = t_mul(t_num(kPi / kPhi0), hn);
        two_hn = t_div(t_num(2.0), hn);
    }

    int col(const std::string& name) const { return sys.unknowns.of(name); }

    void add_A(int row, int c, TermPtr t) {
        if (row < 0 || c < 0 || !t) return;
        auto& cell = acc[row][c];
        cell = cell ? t_add(cell, std::move(t)) : std::move(t);
    }
    void add_b(int row, TermPtr t) {
        if (row < 0 || !t) return;
        auto& cell = sys.b[row];
        cell = cell ? t_add(cell, std::move(t)) : std::move(t);
    }
    // The branch current ib flows from node a through the device to node b.
    void kcl(const std::string& a, const std::string& b, int ib) {
        add_A(col(a), ib, t_num(1.0));
        add_A(col(b), ib, t_num(-1.0));
    }

    void error(const Occurrence& occ, const std::string& msg) {
        diag_error(diags, "mna", kind_name(occ.kind) + std::string(" '") + occ.name + "': " + msg,
                   occ.line);
    }

    // Requires a strictly positive constant (stamp denominators).
    bool positive_const(const Occurrence& occ, const TermPtr& t, const char* what,
                        double& out) {
        const double* v = const_value(t);
        if (!v) {
            error(occ, std::string(what) + " must be a constant here");
            return false;
        }
        if (!(*v > 0.0)) {
            error(occ, std::string(what) + " must be positive");
            return false;
        }
        out = *v;
        return true;
    }

    bool nonzero(const Occurrence& occ, const TermPtr& t, const char* what) {
        if (const double* v = const_value(t); v && *v == 0.0) {
            error(occ, std::string(what) + " of zero divides a companion stamp");
            return false;
        }
        return true;
    }

    TermPtr dv_now(const Occurrence& occ) { return t_sub(t_var(occ.nodes[0]), t_var(occ.nodes[1])); }
    TermPtr dv_prev(const Occurrence& occ) {
        return t_sub(t_prev(occ.nodes[0]), t_prev(occ.nodes[1]));
    }

    // v_n of a phase-mode device from its node phases and recorded drop:
    // v_n = Phi0/(pi*hn) * (dphi_n - dphi_{n-1}) - v_{n-1}. Used in aux updates,
    // where plain Vars are the new column and $prev$ the previous one.
    TermPtr vdrop_update(const Occurrence& occ, const std::string& vd) {
        return t_sub(t_mul(k_hn, t_sub(dv_now(occ), dv_prev(occ))), t_var(vd));
    }

    void stamp_resistor(const Occurrence& occ) {
        if (!nonzero(occ, occ.values[0], "resistance")) return;
        const TermPtr& R = occ.values[0];
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        if (mode == SimType::voltage) {
            TermPtr g = const_value(R) ? t_num(1.0 / *const_value(R)) : t_div(t_num(1.0), R);
            add_A(a, a, g);
            add_A(b, b, g);
            add_A(a, b, t_neg(g));
            add_A(b, a, t_neg(g));
        } else {
            std::string vd = "$vdrop-" + occ.name;
            TermPtr g = t_div(k_hn, R);
            add_A(a, a, g);
            add_A(b, b, g);
            add_A(a, b, t_neg(g));
            add_A(b, a, t_neg(g));
            // history: g*dphi_prev + v_prev/R flows out of a
            TermPtr h = t_add(t_mul(g, dv_now(occ)), t_div(t_var(vd), R));
            add_b(a, h);
            add_b(b, t_neg(h));
            sys.aux.push_back({vd, vdrop_update(occ, vd)});
        }
    }

    void stamp_capacitor(const Occurrence& occ) {
        const TermPtr& C = occ.values[0];
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        int ic = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], ic);
        add_A(ic, ic, t_num(1.0));
        TermPtr g2c = t_div(scaled(2.0, C), hn);  // 2C/hn
        if (mode == SimType::voltage) {
            // i_n - (2C/hn) v_n = -(2C/hn) v_{n-1} - i_{n-1}
            add_A(ic, a, t_neg(g2c));
            add_A(ic, b, g2c);
            add_b(ic, t_neg(t_add(t_mul(g2c, dv_now(occ)), t_var(occ.branches[0]))));
        } else {
            std::string vd = "$vdrop-" + occ.name;
            TermPtr gck = t_mul(g2c, k_hn);  // 2C/hn * Phi0/(pi*hn)
            add_A(ic, a, t_neg(gck));
            add_A(ic, b, gck);
            add_b(ic, t_neg(t_add(t_mul(gck, dv_now(occ)),
                                  t_add(t_mul(scaled(2.0, g2c), t_var(vd)),
                                        t_var(occ.branches[0])))));
            sys.aux.push_back({vd, vdrop_update(occ, vd)});
        }
    }

    void stamp_vsource(const Occurrence& occ) {
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        int iv = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], iv);
        if (mode == SimType::voltage) {
            add_A(iv, a, t_num(1.0));
            add_A(iv, b, t_num(-1.0));
            add_b(iv, occ.values[0]);
        } else {
            // Trapezoidal inversion again: the imposed drop needs its own
            // history row, since the source value is not otherwise recorded.
            std::string sv = "$src-" + occ.name;
            add_A(iv, a, k_hn);
            add_A(iv, b, t_neg(k_hn));
            add_b(iv, t_add(occ.values[0],
                            t_add(t_var(sv), t_mul(k_hn, dv_now(occ)))));
            sys.aux.push_back({sv, occ.values[0]});
        }
    }

    void stamp_isource(const Occurrence& occ) {
        int ii = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], ii);
        add_A(ii, ii, t_num(1.0));
        add_b(ii, occ.values[0]);
    }

    void stamp_psource(const Occurrence& occ) {
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        int ip = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], ip);
        if (mode == SimType::phase) {
            add_A(ip, a, t_num(1.0));
            add_A(ip, b, t_num(-1.0));
            add_b(ip, occ.values[0]);
        } else {
            // Impose the trapezoidally accumulated phase across the source.
            std::string ph = "$phase-" + occ.name;
            add_A(ip, a, pi_hn);
            add_A(ip, b, t_neg(pi_hn));
            add_b(ip, t_sub(occ.values[0],
                            t_add(t_var(ph), t_mul(pi_hn, dv_now(occ)))));
            sys.aux.push_back({ph, t_add(t_var(ph),
                                         t_mul(pi_hn, t_add(dv_now(occ), dv_prev(occ))))});
        }
    }

    void stamp_jj(const Occurrence& occ) {
        const TermPtr& Ic = occ.values[0];
        const TermPtr& R = occ.values[1];
        const TermPtr& C = occ.values[2];
        if (!nonzero(occ, R, "shunt resistance")) return;
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        std::string ph = "$phase-" + occ.name;
        std::string dvdt = "$dvdt-" + occ.name;
        TermPtr g2c = t_div(scaled(2.0, C), hn);

        if (mode == SimType::voltage) {
            // Supercurrent is explicit: phase extrapolated from the last two
            // recorded voltage columns via the Josephson relation.
            TermPtr phihat =
                t_add(t_var(ph),
                      t_mul(pi_hn, t_sub(scaled(3.0, dv_now(occ)), dv_prev(occ))));
            TermPtr is = t_mul(Ic, make_app(Fn::sin, {phihat}));
            TermPtr g = const_value(R) ? t_num(1.0 / *const_value(R)) : t_div(t_num(1.0), R);
            TermPtr geq = t_add(g, g2c);
            add_A(a, a, geq);
            add_A(b, b, geq);
            add_A(a, b, t_neg(geq));
            add_A(b, a, t_neg(geq));
            TermPtr h = t_add(t_neg(is),
                              t_add(t_mul(g2c, dv_now(occ)), t_mul(C, t_var(dvdt))));
            add_b(a, h);
            add_b(b, t_neg(h));
            sys.aux.push_back({ph, t_add(t_var(ph),
                                         t_mul(pi_hn, t_add(dv_now(occ), dv_prev(occ))))});
            sys.aux.push_back(
                {dvdt, t_sub(t_mul(two_hn, t_sub(dv_now(occ), dv_prev(occ))), t_var(dvdt))});
            sys.jj_watch.push_back({occ.name, occ.nodes[0], occ.nodes[1], ph});
        } else {
            std::string vd = "$vdrop-" + occ.name;
            // Phase difference extrapolated linearly in time; the guard keeps
            // the first step (no previous hn) at the last known difference.
            TermPtr dphi = dv_now(occ);
            TermPtr extrap =
                t_add(dphi, t_mul(t_div(hn, t_prev("$hn$")), t_sub(dphi, dv_prev(occ))));
            TermPtr phihat = t_if(t_less(t_num(0.0), t_prev("$hn$")), extrap, dphi);
            TermPtr is = t_mul(Ic, make_app(Fn::sin, {phihat}));
            TermPtr gr = t_div(k_hn, R);
            TermPtr gc = t_mul(g2c, k_hn);
            TermPtr geq = t_add(gr, gc);
            add_A(a, a, geq);
            add_A(b, b, geq);
            add_A(a, b, t_neg(geq));
            add_A(b, a, t_neg(geq));
            TermPtr h = t_add(t_mul(geq, dphi),
                              t_add(t_div(t_var(vd), R),
                                    t_add(t_mul(scaled(2.0, g2c), t_var(vd)),
                                          t_mul(C, t_var(dvdt)))));
            add_b(a, t_sub(h, is));
            add_b(b, t_neg(t_sub(h, is)));
            sys.aux.push_back({vd, vdrop_update(occ, vd)});
            TermPtr vn = t_sub(t_mul(k_hn, t_sub(dv_now(occ), dv_prev(occ))), t_var(vd));
            sys.aux.push_back(
                {dvdt, t_sub(t_mul(two_hn, t_sub(vn, t_var(vd))), t_var(dvdt))});
            sys.jj_watch.push_back({occ.name, occ.nodes[0], occ.nodes[1], ""});
        }
    }

    void stamp_tline(const Occurrence& occ) {
        const TermPtr& Z0 = occ.values[0];
        const TermPtr& TD = occ.values[1];
        double z0v = 0;
        if (!positive_const(occ, Z0, "impedance", z0v)) return;
        if (!TD || TD->kind != Term::Kind::constant || !TD->exact) {
            error(occ, "delay must be an exact numeric constant");
            return;
        }
        Rational delay = *TD->exact;
        if (!(Rational(0) < delay)) {
            error(occ, "delay must be positive");
            return;
        }
        sys.delays.emplace_back(occ.name, delay);

        const std::string &n0 = occ.nodes[0], &n1 = occ.nodes[1];
        const std::string &n2 = occ.nodes[2], &n3 = occ.nodes[3];
        const std::string &ba = occ.branches[0], &bb = occ.branches[1];
        int ia = col(ba), ib = col(bb);
        kcl(n0, n1, ia);
        kcl(n2, n3, ib);
        TermPtr z = make_const(z0v);

        if (mode == SimType::voltage) {
            // Method of characteristics: each port is Z0 in series with the
            // far port's delayed forward wave.
            add_A(ia, col(n0), t_num(1.0));
            add_A(ia, col(n1), t_num(-1.0));
            add_A(ia, ia, t_num(-z0v));
            add_b(ia, t_add(t_sub(t_back(n2, delay), t_back(n3, delay)),
                            t_mul(z, t_back(bb, delay))));
            add_A(ib, col(n2), t_num(1.0));
            add_A(ib, col(n3), t_num(-1.0));
            add_A(ib, ib, t_num(-z0v));
            add_b(ib, t_add(t_sub(t_back(n0, delay), t_back(n1, delay)),
                            t_mul(z, t_back(ba, delay))));
        } else {
            std::string vda = "$vdrop-" + occ.name + "-a";
            std::string vdb = "$vdrop-" + occ.name + "-b";
            TermPtr dpa = t_sub(t_var(n0), t_var(n1));
            TermPtr dpb = t_sub(t_var(n2), t_var(n3));
            add_A(ia, col(n0), k_hn);
            add_A(ia, col(n1), t_neg(k_hn));
            add_A(ia, ia, t_num(-z0v));
            add_b(ia, t_add(t_add(t_back(vdb, delay), t_mul(z, t_back(bb, delay))),
                            t_add(t_mul(k_hn, dpa), t_var(vda))));
            add_A(ib, col(n2), k_hn);
            add_A(ib, col(n3), t_neg(k_hn));
            add_A(ib, ib, t_num(-z0v));
            add_b(ib, t_add(t_add(t_back(vda, delay), t_mul(z, t_back(ba, delay))),
                            t_add(t_mul(k_hn, dpb), t_var(vdb))));
            Occurrence pa = occ;  // node views of the two ports for the updates
            pa.nodes = {n0, n1};
            Occurrence pb = occ;
            pb.nodes = {n2, n3};
            sys.aux.push_back({vda, vdrop_update(pa, vda)});
            sys.aux.push_back({vdb, vdrop_update(pb, vdb)});
        }
    }

    void stamp_inductor_plain(const Occurrence& occ) {
        if (!nonzero(occ, occ.values[0], "inductance")) return;
        const TermPtr& L = occ.values[0];
        int a = col(occ.nodes[0]), b = col(occ.nodes[1]);
        int il = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], il);
        add_A(il, il, t_num(1.0));
        if (mode == SimType::voltage) {
            // i_n = i_{n-1} + (hn/2L)(v_n + v_{n-1})
            TermPtr gh = t_div(hn, scaled(2.0, L));
            add_A(il, a, t_neg(gh));
            add_A(il, b, gh);
            add_b(il, t_add(t_var(occ.branches[0]), t_mul(gh, dv_now(occ))));
        } else {
            // Superconducting branch relation, exact: i = Phi0/(2 pi L) * dphi
            TermPtr g = const_value(L) ? t_num(kPhi0 / (2 * kPi * *const_value(L)))
                                       : t_div(t_num(kPhi0 / (2 * kPi)), L);
            add_A(il, a, t_neg(g));
            add_A(il, b, g);
        }
    }

    void stamp_inductor_coupled(const Occurrence& occ, const CouplingGroup& grp,
                                std::size_t slot) {
        int il = col(occ.branches[0]);
        kcl(occ.nodes[0], occ.nodes[1], il);
        if (mode == SimType::voltage) {
            // Row scaled by L: sum_j L[slot][j] (i_j,n - i_j,n-1) = (hn/2)(v_n + v_n-1)
            TermPtr hist;
            for (std::size_t j = 0; j < grp.members.size(); ++j) {
                double lij = grp.L[slot][j];
                if (lij == 0.0) continue;
                const Occurrence& other = fc.occurrences[grp.members[j]];
                add_A(il, col(other.branches[0]), t_num(lij));
                hist = t_add(std::move(hist), scaled(lij, t_var(other.branches[0])));
            }
            TermPtr half_hn = scaled(0.5, hn);
            add_A(il, col(occ.nodes[0]), t_neg(half_hn));
            add_A(il, col(occ.nodes[1]), half_hn);
            add_b(il, t_add(std::move(hist), t_mul(half_hn, dv_now(occ))));
        } else {
            // i = Phi0/(2 pi) * Linv * dphi, exact per group
            add_A(il, il, t_num(1.0));
            for (std::size_t j = 0; j < grp.members.size(); ++j) {
                double g = kPhi0 / (2 * kPi) * grp.inv[slot][j];
                if (g == 0.0) continue;
                const Occurrence& other = fc.occurrences[grp.members[j]];
                add_A(il, col(other.nodes[0]), t_num(-g));
                add_A(il, col(other.nodes[1]), t_num(g));
            }
        }
    }
};

// Cholesky-based inverse; fails (returns false) unless symmetric positive
// definite, which is exactly physical realizability of a coupling group.
bool invert_spd(std::vector<std::vector<double>>& m, std::vector<std::vector<double>>& inv) {
    std::size_t n = m.size();
    std::vector<std::vector<double>> chol(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= chol[i][k] * chol[j][k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                chol[i][i] = std::sqrt(s);
            } else {
                chol[i][j] = s / chol[j][j];
            }
        }
    }
    inv.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t rhs = 0; rhs < n; ++rhs) {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rhs == i ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= chol[i][k] * y[k];
            y[i] = s / chol[i][i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= chol[k][i] * inv[k][rhs];
            inv[i][rhs] = s / chol[i][i];
        }
    }
    return true;
}

}  // namespace

SymbolicSystem build_system(const FlatCircuit& fc, SimType sim_type, Diagnostics& diags) {
    Builder bd(fc, sim_type, diags);
    bd.sys.unknowns = assign_unknowns(fc, diags);
    bd.sys.ground_referenced = fc.nodes.count(kGround) != 0;
    std::size_t n = bd.sys.unknowns.size();
    bd.acc.resize(n);
    bd.sys.A.resize(n);
    bd.sys.b.assign(n, nullptr);

    // Mutual couplings tie inductors into groups with a shared L matrix.
    std::unordered_map<std::string, std::size_t> inductor_at;
    for (std::size_t i = 0; i < fc.occurrences.size(); ++i)
        if (fc.occurrences[i].kind == DeviceKind::inductor)
            inductor_at.emplace(fc.occurrences[i].name, i);

    std::unordered_map<std::string, std::size_t> group_of;  // inductor name -> group id
    std::vector<std::vector<std::string>> group_members;
    auto group_id = [&](const std::string& name) {
        auto it = group_of.find(name);
        if (it != group_of.end()) return it->second;
        std::size_t id = group_members.size();
        group_members.push_back({name});
        group_of.emplace(name, id);
        return id;
    };
    struct Pair {
        std::string l1, l2;
        double k;
    };
    std::vector<Pair> pairs;
    for (const auto& occ : fc.occurrences) {
        if (occ.kind != DeviceKind::mutual) continue;
        auto bad = [&](const std::string& msg) { bd.error(occ, msg); };
        const TermPtr &v0 = occ.values[0], &v1 = occ.values[1], &v2 = occ.values[2];
        if (!v0 || !v1 || v0->kind != Term::Kind::var || v1->kind != Term::Kind::var) {
            bad("must name two inductors");
            continue;
        }
        if (v0->name == v1->name) {
            bad("couples inductor '" + v0->name + "' to itself");
            continue;
        }
        if (!inductor_at.count(v0->name) || !inductor_at.count(v1->name)) {
            bad("names a missing inductor");
            continue;
        }
        const double* k = const_value(v2);
        if (!k) {
            bad("coupling coefficient must be a constant");
            continue;
        }
        if (!(std::abs(*k) < 1.0)) {
            bad("coupling coefficient magnitude must be below 1");
            continue;
        }
        std::size_t g1 = group_id(v0->name), g2 = group_id(v1->name);
        if (g1 != g2) {  // merge the smaller-id group away deterministically
            if (g2 < g1) std::swap(g1, g2);
            for (const auto& m : group_members[g2]) {
                group_of[m] = g1;
                group_members[g1].push_back(m);
            }
            group_members[g2].clear();
        }
        pairs.push_back({v0->name, v1->name, *k});
    }

    // Assemble one CouplingGroup per connected set, members in occurrence order.
    std::unordered_map<std::string, std::pair<const CouplingGroup*, std::size_t>> coupled;
    std::vector<CouplingGroup> groups;
    groups.reserve(group_members.size());
    for (auto& members : group_members) {
        if (members.empty()) continue;
        CouplingGroup grp;
        for (const auto& name : members) grp.members.push_back(inductor_at[name]);
        std::sort(grp.members.begin(), grp.members.end());
        std::unordered_map<std::string, std::size_t> slot;
        bool ok = true;
        grp.L.assign(grp.members.size(), std::vector<double>(grp.members.size(), 0.0));
        for (std::size_t s = 0; s < grp.members.size(); ++s) {
            const Occurrence& ind = fc.occurrences[grp.members[s]];
            slot.emplace(ind.name, s);
            const double* lv = const_value(ind.values[0]);
            if (!lv || !(*lv > 0.0)) {
                bd.error(ind, "coupled inductance must be a positive constant");
                ok = false;
                break;
            }
            grp.L[s][s] = *lv;
        }
        if (!ok) continue;
        for (const auto& p : pairs) {
            if (!slot.count(p.l1) || !slot.count(p.l2)) continue;
            std::size_t s1 = slot[p.l1], s2 = slot[p.l2];
            double m = p.k * std::sqrt(grp.L[s1][s1] * grp.L[s2][s2]);
            if (grp.L[s1][s2] != 0.0) {
                diag_error(diags, "mna",
                           "inductors '" + p.l1 + "' and '" + p.l2 + "' are coupled twice");
                ok = false;
                break;
            }
            grp.L[s1][s2] = grp.L[s2][s1] = m;
        }
        if (!ok) continue;
        auto lcopy = grp.L;
        if (!invert_spd(lcopy, grp.inv)) {
            const Occurrence& first = fc.occurrences[grp.members.front()];
            diag_error(diags, "mna",
                       "coupling group around '" + first.name +
                           "' is not positive definite (couplings too strong)",
                       first.line);
            continue;
        }
        groups.push_back(std::move(grp));
        for (std::size_t s = 0; s < groups.back().members.size(); ++s)
            coupled[fc.occurrences[groups.back().members[s]].name] = {&groups.back(), s};
    }

    for (const auto& occ : fc.occurrences) {
        for (const auto& v : occ.values) {
            if (!v) {
                bd.error(occ, "has a missing value");
                return std::move(bd.sys);
            }
        }
        switch (occ.kind) {
            case DeviceKind::resistor: bd.stamp_resistor(occ); break;
            case DeviceKind::capacitor: bd.stamp_capacitor(occ); break;
            case DeviceKind::inductor:
                if (auto it = coupled.find(occ.name); it != coupled.end())
                    bd.stamp_inductor_coupled(occ, *it->second.first, it->second.second);
                else
                    bd.stamp_inductor_plain(occ);
                break;
            case DeviceKind::jj: bd.stamp_jj(occ); break;
            case DeviceKind::tline: bd.stamp_tline(occ); break;
            case DeviceKind::mutual: break;
            case DeviceKind::vsource: bd.stamp_vsource(occ); break;
            case DeviceKind::isource: bd.stamp_isource(occ); break;
            case DeviceKind::psource: bd.stamp_psource(occ); break;
        }
    }

    for (std::size_t r = 0; r < n; ++r) {
        auto& row = bd.sys.A[r];
        row.reserve(bd.acc[r].size());
        for (auto& [c, t] : bd.acc[r]) row.emplace_back(c, std::move(t));
    }
    return std::move(bd.sys);
}

}  // namespace vwsim
