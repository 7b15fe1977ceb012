#include "vwsim/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string_view>
#include <utility>

#include "vwsim/native.hpp"

namespace vwsim {

namespace {

constexpr double kPhaseJump = std::numbers::pi / 4.0;
constexpr int kMaxHalvings = 20;
constexpr int kCalmStepsToDouble = 8;

double interpolate(const std::vector<double>& row, const TimeLine& tl, const Rational& t) {
    if (t <= tl.times.front()) return row.front();
    if (t >= tl.times.back()) return row.back();
    std::size_t lo = 0, hi = tl.times.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (tl.times[mid] <= t) lo = mid;
        else hi = mid;
    }
    if (tl.times[lo] == t) return row[lo];
    double frac = ((t - tl.times[lo]) / (tl.times[lo + 1] - tl.times[lo])).to_double();
    return row[lo] + (row[lo + 1] - row[lo]) * frac;
}

// Pre-solve environment: a plain Var is the latest recorded column, $prev$ one
// column earlier. $time$/$hn$ denote the step being assembled (resolved off the
// context), so their $prev$ is the latest recorded column.
struct MainEnv final : EvalEnv {
    const SimulationRecord& rec;
    const TimeLine& tl;
    MainEnv(const SimulationRecord& r, const TimeLine& t) : rec(r), tl(t) {}

    std::optional<double> value(std::string_view name) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return rec.rows[row].back();
    }
    std::optional<double> prev_value(std::string_view name) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        if (name == "$time$" || name == "$hn$") return rec.rows[row].back();
        std::size_t n = rec.columns();
        return rec.rows[row][n >= 2 ? n - 2 : 0];
    }
    std::optional<double> value_at(std::string_view name, const Rational& t) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return interpolate(rec.rows[row], tl, t);
    }
};

// Post-solve environment for the aux updates: unknowns read from the pending
// solution, everything else as a plain Var and all $prev$ from the latest
// recorded column.
struct AuxEnv final : EvalEnv {
    const SimulationRecord& rec;
    const TimeLine& tl;
    const UnknownIndex& unknowns;
    const std::vector<double>& x;
    AuxEnv(const SimulationRecord& r, const TimeLine& t, const UnknownIndex& u,
           const std::vector<double>& xv)
        : rec(r), tl(t), unknowns(u), x(xv) {}

    std::optional<double> value(std::string_view name) const override {
        int u = unknowns.of(std::string(name));
        if (u >= 0) return x[u];
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return rec.rows[row].back();
    }
    std::optional<double> prev_value(std::string_view name) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return rec.rows[row].back();
    }
    std::optional<double> value_at(std::string_view name, const Rational& t) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return interpolate(rec.rows[row], tl, t);
    }
};

// Post-simulation view of one record column, for deriving branch currents.
struct ColEnv final : EvalEnv {
    const SimulationRecord& rec;
    const TimeLine& tl;
    std::size_t k = 0;
    ColEnv(const SimulationRecord& r, const TimeLine& t) : rec(r), tl(t) {}

    std::optional<double> value(std::string_view name) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return rec.rows[row][k];
    }
    std::optional<double> prev_value(std::string_view name) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return rec.rows[row][k >= 1 ? k - 1 : 0];
    }
    std::optional<double> value_at(std::string_view name, const Rational& t) const override {
        int row = rec.row_of(name);
        if (row < 0) return std::nullopt;
        return interpolate(rec.rows[row], tl, t);
    }
};

std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

bool parse_doubles(std::string_view s, std::size_t want, std::vector<double>& out) {
    out.clear();
    out.reserve(want);
    const char* p = s.data();
    const char* end = p + s.size();
    while (p < end) {
        while (p < end && *p == ' ') ++p;
        if (p == end) break;
        double v = 0;
        auto [np, ec] = std::from_chars(p, end, v);
        if (ec != std::errc()) return false;
        out.push_back(v);
        p = np;
    }
    return out.size() == want;
}

}  // namespace

Engine::Engine(FlatCircuit fc, const SimOptions& opt, Diagnostics& diags)
    : fc_(std::move(fc)), opt_(opt) {
    std::size_t mark = diags.size();
    if (opt_.step.sign() <= 0) diag_error(diags, "engine", "time step must be positive");
    if (opt_.stop < opt_.start) diag_error(diags, "engine", "stop time precedes start time");
    auto clean = [&] {
        for (std::size_t i = mark; i < diags.size(); ++i)
            if (diags[i].severity == Severity::error) return false;
        return true;
    };
    if (!clean()) return;

    sys_ = build_system(fc_, opt_.sim_type, diags);
    if (!clean()) return;

    for (const auto& [name, td] : sys_.delays)
        if (td < opt_.step)
            diag_warning(diags, "engine",
                         "transmission line '" + name + "' delay " + td.to_string() +
                             " is shorter than the time step " + opt_.step.to_string());

    index_system(diags);
    if (!clean()) return;

    tl_.times = {opt_.start};
    tl_.steps = {Rational(0)};
    for (std::size_t r = 0; r < rec_.rows.size(); ++r)
        rec_.rows[r].push_back(r == 0 ? opt_.start.to_double() : 0.0);

    hn_cur_ = opt_.step;
    depth_ = 0;
    ok_ = true;
}

void Engine::index_system(Diagnostics& diags) {
    n_ = static_cast<int>(sys_.unknowns.size());
    auto add = [&](const std::string& name) {
        int r = rec_.add_row(name);
        if (r < 0)
            diag_error(diags, "engine", "record name collision for '" + name + "'");
        return r;
    };
    add("$time$");
    add("$hn$");
    const UnknownIndex& ux = sys_.unknowns;
    std::size_t nn = ux.node_names.size();
    unknown_rows_.assign(n_, -1);
    for (std::size_t j = 0; j < ux.branch_names.size(); ++j)
        unknown_rows_[nn + j] = add(ux.branch_names[j]);
    if (sys_.ground_referenced) gnd_row_ = add(kGround);
    for (std::size_t j = 0; j < nn; ++j) unknown_rows_[j] = add(ux.node_names[j]);
    for (const auto& a : sys_.aux) aux_rows_.push_back(add(a.name));

    for (int r = 0; r < n_; ++r) {
        for (const auto& [c, term] : sys_.A[r]) {
            a_entries_.push_back({r, c, main_table_.add(term)});
            a_what_.push_back("A[" + ux.names[r] + ", " + ux.names[c] + "]");
        }
        b_slots_.push_back(sys_.b[r] ? main_table_.add(sys_.b[r]) : -1);
        b_what_.push_back("b[" + ux.names[r] + "]");
    }
    for (const auto& a : sys_.aux) aux_slots_.push_back(aux_table_.add(a.update));

    for (const auto& w : sys_.jj_watch) {
        WatchIdx wi;
        if (!w.phase_row.empty()) {
            for (std::size_t k = 0; k < sys_.aux.size(); ++k)
                if (sys_.aux[k].name == w.phase_row) {
                    wi.aux = static_cast<int>(k);
                    break;
                }
        } else {
            wi.ua = ux.of(w.node_a);
            wi.ub = ux.of(w.node_b);
            wi.row_a = rec_.row_of(w.node_a);
            wi.row_b = rec_.row_of(w.node_b);
        }
        watch_idx_.push_back(wi);
    }
}

bool Engine::finished() const {
    if (!ok_) return true;
    return opt_.stop <= tl_.times.back() + hn_cur_;
}

void Engine::run() {
    while (!finished()) step_once();
}

void Engine::step_once() {
    if (!ok_) throw SimError("engine is not runnable");
    if (finished()) throw SimError("simulation already reached the stop time");
    const Rational t = tl_.times.back();
    std::vector<double> avals(a_entries_.size());
    std::vector<double> b(n_, 0.0);
    std::vector<double> x;
    std::vector<double> temps(aux_slots_.size());

    for (int halvings = 0;; ++halvings) {
        const Rational hn = hn_cur_;
        const Rational t_next = t + hn;

        MainEnv menv(rec_, tl_);
        EvalCtx mctx{&menv, t_next, hn};
        main_table_.sweep(mctx);
        for (std::size_t i = 0; i < a_entries_.size(); ++i)
            avals[i] = main_table_.consume(a_entries_[i].slot, a_what_[i]);

        bool same = have_plan_;
        if (same)
            for (std::size_t i = 0; i < avals.size(); ++i)
                if (avals[i] != last_avals_[i]) {
                    same = false;
                    break;
                }
        if (!same) {
            SparseMatrix m;
            m.n = n_;
            m.rows.resize(n_);
            for (std::size_t i = 0; i < a_entries_.size(); ++i)
                if (avals[i] != 0.0)
                    m.rows[a_entries_[i].row].push_back({a_entries_[i].col, avals[i]});
            try {
                plan_ = factor(m);
            } catch (const SingularError& e) {
                throw SimError(std::string(e.what()) + " at t = " + t_next.to_string() +
                               ", unknown '" + sys_.unknowns.names[e.column] + "'");
            }
            have_plan_ = true;
            last_avals_ = avals;
            ++factor_count_;
        }

        for (int r = 0; r < n_; ++r)
            b[r] = b_slots_[r] >= 0 ? main_table_.consume(b_slots_[r], b_what_[r]) : 0.0;
        x = solve_with_plan(plan_, b);

        AuxEnv aenv(rec_, tl_, sys_.unknowns, x);
        EvalCtx actx{&aenv, t_next, hn};
        aux_table_.sweep(actx);
        for (std::size_t k = 0; k < aux_slots_.size(); ++k)
            temps[k] = aux_table_.consume(aux_slots_[k], sys_.aux[k].name);

        if (opt_.variable_step && !watch_idx_.empty()) {
            double jump = 0.0;
            for (const auto& wi : watch_idx_) {
                double d;
                if (wi.aux >= 0) {
                    d = temps[wi.aux] - rec_.rows[aux_rows_[wi.aux]].back();
                } else {
                    double now = (wi.ua >= 0 ? x[wi.ua] : 0.0) - (wi.ub >= 0 ? x[wi.ub] : 0.0);
                    double was = (wi.row_a >= 0 ? rec_.rows[wi.row_a].back() : 0.0) -
                                 (wi.row_b >= 0 ? rec_.rows[wi.row_b].back() : 0.0);
                    d = now - was;
                }
                jump = std::max(jump, std::fabs(d));
            }
            if (jump > kPhaseJump && halvings < kMaxHalvings && depth_ < kMaxHalvings) {
                hn_cur_ = hn_cur_ / Rational(2);
                ++depth_;
                calm_ = 0;
                continue;  // reject this step, retry shorter
            }
            if (jump > kPhaseJump) {
                calm_ = 0;
            } else if (++calm_ >= kCalmStepsToDouble && depth_ > 0) {
                hn_cur_ = hn_cur_ * Rational(2);
                --depth_;
                calm_ = 0;
            }
        }

        tl_.times.push_back(t_next);
        tl_.steps.push_back(hn);
        rec_.rows[0].push_back(t_next.to_double());
        rec_.rows[1].push_back(hn.to_double());
        for (int i = 0; i < n_; ++i) rec_.rows[unknown_rows_[i]].push_back(x[i]);
        if (gnd_row_ >= 0) rec_.rows[gnd_row_].push_back(0.0);
        for (std::size_t k = 0; k < temps.size(); ++k)
            rec_.rows[aux_rows_[k]].push_back(temps[k]);
        return;
    }
}

int Engine::row_for(const std::string& name) {
    int row = rec_.row_of(name);
    if (row >= 0) return row;
    std::string want = fold_name(name);
    for (const auto& occ : fc_.occurrences)
        if ((occ.kind == DeviceKind::resistor || occ.kind == DeviceKind::jj) &&
            !occ.branches.empty() && fold_name(occ.branches[0]) == want)
            return derive_current(occ);
    return -1;
}

int Engine::derive_current(const Occurrence& occ) {
    const std::size_t cols = rec_.columns();
    std::vector<double> series(cols, 0.0);
    ColEnv env(rec_, tl_);
    auto at = [&](const std::string& n, std::size_t k) {
        int r = rec_.row_of(n);
        return r < 0 ? 0.0 : rec_.rows[r][k];
    };
    const bool vmode = sys_.sim_type == SimType::voltage;
    for (std::size_t k = 0; k < cols; ++k) {
        env.k = k;
        EvalCtx ctx{&env, tl_.times[k], tl_.steps[k]};
        if (occ.kind == DeviceKind::resistor) {
            double r = vw_eval(occ.values[0], ctx);
            double v = vmode ? at(occ.nodes[0], k) - at(occ.nodes[1], k)
                             : at("$vdrop-" + occ.name, k);
            series[k] = v / r;
        } else {
            double ic = vw_eval(occ.values[0], ctx);
            double r = vw_eval(occ.values[1], ctx);
            double c = vw_eval(occ.values[2], ctx);
            double dvdt = at("$dvdt-" + occ.name, k);
            if (vmode) {
                double ph = at("$phase-" + occ.name, k);
                double v = at(occ.nodes[0], k) - at(occ.nodes[1], k);
                series[k] = ic * std::sin(ph) + v / r + c * dvdt;
            } else {
                double dphi = at(occ.nodes[0], k) - at(occ.nodes[1], k);
                double vd = at("$vdrop-" + occ.name, k);
                series[k] = ic * std::sin(dphi) + vd / r + c * dvdt;
            }
        }
    }
    int row = rec_.add_row(occ.branches[0]);
    if (row < 0) return -1;
    rec_.rows[row] = std::move(series);
    return row;
}

void Engine::save_state(std::ostream& os, bool shortp) const {
    os << "vwsim-state 1\n";
    os << "sim-type " << sim_type_name(opt_.sim_type) << "\n";
    os << "step " << opt_.step.to_string() << "\n";
    os << "stop " << opt_.stop.to_string() << "\n";
    os << "start " << opt_.start.to_string() << "\n";
    os << "varstep " << (opt_.variable_step ? 1 : 0) << "\n";
    os << "hn " << hn_cur_.to_string() << "\n";
    os << "calm " << calm_ << "\n";
    os << "precision " << (shortp ? "single" : "double") << "\n";

    Netlist nl;
    Module m;
    m.name = "main";
    for (const auto& occ : fc_.occurrences) m.items.emplace_back(occ);
    nl.modules.push_back(std::move(m));
    std::string text = print_native(nl);
    os << "circuit-lines " << std::count(text.begin(), text.end(), '\n') << "\n";
    os << text;

    os << "columns " << tl_.times.size() << "\n";
    os << "times";
    for (const auto& t : tl_.times) os << ' ' << t.to_string();
    os << "\nsteps";
    for (const auto& s : tl_.steps) os << ' ' << s.to_string();
    os << "\nrows " << rec_.names.size() << "\n";
    for (std::size_t r = 0; r < rec_.rows.size(); ++r) {
        os << rec_.names[r];
        for (double v : rec_.rows[r])
            os << ' ' << fmt_double(shortp ? static_cast<double>(static_cast<float>(v)) : v);
        os << "\n";
    }
    os << "end\n";
}

std::unique_ptr<Engine> Engine::load_state(std::istream& is, Diagnostics& diags) {
    std::size_t mark = diags.size();
    std::string line;
    auto bad = [&](const std::string& msg) {
        diag_error(diags, "state", msg);
        return std::unique_ptr<Engine>();
    };
    auto next_line = [&](const char* what) {
        if (!std::getline(is, line)) {
            diag_error(diags, "state", std::string("truncated state file, expected ") + what);
            return false;
        }
        return true;
    };
    auto keyed = [&](const char* key, std::string& out) {
        if (!next_line(key)) return false;
        std::string_view v(line);
        std::string_view k(key);
        if (v.size() <= k.size() || v.substr(0, k.size()) != k || v[k.size()] != ' ') {
            diag_error(diags, "state", std::string("expected '") + key + "' line");
            return false;
        }
        out = std::string(v.substr(k.size() + 1));
        return true;
    };

    if (!next_line("header")) return nullptr;
    if (line != "vwsim-state 1") return bad("not a version-1 state file");

    std::string sval;
    SimOptions opt;
    if (!keyed("sim-type", sval)) return nullptr;
    if (sval == "voltage") opt.sim_type = SimType::voltage;
    else if (sval == "phase") opt.sim_type = SimType::phase;
    else return bad("unknown sim-type '" + sval + "'");

    auto keyed_rat = [&](const char* key, Rational& out) {
        std::string v;
        if (!keyed(key, v)) return false;
        auto r = Rational::parse(v);
        if (!r) {
            diag_error(diags, "state", std::string("bad rational in '") + key + "' line");
            return false;
        }
        out = *r;
        return true;
    };
    Rational hn_cur;
    if (!keyed_rat("step", opt.step)) return nullptr;
    if (!keyed_rat("stop", opt.stop)) return nullptr;
    if (!keyed_rat("start", opt.start)) return nullptr;
    if (!keyed("varstep", sval)) return nullptr;
    opt.variable_step = sval == "1";
    if (!keyed_rat("hn", hn_cur)) return nullptr;
    if (!keyed("calm", sval)) return nullptr;
    int calm = std::atoi(sval.c_str());
    if (!keyed("precision", sval)) return nullptr;

    if (!keyed("circuit-lines", sval)) return nullptr;
    long nlines = std::atol(sval.c_str());
    if (nlines < 0) return bad("bad circuit-lines count");
    std::string text;
    for (long i = 0; i < nlines; ++i) {
        if (!next_line("circuit text")) return nullptr;
        text += line;
        text += '\n';
    }
    Netlist nl = parse_native(text, diags, "state");
    FlatCircuit fc = flatten(nl, "", '|', {}, diags);
    for (std::size_t i = mark; i < diags.size(); ++i)
        if (diags[i].severity == Severity::error) return nullptr;

    if (!keyed("columns", sval)) return nullptr;
    long cols = std::atol(sval.c_str());
    if (cols < 1) return bad("state file has no record columns");

    auto rat_series = [&](const char* key, std::vector<Rational>& out) {
        if (!next_line(key)) return false;
        std::string_view v(line);
        std::string_view k(key);
        if (v.substr(0, k.size()) != k) {
            diag_error(diags, "state", std::string("expected '") + key + "' line");
            return false;
        }
        v.remove_prefix(k.size());
        out.clear();
        while (!v.empty()) {
            while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
            if (v.empty()) break;
            std::size_t sp = v.find(' ');
            std::string_view tok = v.substr(0, sp);
            v.remove_prefix(tok.size());
            auto r = Rational::parse(tok);
            if (!r) {
                diag_error(diags, "state", std::string("bad rational in '") + key + "' series");
                return false;
            }
            out.push_back(*r);
        }
        if (out.size() != static_cast<std::size_t>(cols)) {
            diag_error(diags, "state", std::string("'") + key + "' series length mismatch");
            return false;
        }
        return true;
    };
    TimeLine tl;
    if (!rat_series("times", tl.times)) return nullptr;
    if (!rat_series("steps", tl.steps)) return nullptr;
    for (std::size_t k = 1; k < tl.times.size(); ++k)
        if (!(tl.times[k - 1] < tl.times[k])) return bad("times are not increasing");

    auto eng = std::make_unique<Engine>(std::move(fc), opt, diags);
    if (!eng->runnable()) return nullptr;

    if (!keyed("rows", sval)) return nullptr;
    long nrows = std::atol(sval.c_str());
    std::vector<char> filled(eng->rec_.rows.size(), 0);
    std::vector<double> vals;
    for (long i = 0; i < nrows; ++i) {
        if (!next_line("record row")) return nullptr;
        std::string_view v(line);
        std::size_t sp = v.find(' ');
        if (sp == std::string_view::npos) return bad("malformed record row");
        std::string name(v.substr(0, sp));
        if (!parse_doubles(v.substr(sp), static_cast<std::size_t>(cols), vals))
            return bad("bad value series for record row '" + name + "'");
        int row = eng->rec_.row_of(name);
        if (row < 0) {
            row = eng->rec_.add_row(name);  // a derived row saved earlier
            filled.push_back(0);
        }
        eng->rec_.rows[row] = vals;
        filled[row] = 1;
    }
    for (std::size_t r = 0; r < filled.size(); ++r)
        if (!filled[r]) return bad("state file lacks record row '" + eng->rec_.names[r] + "'");
    if (!next_line("end")) return nullptr;
    if (line != "end") return bad("missing end marker");

    eng->tl_ = std::move(tl);
    eng->hn_cur_ = hn_cur;
    eng->depth_ = 0;
    for (Rational r = hn_cur; r < eng->opt_.step && eng->depth_ < kMaxHalvings;
         r = r * Rational(2))
        ++eng->depth_;
    eng->calm_ = calm;
    eng->have_plan_ = false;
    eng->last_avals_.clear();
    eng->factor_count_ = 0;
    return eng;
}

}  // namespace vwsim
