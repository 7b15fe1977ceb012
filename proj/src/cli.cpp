#include "vwsim/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "vwsim/csv.hpp"
#include "vwsim/engine.hpp"
#include "vwsim/native.hpp"
#include "vwsim/spice.hpp"

namespace vwsim {

namespace {

void report(const Diagnostics& diags) {
    for (const auto& d : diags) std::cerr << format_diagnostic(d) << "\n";
}

bool looks_native(std::string_view text) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
        return c == '(' || c == ';';
    }
    return false;
}

std::vector<std::string> split_names(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::string cur;
        for (char c : item) {
            if (c == ',' || c == ' ') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void print_equations(const SymbolicSystem& sys, std::ostream& os) {
    os << "(equations\n (sim-type " << sim_type_name(sys.sim_type) << ")\n (unknowns (";
    for (std::size_t i = 0; i < sys.unknowns.names.size(); ++i) {
        if (i) os << ' ';
        os << sys.unknowns.names[i];
    }
    os << "))\n (A\n";
    for (std::size_t r = 0; r < sys.A.size(); ++r)
        for (const auto& [c, t] : sys.A[r])
            os << "  (" << sys.unknowns.names[r] << ' ' << sys.unknowns.names[c] << ' '
               << print_term(t) << ")\n";
    os << " )\n (b\n";
    for (std::size_t r = 0; r < sys.b.size(); ++r)
        if (sys.b[r])
            os << "  (" << sys.unknowns.names[r] << ' ' << print_term(sys.b[r]) << ")\n";
    os << " )\n (aux\n";
    for (const auto& a : sys.aux) os << "  (" << a.name << ' ' << print_term(a.update) << ")\n";
    os << " ))\n";
}

void print_record_list(const SimulationRecord& rec, std::ostream& os, int indent) {
    std::string pad(indent, ' ');
    os << "(";
    for (std::size_t r = 0; r < rec.rows.size(); ++r) {
        if (r) os << "\n" << pad << " ";
        os << "(" << rec.names[r];
        for (double v : rec.rows[r]) os << ' ' << fmt_double(v);
        os << ")";
    }
    os << ")";
}

std::string var_stem(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base.empty() ? "records" : base;
}

int resolve_print(Engine& eng, const PrintRequest& p, Diagnostics& diags) {
    SimType mode = eng.options().sim_type;
    if (p.what == 'v' && mode != SimType::voltage) {
        diag_warning(diags, "cli", "v(" + p.name + ") needs a voltage-mode run; skipped");
        return -1;
    }
    if (p.what == 'p' && mode != SimType::phase) {
        diag_warning(diags, "cli", "p(" + p.name + ") needs a phase-mode run; skipped");
        return -1;
    }
    std::string name = p.name == "0" ? kGround : p.name;
    int row = eng.row_for(name);
    if (row < 0)
        diag_warning(diags, "cli", "print request names unknown signal '" + p.name + "'");
    return row;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("vwsim");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"transient simulator for superconducting and conventional circuits"};
    std::string input;
    std::string sim_type_s = "voltage";
    bool equations = false, spice_print = false, shortp = false, load_sim = false;
    std::vector<std::string> globals_raw, return_raw;
    std::string step_s, stop_s, start_s;
    std::string output_file, concat_s = "|", save_sim, save_var;

    app.add_option("input", input,
                   "netlist file (native or SPICE), or a state file with --load-sim")
        ->required();
    app.add_option("--sim-type", sim_type_s, "voltage or phase (default voltage)")
        ->check(CLI::IsMember({"voltage", "phase"}));
    app.add_flag("--equations", equations, "print the symbolic system instead of simulating");
    app.add_flag("--spice-print", spice_print,
                 "restrict CSV columns to the deck's .print requests");
    app.add_option("--global-nodes", globals_raw, "nodes never renamed while flattening");
    app.add_option("--time-step", step_s, "simulation step in seconds, rational");
    app.add_option("--time-stop", stop_s, "stop time in seconds, rational");
    app.add_option("--time-start", start_s, "start time in seconds, rational (default 0)");
    app.add_option("--output-file", output_file, "write the CSV here instead of stdout");
    app.add_option("--concat-char", concat_s, "hierarchy separator in flattened names");
    app.add_option("--save-sim", save_sim, "save the final simulation state to this file");
    app.add_flag("--save-sim-shortp", shortp, "save record values at single precision");
    app.add_flag("--load-sim", load_sim, "input is a saved state; resume it");
    app.add_flag("--variable-step", "shrink the step when a junction phase jumps");
    app.add_option("--save-var", save_var, "write the record as a lisp defconst to this file");
    app.add_option("--return-records", return_raw,
                   "print only these records to stdout, as an s-expression");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    Diagnostics diags;
    char concat = '|';
    if (concat_s.size() != 1)
        diag_error(diags, "cli", "--concat-char wants exactly one character");
    else
        concat = concat_s[0];
    SimType sim_type = sim_type_s == "phase" ? SimType::phase : SimType::voltage;

    auto parse_rat = [&](const std::string& s, const char* flag) -> std::optional<Rational> {
        auto r = Rational::parse(s);
        if (!r)
            diag_error(diags, "cli", std::string("bad rational for ") + flag + ": '" + s + "'");
        return r;
    };

    std::ifstream in(input);
    if (!in) {
        diag_error(diags, "cli", "cannot open input '" + input + "'");
        report(diags);
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    if (equations && load_sim) {
        diag_error(diags, "cli", "--equations cannot be combined with --load-sim");
        report(diags);
        return 1;
    }

    std::unique_ptr<Engine> engine;
    std::vector<PrintRequest> prints;

    if (load_sim) {
        std::istringstream st(text);
        engine = Engine::load_state(st, diags);
        if (!engine) {
            report(diags);
            return 1;
        }
        if (!stop_s.empty()) {
            if (auto r = parse_rat(stop_s, "--time-stop")) engine->set_stop(*r);
        }
        if (!step_s.empty() || !start_s.empty())
            diag_warning(diags, "cli", "--time-step/--time-start are ignored when resuming");
        if (app.count("--sim-type"))
            diag_warning(diags, "cli", "--sim-type is ignored when resuming");
    } else {
        Netlist nl =
            looks_native(text) ? parse_native(text, diags, input) : parse_spice(text, diags, input);
        netlist_syntax_check(nl, diags);
        netlist_arity_check(nl, diags);
        if (has_errors(diags)) {
            report(diags);
            return 1;
        }
        // The first module of the input is the top; sorting moves dependencies
        // ahead of it, so remember the name before reordering.
        std::string top = nl.modules.empty() ? std::string() : nl.modules[0].name;
        Netlist sorted = sort_modules(nl, diags);
        std::set<std::string> globals;
        for (auto& g : split_names(globals_raw)) globals.insert(g);
        FlatCircuit fc = flatten(sorted, top, concat, globals, diags);
        check_flat(fc, diags);
        if (has_errors(diags)) {
            report(diags);
            return 1;
        }

        const ControlStatement* tran = nullptr;
        for (const auto& c : nl.controls) {
            if (c.kind == ControlStatement::Kind::tran && !tran) tran = &c;
            if (c.kind == ControlStatement::Kind::print) prints.push_back(c.print);
        }

        SimOptions opt;
        opt.sim_type = sim_type;
        opt.variable_step = app.count("--variable-step") > 0;
        bool have_step = false, have_stop = false;
        if (!step_s.empty()) {
            if (auto r = parse_rat(step_s, "--time-step")) opt.step = *r, have_step = true;
        } else if (tran) {
            opt.step = tran->step;
            have_step = true;
        }
        if (!stop_s.empty()) {
            if (auto r = parse_rat(stop_s, "--time-stop")) opt.stop = *r, have_stop = true;
        } else if (tran) {
            opt.stop = tran->stop;
            have_stop = true;
        }
        if (!start_s.empty()) {
            if (auto r = parse_rat(start_s, "--time-start")) opt.start = *r;
        } else if (tran && tran->has_start) {
            opt.start = tran->start;
        }
        if (!have_step)
            diag_error(diags, "cli", "no time step given (use --time-step or a .tran card)");
        if (!have_stop)
            diag_error(diags, "cli", "no stop time given (use --time-stop or a .tran card)");
        if (has_errors(diags)) {
            report(diags);
            return 1;
        }

        if (equations) {
            SymbolicSystem sys = build_system(fc, sim_type, diags);
            if (!has_errors(diags)) {
                if (output_file.empty()) {
                    print_equations(sys, std::cout);
                } else {
                    std::ofstream os(output_file);
                    if (!os)
                        diag_error(diags, "cli", "cannot write '" + output_file + "'");
                    else
                        print_equations(sys, os);
                }
            }
            report(diags);
            return has_errors(diags) ? 1 : 0;
        }

        engine = std::make_unique<Engine>(std::move(fc), opt, diags);
        if (!engine->runnable()) {
            report(diags);
            return 1;
        }
    }

    try {
        engine->run();
    } catch (const SimError& e) {
        diag_error(diags, "engine", e.what());
        report(diags);
        return 1;
    }

    if (!save_sim.empty()) {
        std::ofstream os(save_sim);
        if (!os)
            diag_error(diags, "cli", "cannot write '" + save_sim + "'");
        else
            engine->save_state(os, shortp);
    }

    std::vector<std::string> want = split_names(return_raw);
    if (!want.empty()) {
        for (const auto& n : want) engine->row_for(n);
        try {
            SimulationRecord sub = extract_records(engine->record(), want);
            print_record_list(sub, std::cout, 0);
            std::cout << "\n";
        } catch (const SimError& e) {
            diag_error(diags, "cli", e.what());
        }
    }

    if (!save_var.empty()) {
        std::ofstream os(save_var);
        if (!os) {
            diag_error(diags, "cli", "cannot write '" + save_var + "'");
        } else {
            os << "(defconst *" << var_stem(save_var) << "*\n '";
            print_record_list(engine->record(), os, 2);
            os << ")\n";
        }
    }

    std::vector<int> cols;
    bool emit_csv = !output_file.empty() ||
                    (want.empty() && save_sim.empty() && save_var.empty());
    if (emit_csv) {
        if (spice_print && !prints.empty()) {
            cols.push_back(0);  // $time$ leads the filtered output
            for (const auto& p : prints) {
                int row = resolve_print(*engine, p, diags);
                if (row >= 0) cols.push_back(row);
            }
        } else {
            if (spice_print)
                diag_warning(diags, "cli", "--spice-print given but there are no print requests");
            for (std::size_t i = 0; i < engine->record().rows.size(); ++i)
                cols.push_back(static_cast<int>(i));
        }
        if (output_file.empty()) {
            write_csv(engine->record(), cols, std::cout);
        } else {
            std::ofstream os(output_file);
            if (!os)
                diag_error(diags, "cli", "cannot write '" + output_file + "'");
            else
                write_csv(engine->record(), cols, os);
        }
    }

    report(diags);
    return has_errors(diags) ? 1 : 0;
}

}  // namespace vwsim
