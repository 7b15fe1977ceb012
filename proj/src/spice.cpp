#include "vwsim/spice.hpp"

#include <cctype>
#include <numbers>
#include <unordered_map>

namespace vwsim {

namespace {

struct Card {
    std::vector<std::string> tokens;
    int line = 0;
};

bool is_space_c(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Lower-cases and splits one logical card. ',' and '=' separate like spaces;
// '(' and ')' come out as their own tokens so function argument lists keep
// their grouping.
void tokenize_into(std::string_view text, std::vector<std::string>& out) {
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if (is_space_c(c) || c == ',' || c == '=') {
            flush();
        } else if (c == '(' || c == ')') {
            flush();
            out.emplace_back(1, c);
        } else {
            cur += c;
        }
    }
    flush();
}

std::vector<Card> split_cards(std::string_view text, Diagnostics& diags,
                              const std::string& where) {
    std::vector<Card> cards;
    int line_no = 0;
    bool first = true;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (first) {  // title line, by convention
            first = false;
            continue;
        }
        if (auto semi = line.find(';'); semi != std::string_view::npos)
            line = line.substr(0, semi);
        std::size_t ws = 0;
        while (ws < line.size() && is_space_c(line[ws])) ++ws;
        line = line.substr(ws);
        if (line.empty() || line[0] == '*') continue;

        if (line[0] == '+') {
            if (cards.empty()) {
                diag_error(diags, where, "continuation line with nothing to continue", line_no);
                continue;
            }
            tokenize_into(line.substr(1), cards.back().tokens);
        } else {
            Card card;
            card.line = line_no;
            tokenize_into(line, card.tokens);
            if (!card.tokens.empty()) cards.push_back(std::move(card));
        }
    }
    return cards;
}

std::string map_node(const std::string& n) { return n == "0" ? kGround : n; }

struct JJModel {
    Rational ic, r, c;
    bool has_ic = false, has_r = false, has_c = false;
    int line = 0;
};

struct PendingJJ {
    std::string module_name;  // empty marks the main module
    std::size_t item_index;
    std::string model;
    Rational area;
    int line = 0;
};

struct DeckParser {
    Diagnostics& diags;
    const std::string& where;
    Netlist netlist;
    Module main;
    std::vector<Module> subckt_stack;
    std::unordered_map<std::string, JJModel> models;
    std::vector<PendingJJ> pending_jjs;
    bool ended = false;

    explicit DeckParser(Diagnostics& d, const std::string& w) : diags(d), where(w) {
        main.name = "main";
        main.line = 1;
    }

    Module& current() { return subckt_stack.empty() ? main : subckt_stack.back(); }

    void error(const Card& card, const std::string& msg) {
        diag_error(diags, where, msg, card.line);
    }
    void warn(const Card& card, const std::string& msg) {
        diag_warning(diags, where, msg, card.line);
    }

    std::optional<Rational> number(const Card& card, const std::string& tok,
                                   const char* what) {
        auto r = spice_number(tok);
        if (!r) error(card, std::string("malformed ") + what + " '" + tok + "'");
        return r;
    }

    // Collects "name ( n1 n2 ... )" argument lists for pwl/pulse/sin.
    bool paren_args(const Card& card, std::size_t& i, std::vector<Rational>& out,
                    const char* what) {
        const auto& tk = card.tokens;
        if (i >= tk.size() || tk[i] != "(") {
            error(card, std::string(what) + " needs a parenthesized argument list");
            return false;
        }
        ++i;
        while (i < tk.size() && tk[i] != ")") {
            auto r = number(card, tk[i], what);
            if (!r) return false;
            out.push_back(*r);
            ++i;
        }
        if (i >= tk.size()) {
            error(card, std::string("unterminated argument list for ") + what);
            return false;
        }
        ++i;  // ')'
        return true;
    }

    TermPtr pwl_term(const Card& card, const std::vector<Rational>& a) {
        if (a.size() < 2 || a.size() % 2 != 0) {
            error(card, "pwl needs an even number of arguments (t1 v1 t2 v2 ...)");
            return nullptr;
        }
        std::size_t n = a.size() / 2;
        for (std::size_t i = 1; i < n; ++i) {
            if (!(a[2 * (i - 1)] < a[2 * i])) {
                error(card, "pwl times must be strictly increasing");
                return nullptr;
            }
        }
        // After the last breakpoint the value holds; walk segments back to front.
        TermPtr term = make_const(a[2 * (n - 1) + 1]);
        for (std::size_t i = n - 1; i-- > 0;) {
            const Rational &t0 = a[2 * i], &v0 = a[2 * i + 1];
            const Rational &t1 = a[2 * (i + 1)], &v1 = a[2 * (i + 1) + 1];
            Rational slope = (v1 - v0) / (t1 - t0);
            TermPtr seg;
            if (slope == Rational(0)) {
                seg = make_const(v0);
            } else {
                TermPtr dt = t_sub(t_var("$time$"), make_const(t0));
                seg = t_add(make_const(v0), t_mul(make_const(slope), dt));
            }
            term = t_if(t_time_less(t1), seg, std::move(term));
        }
        return t_if(t_time_less(a[0]), make_const(a[1]), std::move(term));
    }

    TermPtr pulse_term(const Card& card, const std::vector<Rational>& a) {
        if (a.size() < 2 || a.size() > 7) {
            error(card, "pulse needs 2 to 7 arguments (v1 v2 td tr tf pw per)");
            return nullptr;
        }
        Rational v1 = a[0], v2 = a[1];
        Rational td = a.size() > 2 ? a[2] : Rational(0);
        Rational tr = a.size() > 3 ? a[3] : Rational(0);
        Rational tf = a.size() > 4 ? a[4] : Rational(0);
        Rational pw = a.size() > 5 ? a[5] : Rational(0);
        std::optional<Rational> per;
        if (a.size() > 6 && Rational(0) < a[6]) per = a[6];

        TermPtr tau = t_var("$time$");
        if (td != Rational(0)) tau = t_sub(tau, make_const(td));
        if (per) tau = make_app(Fn::mod, {std::move(tau), make_const(*per)});

        // Built back to front: after the fall the value is v1 again.
        TermPtr term = make_const(v1);
        Rational b_fall_end = tr + pw + tf;
        if (Rational(0) < tf) {
            TermPtr dt = t_sub(tau, make_const(tr + pw));
            TermPtr ramp = t_sub(make_const(v2), t_mul(make_const((v2 - v1) / tf), dt));
            term = t_if(t_less(tau, make_const(b_fall_end)), std::move(ramp), std::move(term));
        }
        term = t_if(t_less(tau, make_const(tr + pw)), make_const(v2), std::move(term));
        if (Rational(0) < tr) {
            TermPtr ramp = t_add(make_const(v1), t_mul(make_const((v2 - v1) / tr), tau));
            term = t_if(t_less(tau, make_const(tr)), std::move(ramp), std::move(term));
        }
        if (td != Rational(0)) term = t_if(t_time_less(td), make_const(v1), std::move(term));
        return term;
    }

    TermPtr sin_term(const Card& card, const std::vector<Rational>& a) {
        if (a.size() < 3 || a.size() > 5) {
            error(card, "sin needs 3 to 5 arguments (vo va freq td theta)");
            return nullptr;
        }
        Rational vo = a[0], va = a[1], freq = a[2];
        Rational td = a.size() > 3 ? a[3] : Rational(0);
        Rational theta = a.size() > 4 ? a[4] : Rational(0);

        TermPtr shift = t_var("$time$");
        if (td != Rational(0)) shift = t_sub(shift, make_const(td));
        double w = 2.0 * std::numbers::pi * freq.to_double();
        TermPtr wave = make_app(Fn::sin, {t_mul(t_num(w), shift)});
        if (theta != Rational(0)) {
            TermPtr damp = make_app(Fn::exp, {t_neg(t_mul(make_const(theta), shift))});
            wave = t_mul(std::move(wave), std::move(damp));
        }
        TermPtr term = t_add(make_const(vo), t_mul(make_const(va), std::move(wave)));
        if (td != Rational(0)) term = t_if(t_time_less(td), make_const(vo), std::move(term));
        return term;
    }

    TermPtr source_value(const Card& card, std::size_t i) {
        const auto& tk = card.tokens;
        if (i < tk.size() && tk[i] == "dc") ++i;
        if (i >= tk.size()) {
            error(card, "source '" + tk[0] + "' has no value");
            return nullptr;
        }
        const std::string& head = tk[i];
        if (head == "pwl" || head == "pulse" || head == "sin") {
            ++i;
            std::vector<Rational> args;
            if (!paren_args(card, i, args, head.c_str())) return nullptr;
            TermPtr t = head == "pwl"     ? pwl_term(card, args)
                        : head == "pulse" ? pulse_term(card, args)
                                          : sin_term(card, args);
            if (t && i < tk.size()) error(card, "trailing tokens after " + head + " source");
            return t;
        }
        auto r = number(card, head, "source value");
        if (!r) return nullptr;
        if (i + 1 < tk.size())
            error(card, "trailing tokens after source value on '" + tk[0] + "'");
        return make_const(*r);
    }

    void element_card(const Card& card) {
        const auto& tk = card.tokens;
        const std::string& name = tk[0];
        if (name[0] == 'x') return x_card(card);
        auto kind = kind_from_letter(name[0]);
        if (!kind) {
            error(card, "unknown element '" + name + "'");
            return;
        }
        if (*kind == DeviceKind::mutual) return k_card(card);

        const DeviceArity& ar = arity_of(*kind);
        if (static_cast<int>(tk.size()) < 1 + ar.nodes + 1) {
            error(card, "element '" + name + "' is missing fields");
            return;
        }
        Occurrence occ;
        occ.name = name;
        occ.kind = *kind;
        occ.line = card.line;
        for (int n = 0; n < ar.nodes; ++n) occ.nodes.push_back(map_node(tk[1 + n]));
        if (*kind == DeviceKind::tline) {
            occ.branches = {"i-" + name + "-a", "i-" + name + "-b"};
        } else {
            occ.branches = {"i-" + name};
        }
        std::size_t i = 1 + ar.nodes;

        switch (*kind) {
            case DeviceKind::resistor:
            case DeviceKind::capacitor:
            case DeviceKind::inductor: {
                auto r = number(card, tk[i], "value");
                if (!r) return;
                occ.values.push_back(make_const(*r));
                if (i + 1 < tk.size()) warn(card, "ignoring trailing tokens on '" + name + "'");
                break;
            }
            case DeviceKind::vsource:
            case DeviceKind::isource:
            case DeviceKind::psource: {
                TermPtr v = source_value(card, i);
                if (!v) return;
                occ.values.push_back(std::move(v));
                break;
            }
            case DeviceKind::jj: {
                // Bxxx n1 n2 model [area a]; parameters come from the .model card.
                const std::string& model = tk[i++];
                Rational area(1);
                while (i < tk.size()) {
                    if (tk[i] == "area" && i + 1 < tk.size()) {
                        auto r = number(card, tk[i + 1], "area");
                        if (!r) return;
                        area = *r;
                        i += 2;
                    } else {
                        warn(card, "ignoring token '" + tk[i] + "' on '" + name + "'");
                        ++i;
                    }
                }
                if (!(Rational(0) < area)) {
                    error(card, "area on '" + name + "' must be positive");
                    return;
                }
                occ.values = {nullptr, nullptr, nullptr};  // filled after .model lookup
                pending_jjs.push_back({subckt_stack.empty() ? "" : current().name,
                                       current().items.size(), model, area, card.line});
                break;
            }
            case DeviceKind::tline: {
                // Z0 and delay, either positional or with z0=/td= keys.
                std::optional<Rational> z0, tdel;
                while (i < tk.size()) {
                    if (tk[i] == "z0" && i + 1 < tk.size()) {
                        z0 = number(card, tk[i + 1], "z0");
                        i += 2;
                    } else if (tk[i] == "td" && i + 1 < tk.size()) {
                        tdel = number(card, tk[i + 1], "td");
                        i += 2;
                    } else if (!z0) {
                        z0 = number(card, tk[i], "z0");
                        ++i;
                    } else if (!tdel) {
                        tdel = number(card, tk[i], "td");
                        ++i;
                    } else {
                        warn(card, "ignoring token '" + tk[i] + "' on '" + name + "'");
                        ++i;
                    }
                }
                if (!z0 || !tdel) {
                    error(card, "transmission line '" + name + "' needs z0 and td");
                    return;
                }
                occ.values = {make_const(*z0), make_const(*tdel)};
                break;
            }
            default:
                break;
        }
        current().items.emplace_back(std::move(occ));
    }

    void k_card(const Card& card) {
        const auto& tk = card.tokens;
        if (tk.size() != 4) {
            error(card, "mutual coupling '" + tk[0] + "' needs two inductors and a coefficient");
            return;
        }
        auto r = number(card, tk[3], "coupling coefficient");
        if (!r) return;
        Occurrence occ;
        occ.name = tk[0];
        occ.kind = DeviceKind::mutual;
        occ.line = card.line;
        occ.values = {make_var(tk[1]), make_var(tk[2]), make_const(*r)};
        current().items.emplace_back(std::move(occ));
    }

    void x_card(const Card& card) {
        const auto& tk = card.tokens;
        if (tk.size() < 2) {
            error(card, "subcircuit call '" + tk[0] + "' needs a subcircuit name");
            return;
        }
        ModuleRef ref;
        ref.name = tk[0];
        ref.module = tk.back();
        ref.line = card.line;
        for (std::size_t i = 1; i + 1 < tk.size(); ++i)
            ref.connections.push_back(map_node(tk[i]));
        current().items.emplace_back(std::move(ref));
    }

    void model_card(const Card& card) {
        const auto& tk = card.tokens;
        if (tk.size() < 3) {
            error(card, ".model needs a name and a type");
            return;
        }
        const std::string& mname = tk[1];
        if (tk[2] != "jj") {
            error(card, "unsupported model type '" + tk[2] + "' (only jj models)");
            return;
        }
        JJModel m;
        m.line = card.line;
        std::size_t i = 3;
        if (i < tk.size() && tk[i] == "(") ++i;
        while (i < tk.size() && tk[i] != ")") {
            const std::string& key = tk[i];
            if (i + 1 >= tk.size() || tk[i + 1] == ")") {
                error(card, "model parameter '" + key + "' has no value");
                return;
            }
            auto r = number(card, tk[i + 1], key.c_str());
            if (!r) return;
            if (key == "icrit" || key == "ic") {
                m.ic = *r;
                m.has_ic = true;
            } else if (key == "rn" || key == "r") {
                m.r = *r;
                m.has_r = true;
            } else if (key == "cap" || key == "c") {
                m.c = *r;
                m.has_c = true;
            } else {
                warn(card, "ignoring model parameter '" + key + "'");
            }
            i += 2;
        }
        if (!m.has_ic || !m.has_r || !m.has_c) {
            error(card, "jj model '" + mname + "' needs icrit, rn and cap");
            return;
        }
        if (!models.emplace(mname, m).second)
            error(card, "duplicate model '" + mname + "'");
    }

    void control_card(const Card& card) {
        const auto& tk = card.tokens;
        const std::string& dot = tk[0];
        if (dot == ".subckt") {
            if (tk.size() < 2) {
                error(card, ".subckt needs a name");
                return;
            }
            Module m;
            m.name = tk[1];
            m.line = card.line;
            for (std::size_t i = 2; i < tk.size(); ++i) m.externals.push_back(map_node(tk[i]));
            subckt_stack.push_back(std::move(m));
        } else if (dot == ".ends") {
            if (subckt_stack.empty()) {
                error(card, ".ends without .subckt");
                return;
            }
            netlist.modules.push_back(std::move(subckt_stack.back()));
            subckt_stack.pop_back();
        } else if (dot == ".tran") {
            if (tk.size() < 3) {
                error(card, ".tran needs a step and a stop time");
                return;
            }
            ControlStatement cs;
            cs.kind = ControlStatement::Kind::tran;
            cs.line = card.line;
            auto step = number(card, tk[1], "time step");
            auto stop = number(card, tk[2], "stop time");
            if (!step || !stop) return;
            cs.step = *step;
            cs.stop = *stop;
            if (tk.size() > 3) {
                auto start = number(card, tk[3], "start time");
                if (!start) return;
                cs.start = *start;
                cs.has_start = true;
            }
            if (tk.size() > 4) warn(card, "ignoring extra .tran fields");
            netlist.controls.push_back(std::move(cs));
        } else if (dot == ".print" || dot == ".plot") {
            print_card(card);
        } else if (dot == ".model") {
            model_card(card);
        } else if (dot == ".end") {
            ended = true;
        } else if (dot == ".ac" || dot == ".dc" || dot == ".op" || dot == ".noise") {
            error(card, "unsupported analysis '" + dot + "' (transient only)");
        } else {
            error(card, "unsupported control card '" + dot + "'");
        }
    }

    void print_card(const Card& card) {
        const auto& tk = card.tokens;
        std::size_t i = 1;
        if (i < tk.size() && tk[i] == "tran") ++i;
        bool any = false;
        while (i < tk.size()) {
            const std::string& what = tk[i];
            if ((what != "v" && what != "i" && what != "p") || i + 3 >= tk.size() ||
                tk[i + 1] != "(" || tk[i + 3] != ")") {
                error(card, "malformed print request, expected v(node), i(device) or p(node)");
                return;
            }
            ControlStatement cs;
            cs.kind = ControlStatement::Kind::print;
            cs.line = card.line;
            cs.print.what = what[0];
            cs.print.name = map_node(tk[i + 2]);
            netlist.controls.push_back(std::move(cs));
            any = true;
            i += 4;
        }
        if (!any) error(card, ".print names nothing to print");
    }

    void resolve_jjs() {
        std::unordered_map<std::string, Module*> by_name;
        for (auto& m : netlist.modules) by_name.emplace(m.name, &m);
        for (const auto& p : pending_jjs) {
            auto mit = by_name.find(p.module_name.empty() ? "main" : p.module_name);
            if (mit == by_name.end()) continue;  // the .subckt never closed; already reported
            auto& occ = std::get<Occurrence>(mit->second->items[p.item_index]);
            auto it = models.find(p.model);
            if (it == models.end()) {
                diag_error(diags, where,
                           "junction '" + occ.name + "' names undefined model '" + p.model + "'",
                           p.line);
                continue;
            }
            const JJModel& m = it->second;
            occ.values[0] = make_const(m.ic * p.area);
            occ.values[1] = make_const(m.r / p.area);
            occ.values[2] = make_const(m.c * p.area);
        }
    }

    Netlist finish() {
        for (auto it = subckt_stack.rbegin(); it != subckt_stack.rend(); ++it)
            diag_error(diags, where, "unterminated .subckt '" + it->name + "'", it->line);
        netlist.modules.insert(netlist.modules.begin(), std::move(main));
        resolve_jjs();
        return std::move(netlist);
    }
};

}  // namespace

std::optional<Rational> spice_number(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::size_t i = 0;
    if (token[i] == '+' || token[i] == '-') ++i;
    std::size_t digits_at = i;
    bool seen_dot = false;
    while (i < token.size()) {
        char c = token[i];
        if (c >= '0' && c <= '9') {
            ++i;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
            ++i;
        } else {
            break;
        }
    }
    if (i == digits_at) return std::nullopt;
    // Exponent only when 'e' is followed by a digit (else it is a suffix/unit).
    if (i < token.size() && (token[i] == 'e' || token[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < token.size() && (token[j] == '+' || token[j] == '-')) ++j;
        if (j < token.size() && token[j] >= '0' && token[j] <= '9') {
            ++j;
            while (j < token.size() && token[j] >= '0' && token[j] <= '9') ++j;
            i = j;
        }
    }
    std::string_view num = token.substr(0, i);
    std::string_view rest = token.substr(i);
    std::string buf;
    if (num[0] == '+') {
        buf.assign(num.substr(1));
        num = buf;
    }
    auto base = Rational::parse(num);
    if (!base) return std::nullopt;

    int power = 0;
    std::size_t used = 0;
    auto lower3 = [&](std::size_t n) {
        std::string s;
        for (std::size_t k = 0; k < n && k < rest.size(); ++k)
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[k])));
        return s;
    };
    if (lower3(3) == "meg") {
        power = 6;
        used = 3;
    } else if (!rest.empty()) {
        switch (std::tolower(static_cast<unsigned char>(rest[0]))) {
            case 'f': power = -15; used = 1; break;
            case 'p': power = -12; used = 1; break;
            case 'n': power = -9; used = 1; break;
            case 'u': power = -6; used = 1; break;
            case 'm': power = -3; used = 1; break;
            case 'k': power = 3; used = 1; break;
            case 'g': power = 9; used = 1; break;
            case 't': power = 12; used = 1; break;
            default: return std::nullopt;
        }
    }
    // Anything after the suffix must be unit letters ("10pF", "1kohm").
    for (std::size_t k = used; k < rest.size(); ++k)
        if (!std::isalpha(static_cast<unsigned char>(rest[k]))) return std::nullopt;

    if (power == 0) return base;
    std::int64_t scale = 1;
    for (int k = 0; k < (power < 0 ? -power : power); ++k) scale *= 10;
    try {
        return power > 0 ? *base * Rational(scale) : *base * Rational(1, scale);
    } catch (const RationalOverflow&) {
        return std::nullopt;
    }
}

Netlist parse_spice(std::string_view text, Diagnostics& diags, const std::string& where) {
    DeckParser dp(diags, where);
    for (const Card& card : split_cards(text, diags, where)) {
        if (dp.ended) break;
        const std::string& head = card.tokens[0];
        if (head[0] == '.') {
            dp.control_card(card);
        } else if (std::isalpha(static_cast<unsigned char>(head[0]))) {
            dp.element_card(card);
        } else {
            diag_error(diags, where, "malformed card '" + head + "'", card.line);
        }
    }
    return dp.finish();
}

}  // namespace vwsim
