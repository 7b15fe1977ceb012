#include "vwsim/sexpr.hpp"

namespace vwsim {

namespace {

struct Lexer {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;

    void skip_space() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '\n') { ++line; ++pos; }
            else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') ++pos;
            else if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else break;
        }
    }

    bool eof() {
        skip_space();
        return pos >= text.size();
    }

    char peek() { return text[pos]; }
};

bool atom_char(char c) {
    if (c == '(' || c == ')' || c == '\'' || c == ';') return false;
    return !(c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v');
}

bool read_form(Lexer& lx, SNode& out, Diagnostics& diags, const std::string& where);

bool read_list(Lexer& lx, SNode& out, Diagnostics& diags, const std::string& where) {
    out.is_atom = false;
    out.line = lx.line;
    ++lx.pos;  // consume '('
    while (true) {
        if (lx.eof()) {
            diag_error(diags, where, "unterminated list", out.line);
            return false;
        }
        if (lx.peek() == ')') {
            ++lx.pos;
            return true;
        }
        SNode child;
        if (!read_form(lx, child, diags, where)) return false;
        out.items.push_back(std::move(child));
    }
}

bool read_form(Lexer& lx, SNode& out, Diagnostics& diags, const std::string& where) {
    if (lx.eof()) {
        diag_error(diags, where, "unexpected end of input", lx.line);
        return false;
    }
    char c = lx.peek();
    if (c == '\'') {
        int qline = lx.line;
        ++lx.pos;
        if (!read_form(lx, out, diags, where)) return false;
        if (out.quoted) {
            diag_error(diags, where, "doubled quote", qline);
            return false;
        }
        out.quoted = true;
        return true;
    }
    if (c == '(') return read_list(lx, out, diags, where);
    if (c == ')') {
        diag_error(diags, where, "unexpected ')'", lx.line);
        return false;
    }
    out.is_atom = true;
    out.line = lx.line;
    std::size_t start = lx.pos;
    while (lx.pos < lx.text.size() && atom_char(lx.text[lx.pos])) ++lx.pos;
    out.atom.assign(lx.text.substr(start, lx.pos - start));
    return true;
}

}  // namespace

std::vector<SNode> parse_sexprs(std::string_view text, Diagnostics& diags,
                                const std::string& where) {
    Lexer lx{text};
    std::vector<SNode> forms;
    while (!lx.eof()) {
        SNode n;
        if (!read_form(lx, n, diags, where)) break;
        forms.push_back(std::move(n));
    }
    return forms;
}

std::string print_sexpr(const SNode& node) {
    std::string s;
    if (node.quoted) s += '\'';
    if (node.is_atom) {
        s += node.atom;
        return s;
    }
    s += '(';
    for (std::size_t i = 0; i < node.items.size(); ++i) {
        if (i) s += ' ';
        s += print_sexpr(node.items[i]);
    }
    s += ')';
    return s;
}

}  // namespace vwsim
