#include "vwsim/eval.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vwsim {

namespace {

// One arithmetic kernel shared by the recursive evaluator and the sweep so the two
// paths produce bitwise-identical results.
double apply1(Fn fn, double a) {
    switch (fn) {
        case Fn::neg: return -a;
        case Fn::abs: return std::fabs(a);
        case Fn::sin: return std::sin(a);
        case Fn::cos: return std::cos(a);
        case Fn::exp: return std::exp(a);
        case Fn::sqrt: return std::sqrt(a);
        default: break;
    }
    throw EvalError("bad unary primitive");
}

double apply2(Fn fn, double a, double b) {
    switch (fn) {
        case Fn::add: return a + b;
        case Fn::sub: return a - b;
        case Fn::mul: return a * b;
        case Fn::less: return a < b ? 1.0 : 0.0;
        default: break;
    }
    throw EvalError("bad binary primitive");
}

double lookup(const EvalCtx& ctx, const std::string& name) {
    if (name == "$time$") return ctx.time.to_double();
    if (name == "$hn$") return ctx.hn.to_double();
    if (!ctx.env) throw EvalError("no environment for variable '" + name + "'");
    if (auto v = ctx.env->value(name)) return *v;
    throw EvalError("unbound variable '" + name + "'");
}

double lookup_prev(const EvalCtx& ctx, const std::string& name) {
    if (!ctx.env) throw EvalError("no environment for $prev$ of '" + name + "'");
    if (auto v = ctx.env->prev_value(name)) return *v;
    throw EvalError("unbound variable '" + name + "' under $prev$");
}

double lookup_back(const EvalCtx& ctx, const std::string& name, const Rational& delay) {
    if (!ctx.env) throw EvalError("no environment for $back$ of '" + name + "'");
    Rational target = ctx.time - delay;
    if (auto v = ctx.env->value_at(name, target)) return *v;
    throw EvalError("no history for '" + name + "' under $back$");
}

}  // namespace

std::optional<double> MapEnv::value(std::string_view name) const {
    auto it = now.find(std::string(name));
    if (it == now.end()) return std::nullopt;
    return it->second;
}

std::optional<double> MapEnv::prev_value(std::string_view name) const {
    auto it = before.find(std::string(name));
    if (it != before.end()) return it->second;
    // No deeper history: the step before the first recorded one reads as the seed.
    return value(name).has_value() ? std::optional<double>(0.0) : std::nullopt;
}

double vw_eval(const TermPtr& t, const EvalCtx& ctx) {
    switch (t->kind) {
        case Term::Kind::constant:
            return t->value;
        case Term::Kind::var:
            return lookup(ctx, t->name);
        case Term::Kind::app:
            break;
    }
    switch (t->fn) {
        case Fn::if_: {
            double c = vw_eval(t->args[0], ctx);
            return c != 0.0 ? vw_eval(t->args[1], ctx) : vw_eval(t->args[2], ctx);
        }
        case Fn::time_less:
            return ctx.time < *t->args[0]->exact ? 1.0 : 0.0;
        case Fn::prev:
            return lookup_prev(ctx, t->args[0]->name);
        case Fn::back:
            return lookup_back(ctx, t->args[0]->name, *t->args[1]->exact);
        case Fn::div: {
            double a = vw_eval(t->args[0], ctx);
            double b = vw_eval(t->args[1], ctx);
            if (b == 0.0) throw EvalError("division by zero");
            return a / b;
        }
        case Fn::mod: {
            double a = vw_eval(t->args[0], ctx);
            double b = vw_eval(t->args[1], ctx);
            if (b == 0.0) throw EvalError("f-mod by zero");
            return std::fmod(a, b);
        }
        default: break;
    }
    const auto& info = fn_info(t->fn);
    if (info.arity == 1) return apply1(t->fn, vw_eval(t->args[0], ctx));
    double a = vw_eval(t->args[0], ctx);
    double b = vw_eval(t->args[1], ctx);
    return apply2(t->fn, a, b);
}

int SubtermTable::add(const TermPtr& t) {
    auto it = index_.find(t);
    if (it != index_.end()) return it->second;

    Slot slot;
    slot.kind = t->kind;
    if (t->kind == Term::Kind::app) {
        slot.fn = t->fn;
        // Accessor arguments are address syntax, not evaluated subterms.
        if (t->fn != Fn::prev && t->fn != Fn::back) {
            if (t->args.size() > 0) slot.a = add(t->args[0]);
            if (t->args.size() > 1) slot.b = add(t->args[1]);
            if (t->args.size() > 2) slot.c = add(t->args[2]);
        }
    }
    int id = static_cast<int>(terms_.size());
    terms_.push_back(t);
    slot.term = terms_.back().get();
    slots_.push_back(slot);
    values_.push_back(0.0);
    poison_.push_back(0);
    index_.emplace(t, id);
    return id;
}

int SubtermTable::slot_of(const TermPtr& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? -1 : it->second;
}

double SubtermTable::consume(int slot, std::string_view what) const {
    if (poison_[slot] != 0)
        throw EvalError("division by zero while evaluating " + std::string(what));
    return values_[slot];
}

void SubtermTable::sweep(const EvalCtx& ctx) {
    apps_evaluated_ = 0;
    const double quiet = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        const Slot& s = slots_[i];
        std::uint8_t bad = 0;
        double v = 0.0;
        switch (s.kind) {
            case Term::Kind::constant:
                v = s.term->value;
                break;
            case Term::Kind::var:
                v = lookup(ctx, s.term->name);
                break;
            case Term::Kind::app: {
                ++apps_evaluated_;
                switch (s.fn) {
                    case Fn::if_: {
                        if (poison_[s.a]) { bad = 1; v = quiet; break; }
                        int pick = values_[s.a] != 0.0 ? s.b : s.c;
                        bad = poison_[pick];
                        v = values_[pick];
                        break;
                    }
                    case Fn::time_less:
                        v = ctx.time < *s.term->args[0]->exact ? 1.0 : 0.0;
                        break;
                    case Fn::prev:
                        v = lookup_prev(ctx, s.term->args[0]->name);
                        break;
                    case Fn::back:
                        v = lookup_back(ctx, s.term->args[0]->name, *s.term->args[1]->exact);
                        break;
                    case Fn::div:
                    case Fn::mod: {
                        bad = poison_[s.a] | poison_[s.b];
                        if (!bad && values_[s.b] == 0.0) bad = 1;
                        if (bad) { v = quiet; break; }
                        v = s.fn == Fn::div ? values_[s.a] / values_[s.b]
                                            : std::fmod(values_[s.a], values_[s.b]);
                        break;
                    }
                    default: {
                        const auto& info = fn_info(s.fn);
                        if (info.arity == 1) {
                            bad = poison_[s.a];
                            v = bad ? quiet : apply1(s.fn, values_[s.a]);
                        } else {
                            bad = poison_[s.a] | poison_[s.b];
                            v = bad ? quiet : apply2(s.fn, values_[s.a], values_[s.b]);
                        }
                        break;
                    }
                }
                break;
            }
        }
        values_[i] = v;
        poison_[i] = bad;
    }
}

SubtermTable collect_ordered_subterms(std::span<const TermPtr> forest) {
    SubtermTable table;
    for (const auto& t : forest)
        if (t) table.add(t);
    return table;
}

}  // namespace vwsim
