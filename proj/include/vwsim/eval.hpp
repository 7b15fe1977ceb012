#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vwsim/term.hpp"

namespace vwsim {

// Where signal lookups resolve during evaluation. `value` is the most recent
// recorded value of a signal (i.e. the previous time step while assembling the
// next one), `prev_value` one step before that (clamped to the seed column), and
// `value_at` the value at an absolute past time (used by `$back$`).
class EvalEnv {
public:
    virtual ~EvalEnv() = default;
    virtual std::optional<double> value(std::string_view name) const = 0;
    virtual std::optional<double> prev_value(std::string_view name) const = 0;
    virtual std::optional<double> value_at(std::string_view name, const Rational& t) const = 0;
};

// Flat map environment for tests and post-processing. `$back$` resolves like a
// plain lookup only when `allow_back` is set.
class MapEnv : public EvalEnv {
public:
    std::unordered_map<std::string, double> now;
    std::unordered_map<std::string, double> before;

    std::optional<double> value(std::string_view name) const override;
    std::optional<double> prev_value(std::string_view name) const override;
    std::optional<double> value_at(std::string_view, const Rational&) const override { return std::nullopt; }
};

struct EvalCtx {
    const EvalEnv* env = nullptr;
    Rational time;  // the time being solved for
    Rational hn;    // the step ending at `time`
};

// Strict recursive evaluation; `if` evaluates only the taken branch. Division by
// zero, unbound variables and malformed accessors throw EvalError.
double vw_eval(const TermPtr& t, const EvalCtx& ctx);

// All unique subterms of a forest, children before parents, each exactly once.
// A sweep computes every slot in order; division by zero poisons the slot instead
// of failing, untaken `if` branches drop poison, and anything else propagates it.
// Poison surfaces as an error only when a consumer reads a poisoned result.
class SubtermTable {
public:
    int add(const TermPtr& t);              // returns the slot index of t
    int slot_of(const TermPtr& t) const;    // -1 when absent

    std::size_t size() const { return terms_.size(); }
    const std::vector<TermPtr>& terms() const { return terms_; }

    void sweep(const EvalCtx& ctx);

    double value(int slot) const { return values_[slot]; }
    bool poisoned(int slot) const { return poison_[slot] != 0; }
    // Value with poison check: throws EvalError naming `what` if the slot is poisoned.
    double consume(int slot, std::string_view what) const;

    std::uint64_t apps_evaluated() const { return apps_evaluated_; }

private:
    struct Slot {
        Term::Kind kind;
        Fn fn = Fn::add;
        int a = -1, b = -1, c = -1;     // child slots
        const Term* term = nullptr;
    };

    std::vector<TermPtr> terms_;
    std::unordered_map<TermPtr, int, TermHash, TermEq> index_;
    std::vector<Slot> slots_;
    std::vector<double> values_;
    std::vector<std::uint8_t> poison_;
    std::uint64_t apps_evaluated_ = 0;
};

SubtermTable collect_ordered_subterms(std::span<const TermPtr> forest);

}  // namespace vwsim
