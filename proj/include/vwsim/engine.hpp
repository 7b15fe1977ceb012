#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vwsim/diagnostics.hpp"
#include "vwsim/elaborate.hpp"
#include "vwsim/eval.hpp"
#include "vwsim/mna.hpp"
#include "vwsim/rational.hpp"
#include "vwsim/record.hpp"
#include "vwsim/solver.hpp"

namespace vwsim {

// Exact time grid. steps[k] is the step that ends at times[k]; steps[0] = 0.
struct TimeLine {
    std::vector<Rational> times;
    std::vector<Rational> steps;
};

struct SimOptions {
    SimType sim_type = SimType::voltage;
    Rational step{0};
    Rational stop{0};
    Rational start{0};
    // When set, the step halves (down to step/2^20) whenever a junction phase
    // moves more than pi/4 in one step, and doubles back after 8 calm steps.
    bool variable_step = false;
};

class Engine {
public:
    // Builds the symbolic system and seeds the record at `start` with zeros.
    // Construction problems are reported through diags; a constructed engine
    // is only runnable when none of them were errors.
    Engine(FlatCircuit fc, const SimOptions& opt, Diagnostics& diags);

    bool runnable() const { return ok_; }
    bool finished() const;
    void step_once();  // one accepted time step; throws SimError on failure
    void run();        // steps until the stop time

    const SimulationRecord& record() const { return rec_; }
    const TimeLine& timeline() const { return tl_; }
    const SymbolicSystem& system() const { return sys_; }
    const FlatCircuit& circuit() const { return fc_; }
    const SimOptions& options() const { return opt_; }
    int factor_count() const { return factor_count_; }

    // Resolves a name to a record row, deriving resistor/junction branch
    // currents from the recorded series on first request. -1 when unknown.
    int row_for(const std::string& name);

    void set_stop(const Rational& stop) { opt_.stop = stop; }

    void save_state(std::ostream& os, bool shortp) const;
    static std::unique_ptr<Engine> load_state(std::istream& is, Diagnostics& diags);

private:
    struct AEntry {
        int row, col, slot;
    };
    // Precomputed lookups for reading a junction's phase advance per step.
    struct WatchIdx {
        int aux = -1;                 // voltage mode: index into the aux rows
        int ua = -1, ub = -1;         // phase mode: unknown indices (-1 = ground)
        int row_a = -1, row_b = -1;   // phase mode: record rows of the nodes
    };

    void index_system(Diagnostics& diags);
    int derive_current(const Occurrence& occ);

    FlatCircuit fc_;
    SimOptions opt_;
    SymbolicSystem sys_;
    SimulationRecord rec_;
    TimeLine tl_;
    SubtermTable main_table_;
    SubtermTable aux_table_;
    std::vector<AEntry> a_entries_;
    std::vector<std::string> a_what_;   // diagnostics label per A entry
    std::vector<int> b_slots_;          // -1 where b is structurally zero
    std::vector<std::string> b_what_;
    std::vector<int> aux_slots_;
    std::vector<int> unknown_rows_;     // unknown index -> record row
    std::vector<int> aux_rows_;         // aux index -> record row
    std::vector<WatchIdx> watch_idx_;
    int gnd_row_ = -1;
    std::vector<double> last_avals_;
    SolvePlan plan_;
    bool have_plan_ = false;
    int factor_count_ = 0;
    Rational hn_cur_;
    int depth_ = 0;  // halvings applied to opt_.step to reach hn_cur_
    int calm_ = 0;
    int n_ = 0;
    bool ok_ = false;
};

}  // namespace vwsim
