#include "vwsim/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "vwsim/diagnostics.hpp"

namespace vwsim {

namespace {

void put_double(std::ostream& os, double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, p - buf);
}

}  // namespace

void write_csv(const SimulationRecord& rec, const std::vector<int>& rows, std::ostream& os) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) os << ',';
        os << rec.names[rows[i]];
    }
    os << '\n';
    std::size_t cols = rec.columns();
    for (std::size_t k = 0; k < cols; ++k) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i) os << ',';
            put_double(os, rec.rows[rows[i]][k]);
        }
        os << '\n';
    }
}

void write_csv(const SimulationRecord& rec, std::ostream& os) {
    std::vector<int> all(rec.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    write_csv(rec, all, os);
}

SimulationRecord read_csv(std::istream& is) {
    SimulationRecord rec;
    std::string line;
    if (!std::getline(is, line)) return rec;
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ','))
        if (rec.add_row(cell) < 0) throw SimError("duplicate column '" + cell + "' in CSV");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = p + line.size();
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            double v = 0;
            auto [np, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) throw SimError("bad CSV value in column " + rec.names[i]);
            rec.rows[i].push_back(v);
            p = np;
            if (p < end && *p == ',') ++p;
        }
        if (p != end) throw SimError("CSV row has extra cells");
    }
    return rec;
}

SimulationRecord extract_records(const SimulationRecord& rec,
                                 const std::vector<std::string>& names) {
    SimulationRecord out;
    for (const auto& name : names) {
        int row = rec.row_of(name);
        if (row < 0) {
            std::string have;
            for (std::size_t i = 0; i < rec.names.size(); ++i) {
                if (i) have += ", ";
                have += rec.names[i];
            }
            throw SimError("no record named '" + name + "'; available: " + have);
        }
        int nr = out.add_row(rec.names[row]);
        if (nr < 0) throw SimError("record '" + name + "' requested twice");
        out.rows[nr] = rec.rows[row];
    }
    return out;
}

}  // namespace vwsim
