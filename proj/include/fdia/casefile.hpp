#ifndef FDIA_CASEFILE_HPP
#define FDIA_CASEFILE_HPP

#include <string>
#include <string_view>
#include <vector>

namespace fdia {

enum class BusType { slack, pv, pq };

struct Bus {
    int id = 0;
    BusType type = BusType::pq;
    double pd = 0.0;      // active load, MW
    double base_kv = 0.0;
};

struct Branch {
    int from = 0;
    int to = 0;
    double x = 0.0;       // per-unit reactance
    int meter_id = 0;     // ordinal position after status filtering
};

// One parsed test system. Branch order (and therefore meter numbering)
// follows the source file.
struct CaseSystem {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    int slack_bus = 0;

    std::size_t bus_index(int bus_id) const; // throws SemanticError on unknown id
};

enum class CaseFormat { matpower_subset, native_json };

// Parses case text into a validated CaseSystem. Syntax problems throw
// ParseError with a position; invariant violations throw SemanticError
// naming the offending element.
CaseSystem parse_case(std::string_view source, CaseFormat format);

// Bundled IEEE systems: case14, case30, case118, case300.
CaseSystem builtin_case(const std::string& name);
const std::vector<std::string>& builtin_case_names();

// Per-case compromised-meter grids used by the default experiment configs.
std::vector<int> default_k_grid(const std::string& case_name);

// All invariant violations, one human-readable finding each. Empty means valid.
std::vector<std::string> validate(const CaseSystem& system);

// Native JSON form; parse_case(serialize_case(c), native_json) == c.
std::string serialize_case(const CaseSystem& system);

} // namespace fdia

#endif
