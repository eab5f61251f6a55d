#include "fdia/casefile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fdia/csv.hpp"
#include "fdia/error.hpp"

namespace fdia {

namespace {

struct MatRow {
    std::vector<double> values;
    int line;
};

// Cursor over MATPOWER-style text. Tracks line/column for error messages
// and strips '%' comments.
class MatpowerScanner {
public:
    explicit MatpowerScanner(std::string_view source) {
        std::string current;
        int line_no = 1;
        for (std::size_t i = 0; i <= source.size(); ++i) {
            if (i == source.size() || source[i] == '\n') {
                lines_.push_back(std::move(current));
                current.clear();
                ++line_no;
            } else if (source[i] != '\r') {
                current.push_back(source[i]);
            }
        }
        (void)line_no;
        for (auto& l : lines_) {
            const std::size_t pct = l.find('%');
            if (pct != std::string::npos) l.erase(pct);
        }
    }

    static bool key_boundary(const std::string& line, std::size_t pos, std::size_t key_size) {
        const std::size_t after = pos + key_size;
        if (after >= line.size()) return false;
        const unsigned char c = static_cast<unsigned char>(line[after]);
        return !(std::isalnum(c) || c == '_' || c == '.');
    }

    // finds `mpc.<field> =` and returns the text after '=' up to ';',
    // along with the line where the value starts
    bool find_scalar(const std::string& field, std::string& out, int& line) const {
        const std::string key = "mpc." + field;
        for (std::size_t i = 0; i < lines_.size(); ++i) {
            const std::size_t pos = lines_[i].find(key);
            if (pos == std::string::npos || !key_boundary(lines_[i], pos, key.size())) continue;
            const std::size_t eq = lines_[i].find('=', pos + key.size());
            if (eq == std::string::npos) continue;
            std::size_t end = lines_[i].find(';', eq);
            if (end == std::string::npos) end = lines_[i].size();
            out = lines_[i].substr(eq + 1, end - eq - 1);
            line = static_cast<int>(i + 1);
            return true;
        }
        return false;
    }

    // parses `mpc.<field> = [ rows... ];` where rows are whitespace-separated
    // numbers, one row per line, optionally terminated by ';'
    bool find_matrix(const std::string& field, std::vector<MatRow>& rows) const {
        const std::string key = "mpc." + field;
        for (std::size_t i = 0; i < lines_.size(); ++i) {
            std::size_t pos = lines_[i].find(key);
            if (pos == std::string::npos || !key_boundary(lines_[i], pos, key.size())) continue;
            const std::size_t eq = lines_[i].find('=', pos + key.size());
            if (eq == std::string::npos) continue;
            const std::size_t open = lines_[i].find('[', eq);
            if (open == std::string::npos)
                throw ParseError("expected '[' after mpc." + field,
                                 static_cast<int>(i + 1), static_cast<int>(eq + 1));
            std::string tail = lines_[i].substr(open + 1);
            std::size_t line_idx = i;
            bool closed = false;
            while (!closed) {
                const std::size_t close = tail.find(']');
                std::string body = (close == std::string::npos) ? tail : tail.substr(0, close);
                if (close != std::string::npos) closed = true;
                parse_row(body, static_cast<int>(line_idx + 1), rows);
                if (!closed) {
                    ++line_idx;
                    if (line_idx >= lines_.size())
                        throw ParseError("unterminated matrix mpc." + field,
                                         static_cast<int>(i + 1), static_cast<int>(open + 1));
                    tail = lines_[line_idx];
                }
            }
            return true;
        }
        return false;
    }

private:
    static void parse_row(const std::string& body, int line, std::vector<MatRow>& rows) {
        // a physical line may hold several ';'-separated rows
        std::size_t start = 0;
        while (start <= body.size()) {
            std::size_t semi = body.find(';', start);
            const std::string chunk =
                body.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
            MatRow row{{}, line};
            std::size_t col = 0;
            while (col < chunk.size()) {
                while (col < chunk.size() && std::isspace(static_cast<unsigned char>(chunk[col])))
                    ++col;
                if (col >= chunk.size()) break;
                std::size_t end = col;
                while (end < chunk.size() && !std::isspace(static_cast<unsigned char>(chunk[end])))
                    ++end;
                const std::string_view token(chunk.data() + col, end - col);
                double v = 0.0;
                auto res = std::from_chars(token.data(), token.data() + token.size(), v);
                if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
                    throw ParseError("expected a number, got '" + std::string(token) + "'",
                                     line, static_cast<int>(col + 1));
                row.values.push_back(v);
                col = end;
            }
            if (!row.values.empty()) rows.push_back(std::move(row));
            if (semi == std::string::npos) break;
            start = semi + 1;
        }
    }

    std::vector<std::string> lines_;
};

CaseSystem parse_matpower(std::string_view source) {
    MatpowerScanner scanner(source);
    CaseSystem sys;

    // case name from `function mpc = <name>` when present
    {
        std::string text(source);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const std::size_t fn = line.find("function");
            if (fn == std::string::npos) continue;
            const std::size_t eq = line.find('=', fn);
            if (eq == std::string::npos) break;
            std::string name = line.substr(eq + 1);
            name.erase(0, name.find_first_not_of(" \t"));
            const std::size_t end = name.find_last_not_of(" \t;\r");
            sys.name = (end == std::string::npos) ? "" : name.substr(0, end + 1);
            break;
        }
    }

    std::string scalar;
    int line = 0;
    if (!scanner.find_scalar("baseMVA", scalar, line))
        throw ParseError("missing mpc.baseMVA block");
    try {
        std::string trimmed = scalar;
        trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(),
                                     [](unsigned char c) { return std::isspace(c); }),
                      trimmed.end());
        sys.base_mva = parse_double(trimmed, "baseMVA");
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line, 1);
    }

    std::vector<MatRow> bus_rows;
    if (!scanner.find_matrix("bus", bus_rows)) throw ParseError("missing mpc.bus block");
    std::vector<MatRow> branch_rows;
    if (!scanner.find_matrix("branch", branch_rows)) throw ParseError("missing mpc.branch block");

    for (const auto& row : bus_rows) {
        if (row.values.size() < 3)
            throw ParseError("bus row needs at least id, type, Pd", row.line, 1);
        Bus bus;
        bus.id = static_cast<int>(row.values[0]);
        const int type_code = static_cast<int>(row.values[1]);
        bus.type = (type_code == 3) ? BusType::slack : (type_code == 2 ? BusType::pv : BusType::pq);
        bus.pd = row.values[2];
        bus.base_kv = row.values.size() > 9 ? row.values[9] : 0.0;
        if (bus.type == BusType::slack) {
            if (sys.slack_bus != 0)
                throw SemanticError("multiple slack buses: bus " + std::to_string(sys.slack_bus)
                                    + " and bus " + std::to_string(bus.id));
            sys.slack_bus = bus.id;
        }
        sys.buses.push_back(bus);
    }

    int meter = 0;
    for (const auto& row : branch_rows) {
        if (row.values.size() < 4)
            throw ParseError("branch row needs at least from, to, r, x", row.line, 1);
        const int status = row.values.size() > 10 ? static_cast<int>(row.values[10]) : 1;
        if (status == 0) continue; // out-of-service branch carries no meter
        Branch br;
        br.from = static_cast<int>(row.values[0]);
        br.to = static_cast<int>(row.values[1]);
        br.x = row.values[3];
        br.meter_id = meter++;
        sys.branches.push_back(br);
    }
    return sys;
}

CaseSystem parse_native_json(std::string_view source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(source);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        CaseSystem sys;
        sys.name = j.at("name").get<std::string>();
        sys.base_mva = j.at("base_mva").get<double>();
        sys.slack_bus = j.at("slack_bus").get<int>();
        for (const auto& jb : j.at("buses")) {
            Bus bus;
            bus.id = jb.at("id").get<int>();
            const std::string type = jb.at("type").get<std::string>();
            if (type == "slack")
                bus.type = BusType::slack;
            else if (type == "pv")
                bus.type = BusType::pv;
            else if (type == "pq")
                bus.type = BusType::pq;
            else
                throw ParseError("unknown bus type '" + type + "'");
            bus.pd = jb.at("pd").get<double>();
            bus.base_kv = jb.value("base_kv", 0.0);
            sys.buses.push_back(bus);
        }
        int meter = 0;
        for (const auto& jb : j.at("branches")) {
            Branch br;
            br.from = jb.at("from").get<int>();
            br.to = jb.at("to").get<int>();
            br.x = jb.at("x").get<double>();
            br.meter_id = meter++;
            sys.branches.push_back(br);
        }
        return sys;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad case JSON: ") + e.what());
    }
}

// connected component containing the first bus, by adjacency over branches
std::vector<bool> reachable_from_first(const CaseSystem& sys) {
    std::vector<bool> seen(sys.buses.size(), false);
    if (sys.buses.empty()) return seen;
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < sys.buses.size(); ++i) index[sys.buses[i].id] = i;
    std::vector<std::vector<std::size_t>> adj(sys.buses.size());
    for (const auto& br : sys.branches) {
        auto fi = index.find(br.from);
        auto ti = index.find(br.to);
        if (fi == index.end() || ti == index.end()) continue;
        adj[fi->second].push_back(ti->second);
        adj[ti->second].push_back(fi->second);
    }
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

} // namespace

std::size_t CaseSystem::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return i;
    throw SemanticError("unknown bus id " + std::to_string(bus_id));
}

std::vector<std::string> validate(const CaseSystem& sys) {
    std::vector<std::string> findings;

    std::set<int> ids;
    for (const auto& bus : sys.buses) {
        if (bus.id < 1)
            findings.push_back("bus " + std::to_string(bus.id) + ": id must be >= 1");
        if (!std::isfinite(bus.pd))
            findings.push_back("bus " + std::to_string(bus.id) + ": Pd is not finite");
        if (!ids.insert(bus.id).second)
            findings.push_back("bus " + std::to_string(bus.id) + ": duplicate id");
    }

    int slack_count = 0;
    for (const auto& bus : sys.buses)
        if (bus.type == BusType::slack) ++slack_count;
    if (slack_count == 0)
        findings.push_back("no slack bus designated");
    else if (slack_count > 1)
        findings.push_back(std::to_string(slack_count) + " slack buses, expected exactly one");
    if (slack_count >= 1 && ids.count(sys.slack_bus) == 0)
        findings.push_back("slack_bus " + std::to_string(sys.slack_bus)
                           + " does not reference an existing bus");

    for (const auto& br : sys.branches) {
        const std::string label = "branch " + std::to_string(br.meter_id) + " ("
                                  + std::to_string(br.from) + "-" + std::to_string(br.to) + ")";
        if (br.from == br.to) findings.push_back(label + ": endpoints must differ");
        if (ids.count(br.from) == 0)
            findings.push_back(label + ": references absent bus " + std::to_string(br.from));
        if (ids.count(br.to) == 0)
            findings.push_back(label + ": references absent bus " + std::to_string(br.to));
        if (!(br.x > 0.0))
            findings.push_back(label + ": reactance must be > 0, got " + format_double(br.x));
    }

    if (!sys.buses.empty()) {
        const auto seen = reachable_from_first(sys);
        std::vector<int> stranded;
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) stranded.push_back(sys.buses[i].id);
        if (!stranded.empty()) {
            std::string msg = "network is disconnected; unreachable buses:";
            for (int id : stranded) msg += " " + std::to_string(id);
            findings.push_back(msg);
        }
    } else {
        findings.push_back("case has no buses");
    }

    return findings;
}

CaseSystem parse_case(std::string_view source, CaseFormat format) {
    if (source.empty()) throw ParseError("empty case source");
    CaseSystem sys = (format == CaseFormat::matpower_subset) ? parse_matpower(source)
                                                             : parse_native_json(source);
    const auto findings = validate(sys);
    if (!findings.empty()) {
        std::string msg = "invalid case";
        if (!sys.name.empty()) msg += " '" + sys.name + "'";
        for (const auto& f : findings) msg += "; " + f;
        throw SemanticError(msg);
    }
    return sys;
}

std::string serialize_case(const CaseSystem& sys) {
    nlohmann::json j;
    j["name"] = sys.name;
    j["base_mva"] = sys.base_mva;
    j["slack_bus"] = sys.slack_bus;
    j["buses"] = nlohmann::json::array();
    for (const auto& bus : sys.buses) {
        const char* type = bus.type == BusType::slack ? "slack"
                           : bus.type == BusType::pv  ? "pv"
                                                      : "pq";
        j["buses"].push_back({{"id", bus.id},
                              {"type", type},
                              {"pd", bus.pd},
                              {"base_kv", bus.base_kv}});
    }
    j["branches"] = nlohmann::json::array();
    for (const auto& br : sys.branches)
        j["branches"].push_back({{"from", br.from}, {"to", br.to}, {"x", br.x}});
    return j.dump(2);
}

std::vector<int> default_k_grid(const std::string& case_name) {
    if (case_name == "case14") return {3, 5, 8};
    if (case_name == "case30") return {6, 11, 15};
    if (case_name == "case118") return {12, 26, 35};
    if (case_name == "case300") return {18, 25, 40};
    throw ConfigError("no default compromised-meter grid for '" + case_name + "'");
}

} // namespace fdia
