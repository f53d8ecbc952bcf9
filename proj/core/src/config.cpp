#include "rsmastat/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace rsmastat {

std::string to_string(ScenarioKind k) {
    return k == ScenarioKind::kCorrelatedRayleigh ? "correlated-rayleigh" : "ula-phase";
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string current;
    for (char ch : text) {
        if (ch == ',') {
            items.push_back(trim(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    items.push_back(trim(current));
    if (items.size() == 1 && items[0].empty()) items.clear();
    return items;
}

struct Entry {
    std::string value;
    std::string where;  // "file:line"
};

[[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& msg) {
    throw ConfigError(e.where + ": " + key + ": " + msg);
}

double as_double(const Entry& e, const std::string& key) {
    double v = 0.0;
    if (!parse_number(trim(e.value), v)) fail(e, key, "expected a number, got '" + e.value + "'");
    return v;
}

int as_int(const Entry& e, const std::string& key) {
    const std::string s = trim(e.value);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        fail(e, key, "expected an integer, got '" + e.value + "'");
    return v;
}

std::uint64_t as_u64(const Entry& e, const std::string& key) {
    const std::string s = trim(e.value);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        fail(e, key, "expected an unsigned 64-bit integer, got '" + e.value + "'");
    return v;
}

bool as_bool(const Entry& e, const std::string& key) {
    const std::string s = trim(e.value);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    fail(e, key, "expected true or false, got '" + e.value + "'");
}

double as_angle(const Entry& e, const std::string& key) {
    try {
        return parse_angle(e.value);
    } catch (const ConfigError& err) {
        fail(e, key, err.what());
    }
}

std::vector<double> as_double_list(const Entry& e, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(e.value)) {
        double v = 0.0;
        if (!parse_number(item, v)) fail(e, key, "expected a number list, bad item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

PhaseInterval as_interval(const Entry& e, const std::string& key) {
    const std::vector<std::string> items = split_list(e.value);
    if (items.size() != 2) fail(e, key, "expected two angles 'lo, hi'");
    PhaseInterval p{as_angle({items[0], e.where}, key), as_angle({items[1], e.where}, key)};
    if (p.lo > p.hi) fail(e, key, "interval lower end exceeds upper end");
    return p;
}

/// "lo:step:hi" (inclusive) or a comma list.
std::vector<double> as_snr_grid(const Entry& e, const std::string& key) {
    const std::string s = trim(e.value);
    if (s.find(':') == std::string::npos) return as_double_list(e, key);
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
    double lo = 0.0, step = 0.0, hi = 0.0;
    if (parts.size() != 3 || !parse_number(parts[0], lo) || !parse_number(parts[1], step) ||
        !parse_number(parts[2], hi))
        fail(e, key, "expected 'lo:step:hi'");
    if (!(step > 0.0) || hi < lo) fail(e, key, "range needs step > 0 and hi >= lo");
    std::vector<double> grid;
    const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
    return grid;
}

using Setter = std::function<void(ExperimentConfig&, const Entry&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"experiment.name", [](ExperimentConfig& c, const Entry& e, const std::string&) { c.name = trim(e.value); }},
        {"experiment.scenario",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             const std::string v = trim(e.value);
             if (v == "correlated-rayleigh") c.scenario = ScenarioKind::kCorrelatedRayleigh;
             else if (v == "ula-phase") c.scenario = ScenarioKind::kUlaPhase;
             else fail(e, k, "expected correlated-rayleigh or ula-phase, got '" + v + "'");
         }},
        {"experiment.n_tx", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.n_tx = as_int(e, k); }},
        {"experiment.users", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.users = as_int(e, k); }},
        {"experiment.snr_db", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.snr_db = as_snr_grid(e, k); }},
        {"experiment.samples", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.samples = as_int(e, k); }},
        {"experiment.draws", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.draws = as_int(e, k); }},
        {"experiment.strategies",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             c.strategies.clear();
             for (const std::string& item : split_list(e.value)) {
                 try {
                     const Strategy s = parse_strategy(item);
                     if (std::find(c.strategies.begin(), c.strategies.end(), s) != c.strategies.end())
                         fail(e, k, "strategy '" + item + "' listed twice");
                     c.strategies.push_back(s);
                 } catch (const PreconditionError&) {
                     fail(e, k, "unknown strategy '" + item + "'");
                 }
             }
         }},
        {"experiment.seed", [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.seed = as_u64(e, k); }},
        {"experiment.eval_samples",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.eval_samples = as_int(e, k); }},
        {"experiment.record_wall_time",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.record_wall_time = as_bool(e, k); }},
        {"experiment.output", [](ExperimentConfig& c, const Entry& e, const std::string&) { c.output = trim(e.value); }},
        {"experiment.aggregate_output",
         [](ExperimentConfig& c, const Entry& e, const std::string&) { c.aggregate_output = trim(e.value); }},
        {"experiment.starts_output",
         [](ExperimentConfig& c, const Entry& e, const std::string&) { c.starts_output = trim(e.value); }},

        {"correlated-rayleigh.magnitude",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.rayleigh.magnitude = as_double(e, k); }},
        {"correlated-rayleigh.phase_interval_rad",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.rayleigh.phase_interval = as_interval(e, k); }},
        {"correlated-rayleigh.phase_inaccuracy_half_width_rad",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             c.rayleigh.phase_inaccuracy_half_width = as_angle(e, k);
         }},

        {"ula-phase.amplitudes",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.ula.amplitudes = as_double_list(e, k); }},
        {"ula-phase.phase_range_rad",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.ula.phase_range = as_angle(e, k); }},
        {"ula-phase.mean_phase_interval_rad",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.ula.mean_phase_interval = as_interval(e, k); }},

        {"optimizer.tolerance",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.optimizer.tolerance = as_double(e, k); }},
        {"optimizer.max_iterations",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.optimizer.max_iterations = as_int(e, k); }},
        {"optimizer.random_restarts",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) { c.optimizer.random_restarts = as_int(e, k); }},
        {"optimizer.common_power_fraction",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             c.optimizer.common_power_fraction = as_double(e, k);
         }},
        {"optimizer.rsma_start_from_sdma",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             c.optimizer.rsma_start_from_sdma = as_bool(e, k);
         }},
        {"optimizer.sdma_start_common_fraction",
         [](ExperimentConfig& c, const Entry& e, const std::string& k) {
             c.optimizer.sdma_start_common_fraction = as_double(e, k);
         }},
    };
    return table;
}

void apply(ExperimentConfig& config, const std::string& qualified, const Entry& entry) {
    const auto& table = setters();
    const auto it = table.find(qualified);
    if (it == table.end()) {
        const std::string section = qualified.substr(0, qualified.find('.'));
        const bool known_section = std::any_of(table.begin(), table.end(), [&](const auto& kv) {
            return kv.first.compare(0, section.size() + 1, section + ".") == 0;
        });
        throw ConfigError(entry.where + ": " + (known_section ? "unknown key '" + qualified + "'"
                                                              : "unknown section '" + section + "'"));
    }
    it->second(config, entry, qualified);
}

}  // namespace

double parse_angle(const std::string& raw) {
    std::string s;
    for (char ch : raw)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    double plain = 0.0;
    if (parse_number(s, plain)) return plain;

    const std::size_t pos = s.find("pi");
    if (pos == std::string::npos || s.find("pi", pos + 2) != std::string::npos)
        throw ConfigError("not an angle: '" + raw + "'");
    std::string coef = s.substr(0, pos);
    std::string tail = s.substr(pos + 2);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    double factor = 1.0;
    if (coef == "-") factor = -1.0;
    else if (coef == "+" || coef.empty()) factor = 1.0;
    else if (!parse_number(coef, factor)) throw ConfigError("not an angle: '" + raw + "'");
    if (!tail.empty()) {
        double divisor = 0.0;
        if (tail[0] != '/' || !parse_number(tail.substr(1), divisor) || divisor == 0.0)
            throw ConfigError("not an angle: '" + raw + "'");
        factor /= divisor;
    }
    return factor * std::numbers::pi;
}

StatsTemplate ExperimentConfig::stats_template() const {
    if (scenario == ScenarioKind::kCorrelatedRayleigh) {
        CorrelatedRayleighTemplate t = rayleigh;
        t.n_tx = n_tx;
        t.users = users;
        return t;
    }
    UlaPhaseTemplate t = ula;
    t.n_tx = n_tx;
    return t;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(!name.empty() && name.find_first_of(",\"\n") == std::string::npos,
            "experiment.name must be nonempty and free of commas and quotes");
    require(n_tx >= 1, "experiment.n_tx must be >= 1");
    require(users >= 1, "experiment.users must be >= 1");
    require(!snr_db.empty(), "experiment.snr_db must list at least one SNR point");
    require(samples >= 1, "experiment.samples must be >= 1");
    require(draws >= 1, "experiment.draws must be >= 1");
    require(eval_samples >= 0, "experiment.eval_samples must be >= 0");
    require(!strategies.empty(), "experiment.strategies must name at least one strategy");
    require(optimizer.tolerance > 0.0, "optimizer.tolerance must be positive");
    require(optimizer.max_iterations >= 1, "optimizer.max_iterations must be >= 1");
    require(optimizer.random_restarts >= 0, "optimizer.random_restarts must be >= 0");
    require(optimizer.common_power_fraction >= 0.0 && optimizer.common_power_fraction <= 1.0,
            "optimizer.common_power_fraction must lie in [0, 1]");
    require(optimizer.sdma_start_common_fraction > 0.0 && optimizer.sdma_start_common_fraction < 1.0,
            "optimizer.sdma_start_common_fraction must lie in (0, 1)");
    if (scenario == ScenarioKind::kCorrelatedRayleigh) {
        require(rayleigh.magnitude >= 0.0 && rayleigh.magnitude <= 1.0,
                "correlated-rayleigh.magnitude must lie in [0, 1]");
        require(rayleigh.phase_inaccuracy_half_width >= 0.0 &&
                    rayleigh.phase_inaccuracy_half_width <= std::numbers::pi + 1e-12,
                "correlated-rayleigh.phase_inaccuracy_half_width_rad must lie in [0, pi]");
    } else {
        require(static_cast<int>(ula.amplitudes.size()) == users,
                "ula-phase.amplitudes must list one amplitude per user");
        require(std::all_of(ula.amplitudes.begin(), ula.amplitudes.end(), [](double b) { return b >= 0.0; }),
                "ula-phase.amplitudes must be nonnegative");
        require(ula.phase_range >= 0.0 && ula.phase_range <= 2.0 * std::numbers::pi + 1e-12,
                "ula-phase.phase_range_rad must lie in [0, 2 pi]");
    }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::vector<std::string>& overrides) {
    ExperimentConfig config;
    config.rayleigh.phase_interval = {-std::numbers::pi, std::numbers::pi};
    config.ula.mean_phase_interval = {-std::numbers::pi, std::numbers::pi};

    std::string section;
    std::string line;
    int line_no = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        const std::size_t hash = line.find('#');
        const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        if (section.empty()) throw ConfigError(where + ": key outside of any section");
        const std::string qualified = section + "." + trim(text.substr(0, eq));
        if (const auto it = seen.find(qualified); it != seen.end())
            throw ConfigError(where + ": duplicate key '" + qualified + "' (first set on line " +
                              std::to_string(it->second) + ")");
        seen[qualified] = line_no;
        apply(config, qualified, {trim(text.substr(eq + 1)), where});
    }
    for (const std::string& o : overrides) {
        const std::size_t eq = o.find('=');
        if (eq == std::string::npos || o.find('.') > eq)
            throw ConfigError("override '" + o + "': expected section.key=value");
        apply(config, trim(o.substr(0, eq)), {trim(o.substr(eq + 1)), "override"});
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse_config(in, path, overrides);
}

}  // namespace rsmastat
