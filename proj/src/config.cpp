#include "lvsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lvsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not an unsigned integer: " + v);
    }
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const std::string& item : split_list(v)) out.push_back(to_int(key, item));
    if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
    return out;
}

}  // namespace

void apply_config_entry(ConfigFile& cfg, const std::string& key, const std::string& value) {
    SimConfig& s = cfg.sim;
    SweepGrid& g = cfg.sweep;
    if (key == "n_nodes") s.n_nodes = to_int(key, value);
    else if (key == "area_side") s.area_side = to_double(key, value);
    else if (key == "slotframe_length") s.slotframe_length = to_int(key, value);
    else if (key == "slot_duration") s.slot_duration = to_double(key, value);
    else if (key == "channels") s.channels = to_int(key, value);
    else if (key == "burst_times") {
        s.burst_times.clear();
        for (const std::string& item : split_list(value))
            s.burst_times.push_back(to_double(key, item));
    } else if (key == "packets_per_burst") s.packets_per_burst = to_int(key, value);
    else if (key == "queue_capacity") s.queue_capacity = to_int(key, value);
    else if (key == "max_mac_retries") s.max_mac_retries = to_int(key, value);
    else if (key == "housekeeping_period") s.housekeeping_period = to_double(key, value);
    else if (key == "otf_threshold") s.otf_threshold = to_int(key, value);
    else if (key == "rpl_parents") s.rpl_parents = to_int(key, value);
    else if (key == "cycles_per_run") s.cycles_per_run = to_int(key, value);
    else if (key == "scheduler") s.scheduler = parse_scheduler(value);
    else if (key == "mode") s.mode = parse_mode(value);
    else if (key == "rng_seed") s.rng_seed = to_u64(key, value);
    else if (key == "otf_alpha") s.otf_alpha = to_double(key, value);
    else if (key == "min_good_neighbors") s.min_good_neighbors = to_int(key, value);
    else if (key == "energy_tx_data_rx_ack") s.energy.tx_data_rx_ack = to_double(key, value);
    else if (key == "energy_rx_data_tx_ack") s.energy.rx_data_tx_ack = to_double(key, value);
    else if (key == "energy_idle_listen") s.energy.idle_listen = to_double(key, value);
    else if (key == "energy_sleep") s.energy.sleep = to_double(key, value);
    else if (key == "sweep_schedulers") {
        g.schedulers.clear();
        for (const std::string& item : split_list(value))
            g.schedulers.push_back(parse_scheduler(item));
        if (g.schedulers.empty()) throw std::invalid_argument("sweep_schedulers: empty list");
    } else if (key == "sweep_thresholds") g.thresholds = to_int_list(key, value);
    else if (key == "sweep_parents") g.parents = to_int_list(key, value);
    else if (key == "sweep_bursts") g.bursts = to_int_list(key, value);
    else if (key == "seeds") g.seeds = to_int(key, value);
    else if (key == "jobs") g.jobs = to_int(key, value);
    else throw std::invalid_argument("unknown config key: " + key);
}

ConfigFile parse_config_text(const std::string& text) {
    ConfigFile cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace lvsim
