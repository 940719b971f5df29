#include "spotsched/config.hpp"

#include <charconv>
#include <istream>

#include "spotsched/common.hpp"

namespace spotsched {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
    ConfigFile cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(text.substr(1, text.size() - 2));
            cfg.sections_[section];
            continue;
        }
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw ConfigError("config: missing [" + section + "] " + key);
    return s->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError("config: [" + section + "] " + key + " is not a number: '" +
                          raw + "'");
    return value;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
    double v = get_double(section, key, fallback);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config: [" + section + "] " + key + " must be an integer");
    return i;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ConfigError("config: [" + section + "] " + key +
                          " is not an unsigned integer: '" + raw + "'");
    return value;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError("config: [" + section + "] " + key + " is not a boolean: '" + raw +
                      "'");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key,
                                              const char* separators) const {
    std::vector<std::string> out;
    if (!has(section, key)) return out;
    const std::string raw = get(section, key);
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find_first_of(separators, start);
        if (end == std::string::npos) end = raw.size();
        std::string item = trim(std::string_view(raw).substr(start, end - start));
        if (!item.empty()) out.push_back(item);
        start = end + 1;
    }
    return out;
}

}  // namespace spotsched
