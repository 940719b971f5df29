#ifndef SPOTSCHED_CONFIG_HPP
#define SPOTSCHED_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spotsched {

// Minimal `[section]` / `key = value` config format. Lines starting with
// `#` are comments; values keep their raw text until typed access.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Separator-delimited list, trimmed. Policy lists use ";" because the
    // policy grammar itself contains commas.
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const char* separators = ",;") const;

    bool has_section(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace spotsched

#endif
