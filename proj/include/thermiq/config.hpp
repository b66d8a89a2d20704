#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thermiq {

/// Flat `key = value` text. A `[name]` header prefixes the keys that follow
/// with `name.`; `#` starts a comment anywhere on a line.
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;  // 0 for overrides
    };

    static Config parse(std::string_view text, const std::string& source = "<config>",
                        const std::filesystem::path& base_dir = {});
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    void erase(const std::string& key);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    std::optional<std::string> find(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Relative paths resolve against the directory of the config file.
    std::optional<std::filesystem::path> get_path(const std::string& key) const;

    const std::string& source() const { return source_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }
    void set_base_dir(const std::filesystem::path& dir) { base_dir_ = dir; }

    /// Canonical text: sections in key order, one entry per line.
    std::string serialize() const;

private:
    // "source:line: " prefix for diagnostics
    std::string where(const std::string& key) const;

    std::map<std::string, Entry> entries_;
    std::string source_;
    std::filesystem::path base_dir_;
};

}  // namespace thermiq
