#include "thermiq/config.hpp"

#include <cmath>

#include <fmt/format.h>

#include "text_util.hpp"
#include "thermiq/error.hpp"

namespace thermiq {

using detail::trim;

Config Config::parse(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
    Config cfg;
    cfg.source_ = source;
    cfg.base_dir_ = base_dir;
    std::string section;
    int lineno = 0;
    for (auto raw : detail::split_lines(text)) {
        ++lineno;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(source, lineno, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ParseError(source, lineno, "empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(source, lineno, "missing key");
        std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (cfg.entries_.count(full)) throw ParseError(source, lineno, fmt::format("duplicate key '{}'", full));
        cfg.entries_[full] = Entry{std::string(trim(line.substr(eq + 1))), lineno};
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    return parse(detail::read_file(path), path.string(), path.parent_path());
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0}; }

void Config::erase(const std::string& key) { entries_.erase(key); }

std::string Config::where(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) return fmt::format("{}: override: ", source_);
    return fmt::format("{}:{}: ", source_, it->second.line);
}

std::optional<std::string> Config::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    double d = 0.0;
    if (!detail::try_parse_double(*v, d) || !std::isfinite(d))
        throw ConfigError(where(key) + fmt::format("'{}' expects a number, got '{}'", key, *v));
    return d;
}

int Config::get_int(const std::string& key, int fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    double d = 0.0;
    if (!detail::try_parse_double(*v, d) || d != std::floor(d) || std::abs(d) > 1e9)
        throw ConfigError(where(key) + fmt::format("'{}' expects an integer, got '{}'", key, *v));
    return static_cast<int>(d);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    if (*v == "yes" || *v == "true" || *v == "on" || *v == "1") return true;
    if (*v == "no" || *v == "false" || *v == "off" || *v == "0") return false;
    throw ConfigError(where(key) + fmt::format("'{}' expects yes/no, got '{}'", key, *v));
}

std::optional<std::filesystem::path> Config::get_path(const std::string& key) const {
    auto v = find(key);
    if (!v || v->empty()) return std::nullopt;
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p;
}

std::string Config::serialize() const {
    std::string out;
    std::string current;
    bool first = true;
    // top-level keys first, then one block per section
    for (const auto& [key, e] : entries_)
        if (key.find('.') == std::string::npos) out += fmt::format("{} = {}\n", key, e.value);
    for (const auto& [key, e] : entries_) {
        auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        auto sec = key.substr(0, dot);
        if (first || sec != current) {
            out += fmt::format("\n[{}]\n", sec);
            current = sec;
            first = false;
        }
        out += fmt::format("{} = {}\n", key.substr(dot + 1), e.value);
    }
    return out;
}

}  // namespace thermiq
