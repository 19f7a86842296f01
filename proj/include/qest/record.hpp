#pragma once

// Plain-text key=value records.
//
// A record is a set of `key=value` pairs separated by ';' or newlines.
// Values holding lists are comma-separated. `#` starts a comment that runs
// to the end of the line.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qest {

class KeyValueRecord {
    public:
    KeyValueRecord() = default;

    static KeyValueRecord parse(std::string_view text);

    [[nodiscard]] bool        has(const std::string &key) const { return values_.contains(key); }
    [[nodiscard]] std::string get(const std::string &key) const;
    [[nodiscard]] std::string get(const std::string &key, const std::string &fallback) const;
    [[nodiscard]] double      number(const std::string &key) const;
    [[nodiscard]] double      number(const std::string &key, double fallback) const;
    [[nodiscard]] long long   integer(const std::string &key) const;
    [[nodiscard]] long long   integer(const std::string &key, long long fallback) const;
    [[nodiscard]] std::vector<double> numbers(const std::string &key) const;
    [[nodiscard]] std::vector<std::string> strings(const std::string &key) const;

    void set(const std::string &key, std::string value) { values_[key] = std::move(value); }

    /// `kind` first, remaining keys sorted, joined with ';'.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] const std::map<std::string, std::string> &values() const { return values_; }

    private:
    std::map<std::string, std::string> values_;
};

double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
std::vector<double> parse_number_list(std::string_view text, std::string_view what);
std::string trim(std::string_view s);

} // namespace qest
