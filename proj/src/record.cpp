#include "qest/record.hpp"

#include <charconv>
#include <stdexcept>

namespace qest {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if(first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    double            value{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if(ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + t + "' as a number");
    return value;
}

long long parse_integer(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    long long         value{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if(ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + t + "' as an integer");
    return value;
}

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    std::size_t         start = 0;
    while(start <= text.size()) {
        const auto end = text.find(',', start);
        const auto tok = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if(!trim(tok).empty()) out.push_back(parse_double(tok, what));
        if(end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

KeyValueRecord KeyValueRecord::parse(std::string_view text) {
    KeyValueRecord rec;
    auto add_item = [&rec](std::string_view item) {
        const std::string t = trim(item);
        if(t.empty()) return;
        const auto eq = t.find('=');
        if(eq == std::string::npos) throw std::invalid_argument("record: expected key=value, got '" + t + "'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if(key.empty()) throw std::invalid_argument("record: empty key in '" + t + "'");
        if(rec.values_.contains(key)) throw std::invalid_argument("record: duplicate key '" + key + "'");
        rec.values_[key] = trim(std::string_view(t).substr(eq + 1));
    };

    std::size_t line_start = 0;
    while(line_start <= text.size()) {
        const auto line_end = text.find('\n', line_start);
        auto       line     = text.substr(line_start, line_end == std::string_view::npos ? std::string_view::npos : line_end - line_start);
        if(auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t pos = 0;
        while(pos <= line.size()) {
            const auto end = line.find(';', pos);
            add_item(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
            if(end == std::string_view::npos) break;
            pos = end + 1;
        }
        if(line_end == std::string_view::npos) break;
        line_start = line_end + 1;
    }
    return rec;
}

std::string KeyValueRecord::get(const std::string &key) const {
    auto it = values_.find(key);
    if(it == values_.end()) throw std::invalid_argument("record: missing key '" + key + "'");
    return it->second;
}

std::string KeyValueRecord::get(const std::string &key, const std::string &fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueRecord::number(const std::string &key) const { return parse_double(get(key), key); }

double KeyValueRecord::number(const std::string &key, double fallback) const { return has(key) ? number(key) : fallback; }

long long KeyValueRecord::integer(const std::string &key) const { return parse_integer(get(key), key); }

long long KeyValueRecord::integer(const std::string &key, long long fallback) const { return has(key) ? integer(key) : fallback; }

std::vector<double> KeyValueRecord::numbers(const std::string &key) const { return parse_number_list(get(key), key); }

std::vector<std::string> KeyValueRecord::strings(const std::string &key) const {
    std::vector<std::string> out;
    const std::string        v = get(key);
    std::size_t              start = 0;
    while(true) {
        const auto end = v.find(',', start);
        auto       tok = trim(std::string_view(v).substr(start, end == std::string::npos ? std::string::npos : end - start));
        if(!tok.empty()) out.push_back(std::move(tok));
        if(end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

std::string KeyValueRecord::to_string() const {
    std::string out;
    if(auto it = values_.find("kind"); it != values_.end()) out = "kind=" + it->second;
    for(const auto &[k, v] : values_) {
        if(k == "kind") continue;
        if(!out.empty()) out += ';';
        out += k + "=" + v;
    }
    return out;
}

} // namespace qest
