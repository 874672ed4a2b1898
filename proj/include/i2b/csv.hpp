#pragma once
// Small delimited-text reader for the edge/label/call input files.
// Comma-separated, one header row, no quoting (account names and contract
// ids never contain commas). Parse failures carry the 1-based line number.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2b {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CsvReader {
public:
    // Opens `path` and validates that the header starts with the columns in
    // `required` (extra trailing columns are permitted).
    CsvReader(const std::string& path, const std::vector<std::string>& required)
        : in_(path), path_(path) {
        if (!in_) throw CsvError("cannot open " + path);
        std::string header;
        if (!std::getline(in_, header)) throw CsvError(path + ": missing header row");
        ++line_no_;
        strip_cr(header);
        const auto cols = split(header);
        if (cols.size() < required.size())
            throw CsvError(path + ": header has " + std::to_string(cols.size()) +
                           " columns, expected at least " + std::to_string(required.size()));
        for (size_t i = 0; i < required.size(); ++i) {
            if (cols[i] != required[i])
                throw CsvError(path + ": header column " + std::to_string(i + 1) + " is '" +
                               cols[i] + "', expected '" + required[i] + "'");
        }
        n_required_ = required.size();
    }

    // Reads the next non-empty row into `fields`; returns false at EOF.
    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            strip_cr(line);
            if (line.empty()) continue;
            fields = split(line);
            if (fields.size() < n_required_)
                fail("has " + std::to_string(fields.size()) + " fields, expected at least " +
                     std::to_string(n_required_));
            return true;
        }
        return false;
    }

    size_t line_no() const { return line_no_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw CsvError(path_ + ":" + std::to_string(line_no_) + ": " + what);
    }

    double parse_double(const std::string& s) const {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail("invalid number '" + s + "'");
        return v;
    }

    uint64_t parse_count(const std::string& s) const {
        uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail("invalid count '" + s + "'");
        return v;
    }

private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }

    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) out.push_back(field);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    }

    std::ifstream in_;
    std::string path_;
    size_t line_no_ = 0;
    size_t n_required_ = 0;
};

}  // namespace i2b
