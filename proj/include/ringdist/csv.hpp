#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ringdist/counts.hpp"
#include "ringdist/errors.hpp"

namespace ringdist {

// Count file schema: header "a1,...,aQ[,l],count", levels literal 0/1, rows
// in any order, duplicate level rows summed, comma-separated, LF endings.

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline CountTable read_counts_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw data_error("missing header row", 1);

    const auto header = detail::split_fields(line);
    int leaves = 0;
    bool root = false;
    {
        std::size_t i = 0;
        while (i < header.size()) {
            const auto name = detail::trim(header[i]);
            if (name != "a" + std::to_string(i + 1)) break;
            ++i;
        }
        leaves = static_cast<int>(i);
        if (leaves < 1)
            throw data_error("header must start with columns a1,a2,...", 1);
        if (i < header.size() && detail::trim(header[i]) == "l") {
            root = true;
            ++i;
        }
        if (i + 1 != header.size() || detail::trim(header[i]) != "count")
            throw data_error("header must end with a single 'count' column", 1);
    }
    if (leaves + (root ? 1 : 0) > kMaxVars)
        throw capacity_error("too many level columns");

    CountTable out{leaves, root,
                   std::vector<double>(std::size_t{1} << (root ? leaves + 1 : leaves), 0.0)};
    const std::size_t fields_expected = static_cast<std::size_t>(out.vars()) + 1;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != fields_expected)
            throw data_error("expected " + std::to_string(fields_expected) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        std::size_t cell = 0;
        for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
            const auto f = detail::trim(fields[i]);
            if (f == "1")
                cell |= std::size_t{1} << i;
            else if (f != "0")
                throw data_error("level fields must be 0 or 1", line_no);
        }
        const auto f = detail::trim(fields.back());
        double count = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), count);
        if (ec != std::errc{} || ptr != f.data() + f.size() || !(count >= 0.0))
            throw data_error("count field must be a nonnegative number", line_no);
        out.counts[cell] += count;
    }
    return out;
}

inline CountTable read_counts_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open '" + path + "'");
    return read_counts_csv(in);
}

// Writes numeric values at 12 significant digits (exact for integer counts).
inline void write_counts_csv(std::ostream& out, const CountTable& ct) {
    detail::check_count_table(ct);
    for (int q = 0; q < ct.leaves; ++q) out << 'a' << q + 1 << ',';
    if (ct.root_observed) out << "l,";
    out << "count\n";
    char buf[64];
    for (std::size_t t = 0; t < ct.counts.size(); ++t) {
        for (int q = 0; q < ct.vars(); ++q) out << ((t >> q) & 1) << ',';
        std::snprintf(buf, sizeof buf, "%.12g", ct.counts[t]);
        out << buf << '\n';
    }
    out.flush();
}

}  // namespace ringdist
