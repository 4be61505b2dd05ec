#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "solvers.hpp"

namespace ssopga {

/// Error while reading a trace file; carries the file name and 1-based line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// I/O failure (unwritable directory, unreadable file).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view trace_csv_header =
    "iter,energy,grad_inf_norm,iterate_inf_norm,mult_min,mult_max,stop_reason";

/// Traces of problems up to this dimension carry the full iterate in the CSV.
inline constexpr std::size_t trace_csv_full_vector_dim = 8;

/// 17 significant digits, enough to round-trip any double. NaN is "nan".
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Fewest significant digits that round-trip, general notation
/// (0.0005 rather than 0.00050000000000000001 or 5e-04).
inline std::string format_shortest(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[64];
    for (int prec = 1;; ++prec) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, prec);
        double back = 0.0;
        std::from_chars(buf, res.ptr, back);
        if (back == v || prec >= 17) return std::string(buf, res.ptr);
    }
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::string join_vector(std::span<const double> v, char sep = ';')
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += format_double(v[i]);
    }
    return out;
}

inline Vector split_vector(std::string_view s, char sep = ';')
{
    Vector out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        const std::string_view tok =
            s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        std::size_t b = 0;
        std::size_t e = tok.size();
        while (b < e && (tok[b] == ' ' || tok[b] == '\t')) ++b;
        while (e > b && (tok[e - 1] == ' ' || tok[e - 1] == '\t' || tok[e - 1] == '\r')) --e;
        out.push_back(parse_double(tok.substr(b, e - b)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline void write_trace_csv(std::ostream& os, const IterationTrace& trace)
{
    os << trace_csv_header << '\n';
    const bool full = trace.dimension <= trace_csv_full_vector_dim;
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const IterationRecord& r = trace.records[k];
        os << r.iter << ',' << format_double(r.energy) << ',' << format_double(r.grad_inf_norm)
           << ',';
        if (full && !r.iterate.empty()) {
            os << join_vector(r.iterate);
        } else {
            os << format_double(r.iterate_inf_norm);
        }
        os << ',';
        if (r.mult_min) os << format_double(*r.mult_min);
        os << ',';
        if (r.mult_max) os << format_double(*r.mult_max);
        os << ',';
        if (k + 1 == trace.records.size()) os << to_string(trace.stop_reason);
        os << '\n';
    }
}

inline std::string trace_to_csv(const IterationTrace& trace)
{
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
}

/*
 * Reads a trace CSV back. The iterate column becomes `iterate` (one value
 * when the file held an inf-norm). Method and tolerance are not part of the
 * file and are left at their defaults.
 */
inline IterationTrace read_trace_csv(std::istream& is, const std::string& name)
{
    IterationTrace trace;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw ParseError(name, 1, "empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != trace_csv_header) throw ParseError(name, lineno, "unexpected header");

    bool have_reason = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (have_reason) throw ParseError(name, lineno, "row after the final (stop_reason) row");
        std::vector<std::string_view> cols;
        std::string_view sv(line);
        std::size_t pos = 0;
        while (true) {
            const std::size_t c = sv.find(',', pos);
            cols.push_back(sv.substr(pos, c == std::string_view::npos ? sv.npos : c - pos));
            if (c == std::string_view::npos) break;
            pos = c + 1;
        }
        if (cols.size() != 7) {
            throw ParseError(name, lineno,
                             "expected 7 columns, found " + std::to_string(cols.size()));
        }
        try {
            IterationRecord r;
            const double iter = parse_double(cols[0]);
            if (iter < 0 || iter != std::floor(iter)) throw std::invalid_argument("bad iter");
            r.iter = static_cast<std::size_t>(iter);
            r.energy = parse_double(cols[1]);
            r.grad_inf_norm = parse_double(cols[2]);
            r.iterate = split_vector(cols[3]);
            r.iterate_inf_norm = inf_norm(r.iterate);
            if (!cols[4].empty()) r.mult_min = parse_double(cols[4]);
            if (!cols[5].empty()) r.mult_max = parse_double(cols[5]);
            if (!cols[6].empty()) {
                trace.stop_reason = parse_stop_reason(cols[6]);
                have_reason = true;
            }
            trace.records.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw ParseError(name, lineno, e.what());
        }
    }
    if (trace.records.empty()) throw ParseError(name, lineno, "no data rows");
    trace.dimension = trace.records.front().iterate.size();
    return trace;
}

inline IterationTrace read_trace_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_trace_csv(in, path.string());
}

/// Writes via a sibling temp file and rename, so readers never see partial
/// content and concurrent writers never interleave.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    static std::atomic<unsigned long> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ssopga
