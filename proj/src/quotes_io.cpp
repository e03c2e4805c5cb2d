#include "mvasicek/quotes_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace mvasicek::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw InputError("quotes CSV line " + std::to_string(line) + ": " + what);
}

} // namespace

calib::QuoteSet parse_quotes(std::istream& in, bool percent) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    calib::QuoteSet quotes;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            std::string_view body = row;
            if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);
            if (body != "maturity_years,yield") {
                fail_line(line_no, "expected header 'maturity_years,yield'");
            }
            continue;
        }
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
            fail_line(line_no, "expected two comma-separated fields");
        }
        calib::YieldQuote q;
        if (!parse_double(row.substr(0, comma), q.maturity)) {
            fail_line(line_no, "maturity is not a number");
        }
        if (!parse_double(row.substr(comma + 1), q.yield)) {
            fail_line(line_no, "yield is not a number");
        }
        if (percent) q.yield /= 100.0;
        if (!(q.maturity > 0.0)) {
            fail_line(line_no, "maturity must be positive");
        }
        if (!(q.yield > -0.05)) {
            fail_line(line_no, "yield below the -5% sanity floor (missing --percent?)");
        }
        quotes.push_back(q);
    }
    if (quotes.empty()) {
        throw InputError("quotes CSV: no data rows");
    }
    std::stable_sort(quotes.begin(), quotes.end(),
                     [](const auto& x, const auto& y) { return x.maturity < y.maturity; });
    for (std::size_t k = 1; k < quotes.size(); ++k) {
        if (quotes[k].maturity == quotes[k - 1].maturity) {
            throw InputError("quotes CSV: duplicate maturity " +
                             std::to_string(quotes[k].maturity));
        }
    }
    return quotes;
}

calib::QuoteSet parse_quotes(const std::filesystem::path& path, bool percent) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open quotes file " + path.string());
    }
    return parse_quotes(in, percent);
}

void write_quotes_csv(const calib::QuoteSet& quotes, std::ostream& out) {
    out << "maturity_years,yield\n";
    const auto old_precision = out.precision(17);
    for (const auto& q : quotes) {
        out << q.maturity << ',' << q.yield << '\n';
    }
    out.precision(old_precision);
}

} // namespace mvasicek::io
