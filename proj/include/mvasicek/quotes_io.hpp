#pragma once

#include <filesystem>
#include <iosfwd>

#include "mvasicek/calibration.hpp"

namespace mvasicek::io {

/// Reads a quotes CSV with header `maturity_years,yield`. With `percent`
/// the yields are divided by 100. The result is sorted by maturity.
/// Throws InputError (with the line number where relevant) on malformed
/// rows, duplicate maturities or an empty file.
calib::QuoteSet parse_quotes(std::istream& in, bool percent = false);
calib::QuoteSet parse_quotes(const std::filesystem::path& path, bool percent = false);

void write_quotes_csv(const calib::QuoteSet& quotes, std::ostream& out);

} // namespace mvasicek::io
