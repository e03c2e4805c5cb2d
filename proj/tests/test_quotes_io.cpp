#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mvasicek/calibration.hpp"
#include "mvasicek/quotes_io.hpp"

namespace mvasicek::io {
namespace {

calib::QuoteSet parse(const std::string& text, bool percent = false) {
    std::istringstream in(text);
    return parse_quotes(in, percent);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

TEST(ParseQuotes, SingleRow) {
    const auto q = parse("maturity_years,yield\n1.0,0.024\n");
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].maturity, 1.0);
    EXPECT_EQ(q[0].yield, 0.024);
}

TEST(ParseQuotes, PercentFlag) {
    const auto q = parse("maturity_years,yield\n1.0,2.4\n", true);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_DOUBLE_EQ(q[0].yield, 0.024);
}

TEST(ParseQuotes, SortsByMaturity) {
    const auto q = parse("maturity_years,yield\n10,0.04\n0.25,0.03\n2,0.035\n");
    ASSERT_EQ(q.size(), 3u);
    EXPECT_EQ(q[0].maturity, 0.25);
    EXPECT_EQ(q[1].maturity, 2.0);
    EXPECT_EQ(q[2].maturity, 10.0);
}

TEST(ParseQuotes, ToleratesBomCrlfAndBlankLines) {
    const auto q = parse("\xEF\xBB\xBFmaturity_years,yield\r\n1,0.02\r\n\r\n2,0.03\r\n");
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[1].yield, 0.03);
}

TEST(ParseQuotes, TreasuryGridFile) {
    std::ostringstream text;
    text << "maturity_years,yield\n";
    for (double T : calib::kTreasuryMaturities) text << T << ",0.03\n";
    EXPECT_EQ(parse(text.str()).size(), 10u);
}

TEST(ParseQuotes, ErrorsCarryLineNumbers) {
    EXPECT_NE(error_of("maturity_years,yield\n1,0.02\n2,abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("maturity_years,yield\n1,0.02,7\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("maturity_years,yield\n-1,0.02\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("maturity,yield\n1,0.02\n").find("line 1"), std::string::npos);
}

TEST(ParseQuotes, RejectsEmptyAndDuplicates) {
    EXPECT_THROW(parse(""), InputError);
    EXPECT_THROW(parse("maturity_years,yield\n"), InputError);
    EXPECT_NE(error_of("maturity_years,yield\n1,0.02\n1,0.03\n").find("duplicate"),
              std::string::npos);
}

TEST(ParseQuotes, MissingFile) {
    EXPECT_THROW(parse_quotes(std::filesystem::path("/nonexistent/quotes.csv")), InputError);
}

TEST(WriteQuotesCsv, RoundTrip) {
    const calib::QuoteSet q{{1.0 / 12.0, 0.0281300839210899}, {20.0, 0.0446406640231961}};
    std::ostringstream out;
    write_quotes_csv(q, out);
    const auto back = parse(out.str());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].maturity, q[0].maturity);
    EXPECT_EQ(back[0].yield, q[0].yield);
    EXPECT_EQ(back[1].yield, q[1].yield);
}

TEST(ParseQuotes, FromFile) {
    const auto path = std::filesystem::temp_directory_path() / "mvasicek_quotes_test.csv";
    {
        std::ofstream f(path);
        f << "maturity_years,yield\n0.5,3.1\n";
    }
    const auto q = parse_quotes(path, true);
    std::filesystem::remove(path);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_DOUBLE_EQ(q[0].yield, 0.031);
}

} // namespace
} // namespace mvasicek::io
