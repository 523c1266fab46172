#pragma once

#include <string>
#include <vector>

#include "sumprod/common.hpp"

namespace sumprod {

// Uniform row format for every theorem-verification suite.
// ASSERT rows carry exact or constant-free claims and drive exit codes;
// RATIO rows report measured ratios against bounds with implicit constants.
struct BoundReport {
    enum class Kind { Assert, Ratio };

    std::string suite;
    std::string claim_ref;
    Kind kind = Kind::Assert;
    std::string lhs;
    std::string main_term;
    std::string error;
    std::string rhs;
    double ratio = 0.0;
    bool has_ratio = false;
    bool verdict = true;
    std::string note;

    static BoundReport assert_row(std::string suite, std::string claim, bool ok);
    BoundReport& with_lhs(const Rat& v);
    BoundReport& with_lhs(double v);
    BoundReport& with_main(const Rat& v);
    BoundReport& with_error(const Rat& v);
    BoundReport& with_error(double v);
    BoundReport& with_rhs(const Rat& v);
    BoundReport& with_rhs(double v);
    BoundReport& with_ratio(double r);
    BoundReport& with_note(std::string n);
};

std::string report_csv_header();
std::string report_csv_row(const BoundReport& r);
std::string report_json_row(const BoundReport& r);

// True iff every ASSERT row holds; RATIO rows never affect the outcome.
bool all_asserts_hold(const std::vector<BoundReport>& rows);

}  // namespace sumprod
