#include "sumprod/report.hpp"

#include <cmath>
#include <sstream>

namespace sumprod {

BoundReport BoundReport::assert_row(std::string suite, std::string claim, bool ok) {
    BoundReport r;
    r.suite = std::move(suite);
    r.claim_ref = std::move(claim);
    r.kind = Kind::Assert;
    r.verdict = ok;
    return r;
}

BoundReport& BoundReport::with_lhs(const Rat& v) {
    lhs = rat_str(v);
    return *this;
}
BoundReport& BoundReport::with_lhs(double v) {
    lhs = flt_str(v);
    return *this;
}
BoundReport& BoundReport::with_main(const Rat& v) {
    main_term = rat_str(v);
    return *this;
}
BoundReport& BoundReport::with_error(const Rat& v) {
    error = rat_str(v);
    return *this;
}
BoundReport& BoundReport::with_error(double v) {
    error = flt_str(v);
    return *this;
}
BoundReport& BoundReport::with_rhs(const Rat& v) {
    rhs = rat_str(v);
    return *this;
}
BoundReport& BoundReport::with_rhs(double v) {
    rhs = flt_str(v);
    return *this;
}
BoundReport& BoundReport::with_ratio(double r) {
    ratio = r;
    has_ratio = true;
    return *this;
}
BoundReport& BoundReport::with_note(std::string n) {
    note = std::move(n);
    return *this;
}

namespace {
std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}
}  // namespace

std::string report_csv_header() {
    return "suite,claim_ref,kind,lhs,main_term,error,rhs,ratio,verdict";
}

std::string report_csv_row(const BoundReport& r) {
    std::ostringstream os;
    os << csv_escape(r.suite) << ',' << csv_escape(r.claim_ref) << ','
       << (r.kind == BoundReport::Kind::Assert ? "ASSERT" : "RATIO") << ','
       << csv_escape(r.lhs) << ',' << csv_escape(r.main_term) << ',' << csv_escape(r.error)
       << ',' << csv_escape(r.rhs) << ',' << (r.has_ratio ? flt_str(r.ratio) : "") << ','
       << (r.verdict ? "true" : "false");
    return os.str();
}

std::string report_json_row(const BoundReport& r) {
    std::ostringstream os;
    os << "{\"suite\":\"" << json_escape(r.suite) << "\",\"claim_ref\":\""
       << json_escape(r.claim_ref) << "\",\"kind\":\""
       << (r.kind == BoundReport::Kind::Assert ? "ASSERT" : "RATIO") << "\",\"lhs\":\""
       << json_escape(r.lhs) << "\",\"main_term\":\"" << json_escape(r.main_term)
       << "\",\"error\":\"" << json_escape(r.error) << "\",\"rhs\":\"" << json_escape(r.rhs)
       << "\",\"ratio\":" << (r.has_ratio ? flt_str(r.ratio) : "null")
       << ",\"verdict\":" << (r.verdict ? "true" : "false");
    if (!r.note.empty()) os << ",\"note\":\"" << json_escape(r.note) << "\"";
    os << "}";
    return os.str();
}

bool all_asserts_hold(const std::vector<BoundReport>& rows) {
    for (const auto& r : rows)
        if (r.kind == BoundReport::Kind::Assert && !r.verdict) return false;
    return true;
}

}  // namespace sumprod
