#include "rise/scoring.hpp"

#include <stdexcept>

namespace rise {

ConsistencyReport consistency_score(const std::vector<ExtractedAnswer>& answers, int M) {
    if (answers.empty()) throw std::invalid_argument("consistency_score: empty answer list");
    if (static_cast<int>(answers.size()) != M)
        throw std::invalid_argument("consistency_score: answer list length does not match M");

    ConsistencyReport report;
    report.total_M = M;
    for (const auto& a : answers) {
        if (a.parseable) {
            ++report.histogram[a.normalized];
        } else {
            ++report.unparseable_count;
        }
    }

    if (report.histogram.empty()) {
        report.degenerate = true;
        report.consistency_c = 0.0;
        report.difficulty_d = 0.0;
        return report;
    }

    // histogram is ordered, so scanning with a strict '>' lands on the
    // lexicographically smallest arg-max.
    int best = 0;
    std::string best_answer;
    int best_multiplicity = 0;
    for (const auto& [answer, count] : report.histogram) {
        if (count > best) {
            best = count;
            best_answer = answer;
            best_multiplicity = 1;
        } else if (count == best) {
            ++best_multiplicity;
        }
    }

    report.consistency_c = static_cast<double>(best) / static_cast<double>(M);
    report.difficulty_d = difficulty_score(report.consistency_c);
    report.majority = ExtractedAnswer{best_answer, best_answer, true};
    report.tie = best_multiplicity > 1;
    return report;
}

double difficulty_score(double c) {
    if (c < 0.0 || c > 1.0) throw std::out_of_range("difficulty_score: c outside [0,1]");
    return std::min(c, 1.0 - c);
}

ExtractedAnswer majority_vote(const ConsistencyReport& report) {
    if (report.degenerate) throw std::invalid_argument("majority_vote: degenerate report");
    return report.majority;
}

}  // namespace rise
