#pragma once

#include <map>
#include <string>
#include <vector>

#include "rise/parsing.hpp"

namespace rise {

/// Answer histogram over M solver samples plus the derived self-consistency
/// statistics and majority vote. `histogram` only holds real (parseable)
/// answers; unparseable responses count toward M through unparseable_count.
struct ConsistencyReport {
    std::map<std::string, int> histogram;
    int total_M = 0;
    double consistency_c = 0.0;
    double difficulty_d = 0.0;
    ExtractedAnswer majority = ExtractedAnswer::unparseable();
    bool tie = false;
    int unparseable_count = 0;
    bool degenerate = false;  // every response unparseable
};

/// Builds the report from M extracted answers. c is the modal real-answer
/// count over M; a fully unparseable sample set has c = 0 and is flagged
/// degenerate. Ties break toward the lexicographically smallest answer.
/// Throws std::invalid_argument when answers is empty or its size != M.
ConsistencyReport consistency_score(const std::vector<ExtractedAnswer>& answers, int M);

/// d = min(c, 1-c). Throws std::out_of_range for c outside [0,1].
double difficulty_score(double c);

/// The majority answer of a non-degenerate report.
/// Throws std::invalid_argument on degenerate reports.
ExtractedAnswer majority_vote(const ConsistencyReport& report);

}  // namespace rise
