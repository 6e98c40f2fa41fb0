#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rise/config.hpp"

namespace rise {

/// Supervisor confusion counts; positive class = problematic sample.
struct ConfusionCounts {
    int tp = 0;  // problematic, flagged
    int fp = 0;  // clean, flagged
    int fn = 0;  // problematic, accepted
    int tn = 0;  // clean, accepted
};

struct PrecisionRecall {
    std::optional<double> precision;
    std::optional<double> recall;
};

/// Per-cycle quality and diversity statistics.
struct CycleReport {
    int cycle = 0;
    std::array<int, kNumSkills> skill_histogram{};
    double skill_entropy_nats = 0.0;
    std::optional<double> valid_and_correct_rate;  // toy mode only
    int funnel_generated = 0;
    int funnel_parsed = 0;
    int funnel_tau_passed = 0;
    int funnel_judge_passed = 0;
    int funnel_sampled = 0;
    std::optional<ConfusionCounts> confusions;  // toy mode only
};

/// Shannon entropy of the normalized histogram in nats.
/// Throws std::invalid_argument when all counts are zero or any is negative.
double skill_entropy(const std::array<int, kNumSkills>& histogram);

/// precision = TP/(TP+FP), recall = TP/(TP+FN); absent on undefined denominators.
PrecisionRecall supervisor_pr(const ConfusionCounts& confusions);

/// Writes cycle_reports.csv (one row per cycle) and summary.csv with a
/// stable column order and locale-free formatting.
void emit_reports(const std::vector<CycleReport>& reports, const std::filesystem::path& out_dir);

std::string cycle_reports_csv(const std::vector<CycleReport>& reports);
std::string summary_csv(const std::vector<CycleReport>& reports);

}  // namespace rise
