#include "rise/telemetry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rise {

namespace {

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

std::string opt6(const std::optional<double>& x) { return x ? fmt6(*x) : ""; }

}  // namespace

double skill_entropy(const std::array<int, kNumSkills>& histogram) {
    long long total = 0;
    for (int n : histogram) {
        if (n < 0) throw std::invalid_argument("skill_entropy: negative count");
        total += n;
    }
    if (total == 0) throw std::invalid_argument("skill_entropy: all-zero histogram");

    double h = 0.0;
    for (int n : histogram) {
        if (n == 0) continue;
        const double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

PrecisionRecall supervisor_pr(const ConfusionCounts& c) {
    PrecisionRecall out;
    if (c.tp + c.fp > 0) out.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) out.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    return out;
}

std::string cycle_reports_csv(const std::vector<CycleReport>& reports) {
    std::string out = "cycle";
    for (SkillCategory k : all_skills()) out += ",skill_" + std::string(skill_slug(k));
    out +=
        ",skill_entropy_nats,valid_and_correct_rate,funnel_generated,funnel_parsed,"
        "funnel_tau_passed,funnel_judge_passed,funnel_sampled,sup_tp,sup_fp,sup_fn,sup_tn,"
        "sup_precision,sup_recall\n";

    for (const auto& r : reports) {
        out += std::to_string(r.cycle);
        for (int n : r.skill_histogram) out += "," + std::to_string(n);
        out += "," + fmt6(r.skill_entropy_nats);
        out += "," + opt6(r.valid_and_correct_rate);
        out += "," + std::to_string(r.funnel_generated);
        out += "," + std::to_string(r.funnel_parsed);
        out += "," + std::to_string(r.funnel_tau_passed);
        out += "," + std::to_string(r.funnel_judge_passed);
        out += "," + std::to_string(r.funnel_sampled);
        if (r.confusions) {
            const auto& c = *r.confusions;
            const PrecisionRecall pr = supervisor_pr(c);
            out += "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," +
                   std::to_string(c.fn) + "," + std::to_string(c.tn);
            out += "," + opt6(pr.precision) + "," + opt6(pr.recall);
        } else {
            out += ",,,,,,";
        }
        out += "\n";
    }
    return out;
}

std::string summary_csv(const std::vector<CycleReport>& reports) {
    std::string out =
        "cycles,total_generated,total_sampled,final_skill_entropy_nats,"
        "final_valid_and_correct_rate\n";
    long long generated = 0, sampled = 0;
    for (const auto& r : reports) {
        generated += r.funnel_generated;
        sampled += r.funnel_sampled;
    }
    out += std::to_string(reports.size());
    out += "," + std::to_string(generated);
    out += "," + std::to_string(sampled);
    if (reports.empty()) {
        out += ",,";
    } else {
        out += "," + fmt6(reports.back().skill_entropy_nats);
        out += "," + opt6(reports.back().valid_and_correct_rate);
    }
    out += "\n";
    return out;
}

void emit_reports(const std::vector<CycleReport>& reports, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "cycle_reports.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write cycle_reports.csv");
        f << cycle_reports_csv(reports);
    }
    {
        std::ofstream f(out_dir / "summary.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write summary.csv");
        f << summary_csv(reports);
    }
}

}  // namespace rise
