#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rise/config.hpp"
#include "rise/curation.hpp"
#include "rise/grpo.hpp"
#include "rise/orchestrator.hpp"
#include "rise/parsing.hpp"
#include "rise/rewards.hpp"
#include "rise/scoring.hpp"
#include "rise/telemetry.hpp"

namespace py = pybind11;
using namespace rise;

namespace {

SkillStats stats_from_counts(const std::array<int, kNumSkills>& counts) {
    SkillStats s;
    s.window_counts = counts;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operations of the dual-role self-evolving loop engine";

    py::enum_<SkillCategory>(m, "SkillCategory")
        .value("COARSE_PERCEPTION", SkillCategory::coarse_perception)
        .value("FINE_GRAINED_PERCEPTION", SkillCategory::fine_grained_perception)
        .value("INSTANCE_REASONING", SkillCategory::instance_reasoning)
        .value("LOGICAL_REASONING", SkillCategory::logical_reasoning)
        .value("MATH_AND_COUNTING", SkillCategory::math_and_counting)
        .value("SCIENCE_AND_TECHNOLOGY", SkillCategory::science_and_technology);

    py::enum_<QuestionType>(m, "QuestionType")
        .value("MULTIPLE_CHOICE", QuestionType::multiple_choice)
        .value("NUMERICAL", QuestionType::numerical)
        .value("REGRESSION", QuestionType::regression);

    py::class_<QuestionRecord>(m, "QuestionRecord")
        .def_readonly("skill", &QuestionRecord::skill)
        .def_readonly("qtype", &QuestionRecord::qtype)
        .def_readonly("text", &QuestionRecord::text)
        .def_readonly("raw", &QuestionRecord::raw)
        .def("__repr__", [](const QuestionRecord& r) {
            return "QuestionRecord(skill=" + std::string(skill_slug(r.skill)) + ", text='" + r.text + "')";
        });

    py::class_<ExtractedAnswer>(m, "ExtractedAnswer")
        .def_readonly("normalized", &ExtractedAnswer::normalized)
        .def_readonly("raw_span", &ExtractedAnswer::raw_span)
        .def_readonly("parseable", &ExtractedAnswer::parseable);

    py::class_<ScheduleConfig>(m, "ScheduleConfig")
        .def_readonly("total_budget_B", &ScheduleConfig::total_budget_B)
        .def_readonly("cycles_n", &ScheduleConfig::cycles_n)
        .def_readonly("phase_len_b", &ScheduleConfig::phase_len_b)
        .def_readonly("batch_size", &ScheduleConfig::batch_size)
        .def_readonly("rollouts_G", &ScheduleConfig::rollouts_G)
        .def_readonly("samples_M", &ScheduleConfig::samples_M)
        .def_readonly("tau_min", &ScheduleConfig::tau_min)
        .def_readonly("tau_max", &ScheduleConfig::tau_max)
        .def_readonly("lambda_v", &ScheduleConfig::lambda_v)
        .def_readonly("lambda_s", &ScheduleConfig::lambda_s)
        .def_readonly("eps_norm", &ScheduleConfig::eps_norm)
        .def_readonly("eps_clip", &ScheduleConfig::eps_clip)
        .def_readonly("seed", &ScheduleConfig::seed);

    m.def("load_config", [](const std::string& text) { return load_config(text); },
          "Parse a flat key-value config document");
    m.def("serialize_config", &serialize_config);

    m.def("skill_label", [](SkillCategory k) { return std::string(skill_label(k)); });
    m.def("skill_slug", [](SkillCategory k) { return std::string(skill_slug(k)); });

    m.def("parse_question_output",
          [](const std::string& raw) { return parse_question_output(raw); },
          "Parse a tagged questioner output; None when format-invalid");
    m.def("extract_boxed_answer", [](const std::string& raw) { return extract_boxed_answer(raw); });
    m.def("normalize_answer", [](const std::string& s) { return normalize_answer(s); });
    m.def("parse_binary_verdict", [](const std::string& raw) {
        const Verdict v = parse_binary_verdict(raw);
        return v == Verdict::unparseable ? py::object(py::none()) : py::object(py::int_(static_cast<int>(v)));
    });

    m.def("consistency", [](const std::vector<std::string>& responses) {
        std::vector<ExtractedAnswer> answers;
        for (const auto& r : responses) answers.push_back(extract_boxed_answer(r));
        const ConsistencyReport report = consistency_score(answers, static_cast<int>(answers.size()));
        py::dict out;
        out["c"] = report.consistency_c;
        out["d"] = report.difficulty_d;
        out["tie"] = report.tie;
        out["degenerate"] = report.degenerate;
        out["majority"] = report.degenerate ? py::object(py::none())
                                            : py::object(py::str(report.majority.normalized));
        return out;
    },
          "Self-consistency statistics over raw solver responses");
    m.def("difficulty_score", &difficulty_score);

    m.def("skill_bonus",
          [](SkillCategory k, const std::array<int, kNumSkills>& counts) {
              return skill_bonus(k, stats_from_counts(counts));
          },
          py::arg("skill"), py::arg("window_counts"));
    m.def("solver_reward", [](const std::string& response, const std::string& label) {
        return solver_reward(response, ExtractedAnswer{normalize_answer(label), label, true}).value;
    });

    m.def("group_advantages", [](const std::vector<double>& rewards, double eps_norm) {
        return group_advantages(RewardGroup{rewards, ""}, eps_norm).advantages;
    });
    m.def("clipped_objective",
          [](const std::vector<double>& ratios, const std::vector<double>& advantages, double eps_clip) {
              return clipped_objective(ratios, AdvantageGroup{advantages}, eps_clip);
          });

    m.def("skill_entropy", [](const std::array<int, kNumSkills>& histogram) {
        return skill_entropy(histogram);
    });

    m.def("run_toy_evolution",
          [](const std::string& config_text, std::optional<std::string> out_dir) {
              const ScheduleConfig cfg = load_config(config_text);
              std::optional<RunWriter> writer;
              if (out_dir) writer.emplace(*out_dir);
              EvolutionResult result =
                  run_evolution(cfg, make_toy_state(cfg), writer ? &*writer : nullptr);
              py::dict out;
              out["cycles"] = result.reports.size();
              py::list entropies, shard_sizes;
              for (const auto& r : result.reports) {
                  entropies.append(r.skill_entropy_nats);
                  shard_sizes.append(r.funnel_sampled);
              }
              out["skill_entropy_by_cycle"] = entropies;
              out["shard_sizes"] = shard_sizes;
              out["competence_by_step"] = result.competence_by_step;
              out["trace_events"] = result.trace.events.size();
              if (!result.reports.empty()) {
                  py::list histogram;
                  for (int n : result.reports.back().skill_histogram) histogram.append(n);
                  out["final_skill_histogram"] = histogram;
              }
              if (result.final_questioner_probs)
                  out["final_questioner_probs"] = *result.final_questioner_probs;
              py::list vc_rates;
              for (const auto& r : result.reports)
                  vc_rates.append(r.valid_and_correct_rate ? py::object(py::float_(*r.valid_and_correct_rate))
                                                           : py::object(py::none()));
              out["valid_and_correct_by_cycle"] = vc_rates;
              return out;
          },
          py::arg("config_text"), py::arg("out_dir") = py::none(),
          "Run the full toy-backend evolution loop and return summary statistics");
}
