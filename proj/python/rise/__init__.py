"""Python bindings for the rise self-evolving loop engine.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its operations under a stable name.
"""

from ._core import (  # noqa: F401
    ExtractedAnswer,
    QuestionRecord,
    QuestionType,
    ScheduleConfig,
    SkillCategory,
    clipped_objective,
    consistency,
    difficulty_score,
    extract_boxed_answer,
    group_advantages,
    load_config,
    normalize_answer,
    parse_binary_verdict,
    parse_question_output,
    run_toy_evolution,
    serialize_config,
    skill_bonus,
    skill_entropy,
    skill_label,
    skill_slug,
    solver_reward,
)

__version__ = "0.1.0"
