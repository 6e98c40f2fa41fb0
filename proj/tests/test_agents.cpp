#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rise/agents.hpp"
#include "rise/orchestrator.hpp"
#include "rise/remote.hpp"

using namespace rise;
using nlohmann::json;

namespace {

ScheduleConfig toy_cfg() {
    ScheduleConfig cfg;
    cfg.toy.scene_pool = 8;
    cfg.toy.invalid_rate = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("role preconditions are enforced") {
    ScheduleConfig cfg = toy_cfg();
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    RngStream rng(1);
    CHECK_THROWS_AS(generate_question(agents.solver, world->image_for(0), rng), std::invalid_argument);
    CHECK_THROWS_AS(solve(agents.questioner, world->image_for(0), "q", rng), std::invalid_argument);
}

TEST_CASE("supervisor handle aliases the solver backend") {
    ScheduleConfig cfg = toy_cfg();
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    CHECK(agents.supervisor.backend == agents.solver.backend);
    CHECK(agents.supervisor.backend != agents.questioner.backend);

    // Replace the solver backend, refresh, and check the alias again.
    agents.solver.backend = std::make_shared<ToySolverBackend>(world, cfg.toy);
    CHECK(agents.supervisor.backend != agents.solver.backend);
    agents.refresh_supervisor();
    CHECK(agents.supervisor.backend == agents.solver.backend);
}

TEST_CASE("toy generation replays identically for the same stream") {
    ScheduleConfig cfg = toy_cfg();
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    const ImageRef image = world->image_for(2);

    RngStream a(77), b(77);
    CHECK(generate_question(agents.questioner, image, a) ==
          generate_question(agents.questioner, image, b));

    auto record = parse_question_output(generate_question(agents.questioner, image, a));
    REQUIRE(record.has_value());
    RngStream sa(42), sb(42);
    CHECK(solve(agents.solver, image, record->text, sa) == solve(agents.solver, image, record->text, sb));
}

TEST_CASE("toy judging is greedy: identical inputs, identical verdicts") {
    ScheduleConfig cfg = toy_cfg();
    cfg.toy.judge_recall = 0.9;
    cfg.toy.judge_false_reject = 0.3;
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    const ImageRef image = world->image_for(1);

    QuestionRecord record;
    record.skill = SkillCategory::math_and_counting;
    record.qtype = QuestionType::numerical;
    record.text = world->scene(image).templates[4].question + " (difficulty 2/5)";

    const JudgeVerdict first = judge_validity(agents.supervisor, image, record);
    for (int i = 0; i < 10; ++i)
        CHECK(judge_validity(agents.supervisor, image, record).verdict == first.verdict);

    const ExtractedAnswer candidate{"3", "3", true};
    const JudgeVerdict u_first = verify_answer(agents.supervisor, image, record.text, candidate);
    for (int i = 0; i < 10; ++i)
        CHECK(verify_answer(agents.supervisor, image, record.text, candidate).verdict == u_first.verdict);
}

TEST_CASE("perfect toy supervisor judges validity and correctness exactly") {
    ScheduleConfig cfg = toy_cfg();
    cfg.toy.judge_recall = 1.0;
    cfg.toy.judge_false_reject = 0.0;
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    const ImageRef image = world->image_for(0);
    const auto& scene = world->scene(image);

    QuestionRecord valid;
    valid.skill = SkillCategory::coarse_perception;
    valid.text = scene.templates[0].question + " (difficulty 1/5)";
    CHECK(judge_validity(agents.supervisor, image, valid).verdict == Verdict::yes);

    QuestionRecord mismatched = valid;
    mismatched.skill = SkillCategory::logical_reasoning;  // counting-free template, wrong label
    CHECK(judge_validity(agents.supervisor, image, mismatched).verdict == Verdict::no);

    const std::string truth = normalize_answer(scene.templates[0].answer);
    CHECK(verify_answer(agents.supervisor, image, valid.text, {truth, truth, true}).verdict ==
          Verdict::yes);
    CHECK(verify_answer(agents.supervisor, image, valid.text, {"wrong", "wrong", true}).verdict ==
          Verdict::no);
}

TEST_CASE("skill-mismatched declaration on a counting template is flagged") {
    ScheduleConfig cfg = toy_cfg();
    cfg.toy.judge_recall = 1.0;
    cfg.toy.judge_false_reject = 0.0;
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    AgentSet agents = make_toy_agents(cfg, world);
    const ImageRef image = world->image_for(3);
    const auto& scene = world->scene(image);

    QuestionRecord record;
    record.skill = SkillCategory::instance_reasoning;  // declared non-math
    record.qtype = QuestionType::numerical;
    record.text = scene.templates[4].question + " (difficulty 1/5)";  // counting-based
    CHECK(judge_validity(agents.supervisor, image, record).verdict == Verdict::no);
}

// ============================================================================
// Remote backend against an in-process chat-completions server
// ============================================================================

namespace {

struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    std::atomic<int> fail_first_n{0};
    json last_request;
    std::string reply_content = "ok";
    // When set, maps the parsed request body to the reply content.
    std::function<std::string(const json&)> responder;

    MockServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            const json body = json::parse(req.body);
            {
                static std::mutex mutex;
                std::lock_guard<std::mutex> lock(mutex);
                last_request = body;
            }
            if (fail_first_n.fetch_sub(1) > 0) {
                res.status = 500;
                res.set_content("{\"error\":{\"message\":\"transient\"}}", "application/json");
                return;
            }
            const std::string content = responder ? responder(body) : reply_content;
            json reply = {
                {"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        thread.join();
    }

    RemoteEndpoint endpoint() const {
        RemoteEndpoint ep;
        ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        ep.api_key = "test-key";
        ep.model = "test-model";
        ep.retry_base_ms = 1;
        return ep;
    }
};

}  // namespace

TEST_CASE("remote backend sends a well-formed chat request with an image part") {
    MockServer server;
    server.reply_content = "<skill>math & counting</skill><type>numerical</type><question>How many "
                           "cubes? </question>";

    SamplingParams sampling{0.7, 0.95, 256};
    RemoteBackend backend(server.endpoint(), sampling);

    const ImageRef image = ImageRef::file("https://example.com/cat.png");  // URL pass-through
    RngStream rng(5);
    const std::string raw = backend.generate_question(image, rng);
    CHECK(parse_question_output(raw).has_value());

    const json& req = server.last_request;
    CHECK(req["model"] == "test-model");
    CHECK(req["temperature"] == doctest::Approx(0.7));
    CHECK(req["top_p"] == doctest::Approx(0.95));
    CHECK(req["max_tokens"] == 256);
    REQUIRE(req["messages"].size() == 2);
    CHECK(req["messages"][0]["role"] == "system");
    CHECK(req["messages"][1]["role"] == "user");
    const auto& content = req["messages"][1]["content"];
    REQUIRE(content.is_array());
    CHECK(content[0]["type"] == "image_url");
    CHECK(content[0]["image_url"]["url"] == "https://example.com/cat.png");
    CHECK(content[1]["type"] == "text");
}

TEST_CASE("local image files are embedded as base64 data URLs") {
    const auto path = std::filesystem::temp_directory_path() / "rise_test_img.png";
    {
        std::ofstream f(path, std::ios::binary);
        f << "\x89PNG fake bytes";
    }
    const std::string url = image_payload_url(ImageRef::file(path.string()));
    CHECK(url.starts_with("data:image/png;base64,"));
    CHECK(url.size() > 30);
    std::filesystem::remove(path);

    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
}

TEST_CASE("transient server failures are retried, content failures are not") {
    MockServer server;
    server.reply_content = "no boxed digit here";
    server.fail_first_n = 2;

    SamplingParams sampling{1.0, 0.99, 128};
    RemoteBackend backend(server.endpoint(), sampling);
    const ImageRef image = ImageRef::file("http://example.com/x.jpg");

    QuestionRecord record;
    record.skill = SkillCategory::coarse_perception;
    record.text = "Is this fine?";
    const std::string raw = backend.judge_validity_raw(image, record);
    CHECK(server.requests == 3);  // two 500s then success
    CHECK(parse_binary_verdict(raw) == Verdict::unparseable);  // recorded, never retried

    // Judge requests are greedy.
    CHECK(server.last_request["temperature"] == doctest::Approx(0.0));

    // An endpoint that keeps failing exhausts the retry budget.
    server.fail_first_n = 100;
    RngStream rng(1);
    CHECK_THROWS_AS(backend.solve(image, "q?", rng), BackendError);
}

TEST_CASE("remote agent set shares one backend and aliases the supervisor") {
    MockServer server;
    ScheduleConfig cfg;
    cfg.remote_model = "test-model";
    RemoteEndpoint ep = server.endpoint();
    AgentSet agents = make_remote_agents(cfg, ep);
    CHECK(agents.supervisor.backend == agents.solver.backend);
    CHECK(agents.supervisor.sampling.temperature == doctest::Approx(0.0));
}

TEST_CASE("remote evolution runs the full schedule with logging-only updates") {
    MockServer server;
    // Role-aware replies keyed off the system prompt.
    server.responder = [](const json& body) -> std::string {
        const std::string system = body["messages"][0]["content"];
        if (system.find("Question Generator") != std::string::npos)
            return "<skill>math & counting</skill><type>numerical</type>"
                   "<question>How many objects are shown?</question>";
        if (system.find("validity judge") != std::string::npos) return "Grounded. \\boxed{1}";
        if (system.find("answering verifier") != std::string::npos) return "Correct. \\boxed{1}";
        return "Counting carefully. \\boxed{42}";
    };

    ScheduleConfig cfg;
    cfg.total_budget_B = 2;
    cfg.cycles_n = 1;
    cfg.phase_len_b = 2;
    cfg.batch_size = 2;
    cfg.rollouts_G = 2;
    cfg.samples_M = 2;
    cfg.candidates_per_construct = 3;
    cfg.shard_target = 3;
    cfg.tau_min = 0.0;
    cfg.tau_max = 1.0;
    cfg.max_concurrency = 2;
    cfg.remote_model = "test-model";

    rise::EvolutionState state;
    state.agents = make_remote_agents(cfg, server.endpoint());
    state.images = {ImageRef::file("http://example.com/1.png"), ImageRef::file("http://example.com/2.png")};

    const rise::EvolutionResult result = rise::run_evolution(cfg, std::move(state));
    CHECK(result.trace.count(rise::PhaseKind::questioner_update) == 2);
    CHECK(result.trace.count(rise::PhaseKind::solver_update) == 2);
    CHECK(result.trace.count(rise::PhaseKind::construct) == 1);
    CHECK(!result.final_solver.has_value());            // no toy state to update
    CHECK(!result.final_questioner_probs.has_value());  // logging-only mode
    CHECK(result.competence_by_step.empty());

    // Construction and filtering operate normally over the wire.
    REQUIRE(result.shards.size() == 1);
    REQUIRE(result.shards[0].size() == 3);
    for (const auto& sample : result.shards[0]) {
        CHECK(sample.pseudo_label == "42");
        CHECK(sample.v == 1);
        CHECK(sample.u == 1);
        CHECK(sample.c == doctest::Approx(1.0));
    }
}
