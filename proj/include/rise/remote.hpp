#pragma once

#include <memory>
#include <string>

#include "rise/agents.hpp"
#include "rise/prompts.hpp"

namespace rise {

/// Connection settings for a chat-completions-style endpoint.
struct RemoteEndpoint {
    std::string base_url;  // e.g. "http://localhost:8089/v1"
    std::string api_key;
    std::string model;
    int timeout_seconds = 120;
    int max_retries = 3;
    int retry_base_ms = 100;

    /// Reads RISE_ENDPOINT / RISE_API_KEY; model comes from the config.
    static RemoteEndpoint from_env(const ScheduleConfig& cfg);
};

/// Backend speaking the chat-completions wire format. The image is sent as
/// a data-URL content part (base64 file bytes), or passed through when the
/// path is already an http(s) URL. Transport failures are retried with
/// exponential backoff; model-content failures never are.
class RemoteBackend : public Backend {
public:
    RemoteBackend(RemoteEndpoint endpoint, SamplingParams sampling);

    std::string generate_question(const ImageRef& image, RngStream& rng) override;
    std::string solve(const ImageRef& image, const std::string& question, RngStream& rng) override;
    std::string judge_validity_raw(const ImageRef& image, const QuestionRecord& question) override;
    std::string verify_answer_raw(const ImageRef& image, const std::string& question,
                                  const ExtractedAnswer& candidate) override;

    /// One chat call; exposed for integration tests.
    std::string chat(const prompts::ChatPrompt& prompt, const ImageRef& image, double temperature,
                     uint64_t request_seed);

private:
    RemoteEndpoint endpoint_;
    SamplingParams sampling_;
};

AgentSet make_remote_agents(const ScheduleConfig& cfg, const RemoteEndpoint& endpoint);

/// "data:image/<fmt>;base64,<bytes>" for a local file, or the unchanged
/// URL when the value already points at http(s).
std::string image_payload_url(const ImageRef& image);

std::string base64_encode(std::string_view bytes);

}  // namespace rise
