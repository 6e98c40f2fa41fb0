#include "rise/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace rise {

using nlohmann::json;

RemoteEndpoint RemoteEndpoint::from_env(const ScheduleConfig& cfg) {
    RemoteEndpoint ep;
    if (const char* url = std::getenv("RISE_ENDPOINT")) ep.base_url = url;
    if (const char* key = std::getenv("RISE_API_KEY")) ep.api_key = key;
    ep.model = cfg.remote_model;
    if (const char* model = std::getenv("RISE_MODEL")) ep.model = model;
    return ep;
}

std::string base64_encode(std::string_view bytes) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    const size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

namespace {

std::string mime_for_path(const std::string& path) {
    auto ends_with_nocase = [&path](std::string_view suffix) {
        if (path.size() < suffix.size()) return false;
        return ascii_lower(path.substr(path.size() - suffix.size())) == suffix;
    };
    if (ends_with_nocase(".png")) return "image/png";
    if (ends_with_nocase(".jpg") || ends_with_nocase(".jpeg")) return "image/jpeg";
    if (ends_with_nocase(".webp")) return "image/webp";
    if (ends_with_nocase(".gif")) return "image/gif";
    return "image/png";
}

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // leading path, no trailing slash
};

SplitUrl split_url(const std::string& base_url) {
    const size_t scheme = base_url.find("://");
    if (scheme == std::string::npos) throw BackendError("endpoint URL missing scheme: " + base_url);
    const size_t path_start = base_url.find('/', scheme + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.path = base_url.substr(path_start);
    }
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

}  // namespace

std::string image_payload_url(const ImageRef& image) {
    if (image.kind != ImageRef::Kind::file)
        throw std::invalid_argument("image_payload_url: remote backend needs file image refs");
    if (image.value.starts_with("http://") || image.value.starts_with("https://")) return image.value;

    std::ifstream in(image.value, std::ios::binary);
    if (!in) throw BackendError("cannot read image file: " + image.value);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return "data:" + mime_for_path(image.value) + ";base64," + base64_encode(buffer.str());
}

RemoteBackend::RemoteBackend(RemoteEndpoint endpoint, SamplingParams sampling)
    : endpoint_(std::move(endpoint)), sampling_(sampling) {
    if (endpoint_.base_url.empty())
        throw BackendError("remote endpoint not configured (set RISE_ENDPOINT)");
    if (endpoint_.model.empty())
        throw BackendError("remote model not configured (set remote_model or RISE_MODEL)");
}

std::string RemoteBackend::chat(const prompts::ChatPrompt& prompt, const ImageRef& image,
                                double temperature, uint64_t request_seed) {
    json body;
    body["model"] = endpoint_.model;
    body["messages"] = json::array();
    body["messages"].push_back({{"role", "system"}, {"content", prompt.system}});
    json user_content = json::array();
    user_content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", image_payload_url(image)}}}});
    user_content.push_back({{"type", "text"}, {"text", prompt.user}});
    body["messages"].push_back({{"role", "user"}, {"content", user_content}});
    body["temperature"] = temperature;
    body["top_p"] = sampling_.top_p;
    body["max_tokens"] = sampling_.max_tokens;
    body["seed"] = request_seed;

    const SplitUrl url = split_url(endpoint_.base_url);
    const std::string path = url.path + "/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(endpoint_.retry_base_ms << (attempt - 1)));
        }
        httplib::Client client(url.origin);
        client.set_connection_timeout(endpoint_.timeout_seconds);
        client.set_read_timeout(endpoint_.timeout_seconds);
        httplib::Headers headers;
        if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // retryable
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;  // retryable
        }
        if (res->status != 200)
            throw BackendError("chat request rejected: HTTP " + std::to_string(res->status) + ": " + res->body);

        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
            throw BackendError("malformed chat response: " + res->body.substr(0, 256));
        const auto& message = parsed["choices"][0]["message"];
        return message.value("content", std::string{});
    }
    throw BackendError("chat request failed after retries: " + last_error);
}

std::string RemoteBackend::generate_question(const ImageRef& image, RngStream& rng) {
    return chat(prompts::questioner_prompt(), image, sampling_.temperature, rng.next_u64());
}

std::string RemoteBackend::solve(const ImageRef& image, const std::string& question, RngStream& rng) {
    return chat(prompts::solver_prompt(question), image, sampling_.temperature, rng.next_u64());
}

std::string RemoteBackend::judge_validity_raw(const ImageRef& image, const QuestionRecord& question) {
    // Greedy decoding keeps filtering reproducible.
    return chat(prompts::validity_prompt(question.text, question.skill), image, 0.0, 0);
}

std::string RemoteBackend::verify_answer_raw(const ImageRef& image, const std::string& question,
                                             const ExtractedAnswer& candidate) {
    return chat(prompts::verification_prompt(question, candidate.raw_span), image, 0.0, 0);
}

AgentSet make_remote_agents(const ScheduleConfig& cfg, const RemoteEndpoint& endpoint) {
    SamplingParams sampling{cfg.temperature, cfg.top_p, cfg.max_tokens};
    auto backend = std::make_shared<RemoteBackend>(endpoint, sampling);
    AgentSet agents;
    agents.questioner = {Role::questioner, backend, sampling};
    agents.solver = {Role::solver, backend, sampling};
    agents.supervisor = {Role::supervisor, agents.solver.backend,
                         SamplingParams{0.0, cfg.top_p, cfg.max_tokens}};
    return agents;
}

}  // namespace rise
