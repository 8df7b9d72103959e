#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cograph/agents.hpp"
#include "cograph/errors.hpp"

namespace cograph {

/// Real-mode chat backend over an HTTP+JSON chat-completion endpoint. The
/// per-role model table and base URL come from config; the API key comes
/// from COGRAPH_API_KEY.
class HttpChatBackend : public ChatBackend {
  public:
    HttpChatBackend(std::string base_url, std::map<Role, std::string> models,
                    int retries = 2)
        : base_url_(std::move(base_url)), models_(std::move(models)), retries_(retries) {}

    std::string complete(Role role, const std::string& key, const std::string& rendered_prompt,
                         const std::string& schema_tag) override {
        (void)key;
        nlohmann::json body = {
            {"model", model_for(role)},
            {"messages", {{{"role", "user"}, {"content", rendered_prompt}}}},
            {"response_format", schema_tag}};
        httplib::Client client(base_url_);
        httplib::Headers headers;
        if (const char* api_key = std::getenv("COGRAPH_API_KEY"))
            headers.emplace("Authorization", std::string("Bearer ") + api_key);
        std::string last_error;
        for (int attempt = 0; attempt <= retries_; ++attempt) {
            auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                                   "application/json");
            if (res && res->status == 200) {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            }
            last_error = res ? "status " + std::to_string(res->status)
                             : "transport error";
        }
        throw BackendFailure("chat completion failed for role " +
                             std::string(to_string(role)) + ": " + last_error);
    }

  private:
    std::string model_for(Role role) const {
        auto it = models_.find(role);
        return it == models_.end() ? "default" : it->second;
    }

    std::string base_url_;
    std::map<Role, std::string> models_;
    int retries_;
};

/// HTTP search provider returning ranked hits as JSON.
class HttpSearchProvider : public SearchProvider {
  public:
    explicit HttpSearchProvider(std::string base_url) : base_url_(std::move(base_url)) {}

    std::vector<SearchHit> search(const std::string& query) override {
        httplib::Client client(base_url_);
        auto res = client.Get("/search?q=" + httplib::detail::encode_url(query));
        if (!res || res->status != 200)
            throw BackendFailure("search endpoint failed for query: " + query);
        std::vector<SearchHit> hits;
        for (const auto& h : nlohmann::json::parse(res->body).value("hits",
                                                                    nlohmann::json::array())) {
            SearchHit hit;
            hit.index = h.value("index", static_cast<int>(hits.size()));
            hit.url = h.value("url", "");
            hit.title = h.value("title", "");
            hit.snippet = h.value("snippet", "");
            hits.push_back(std::move(hit));
        }
        return hits;
    }

  private:
    std::string base_url_;
};

/// HTTP page-retrieval provider returning extracted text (PDF parsing is a
/// server-side concern behind this interface).
class HttpPageProvider : public PageProvider {
  public:
    explicit HttpPageProvider(std::string base_url) : base_url_(std::move(base_url)) {}

    std::optional<std::string> fetch(const std::string& url) override {
        httplib::Client client(base_url_);
        auto res = client.Get("/fetch?url=" + httplib::detail::encode_url(url));
        if (!res || res->status != 200) return std::nullopt;
        return res->body;
    }

  private:
    std::string base_url_;
};

}  // namespace cograph
