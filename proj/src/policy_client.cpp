#include "serenqa/policy_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "httplib.h"

#include "serenqa/util.hpp"

namespace serenqa {

using nlohmann::json;

struct PolicyClient::Impl {
    httplib::Client client;
    explicit Impl(const std::string& base) : client(base) {}
};

namespace {

// Splits "http://host:port/path" into base and path. Anything without a
// scheme is assumed plain http.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    std::string rest = endpoint;
    std::string scheme = "http://";
    auto pos = rest.find("://");
    if (pos != std::string::npos) {
        scheme = rest.substr(0, pos + 3);
        rest = rest.substr(pos + 3);
        if (scheme != "http://") {
            throw DomainError("policy endpoint must be plain http, got '" + endpoint + "'");
        }
    }
    if (rest.empty()) throw DomainError("policy endpoint has no host: '" + endpoint + "'");
    std::string path = "/";
    auto slash = rest.find('/');
    if (slash != std::string::npos) {
        path = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    return {scheme + rest, path};
}

// Bare-text leniency for continue votes: "YES" or "NO" (any case), blank
// line, optional rationale.
std::optional<ContinueDecision> parse_vote_text(const std::string& body) {
    size_t i = 0;
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    size_t j = i;
    while (j < body.size() && std::isalpha(static_cast<unsigned char>(body[j]))) ++j;
    std::string word = body.substr(i, j - i);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (word != "YES" && word != "NO") return std::nullopt;
    std::string rationale(trim(body.substr(j)));
    return ContinueDecision{word == "YES", rationale};
}

json envelope(const std::string& kind, const PolicyContext& ctx) {
    json req;
    req["kind"] = kind;
    req["question"] = ctx.question;
    req["root"] = ctx.root;
    req["level"] = ctx.level;
    req["frontier"] = ctx.frontier;
    req["context"] = ctx.context;
    req["limits"] = {{"n", ctx.limit_n}, {"m", ctx.limit_m}, {"k", ctx.limit_k}};
    return req;
}

// Empty string when the body is a usable reply, else what is wrong with it.
std::string check_selection(const json& body) {
    if (!body.contains("selection") || !body["selection"].is_array()) {
        return "missing selection array";
    }
    for (const auto& v : body["selection"]) {
        if (!v.is_string()) return "non-string selection entry";
    }
    return "";
}

std::vector<std::string> selection_of(const json& body) {
    std::vector<std::string> out;
    for (const auto& v : body["selection"]) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

PolicyClient::PolicyClient(const std::string& endpoint, PolicyClientOptions opts)
    : opts_(opts) {
    auto [base, path] = split_endpoint(endpoint);
    path_ = path;
    impl_ = std::make_unique<Impl>(base);
    double whole = std::floor(opts_.timeout_seconds);
    auto sec = static_cast<time_t>(whole);
    auto usec = static_cast<time_t>((opts_.timeout_seconds - whole) * 1e6);
    impl_->client.set_connection_timeout(sec, usec);
    impl_->client.set_read_timeout(sec, usec);
    impl_->client.set_write_timeout(sec, usec);
}

PolicyClient::~PolicyClient() = default;

std::vector<std::string> PolicyClient::take_warnings() {
    std::vector<std::string> out;
    out.swap(warnings_);
    return out;
}

json PolicyClient::exchange(const std::string& kind, nlohmann::json request) {
    const std::function<std::string(const json&)>* check = nullptr;
    static const std::function<std::string(const json&)> want_selection = check_selection;
    static const std::function<std::string(const json&)> want_vote = [](const json& b) {
        return b.contains("continue") && b["continue"].is_boolean()
                   ? ""
                   : "missing boolean continue verdict";
    };
    static const std::function<std::string(const json&)> want_text = [](const json& b) {
        return b.contains("text") && b["text"].is_string() ? "" : "missing text";
    };
    if (kind == "select_relations" || kind == "select_nodes") check = &want_selection;
    if (kind == "should_continue") check = &want_vote;
    if (kind == "summarize") check = &want_text;

    const std::string payload = request.dump();
    std::string last_error;
    for (size_t attempt = 0; attempt <= opts_.retries; ++attempt) {
        if (attempt > 0) {
            warnings_.push_back("policy " + kind + " retry " + std::to_string(attempt) +
                                " after: " + last_error);
        }
        auto res = impl_->client.Post(path_, payload, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded()) {
            if (kind == "should_continue") {
                if (auto vote = parse_vote_text(res->body)) {
                    json b;
                    b["kind"] = kind;
                    b["continue"] = vote->proceed;
                    b["rationale"] = vote->rationale;
                    return b;
                }
            }
            last_error = "unparseable response body";
            continue;
        }
        if (!body.is_object() || body.value("kind", "") != kind) {
            last_error = "response kind mismatch";
            continue;
        }
        if (check) {
            std::string err = (*check)(body);
            if (!err.empty()) {
                last_error = err;
                continue;
            }
        }
        return body;
    }
    throw PolicyTransportError("policy " + kind + " failed after " +
                               std::to_string(opts_.retries + 1) + " attempts; last: " +
                               last_error);
}

std::vector<std::string> PolicyClient::select_relations(const PolicyContext& ctx,
                                                        const std::string& node,
                                                        const std::vector<OfferedRelation>& offered,
                                                        size_t) {
    json req = envelope("select_relations", ctx);
    req["node"] = node;
    json arr = json::array();
    for (const auto& r : offered) {
        json o;
        o["label"] = r.label;
        o["frequency"] = r.frequency;
        o["best_score"] = r.best_score ? json(*r.best_score) : json(nullptr);
        arr.push_back(std::move(o));
    }
    req["offered"] = std::move(arr);
    return selection_of(exchange("select_relations", std::move(req)));
}

std::vector<std::string> PolicyClient::select_nodes(const PolicyContext& ctx,
                                                    const std::vector<OfferedEdge>& offered,
                                                    size_t) {
    json req = envelope("select_nodes", ctx);
    json arr = json::array();
    for (const auto& e : offered) {
        json o;
        o["source"] = e.source;
        o["relation"] = e.relation;
        o["target"] = e.target;
        o["target_type"] = e.target_type;
        o["score"] = e.score ? json(*e.score) : json(nullptr);
        arr.push_back(std::move(o));
    }
    req["offered"] = std::move(arr);
    return selection_of(exchange("select_nodes", std::move(req)));
}

ContinueDecision PolicyClient::should_continue(const PolicyContext& ctx,
                                               const std::vector<std::string>& paths) {
    json req = envelope("should_continue", ctx);
    req["offered"] = paths;
    json body = exchange("should_continue", std::move(req));
    return {body["continue"].get<bool>(), body.value("rationale", "")};
}

std::string PolicyClient::summarize(const PolicyContext& ctx,
                                    const std::vector<std::string>& paths) {
    json req = envelope("summarize", ctx);
    req["offered"] = paths;
    json body = exchange("summarize", std::move(req));
    return body["text"].get<std::string>();
}

}  // namespace serenqa
