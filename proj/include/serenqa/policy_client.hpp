#pragma once

// HTTP implementation of the Policy interface. Every decision is one JSON
// POST: {kind, question, root, level, frontier, offered, context,
// limits:{n,m,k}} plus a "node" field on relation requests. Responses are
// {kind, selection} for the two selection kinds, {kind, continue, rationale}
// for should_continue (a bare "YES"/"NO" text body is also accepted), and
// {kind, text} for summaries. Malformed or failed exchanges are retried;
// once the budget is spent the call throws PolicyTransportError. Retries and
// other oddities are recorded as warnings the caller can drain into a trace.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "serenqa/explore.hpp"

namespace serenqa {

struct PolicyClientOptions {
    double timeout_seconds = 30.0;
    size_t retries = 2;  // extra attempts after the first
};

class PolicyClient : public Policy {
public:
    explicit PolicyClient(const std::string& endpoint, PolicyClientOptions opts = {});
    ~PolicyClient() override;

    PolicyClient(const PolicyClient&) = delete;
    PolicyClient& operator=(const PolicyClient&) = delete;

    std::vector<std::string> select_relations(const PolicyContext& ctx, const std::string& node,
                                              const std::vector<OfferedRelation>& offered,
                                              size_t m) override;
    std::vector<std::string> select_nodes(const PolicyContext& ctx,
                                          const std::vector<OfferedEdge>& offered,
                                          size_t n) override;
    ContinueDecision should_continue(const PolicyContext& ctx,
                                     const std::vector<std::string>& paths) override;
    std::string summarize(const PolicyContext& ctx,
                          const std::vector<std::string>& paths) override;

    const std::vector<std::string>& warnings() const { return warnings_; }
    std::vector<std::string> take_warnings();

private:
    nlohmann::json exchange(const std::string& kind, nlohmann::json request);

    struct Impl;
    std::unique_ptr<Impl> impl_;
    PolicyClientOptions opts_;
    std::string path_;
    std::vector<std::string> warnings_;
};

}  // namespace serenqa
