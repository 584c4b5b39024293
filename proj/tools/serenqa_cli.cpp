#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "serenqa/pipeline.hpp"
#include "serenqa/util.hpp"

namespace {

using serenqa::RunConfig;

// Flags shared by every subcommand. Stage-specific requirements (a
// benchmark for score/eval, never for build) are checked downstream.
void add_common(CLI::App* cmd, RunConfig* cfg, std::string* weights, std::string* jsd,
                std::string* context) {
    cmd->add_option("--graph", cfg->graph_path, "edge list file")->required();
    cmd->add_option("--benchmark", cfg->benchmark_path, "benchmark JSON file");
    cmd->add_option("--embeddings", cfg->embeddings_path, "embedding table file");
    cmd->add_option("--k", cfg->k, "hop count for the transition mixture")
        ->capture_default_str();
    cmd->add_option("--damping", cfg->damping, "damping factor for the marginal fixed point")
        ->capture_default_str();
    cmd->add_option("--epsilon", cfg->epsilon, "L1 convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--weights", *weights,
                    "relevance,novelty,surprise weights (normalized to sum 1)");
    cmd->add_option("--beam-width", cfg->beam.n, "nodes expanded per level")
        ->capture_default_str();
    cmd->add_option("--depth", cfg->beam.h, "maximum exploration depth")->capture_default_str();
    cmd->add_option("--max-relations", cfg->beam.m, "relations followed per frontier node")
        ->capture_default_str();
    cmd->add_option("--max-nodes", cfg->beam.k, "candidate edges kept per level")
        ->capture_default_str();
    cmd->add_option("--policy-url", cfg->policy_url,
                    "HTTP policy endpoint (default: built-in heuristic)");
    cmd->add_option("--seed", cfg->seed, "seed for all randomness")->capture_default_str();
    cmd->add_option("--out", cfg->out_dir, "output directory")->capture_default_str();
    cmd->add_option("--workers", cfg->workers, "worker threads (0 = hardware)")
        ->capture_default_str();
    cmd->add_flag("--strict", cfg->strict, "fail on stale caches instead of rebuilding");
    cmd->add_flag("--fallback-embeddings", cfg->fallback_embeddings,
                  "synthesize embeddings for uncovered ids");
    cmd->add_option("--jsd-mode", *jsd, "surprise support: own|shared")
        ->check(CLI::IsMember({"own", "shared"}))
        ->capture_default_str();
    cmd->add_option("--context", *context, "pass level summaries to the policy: with|without")
        ->check(CLI::IsMember({"with", "without"}))
        ->capture_default_str();
    cmd->add_option("--strategy", cfg->strategy, "partition strategy driving exploration")
        ->capture_default_str();
    cmd->add_option("--qid", cfg->qid, "restrict to one benchmark record");
}

void finish_config(RunConfig* cfg, const std::string& weights, const std::string& jsd,
                   const std::string& context) {
    if (!weights.empty()) {
        auto parts = serenqa::split(weights, ',');
        if (parts.size() != 3) {
            throw serenqa::DomainError("--weights wants three comma-separated numbers");
        }
        try {
            cfg->weight_r = std::stod(parts[0]);
            cfg->weight_n = std::stod(parts[1]);
            cfg->weight_s = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw serenqa::DomainError("--weights wants three comma-separated numbers");
        }
    }
    cfg->jsd = jsd == "shared" ? serenqa::JsdSupport::Shared : serenqa::JsdSupport::Own;
    cfg->beam.with_context = context != "without";
    if (cfg->workers == 0) cfg->workers = serenqa::default_workers();
    cfg->beam.seed = cfg->seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serendipity-aware knowledge-graph QA evaluation"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string weights, jsd = "own", context = "with";

    CLI::App* build = app.add_subcommand("build", "compute and cache the probability model");
    CLI::App* score = app.add_subcommand("score", "score benchmark partitions");
    CLI::App* partition =
        app.add_subcommand("partition", "optimize answer partitions by greedy swaps");
    CLI::App* explore = app.add_subcommand("explore", "run beam exploration per record");
    CLI::App* eval = app.add_subcommand("eval", "compute metric reports");
    for (CLI::App* cmd : {build, score, partition, explore, eval}) {
        add_common(cmd, &cfg, &weights, &jsd, &context);
    }
    for (CLI::App* cmd : {score, partition, explore, eval}) {
        cmd->get_option("--benchmark")->required();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        finish_config(&cfg, weights, jsd, context);
        nlohmann::json result;
        if (build->parsed()) result = serenqa::cmd_build(cfg);
        if (score->parsed()) result = serenqa::cmd_score(cfg);
        if (partition->parsed()) result = serenqa::cmd_partition(cfg);
        if (explore->parsed()) result = serenqa::cmd_explore(cfg);
        if (eval->parsed()) result = serenqa::cmd_eval(cfg);
        std::cout << result.dump(2) << '\n';
    } catch (const serenqa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
