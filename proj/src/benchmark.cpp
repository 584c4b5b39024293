#include "serenqa/benchmark.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "serenqa/errors.hpp"

#include "json.hpp"

namespace serenqa {

using nlohmann::json;

namespace {

std::string get_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return "";
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

std::vector<std::string> string_list(const json& j) {
    std::vector<std::string> out;
    if (!j.is_array()) return out;
    for (const auto& v : j) {
        if (v.is_string()) out.push_back(v.get<std::string>());
        else out.push_back(v.dump());
    }
    return out;
}

bool looks_like_strategy(const json& v) {
    return v.is_object() && (v.contains("exact_matches") || v.contains("serendipity_set"));
}

StrategyPartition parse_strategy(const json& v) {
    StrategyPartition p;
    if (auto it = v.find("exact_matches"); it != v.end() && it->is_object()) {
        p.exact_matches = string_list(it->value("list", json::array()));
    } else if (it != v.end()) {
        p.exact_matches = string_list(*it);
    }
    if (auto it = v.find("serendipity_set"); it != v.end() && it->is_object()) {
        p.serendipity_set = string_list(it->value("list", json::array()));
        p.serendipity_description = get_string(*it, "description");
    } else if (it != v.end()) {
        p.serendipity_set = string_list(*it);
    }
    if (auto it = v.find("explore_queries"); it != v.end() && it->is_object()) {
        p.explore_paths = string_list(it->value("paths", json::array()));
        p.explore_questions = string_list(it->value("questions", json::array()));
    }
    p.partition_tag = get_string(v, "partition");
    if (auto it = v.find("scores"); it != v.end() && it->is_object()) {
        for (const auto& [id, s] : it->items()) {
            if (s.is_number()) p.ranking_scores[id] = s.get<double>();
        }
    }
    return p;
}

QaRecord parse_record(const json& j) {
    QaRecord r;
    if (auto it = j.find("qid"); it != j.end()) {
        if (it->is_number_integer()) r.qid = it->get<int64_t>();
        else if (it->is_string()) r.qid = std::stoll(it->get<std::string>());
    }
    r.question = get_string(j, "question");
    if (auto it = j.find("answer"); it != j.end() && it->is_array()) {
        for (const auto& a : *it) {
            AnswerEntity e;
            e.id = get_string(a, "answer_argument");
            e.name = get_string(a, "entity_name");
            if (!e.id.empty()) r.answers.push_back(std::move(e));
        }
    }
    if (auto it = j.find("graph_query"); it != j.end() && it->is_object()) {
        r.graph_query = parse_pattern(*it);
    }
    if (auto it = j.find("pattern_type"); it != j.end() && it->is_number_integer()) {
        r.pattern_type = it->get<int>();
    }
    if (auto it = j.find("commonness"); it != j.end() && it->is_number()) {
        r.commonness = it->get<double>();
    }

    static const std::set<std::string> reserved = {
        "qid",      "question",     "answer",   "function", "commonness", "num_node",
        "num_edge", "graph_query",  "cypher",   "category", "pattern_type"};
    for (const auto& [key, value] : j.items()) {
        if (reserved.count(key)) continue;
        if (looks_like_strategy(value)) r.partitions[key] = parse_strategy(value);
    }

    // A record that only carries partitions defines its answers implicitly
    // as everything the partitions mention.
    bool answers_listed = j.contains("answer");
    if (!answers_listed) {
        std::set<std::string> seen;
        for (const auto& [_, p] : r.partitions) {
            for (const auto* v : {&p.exact_matches, &p.serendipity_set}) {
                for (const auto& id : *v) {
                    if (seen.insert(id).second) r.answers.push_back({id, ""});
                }
            }
        }
        std::sort(r.answers.begin(), r.answers.end(),
                  [](const AnswerEntity& a, const AnswerEntity& b) { return a.id < b.id; });
    }

    const std::vector<std::string> listed = r.answer_ids();
    std::set<std::string> answer_ids(listed.begin(), listed.end());
    for (const auto& [name, p] : r.partitions) {
        std::set<std::string> exact(p.exact_matches.begin(), p.exact_matches.end());
        for (const auto& id : p.serendipity_set) {
            if (exact.count(id)) {
                throw ValidationError("qid " + std::to_string(r.qid) + " strategy '" + name +
                                      "': '" + id +
                                      "' appears in both exact_matches and serendipity_set");
            }
        }
        if (answers_listed) {
            for (const auto* v : {&p.exact_matches, &p.serendipity_set}) {
                for (const auto& id : *v) {
                    if (!answer_ids.count(id)) {
                        throw ValidationError("qid " + std::to_string(r.qid) + " strategy '" +
                                              name + "': '" + id +
                                              "' is not among the record's answers");
                    }
                }
            }
        }
    }
    return r;
}

}  // namespace

std::vector<std::string> QaRecord::answer_ids() const {
    std::vector<std::string> out;
    out.reserve(answers.size());
    for (const auto& a : answers) out.push_back(a.id);
    return out;
}

std::vector<QaRecord> load_benchmark(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open benchmark file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<QaRecord> records;
    size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    skip_ws();
    if (pos >= text.size()) return records;

    try {
        if (text[pos] == '[') {
            json arr = json::parse(text.substr(pos));
            for (const auto& j : arr) records.push_back(parse_record(j));
            return records;
        }
        // A stream of concatenated objects (JSONL included). Chunks are
        // split on top-level brace balance, honoring string escapes.
        while (pos < text.size()) {
            skip_ws();
            if (pos >= text.size()) break;
            if (text[pos] != '{') {
                throw ParseError("benchmark '" + path + "': expected '{' at offset " +
                                 std::to_string(pos));
            }
            size_t start = pos;
            int depth = 0;
            bool in_string = false;
            for (; pos < text.size(); ++pos) {
                char ch = text[pos];
                if (in_string) {
                    if (ch == '\\') ++pos;
                    else if (ch == '"') in_string = false;
                } else if (ch == '"') {
                    in_string = true;
                } else if (ch == '{') {
                    ++depth;
                } else if (ch == '}') {
                    if (--depth == 0) {
                        ++pos;
                        break;
                    }
                }
            }
            if (depth != 0) {
                throw ParseError("benchmark '" + path + "': unterminated object at offset " +
                                 std::to_string(start));
            }
            records.push_back(parse_record(json::parse(text.substr(start, pos - start))));
        }
    } catch (const json::exception& e) {
        throw ParseError("benchmark '" + path + "': " + e.what());
    }
    return records;
}

}  // namespace serenqa
