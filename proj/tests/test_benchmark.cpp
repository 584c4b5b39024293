#include <string>
#include <vector>

#include "serenqa/benchmark.hpp"
#include "serenqa/errors.hpp"

#include "doctest.h"
#include "temp_dir.hpp"

using namespace serenqa;

TEST_CASE("record fields and strategy partitions parse") {
    auto recs = load_benchmark(fixture("qid800_bench.json"));
    REQUIRE(recs.size() == 1);
    const QaRecord& r = recs[0];
    CHECK(r.qid == 800);
    CHECK(r.question.find("NOS3-HSP90") != std::string::npos);
    CHECK(r.answer_ids() == std::vector<std::string>{"P29474", "P07900"});
    CHECK(r.answers[0].name == "NOS3");
    REQUIRE(r.graph_query.has_value());
    CHECK(r.graph_query->nodes.size() == 3);
    CHECK(r.graph_query->edges.size() == 2);
    CHECK(r.pattern_type == 9);
    CHECK(r.commonness == 0.0);

    REQUIRE(r.has_strategy("llm"));
    REQUIRE(r.has_strategy("sscore"));
    REQUIRE(r.has_strategy("expert"));
    CHECK_FALSE(r.has_strategy("category"));  // plain string keys are not strategies

    const auto& ss = r.partitions.at("sscore");
    CHECK(ss.exact_matches == std::vector<std::string>{"P29474"});
    CHECK(ss.serendipity_set == std::vector<std::string>{"P07900"});
    CHECK(ss.explore_paths.size() == 3);
    CHECK(ss.explore_paths[0].rfind("P29474--", 0) == 0);
    CHECK(ss.explore_questions.empty());
    CHECK(ss.partition_tag == "test");
    CHECK(r.partitions.at("llm").explore_questions.size() == 1);
}

TEST_CASE("answers default to the union of partition members") {
    TempDir tmp;
    auto p = tmp.file("implicit.json");
    write_file(p, R"({
      "qid": 7,
      "question": "q",
      "s1": {"exact_matches": {"list": ["b", "a"]},
             "serendipity_set": {"list": ["c"]}}
    })");
    auto recs = load_benchmark(p);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].answer_ids() == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("overlapping or stray partition members are rejected") {
    TempDir tmp;
    auto p = tmp.file("bad.json");
    write_file(p, R"({
      "qid": 9, "question": "q",
      "s1": {"exact_matches": {"list": ["a"]}, "serendipity_set": {"list": ["a"]}}
    })");
    CHECK_THROWS_WITH_AS(load_benchmark(p), doctest::Contains("qid 9"), ValidationError);

    write_file(p, R"({
      "qid": 10, "question": "q",
      "answer": [{"answer_argument": "a", "entity_name": ""}],
      "s1": {"exact_matches": {"list": ["a"]}, "serendipity_set": {"list": ["ghost"]}}
    })");
    CHECK_THROWS_WITH_AS(load_benchmark(p), doctest::Contains("ghost"), ValidationError);
}

TEST_CASE("array files and concatenated object streams both load") {
    const std::string rec1 = R"({"qid": 1, "question": "one",
        "s": {"exact_matches": {"list": ["a"]}, "serendipity_set": {"list": ["b"]}}})";
    const std::string rec2 = R"({"qid": 2, "question": "two",
        "s": {"exact_matches": {"list": ["x"]}, "serendipity_set": {"list": ["y"]}}})";
    TempDir tmp;

    auto arr = tmp.file("arr.json");
    write_file(arr, "[" + rec1 + ",\n" + rec2 + "]");
    auto a = load_benchmark(arr);
    REQUIRE(a.size() == 2);
    CHECK(a[0].qid == 1);
    CHECK(a[1].qid == 2);

    auto stream = tmp.file("stream.json");
    write_file(stream, rec1 + "\n" + rec2 + "\n");
    auto s = load_benchmark(stream);
    REQUIRE(s.size() == 2);
    CHECK(s[1].question == "two");

    auto trunc = tmp.file("trunc.json");
    write_file(trunc, rec1.substr(0, rec1.size() - 4));
    CHECK_THROWS_AS(load_benchmark(trunc), ParseError);
    CHECK_THROWS_AS(load_benchmark(tmp.file("missing.json")), NotFoundError);
}

TEST_CASE("flat lists and ranking scores are accepted in strategies") {
    TempDir tmp;
    auto p = tmp.file("flat.json");
    write_file(p, R"({
      "qid": 11, "question": "q",
      "s": {"exact_matches": ["a", "b"], "serendipity_set": ["c"],
            "scores": {"a": 0.9, "b": 0.5, "c": 0.7}}
    })");
    auto recs = load_benchmark(p);
    REQUIRE(recs.size() == 1);
    const auto& s = recs[0].partitions.at("s");
    CHECK(s.exact_matches == std::vector<std::string>{"a", "b"});
    CHECK(s.serendipity_set == std::vector<std::string>{"c"});
    CHECK(s.ranking_scores.at("c") == 0.7);
}
