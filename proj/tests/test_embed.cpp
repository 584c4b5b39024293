#include <cmath>
#include <string>
#include <vector>

#include "serenqa/embed.hpp"
#include "serenqa/errors.hpp"
#include "serenqa/graph.hpp"

#include "doctest.h"
#include "temp_dir.hpp"

using namespace serenqa;

TEST_CASE("embedding table loads and normalizes") {
    EmbeddingTable t = load_embeddings(fixture("qid800_embeddings.tsv"));
    CHECK(t.dim() == 4);
    CHECK(t.size() == 8);
    CHECK(t.has("P29474"));
    CHECK_FALSE(t.has("VEGFA"));
    CHECK(t.vec("P29474") == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(t.vec("P07900")[0] == doctest::Approx(0.6).epsilon(1e-15));  // already unit length
    CHECK(t.ids().front() == "P29474");
    CHECK_THROWS_AS(t.vec("nope"), NotFoundError);
}

TEST_CASE("vectors are scaled to unit length on insert") {
    TempDir tmp;
    auto p = tmp.file("e.tsv");
    write_file(p, "D=2\nn\t3 4\n");
    EmbeddingTable t = load_embeddings(p);
    CHECK(t.vec("n")[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(t.vec("n")[1] == doctest::Approx(0.8).epsilon(1e-15));

    EmbeddingTable direct(3);
    direct.put("x", {0.0, 0.0, 2.0});
    CHECK(direct.vec("x") == std::vector<double>{0.0, 0.0, 1.0});
    CHECK_THROWS_AS(direct.put("y", {0.0, 0.0, 0.0}), DegenerateDistributionError);
    CHECK_THROWS_AS(direct.put("z", {1.0, 2.0}), DomainError);
}

TEST_CASE("malformed embedding files are rejected with line numbers") {
    TempDir tmp;
    auto bad = [&](const std::string& content) {
        auto p = tmp.file("bad.tsv");
        write_file(p, content);
        return p;
    };
    CHECK_THROWS_AS(load_embeddings(bad("n\t1 0\n")), ParseError);          // no header
    CHECK_THROWS_AS(load_embeddings(bad("D=zero\nn\t1 0\n")), ParseError);  // bad header
    CHECK_THROWS_WITH_AS(load_embeddings(bad("D=2\nn\t1 0 0\n")), doctest::Contains("(line 2)"),
                         ParseError);
    CHECK_THROWS_AS(load_embeddings(bad("D=2\nn\t1 oops\n")), ParseError);
    CHECK_THROWS_AS(load_embeddings(bad("D=2\nn\t0 0\n")), ValidationError);  // zero vector
    CHECK_THROWS_AS(load_embeddings(tmp.file("absent.tsv")), NotFoundError);
}

TEST_CASE("normalized distance spans identical to antipodal") {
    EmbeddingTable t(2);
    t.put("same1", {1.0, 0.0});
    t.put("same2", {2.0, 0.0});
    t.put("anti", {-1.0, 0.0});
    t.put("orth", {0.0, 1.0});
    CHECK(normalized_distance(t, "same1", "same2") == 0.0);
    CHECK(normalized_distance(t, "same1", "anti") == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(normalized_distance(t, "same1", "orth") ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));

    EmbeddingTable f = load_embeddings(fixture("qid800_embeddings.tsv"));
    CHECK(normalized_distance(f, "P29474", "P07900") ==
          doctest::Approx(0.4472135955).epsilon(1e-9));
}

TEST_CASE("synthesized embeddings are seeded, unit, and complete") {
    Graph g = load_edges(fixture("grin2a_graph.tsv"));
    EmbeddingTable a = propagate_embeddings(g, 16, 2, 42);
    EmbeddingTable b = propagate_embeddings(g, 16, 2, 42);
    EmbeddingTable c = propagate_embeddings(g, 16, 2, 43);

    CHECK(a.dim() == 16);
    CHECK(a.size() == g.node_count());
    for (const auto& id : g.sorted_ids()) {
        REQUIRE(a.has(id));
        CHECK(a.vec(id) == b.vec(id));  // bitwise reproducible
        double norm = 0.0;
        for (double v : a.vec(id)) norm += v * v;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
    bool any_differs = false;
    for (const auto& id : g.sorted_ids()) {
        if (a.vec(id) != c.vec(id)) any_differs = true;
    }
    CHECK(any_differs);

    // Smoothing pulls neighbors together: the translated protein should sit
    // closer to its gene than an unrelated drug does.
    CHECK(normalized_distance(a, "GRIN2A", "Q12879") <
          normalized_distance(a, "GRIN2A", "D-Serine"));

    CHECK_THROWS_AS(propagate_embeddings(g, 0, 2, 1), DomainError);
    CHECK_THROWS_AS(propagate_embeddings(g, 4, -1, 1), DomainError);
}
