// SQL shape extraction and cosine routing of unknown query texts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "scenario.hpp"
#include "smartpick/errors.hpp"
#include "smartpick/similarity.hpp"

using namespace smartpick;

TEST_CASE("a flat select lists its tables and columns") {
    const StructuralSignature s = extract_signature("SELECT a, b FROM t1", 4);
    CHECK(s.n_tables == 1);
    CHECK(s.n_columns == 2);
    CHECK(s.n_subqueries == 0);
    CHECK(s.n_map_tasks == 4);
}

TEST_CASE("joins, predicates, and nested selects are counted") {
    const StructuralSignature s = extract_signature(
        "SELECT * FROM t1 JOIN t2 ON t1.x = t2.x WHERE t1.y IN (SELECT y FROM t3)", 16);
    CHECK(s.n_tables == 3);    // t1, t2, t3
    CHECK(s.n_columns == 3);   // *, x, y
    CHECK(s.n_subqueries == 1);
    CHECK(s.n_map_tasks == 16);
}

TEST_CASE("identifiers are case-insensitive and qualified names collapse") {
    const StructuralSignature s = extract_signature(
        "SELECT T1.A, t1.a, B FROM T1 JOIN t1 ON t1.A = T1.B", 1);
    CHECK(s.n_tables == 1);  // T1 == t1
    CHECK(s.n_columns == 2); // a, b
}

TEST_CASE("group by, order by, and having contribute columns") {
    const StructuralSignature s = extract_signature(
        "SELECT region FROM sales GROUP BY region, channel HAVING cnt > 3 ORDER BY total", 2);
    CHECK(s.n_tables == 1);
    CHECK(s.n_columns == 4); // region, channel, cnt, total
}

TEST_CASE("text without a select is rejected") {
    CHECK_THROWS_AS(extract_signature("DROP TABLE t", 1), ParseError);
    CHECK_THROWS_AS(extract_signature("", 1), ParseError);
}

TEST_CASE("cosine similarity basics") {
    const StructuralSignature a{2, 5, 1, 10};
    const StructuralSignature b{4, 10, 2, 20}; // exactly 2x a
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));

    const StructuralSignature e1{1, 0, 0, 0};
    const StructuralSignature e2{0, 1, 0, 0};
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));

    CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));

    const StructuralSignature zero{0, 0, 0, 0};
    CHECK_THROWS_AS(cosine_similarity(zero, a), DomainError);
    CHECK_THROWS_AS(cosine_similarity(a, zero), DomainError);
}

TEST_CASE("cosine similarity is scale invariant and bounded") {
    const StructuralSignature a{3, 7, 1, 40};
    const StructuralSignature b{1, 12, 0, 25};
    const double base = cosine_similarity(a, b);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
    for (double lambda : {1e-3, 0.5, 2.0, 1e3}) {
        const StructuralSignature scaled{a.n_tables * lambda, a.n_columns * lambda,
                                         a.n_subqueries * lambda, a.n_map_tasks * lambda};
        CHECK(std::abs(cosine_similarity(scaled, b) - base) <= 1e-9);
    }
}

TEST_CASE("nearest_known picks the argmax and breaks ties lexicographically") {
    SignatureRegistry reg;
    reg["q_b"] = StructuralSignature{2, 4, 0, 10};
    reg["q_a"] = StructuralSignature{4, 8, 0, 20}; // same direction as q_b
    reg["q_c"] = StructuralSignature{0, 0, 5, 1};

    // Probe parallel to q_a/q_b: both score 1.0, tie goes to "q_a".
    const SimilarityMatch m = nearest_known(StructuralSignature{1, 2, 0, 5}, reg);
    CHECK(m.query_id == "q_a");
    CHECK(m.score == doctest::Approx(1.0));

    const SimilarityMatch far = nearest_known(StructuralSignature{0, 0, 7, 1.5}, reg);
    CHECK(far.query_id == "q_c");

    CHECK_THROWS_AS(nearest_known(StructuralSignature{1, 1, 0, 1}, SignatureRegistry{}),
                    StateError);
}

TEST_CASE("the five-class registry routes probes like a brute-force scan") {
    const SignatureRegistry reg = scenario::five_class_registry();
    REQUIRE(reg.size() == 5);
    const auto classes = scenario::five_classes();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        // Exact duplicate text: similarity 1 to its own class.
        const StructuralSignature probe = extract_signature(
            scenario::class_sql(i), static_cast<double>(classes[i].n_tasks));
        const SimilarityMatch m = nearest_known(probe, reg);

        std::string brute_id;
        double brute_score = -1.0;
        for (const auto& [id, sig] : reg) {
            const double s = cosine_similarity(probe, sig);
            if (s > brute_score) {
                brute_score = s;
                brute_id = id;
            }
        }
        CHECK(m.query_id == brute_id);
        CHECK(m.score == doctest::Approx(brute_score));
        CHECK(m.query_id == classes[i].id);
        CHECK(m.score == doctest::Approx(1.0));
    }
}
