#pragma once

#include <map>
#include <string>

#include "smartpick/errors.hpp"

namespace smartpick {

// Structural fingerprint of a SQL query, the 4-vector used for routing
// unknown query texts to the nearest known class.
struct StructuralSignature {
    double n_tables = 0;
    double n_columns = 0;
    double n_subqueries = 0;
    double n_map_tasks = 0;

    friend bool operator==(const StructuralSignature&, const StructuralSignature&) = default;
};

using SignatureRegistry = std::map<std::string, StructuralSignature>;

// Pragmatic SQL shape extraction (not a full parser): counts distinct table
// names (FROM/JOIN positions, subqueries included), distinct column names
// (select list, ON/WHERE/GROUP BY/ORDER BY/HAVING positions; '*' counts as a
// column, qualified names reduce to their last segment), and nested SELECTs.
// Identifier distinctness is case-insensitive. n_map_tasks comes from the
// caller (it is a runtime property, not derivable from text).
// Throws ParseError when the text contains no SELECT at all.
StructuralSignature extract_signature(const std::string& sql, double n_map_tasks);

// Standard cosine similarity over the 4-vector, in [0, 1]. An all-zero
// signature has no direction to compare; it raises DomainError.
double cosine_similarity(const StructuralSignature& a, const StructuralSignature& b);

// Highest-similarity registry entry; ties break to the lexicographically
// smallest query id. Throws StateError on an empty registry.
struct SimilarityMatch {
    std::string query_id;
    double score = 0;
};
SimilarityMatch nearest_known(const StructuralSignature& probe, const SignatureRegistry& registry);

} // namespace smartpick
