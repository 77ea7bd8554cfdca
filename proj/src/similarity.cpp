#include "smartpick/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <vector>

namespace smartpick {
namespace {

struct Token {
    enum Type { IDENT, SYMBOL, NUMBER, STRING } type;
    std::string text; // identifiers lower-cased
};

std::vector<Token> tokenize(const std::string& sql) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = sql.size();
    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') { // line comment
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_')) ++j;
            std::string word = sql.substr(i, j - i);
            std::transform(word.begin(), word.end(), word.begin(),
                           [](unsigned char ch) { return std::tolower(ch); });
            out.push_back({Token::IDENT, word});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '.')) ++j;
            out.push_back({Token::NUMBER, sql.substr(i, j - i)});
            i = j;
            continue;
        }
        if (c == '\'' || c == '"') {
            size_t j = i + 1;
            while (j < n && sql[j] != c) ++j;
            out.push_back({Token::STRING, sql.substr(i, std::min(j + 1, n) - i)});
            i = std::min(j + 1, n);
            continue;
        }
        out.push_back({Token::SYMBOL, std::string(1, c)});
        ++i;
    }
    return out;
}

const std::set<std::string> kReserved = {
    "select", "from",  "join",   "inner", "outer",  "left",   "right", "full",  "cross",
    "on",     "where", "group",  "order", "by",     "having", "and",   "or",    "not",
    "in",     "exists","between","like",  "is",     "null",   "as",    "asc",   "desc",
    "union",  "all",   "distinct","limit","case",   "when",   "then",  "else",  "end",
    "with",   "top",   "using",  "natural",
};

enum class Clause { NONE, SELECT_LIST, FROM_LIST, PREDICATE };

} // namespace

StructuralSignature extract_signature(const std::string& sql, double n_map_tasks) {
    const std::vector<Token> toks = tokenize(sql);

    std::set<std::string> tables;
    std::set<std::string> columns;
    int subqueries = 0;
    int selects = 0;

    Clause clause = Clause::NONE;
    std::vector<Clause> paren_stack;
    bool expecting_table = false;

    auto is_kw = [&](size_t i, const char* kw) {
        return toks[i].type == Token::IDENT && toks[i].text == kw;
    };

    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];

        if (t.type == Token::SYMBOL) {
            if (t.text == "(") {
                paren_stack.push_back(clause);
            } else if (t.text == ")") {
                if (!paren_stack.empty()) {
                    clause = paren_stack.back();
                    paren_stack.pop_back();
                }
            } else if (t.text == ",") {
                if (clause == Clause::FROM_LIST) expecting_table = true;
            } else if (t.text == "*") {
                if (clause == Clause::SELECT_LIST) columns.insert("*");
            }
            continue;
        }
        if (t.type != Token::IDENT) continue;

        if (t.text == "select") {
            ++selects;
            if (i > 0 && toks[i - 1].type == Token::SYMBOL && toks[i - 1].text == "(") ++subqueries;
            clause = Clause::SELECT_LIST;
            continue;
        }
        if (t.text == "from" || t.text == "join") {
            clause = Clause::FROM_LIST;
            expecting_table = true;
            continue;
        }
        if (t.text == "on" || t.text == "where" || t.text == "having") {
            clause = Clause::PREDICATE;
            continue;
        }
        if ((t.text == "group" || t.text == "order") && i + 1 < toks.size() && is_kw(i + 1, "by")) {
            clause = Clause::PREDICATE;
            ++i; // swallow BY
            continue;
        }
        if (kReserved.count(t.text)) {
            // AS introduces an alias: skip the next identifier outright.
            if (t.text == "as" && i + 1 < toks.size() && toks[i + 1].type == Token::IDENT) ++i;
            continue;
        }

        // plain identifier
        const bool call = i + 1 < toks.size() && toks[i + 1].type == Token::SYMBOL &&
                          toks[i + 1].text == "(";
        // a.b.c -> keep the last segment
        std::string name = t.text;
        while (i + 2 < toks.size() && toks[i + 1].type == Token::SYMBOL && toks[i + 1].text == "." ) {
            if (toks[i + 2].type == Token::IDENT) {
                name = toks[i + 2].text;
                i += 2;
            } else if (toks[i + 2].type == Token::SYMBOL && toks[i + 2].text == "*") {
                name = "*";
                i += 2;
            } else {
                break;
            }
        }

        switch (clause) {
            case Clause::FROM_LIST:
                if (expecting_table) {
                    tables.insert(name);
                    expecting_table = false;
                }
                // otherwise: a table alias, ignored
                break;
            case Clause::SELECT_LIST:
            case Clause::PREDICATE:
                if (!call) columns.insert(name);
                break;
            case Clause::NONE:
                break;
        }
    }

    if (selects == 0) throw ParseError("query text contains no SELECT");

    StructuralSignature sig;
    sig.n_tables = static_cast<double>(tables.size());
    sig.n_columns = static_cast<double>(columns.size());
    sig.n_subqueries = static_cast<double>(subqueries);
    sig.n_map_tasks = n_map_tasks;
    return sig;
}

double cosine_similarity(const StructuralSignature& a, const StructuralSignature& b) {
    const double av[4] = {a.n_tables, a.n_columns, a.n_subqueries, a.n_map_tasks};
    const double bv[4] = {b.n_tables, b.n_columns, b.n_subqueries, b.n_map_tasks};
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 4; ++i) {
        dot += av[i] * bv[i];
        na += av[i] * av[i];
        nb += bv[i] * bv[i];
    }
    if (na == 0 || nb == 0)
        throw DomainError("similarity is undefined for an all-zero signature");
    const double s = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(s, 0.0, 1.0); // non-negative fields; clamp rounding spill
}

SimilarityMatch nearest_known(const StructuralSignature& probe, const SignatureRegistry& registry) {
    if (registry.empty()) throw StateError("similarity registry is empty");
    SimilarityMatch best;
    bool first = true;
    for (const auto& [id, sig] : registry) { // map order = lexicographic, so ties keep the first
        double s = cosine_similarity(probe, sig);
        if (first || s > best.score) {
            best = {id, s};
            first = false;
        }
    }
    return best;
}

} // namespace smartpick
