#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcip::fo {

/// Relational vocabulary: distinct symbol names with arities >= 1.
struct Vocabulary {
    struct Entry {
        std::string symbol;
        int arity;
    };
    std::vector<Entry> entries;

    /// Index of a symbol, or -1 if absent.
    int find(const std::string& symbol) const;
};

inline constexpr int kDefaultArityCap = 4;

/// Relational structure with universe {0,...,n-1} and dense per-relation
/// membership arrays in row-major (lexicographic tuple) order, so one
/// membership lookup touches exactly one array cell.
class Structure {
public:
    Structure(Vocabulary vocab, std::size_t universe_size, int arity_cap = kDefaultArityCap);

    const Vocabulary& vocab() const { return vocab_; }
    std::size_t universe_size() const { return n_; }

    /// Inserts a tuple into the relation for symbol index `sym`.
    void add_tuple(int sym, const std::vector<std::uint64_t>& tuple);

    /// One array access. Entries must be < universe_size.
    bool membership(int sym, const std::vector<std::uint64_t>& tuple) const;
    bool membership_by_name(const std::string& symbol, const std::vector<std::uint64_t>& tuple) const;

    std::size_t tuple_count(int sym) const { return counts_[sym]; }
    const std::vector<std::uint8_t>& bits(int sym) const { return bits_[sym]; }

    /// |A| + |tau| + sum over (s,r) of |R^s| * r.
    std::size_t size_measure() const;

private:
    std::size_t tuple_index(int sym, const std::vector<std::uint64_t>& tuple) const;

    Vocabulary vocab_;
    std::size_t n_;
    std::vector<std::vector<std::uint8_t>> bits_;
    std::vector<std::size_t> counts_;
};

/// Quantifier-free formula AST, stored as a flat node arena.
/// Variables are indices 1..k in prefix order.
struct Matrix {
    enum class Kind { Equal, Rel, Not, And, Or };

    struct Node {
        Kind kind;
        // Equal: a, b are variable indices.
        // Rel:   a is the vocabulary symbol index, args holds variable indices.
        // Not:   a is the child node index.
        // And/Or: a, b are child node indices.
        int a = 0;
        int b = 0;
        std::vector<int> args;
    };

    std::vector<Node> nodes;
    int root = -1;

    std::size_t node_count() const { return nodes.size(); }

    int add_equal(int v1, int v2);
    int add_rel(int sym, std::vector<int> vars);
    int add_not(int child);
    int add_and(int lhs, int rhs);
    int add_or(int lhs, int rhs);

    /// Highest variable index occurring in the matrix (0 if none).
    int max_var() const;
};

enum class Quantifier { Exists, Forall };

/// Prenex-normal-form sentence: quantifier prefix plus quantifier-free matrix.
struct PNFFormula {
    std::vector<Quantifier> prefix; // variable i+1 is bound by prefix[i]
    std::vector<std::string> var_names; // surface names, for messages only
    Matrix matrix;

    int k() const { return static_cast<int>(prefix.size()); }
};

struct Instance {
    Structure structure;
    PNFFormula formula;

    int k() const { return formula.k(); }
};

/// Boolean semantics of a quantifier-free matrix under a full assignment
/// (assignment[i] is the value of variable i+1).
bool eval_matrix_bool(const Structure& s, const Matrix& m,
                      const std::vector<std::uint64_t>& assignment);

struct ParseError : std::exception {
    int line;
    int column;
    std::string message;

    ParseError(int line_, int column_, std::string msg);
    const char* what() const noexcept override { return message.c_str(); }
};

/// Parses the line-oriented instance format (vocab / universe / rel /
/// formula lines, '#' comments). Throws ParseError with line/column.
Instance parse_instance(const std::string& text, int arity_cap = kDefaultArityCap);
Instance parse_instance_file(const std::string& path, int arity_cap = kDefaultArityCap);

/// Canonical text form; unparse(parse(t)) reparses to an identical instance.
std::string unparse(const Instance& inst);

} // namespace mcip::fo
