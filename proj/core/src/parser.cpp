#include "mcip/fo.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mcip::fo {

ParseError::ParseError(int line_, int column_, std::string msg)
    : line(line_), column(column_),
      message("line " + std::to_string(line_) + ", col " + std::to_string(column_) + ": " +
              std::move(msg)) {}

namespace {

// Cursor over a single line; keeps 1-based column for error messages.
class LineCursor {
public:
    LineCursor(const std::string& text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(line_, static_cast<int>(pos_) + 1, msg);
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool try_consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '\''))
            ++pos_;
        if (start == pos_) fail("expected identifier");
        std::string id = text_.substr(start, pos_ - start);
        if (std::isdigit(static_cast<unsigned char>(id[0])))
            fail("constants are not supported in formulas: " + id);
        return id;
    }

    std::uint64_t number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected number");
        return std::stoull(text_.substr(start, pos_ - start));
    }

    bool starts_with_keyword(const std::string& kw) {
        skip_ws();
        if (text_.compare(pos_, kw.size(), kw) != 0) return false;
        std::size_t after = pos_ + kw.size();
        if (after < text_.size()) {
            char c = text_[after];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
        }
        return true;
    }

    void consume_keyword(const std::string& kw) {
        if (!starts_with_keyword(kw)) fail("expected '" + kw + "'");
        pos_ += kw.size();
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_;
};

struct FormulaContext {
    const Vocabulary* vocab;
    const std::map<std::string, int>* var_index; // surface name -> 1..k
};

int parse_or(LineCursor& cur, Matrix& m, const FormulaContext& fc);

int resolve_var(LineCursor& cur, const FormulaContext& fc, const std::string& name) {
    auto it = fc.var_index->find(name);
    if (it == fc.var_index->end()) cur.fail("unbound variable: " + name);
    return it->second;
}

int parse_atom_or_group(LineCursor& cur, Matrix& m, const FormulaContext& fc) {
    if (cur.try_consume('!')) {
        int child = parse_atom_or_group(cur, m, fc);
        return m.add_not(child);
    }
    if (cur.try_consume('(')) {
        int inner = parse_or(cur, m, fc);
        cur.expect(')');
        return inner;
    }
    std::string name = cur.identifier();
    if (cur.try_consume('(')) {
        int sym = fc.vocab->find(name);
        if (sym < 0) cur.fail("unknown relation symbol: " + name);
        std::vector<int> vars;
        if (!cur.try_consume(')')) {
            do {
                vars.push_back(resolve_var(cur, fc, cur.identifier()));
            } while (cur.try_consume(','));
            cur.expect(')');
        }
        if (vars.size() != static_cast<std::size_t>(fc.vocab->entries[sym].arity))
            cur.fail("relation " + name + " expects " +
                     std::to_string(fc.vocab->entries[sym].arity) + " arguments, got " +
                     std::to_string(vars.size()));
        return m.add_rel(sym, std::move(vars));
    }
    cur.expect('=');
    int lhs = resolve_var(cur, fc, name);
    int rhs = resolve_var(cur, fc, cur.identifier());
    return m.add_equal(lhs, rhs);
}

int parse_and(LineCursor& cur, Matrix& m, const FormulaContext& fc) {
    int lhs = parse_atom_or_group(cur, m, fc);
    while (cur.try_consume('&')) {
        int rhs = parse_atom_or_group(cur, m, fc);
        lhs = m.add_and(lhs, rhs);
    }
    return lhs;
}

int parse_or(LineCursor& cur, Matrix& m, const FormulaContext& fc) {
    int lhs = parse_and(cur, m, fc);
    while (cur.try_consume('|')) {
        int rhs = parse_and(cur, m, fc);
        lhs = m.add_or(lhs, rhs);
    }
    return lhs;
}

PNFFormula parse_formula_line(LineCursor& cur, const Vocabulary& vocab) {
    PNFFormula f;
    std::map<std::string, int> var_index;
    while (cur.starts_with_keyword("EX") || cur.starts_with_keyword("ALL")) {
        Quantifier qf = cur.starts_with_keyword("EX") ? Quantifier::Exists : Quantifier::Forall;
        cur.consume_keyword(qf == Quantifier::Exists ? "EX" : "ALL");
        std::string name = cur.identifier();
        if (var_index.count(name)) cur.fail("duplicate variable in prefix: " + name);
        f.prefix.push_back(qf);
        f.var_names.push_back(name);
        var_index[name] = static_cast<int>(f.prefix.size());
        cur.expect('.');
    }
    FormulaContext fc{&vocab, &var_index};
    f.matrix.root = parse_or(cur, f.matrix, fc);
    if (!cur.at_end()) cur.fail("trailing input after formula");
    return f;
}

} // namespace

Instance parse_instance(const std::string& text, int arity_cap) {
    std::istringstream input(text);
    std::string raw;
    int lineno = 0;

    Vocabulary vocab;
    bool have_vocab = false, have_universe = false, have_formula = false;
    std::size_t universe = 0;
    std::vector<std::pair<int, std::vector<std::vector<std::uint64_t>>>> rel_blocks;
    std::vector<bool> seen_rel;
    PNFFormula formula;

    while (std::getline(input, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        LineCursor cur(raw, lineno);
        if (cur.at_end()) continue;

        if (cur.starts_with_keyword("vocab")) {
            cur.consume_keyword("vocab");
            if (have_vocab) cur.fail("duplicate vocab line");
            have_vocab = true;
            while (!cur.at_end()) {
                std::string sym = cur.identifier();
                cur.expect('/');
                std::uint64_t arity = cur.number();
                if (vocab.find(sym) >= 0) cur.fail("duplicate symbol in vocab: " + sym);
                if (arity < 1) cur.fail("arity must be >= 1");
                if (arity > static_cast<std::uint64_t>(arity_cap))
                    cur.fail("arity of " + sym + " exceeds cap " + std::to_string(arity_cap));
                vocab.entries.push_back({sym, static_cast<int>(arity)});
            }
            seen_rel.assign(vocab.entries.size(), false);
        } else if (cur.starts_with_keyword("universe")) {
            cur.consume_keyword("universe");
            if (have_universe) cur.fail("duplicate universe line");
            have_universe = true;
            universe = cur.number();
            if (universe < 1) cur.fail("universe size must be >= 1");
            if (!cur.at_end()) cur.fail("trailing input after universe size");
        } else if (cur.starts_with_keyword("rel")) {
            cur.consume_keyword("rel");
            if (!have_vocab) cur.fail("rel line before vocab line");
            if (!have_universe) cur.fail("rel line before universe line");
            std::string sym = cur.identifier();
            int idx = vocab.find(sym);
            if (idx < 0) cur.fail("unknown relation symbol: " + sym);
            if (seen_rel[idx]) cur.fail("duplicate relation block for " + sym);
            seen_rel[idx] = true;
            cur.expect(':');
            std::vector<std::vector<std::uint64_t>> tuples;
            while (!cur.at_end()) {
                cur.expect('(');
                std::vector<std::uint64_t> tuple;
                if (!cur.try_consume(')')) {
                    do {
                        std::uint64_t v = cur.number();
                        if (v >= universe) cur.fail("universe element out of range: " +
                                                    std::to_string(v));
                        tuple.push_back(v);
                    } while (cur.try_consume(','));
                    cur.expect(')');
                }
                if (tuple.size() != static_cast<std::size_t>(vocab.entries[idx].arity))
                    cur.fail("tuple length does not match arity of " + sym);
                tuples.push_back(std::move(tuple));
            }
            rel_blocks.emplace_back(idx, std::move(tuples));
        } else if (cur.starts_with_keyword("formula")) {
            cur.consume_keyword("formula");
            if (have_formula) cur.fail("duplicate formula line");
            if (!have_vocab) cur.fail("formula line before vocab line");
            have_formula = true;
            cur.expect(':');
            formula = parse_formula_line(cur, vocab);
        } else {
            cur.fail("unrecognized line");
        }
    }

    if (!have_vocab) throw ParseError(lineno + 1, 1, "missing vocab line");
    if (!have_universe) throw ParseError(lineno + 1, 1, "missing universe line");
    if (!have_formula) throw ParseError(lineno + 1, 1, "missing formula line");

    Structure structure(std::move(vocab), universe, arity_cap);
    for (auto& [sym, tuples] : rel_blocks)
        for (auto& t : tuples) structure.add_tuple(sym, t);

    return Instance{std::move(structure), std::move(formula)};
}

Instance parse_instance_file(const std::string& path, int arity_cap) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str(), arity_cap);
}

namespace {

std::string var_name(const PNFFormula& f, int v) {
    if (v >= 1 && v <= static_cast<int>(f.var_names.size())) return f.var_names[v - 1];
    return "x" + std::to_string(v);
}

void unparse_node(std::ostream& os, const Instance& inst, int node) {
    const auto& f = inst.formula;
    const auto& nd = f.matrix.nodes[node];
    switch (nd.kind) {
    case Matrix::Kind::Equal:
        os << var_name(f, nd.a) << " = " << var_name(f, nd.b);
        break;
    case Matrix::Kind::Rel: {
        os << inst.structure.vocab().entries[nd.a].symbol << '(';
        for (std::size_t i = 0; i < nd.args.size(); ++i) {
            if (i) os << ',';
            os << var_name(f, nd.args[i]);
        }
        os << ')';
        break;
    }
    case Matrix::Kind::Not:
        os << '!';
        if (f.matrix.nodes[nd.a].kind == Matrix::Kind::Equal) {
            os << '(';
            unparse_node(os, inst, nd.a);
            os << ')';
        } else {
            unparse_node(os, inst, nd.a);
        }
        break;
    case Matrix::Kind::And:
    case Matrix::Kind::Or:
        os << '(';
        unparse_node(os, inst, nd.a);
        os << (nd.kind == Matrix::Kind::And ? " & " : " | ");
        unparse_node(os, inst, nd.b);
        os << ')';
        break;
    }
}

} // namespace

std::string unparse(const Instance& inst) {
    std::ostringstream os;
    const auto& s = inst.structure;
    os << "vocab";
    for (const auto& e : s.vocab().entries) os << ' ' << e.symbol << '/' << e.arity;
    os << '\n';
    os << "universe " << s.universe_size() << '\n';
    for (std::size_t sym = 0; sym < s.vocab().entries.size(); ++sym) {
        os << "rel " << s.vocab().entries[sym].symbol << ':';
        int arity = s.vocab().entries[sym].arity;
        std::size_t total = s.bits(sym).size();
        std::size_t n = s.universe_size();
        for (std::size_t idx = 0; idx < total; ++idx) {
            if (!s.bits(sym)[idx]) continue;
            std::vector<std::uint64_t> tuple(arity);
            std::size_t rem = idx;
            for (int j = arity - 1; j >= 0; --j) {
                tuple[j] = rem % n;
                rem /= n;
            }
            os << " (";
            for (int j = 0; j < arity; ++j) {
                if (j) os << ',';
                os << tuple[j];
            }
            os << ')';
        }
        os << '\n';
    }
    os << "formula:";
    const auto& f = inst.formula;
    for (int i = 0; i < f.k(); ++i) {
        os << ' ' << (f.prefix[i] == Quantifier::Exists ? "EX" : "ALL") << ' '
           << var_name(f, i + 1) << " .";
    }
    os << ' ';
    if (f.matrix.root >= 0) unparse_node(os, inst, f.matrix.root);
    os << '\n';
    return os.str();
}

} // namespace mcip::fo
