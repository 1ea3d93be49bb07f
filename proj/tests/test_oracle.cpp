#include <doctest.h>

#include "mcip/fo.hpp"
#include "mcip/oracle.hpp"
#include "mcip/rng.hpp"

using namespace mcip;

namespace {

fo::Instance edge_instance(const char* formula_line) {
    std::string text = "vocab E/2\nuniverse 2\nrel E: (0,1)\nformula: ";
    text += formula_line;
    text += "\n";
    return fo::parse_instance(text);
}

fo::Matrix random_positive_matrix(Rng& rng) {
    // And/Or tree over relational atoms only (no Not), three variables
    fo::Matrix m;
    int a = m.add_rel(0, {static_cast<int>(rng.uniform(3)) + 1,
                          static_cast<int>(rng.uniform(3)) + 1});
    int b = m.add_rel(0, {static_cast<int>(rng.uniform(3)) + 1,
                          static_cast<int>(rng.uniform(3)) + 1});
    m.root = rng.uniform(2) ? m.add_and(a, b) : m.add_or(a, b);
    return m;
}

} // namespace

TEST_CASE("model_check examples") {
    CHECK(oracle::model_check(edge_instance("EX x . EX y . E(x,y)")));
    CHECK(!oracle::model_check(edge_instance("ALL x . EX y . E(x,y)")));
}

TEST_CASE("ground sentence with empty prefix") {
    // the surface grammar has no ground atoms; build the dummy tautology
    fo::Structure s(fo::Vocabulary{}, 1);
    fo::Matrix m;
    m.root = m.add_equal(0, 0);
    fo::Instance inst{std::move(s), fo::PNFFormula{{}, {}, m}};
    CHECK(oracle::model_check(inst));

    fo::Matrix neg;
    neg.root = neg.add_not(neg.add_equal(0, 0));
    fo::Instance f{fo::Structure(fo::Vocabulary{}, 1), fo::PNFFormula{{}, {}, neg}};
    CHECK(!oracle::model_check(f));
}

TEST_CASE("duality: swapped quantifiers against negated matrix") {
    Rng rng(23);
    for (int rep = 0; rep < 60; ++rep) {
        std::size_t n = 1 + rng.uniform(3);
        fo::Structure s(fo::Vocabulary{{{"E", 2}}}, n);
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b)
                if (rng.uniform(2)) s.add_tuple(0, {a, b});
        int k = 1 + static_cast<int>(rng.uniform(3));
        std::vector<fo::Quantifier> prefix, dual;
        for (int i = 0; i < k; ++i) {
            bool ex = rng.uniform(2);
            prefix.push_back(ex ? fo::Quantifier::Exists : fo::Quantifier::Forall);
            dual.push_back(ex ? fo::Quantifier::Forall : fo::Quantifier::Exists);
        }
        fo::Matrix m;
        int a = m.add_rel(0, {static_cast<int>(rng.uniform(k)) + 1,
                              static_cast<int>(rng.uniform(k)) + 1});
        int b = m.add_equal(static_cast<int>(rng.uniform(k)) + 1,
                            static_cast<int>(rng.uniform(k)) + 1);
        m.root = rng.uniform(2) ? m.add_and(a, b) : m.add_or(a, b);
        fo::Matrix neg = m;
        neg.root = neg.add_not(neg.root);

        fo::Instance direct{s, fo::PNFFormula{prefix, {}, m}};
        fo::Instance dualized{s, fo::PNFFormula{dual, {}, neg}};
        CHECK(oracle::model_check(direct) == !oracle::model_check(dualized));
    }
}

TEST_CASE("monotonicity of positive formulas") {
    Rng rng(31);
    for (int rep = 0; rep < 60; ++rep) {
        std::size_t n = 1 + rng.uniform(3);
        fo::Structure base(fo::Vocabulary{{{"E", 2}}}, n);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> missing;
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b) {
                if (rng.uniform(2))
                    base.add_tuple(0, {a, b});
                else
                    missing.emplace_back(a, b);
            }
        if (missing.empty()) continue;
        fo::Matrix m = random_positive_matrix(rng);
        std::vector<fo::Quantifier> prefix(3, fo::Quantifier::Exists);
        for (int i = 0; i < 3; ++i)
            if (rng.uniform(2)) prefix[i] = fo::Quantifier::Forall;

        fo::Instance before{base, fo::PNFFormula{prefix, {}, m}};
        bool was_true = oracle::model_check(before);

        auto [a, b] = missing[rng.uniform(missing.size())];
        fo::Structure grown = base;
        grown.add_tuple(0, {a, b});
        fo::Instance after{std::move(grown), fo::PNFFormula{prefix, {}, m}};
        if (was_true) CHECK(oracle::model_check(after));
    }
}

TEST_CASE("matrix variable outside the prefix is rejected") {
    fo::Structure s(fo::Vocabulary{{{"E", 2}}}, 2);
    fo::Matrix m;
    m.root = m.add_rel(0, {1, 2});
    fo::Instance inst{std::move(s), fo::PNFFormula{{fo::Quantifier::Exists}, {}, m}};
    CHECK_THROWS(oracle::model_check(inst));
}
