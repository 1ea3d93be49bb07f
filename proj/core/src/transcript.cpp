#include <sstream>
#include <stdexcept>

#include "mcip/protocol.hpp"

namespace mcip::protocol {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw std::runtime_error("malformed transcript: " + what);
}

std::string op_tag(const arith::Op& op) {
    char c = op.kind == arith::OpKind::Exists ? 'E'
             : op.kind == arith::OpKind::Forall ? 'A'
                                                : 'R';
    return c + std::to_string(op.var);
}

arith::Op parse_op_tag(const std::string& tag) {
    if (tag.size() < 2) bad("operator tag '" + tag + "'");
    arith::OpKind kind;
    switch (tag[0]) {
    case 'E': kind = arith::OpKind::Exists; break;
    case 'A': kind = arith::OpKind::Forall; break;
    case 'R': kind = arith::OpKind::Reduce; break;
    default: bad("operator tag '" + tag + "'");
    }
    int var = 0;
    try {
        std::size_t pos = 0;
        var = std::stoi(tag.substr(1), &pos);
        if (pos + 1 != tag.size()) bad("operator tag '" + tag + "'");
    } catch (const std::logic_error&) {
        bad("operator tag '" + tag + "'");
    }
    if (var < 1) bad("operator tag '" + tag + "'");
    return {kind, var};
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) bad(what + " value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        bad(what + " value '" + s + "'");
    }
}

ExtElement parse_elt(const std::string& s, const std::string& what) {
    try {
        return ExtElement::from_string(s);
    } catch (const std::exception&) {
        bad(what + " value '" + s + "'");
    }
}

/// Header line "key value"; returns the value part or fails.
std::string expect_kv(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) bad("missing '" + key + "' line");
    if (line.rfind(key + " ", 0) != 0) bad("expected '" + key + "' line, got '" + line + "'");
    return line.substr(key.size() + 1);
}

} // namespace

std::string Transcript::to_string() const {
    std::ostringstream out;
    out << "version " << version << '\n';
    out << "q " << q << '\n';
    out << "irr " << irr.to_string() << '\n';
    out << "seed " << seed << '\n';
    out << "rounds " << rounds_total << '\n';
    out << "instance-digest " << instance_digest << '\n';
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        const RoundRecord& r = rounds[i];
        out << "round " << (i + 1) << " op " << op_tag(r.op) << " msg " << r.msg.to_string()
            << " check " << r.check.to_string() << " challenge " << r.challenge.to_string()
            << " claim " << r.claim.to_string() << '\n';
    }
    out << "final matrix " << final_matrix.to_string() << " verdict "
        << (accepted ? "accept" : "reject");
    if (!accepted && fail_round != 0)
        out << " fail-round " << fail_round << " reason " << fail_reason;
    out << '\n';
    return out.str();
}

Transcript Transcript::from_string(const std::string& text) {
    std::istringstream in(text);
    Transcript tr;

    std::string v = expect_kv(in, "version");
    tr.version = static_cast<int>(parse_u64(v, "version"));
    if (tr.version != 1) bad("unsupported version " + v);
    tr.q = parse_u64(expect_kv(in, "q"), "q");
    std::string irr_text = expect_kv(in, "irr");
    try {
        tr.irr = field::IrreduciblePoly::from_string(irr_text);
    } catch (const std::exception&) {
        bad("irr value '" + irr_text + "'");
    }
    tr.seed = parse_u64(expect_kv(in, "seed"), "seed");
    tr.rounds_total = parse_u64(expect_kv(in, "rounds"), "rounds");
    tr.instance_digest = expect_kv(in, "instance-digest");
    if (tr.instance_digest.size() != 16 ||
        tr.instance_digest.find_first_not_of("0123456789abcdef") != std::string::npos)
        bad("instance digest '" + tr.instance_digest + "'");

    std::string line;
    bool saw_final = false;
    std::size_t round_no = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (saw_final) bad("content after the final line");
        if (line.rfind("round ", 0) == 0) {
            // layout: round <t> op <tag> msg <poly> check <e> challenge <e> claim <e>
            // the msg text contains spaces, so split on the keyword markers
            std::size_t op_pos = line.find(" op ");
            std::size_t msg_pos = line.find(" msg ", op_pos == std::string::npos ? 0 : op_pos);
            std::size_t chk_pos = line.rfind(" check ");
            std::size_t cha_pos = line.rfind(" challenge ");
            std::size_t clm_pos = line.rfind(" claim ");
            if (op_pos == std::string::npos || msg_pos == std::string::npos ||
                chk_pos == std::string::npos || cha_pos == std::string::npos ||
                clm_pos == std::string::npos || !(op_pos < msg_pos && msg_pos < chk_pos &&
                                                  chk_pos < cha_pos && cha_pos < clm_pos))
            bad("round line '" + line + "'");
            std::uint64_t t = parse_u64(line.substr(6, op_pos - 6), "round number");
            if (t != ++round_no) bad("round numbers are not consecutive from 1");
            RoundRecord rec;
            rec.op = parse_op_tag(line.substr(op_pos + 4, msg_pos - (op_pos + 4)));
            std::string msg_text = line.substr(msg_pos + 5, chk_pos - (msg_pos + 5));
            try {
                rec.msg = arith::UnivariatePoly::from_string(msg_text);
            } catch (const std::exception&) {
                bad("message polynomial '" + msg_text + "'");
            }
            rec.check = parse_elt(line.substr(chk_pos + 7, cha_pos - (chk_pos + 7)), "check");
            rec.challenge =
                parse_elt(line.substr(cha_pos + 11, clm_pos - (cha_pos + 11)), "challenge");
            rec.claim = parse_elt(line.substr(clm_pos + 7), "claim");
            rec.completed = true;
            tr.rounds.push_back(std::move(rec));
        } else if (line.rfind("final matrix ", 0) == 0) {
            saw_final = true;
            std::istringstream fin(line.substr(13));
            std::string elt, kw, verdict;
            if (!(fin >> elt)) bad("final line '" + line + "'");
            tr.final_matrix = parse_elt(elt, "final matrix");
            if (!(fin >> kw >> verdict) || kw != "verdict" ||
                (verdict != "accept" && verdict != "reject"))
                bad("final line '" + line + "'");
            tr.accepted = verdict == "accept";
            std::string extra;
            if (fin >> extra) {
                std::string fr;
                if (extra != "fail-round" || !(fin >> fr)) bad("final line '" + line + "'");
                tr.fail_round = parse_u64(fr, "fail-round");
                if (!(fin >> extra >> tr.fail_reason) || extra != "reason")
                    bad("final line '" + line + "'");
                if (fin >> extra) bad("final line '" + line + "'");
            }
            if (tr.accepted && tr.fail_round != 0) bad("accept verdict with fail-round");
            if (!tr.accepted && tr.fail_round == 0) bad("reject verdict without fail-round");
        } else {
            bad("unexpected line '" + line + "'");
        }
    }
    if (!saw_final) bad("missing final line");
    if (tr.fail_round > tr.rounds_total + 1) bad("fail-round beyond the schedule");
    std::size_t expected_rows = (tr.fail_round >= 1 && tr.fail_round <= tr.rounds_total)
                                    ? tr.fail_round
                                    : tr.rounds_total;
    if (tr.rounds.size() != expected_rows) bad("round line count does not match the verdict");
    if (tr.fail_round >= 1 && tr.fail_round <= tr.rounds_total && !tr.rounds.empty())
        tr.rounds.back().completed = false;
    tr.has_final_matrix = tr.fail_round == 0 || tr.fail_round == tr.rounds_total + 1;
    return tr;
}

} // namespace mcip::protocol
