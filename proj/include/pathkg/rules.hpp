#pragma once
// Length-2 horn rules and sliding-window path composition.
//
// A rule r3(x, y) <= r1(x, z) ^ r2(z, y) lets an adjacent relation pair
// (r1, r2) in a grounded path collapse into r3, dropping the entity in
// between and multiplying the path confidence by the rule's. Scanning is
// leftmost-first and restarts from the head end after every replacement,
// so a fully reducible chain condenses into a single relation whose
// confidence is the product of every applied rule.

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathkg/error.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/paths_fwd.hpp"
#include "pathkg/types.hpp"

namespace pathkg {

struct HornRule {
    RelationId body_first = -1;
    RelationId body_second = -1;
    RelationId head = -1;
    double confidence = 1.0;
};

class RuleIndex {
public:
    // Highest confidence wins when two rules share a body.
    void insert(const HornRule& rule) {
        auto key = body_key(rule.body_first, rule.body_second);
        auto it = by_body_.find(key);
        if (it == by_body_.end() || it->second.confidence < rule.confidence)
            by_body_[key] = rule;
    }

    const HornRule* find(RelationId r1, RelationId r2) const {
        auto it = by_body_.find(body_key(r1, r2));
        return it == by_body_.end() ? nullptr : &it->second;
    }

    size_t size() const { return by_body_.size(); }
    bool empty() const { return by_body_.empty(); }

    template <typename F>
    void for_each(F&& f) const {
        for (const auto& [key, rule] : by_body_) f(rule);
    }

private:
    static uint64_t body_key(RelationId a, RelationId b) {
        return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
    }
    std::unordered_map<uint64_t, HornRule> by_body_;
};

struct RuleParseStats {
    size_t kept = 0;
    size_t below_threshold = 0;
    size_t unknown_relation = 0;
    size_t malformed_amie = 0;  // body length != 2 or variables not chaining x-z, z-y
    size_t out_of_range = 0;

    void report(std::ostream& os) const {
        os << "rules: " << kept << " kept";
        if (below_threshold) os << ", " << below_threshold << " below threshold";
        if (unknown_relation) os << ", " << unknown_relation << " with unknown relations";
        if (malformed_amie) os << ", " << malformed_amie << " non-chaining/oversized";
        if (out_of_range) os << ", " << out_of_range << " with confidence outside (0,1]";
        if (kept == 0) os << " (empty index: model degrades to pure data-driven)";
        os << "\n";
    }
};

namespace detail {

inline bool parse_confidence(const std::string& field, double& out) {
    std::istringstream ss(field);
    ss >> out;
    return bool(ss) && ss.eof();
}

// "?a r1 ?b ?b r2 ?c => ?a r3 ?c" with a confidence column after the rule.
inline bool parse_amie_rule(const std::string& rule_text, const Vocab& vocab, HornRule& out,
                            RuleParseStats& stats) {
    std::vector<std::string> tokens;
    std::istringstream ss(rule_text);
    std::string tok;
    size_t arrow = std::string::npos;
    while (ss >> tok) {
        if (tok == "=>") arrow = tokens.size();
        tokens.push_back(tok);
    }
    if (arrow == std::string::npos || arrow % 3 != 0 || tokens.size() != arrow + 4) {
        ++stats.malformed_amie;
        return false;
    }
    size_t body_atoms = arrow / 3;
    if (body_atoms != 2) {
        ++stats.malformed_amie;
        return false;
    }
    auto var = [&](size_t i) { return tokens[i]; };
    // head atom: (x, rH, y)
    const std::string& hx = var(arrow + 1);
    const std::string& hy = var(arrow + 3);
    // chaining: body1 = (x, r1, z), body2 = (z, r2, y)
    const std::string &b1s = var(0), &b1o = var(2), &b2s = var(3), &b2o = var(5);
    size_t first = 0, second = 3;
    if (b1s == hx && b1o == b2s && b2o == hy) {
        // already in order
    } else if (b2s == hx && b2o == b1s && b1o == hy) {
        first = 3;
        second = 0;
    } else {
        ++stats.malformed_amie;
        return false;
    }
    RelationId r1 = vocab.relation_id(tokens[first + 1]);
    RelationId r2 = vocab.relation_id(tokens[second + 1]);
    RelationId rh = vocab.relation_id(tokens[arrow + 2]);
    if (r1 < 0 || r2 < 0 || rh < 0) {
        ++stats.unknown_relation;
        return false;
    }
    out = HornRule{r1, r2, rh, 0.0};
    return true;
}

}  // namespace detail

// Native format: "body1<tab>body2<tab>head<tab>confidence". AMIE+ exports
// are auto-detected by the "=>" token; amie_conf_col indexes the
// tab-separated field holding the confidence (default: PCA confidence).
inline RuleIndex parse_rule_file(const std::string& path, const Vocab& vocab,
                                 double min_confidence, std::ostream* diag = nullptr,
                                 size_t amie_conf_col = 3) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open rule file: " + path);

    RuleIndex index;
    RuleParseStats stats;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = detail::split_tabs(line);

        HornRule rule;
        double conf = 0.0;
        if (line.find("=>") != std::string::npos) {
            if (fields.size() <= amie_conf_col)
                throw parse_error(path, lineno, "missing AMIE confidence column");
            if (!detail::parse_confidence(fields[amie_conf_col], conf))
                throw parse_error(path, lineno, "unreadable confidence field: " + fields[amie_conf_col]);
            if (!detail::parse_amie_rule(fields[0], vocab, rule, stats)) continue;
        } else {
            if (fields.size() != 4)
                throw parse_error(path, lineno, "expected 4 tab-separated fields, got " +
                                                    std::to_string(fields.size()));
            if (!detail::parse_confidence(fields[3], conf))
                throw parse_error(path, lineno, "unreadable confidence field: " + fields[3]);
            rule.body_first = vocab.relation_id(fields[0]);
            rule.body_second = vocab.relation_id(fields[1]);
            rule.head = vocab.relation_id(fields[2]);
            if (rule.body_first < 0 || rule.body_second < 0 || rule.head < 0) {
                ++stats.unknown_relation;
                continue;
            }
        }
        if (conf <= 0.0 || conf > 1.0) {
            ++stats.out_of_range;
            continue;
        }
        if (conf <= min_confidence) {
            ++stats.below_threshold;
            continue;
        }
        rule.confidence = conf;
        index.insert(rule);
        ++stats.kept;
    }
    if (diag) stats.report(*diag);
    return index;
}

// Applied rules in application order; useful for explanation tracing.
struct CompositionTrace {
    std::vector<HornRule> applied;
};

// Sliding-window composition. The composed relation is atomic: it can
// match further rule bodies in later passes, which is what lets a chain
// condense all the way down to one relation.
inline GroundedPath compose_path(GroundedPath path, const RuleIndex& rules,
                                 CompositionTrace* trace = nullptr) {
    bool changed = true;
    while (changed && path.relations.size() > 1) {
        changed = false;
        for (size_t i = 0; i + 1 < path.relations.size(); ++i) {
            const HornRule* rule = rules.find(path.relations[i], path.relations[i + 1]);
            if (!rule) continue;
            path.relations[i] = rule->head;
            path.relations.erase(path.relations.begin() + i + 1);
            path.entities.erase(path.entities.begin() + i);
            path.confidence *= rule->confidence;
            if (trace) trace->applied.push_back(*rule);
            changed = true;
            break;  // restart the scan from the head end
        }
    }
    return path;
}

}  // namespace pathkg
