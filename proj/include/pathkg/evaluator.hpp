#pragma once
// Filtered ranking evaluation: link prediction, path query answering for
// entities and relations, and rule-traced explanations.
//
// Candidates are scored ascending (lower energy is better). The filter
// removes every candidate known true in train/valid/test except the one
// being ranked, and ties count against the correct answer.

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pathkg/trainer.hpp"

namespace pathkg {

struct RankingReport {
    double mr = 0.0;
    double mrr = 0.0;
    std::map<int, double> hits;  // n -> fraction with rank <= n
    size_t count = 0;
};

inline RankingReport aggregate_ranks(const std::vector<int>& ranks,
                                     const std::vector<int>& hits_at) {
    RankingReport rep;
    rep.count = ranks.size();
    for (int n : hits_at) rep.hits[n] = 0.0;
    if (ranks.empty()) return rep;
    for (int r : ranks) {
        rep.mr += r;
        rep.mrr += 1.0 / double(r);
        for (int n : hits_at)
            if (r <= n) rep.hits[n] += 1.0;
    }
    rep.mr /= double(ranks.size());
    rep.mrr /= double(ranks.size());
    for (int n : hits_at) rep.hits[n] /= double(ranks.size());
    return rep;
}

enum class PqaKind { Entity, Relation };

// Query paths are stored raw; rule composition happens at scoring time so
// explanations can still see the original relation sequence.
struct PQATestCase {
    Triple query;
    PqaKind kind = PqaKind::Entity;
    PathSet paths;
};

struct RankRecord {
    Triple query;
    char slot = 't';  // 'h' head, 't' tail, 'r' relation
    int rank = 0;
};

struct Explanation {
    Triple query;
    HornRule rule;
    int correct_rank = 0;
    std::vector<std::pair<RelationId, int>> top;  // (relation, displayed rank)
};

// Known-true lookups over train + valid + test, inverse directions included.
class FilterIndex {
public:
    explicit FilterIndex(const Graph& g) {
        auto add_split = [&](const std::vector<Triple>& split) {
            for (const Triple& t : split) {
                tails_[key(t.head, t.relation)].push_back(t.tail);
                tails_[key(t.tail, g.vocab.inverse_of(t.relation))].push_back(t.head);
                pair_relations_[key(t.head, t.tail)].push_back(t.relation);
                pair_relations_[key(t.tail, t.head)].push_back(g.vocab.inverse_of(t.relation));
            }
        };
        add_split(g.train);
        add_split(g.valid);
        add_split(g.test);
        for (auto& [k, v] : tails_) dedupe(v);
        for (auto& [k, v] : pair_relations_) dedupe(v);
    }

    const std::vector<EntityId>& known_tails(EntityId e, RelationId r) const {
        auto it = tails_.find(key(e, r));
        return it == tails_.end() ? empty_ : it->second;
    }

    const std::vector<RelationId>& relations_between(EntityId src, EntityId dst) const {
        auto it = pair_relations_.find(key(src, dst));
        return it == pair_relations_.end() ? empty_ : it->second;
    }

private:
    static uint64_t key(int32_t a, int32_t b) {
        return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
    }
    static void dedupe(std::vector<int32_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    std::unordered_map<uint64_t, std::vector<int32_t>> tails_;
    std::unordered_map<uint64_t, std::vector<int32_t>> pair_relations_;
    inline static const std::vector<int32_t> empty_{};
};

// rank = 1 + surviving candidates strictly better + surviving ties.
inline int filtered_rank(const std::vector<std::pair<int32_t, double>>& scores, int32_t correct,
                         const std::unordered_set<int32_t>& filter_out) {
    double correct_score = 0.0;
    bool found = false;
    for (const auto& [id, s] : scores) {
        if (id == correct) {
            correct_score = s;
            found = true;
            break;
        }
    }
    if (!found) throw Error(ErrorKind::Internal, "correct candidate missing from score list");
    int rank = 1;
    for (const auto& [id, s] : scores) {
        if (id == correct || filter_out.count(id)) continue;
        if (s <= correct_score) ++rank;
    }
    return rank;
}

struct ScoreContext {
    const ModelParams& params;
    const Vocab& vocab;
    Norm norm = Norm::L1;
    double lambda = 1.0;
    ConversionMode mode = ConversionMode::EC2_PROJECTION;
    const TypeSystem* types = nullptr;

    static ScoreContext from(const ModelParams& p, const Vocab& v, const Config& cfg,
                             const TypeSystem* ts) {
        return {p, v, cfg.norm, cfg.lambda, cfg.converter, ts};
    }
};

struct EncodedPathSet {
    const PathSet* ps = nullptr;
    std::vector<Vec> fwd, bwd;

    bool empty() const { return !ps || ps->forward.empty(); }
};

inline EncodedPathSet encode_path_set(const ScoreContext& ctx, const PathSet& ps) {
    EncodedPathSet out;
    out.ps = &ps;
    out.fwd.reserve(ps.forward.size());
    out.bwd.reserve(ps.backward.size());
    for (const GroundedPath& p : ps.forward)
        out.fwd.push_back(
            encode_path(build_path_sequence(p, ctx.params, ctx.mode, ctx.types), ctx.params.encoder));
    for (const GroundedPath& p : ps.backward)
        out.bwd.push_back(
            encode_path(build_path_sequence(p, ctx.params, ctx.mode, ctx.types), ctx.params.encoder));
    return out;
}

// E_r = E1 + lambda * (E2(r, P) + E2(r^-1, P^-1)) / 2; E1 alone when the
// path set is empty. Lower is better.
inline double score_candidate(const ScoreContext& ctx, const Triple& tr,
                              const EncodedPathSet* eps) {
    double score = energy_triple(ctx.params, tr, ctx.norm);
    if (ctx.lambda > 0.0 && eps && !eps->empty()) {
        double f = energy_path_set(ctx.params, tr.relation, eps->ps->forward, eps->fwd, ctx.norm);
        double b = energy_path_set(ctx.params, ctx.vocab.inverse_of(tr.relation),
                                   eps->ps->backward, eps->bwd, ctx.norm);
        score += ctx.lambda * 0.5 * (f + b);
    }
    return score;
}

// Self-contained scoring of one candidate triple against its path set.
inline double score_candidate_triple(const ScoreContext& ctx, const Triple& tr,
                                     const PathSet& pset) {
    if (pset.empty()) return energy_triple(ctx.params, tr, ctx.norm);
    EncodedPathSet eps = encode_path_set(ctx, pset);
    return score_candidate(ctx, tr, &eps);
}

// Composed path sets for the candidate pairs touched by an evaluation run.
class CandidatePaths {
public:
    void insert(EntityId src, EntityId dst, PathSet ps) {
        by_pair_.emplace(key(src, dst), std::move(ps));
    }
    const PathSet* find(EntityId src, EntityId dst) const {
        auto it = by_pair_.find(key(src, dst));
        return it == by_pair_.end() ? nullptr : &it->second;
    }
    size_t size() const { return by_pair_.size(); }

private:
    static uint64_t key(EntityId a, EntityId b) {
        return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
    }
    std::unordered_map<uint64_t, PathSet> by_pair_;
};

// Extracts and rule-composes paths for every (head, candidate) and
// (candidate, tail) pair of the test triples. Tractable at toy scale;
// real corpora should cap max_paths or skip path-aware reranking.
inline CandidatePaths build_candidate_paths(const Graph& g, const std::vector<Triple>& test,
                                            const RuleIndex& rules, const Config& cfg,
                                            int workers = 1) {
    std::vector<uint64_t> pair_keys;
    {
        std::unordered_set<uint64_t> seen;
        auto add = [&](EntityId a, EntityId b) {
            if (a == b) return;
            uint64_t k = (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
            if (seen.insert(k).second) pair_keys.push_back(k);
        };
        const EntityId n = EntityId(g.vocab.n_entities());
        for (const Triple& t : test) {
            for (EntityId e = 0; e < n; ++e) {
                add(t.head, e);
                add(e, t.tail);
            }
        }
    }

    std::vector<PathSet> sets(pair_keys.size());
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            EntityId src = EntityId(pair_keys[i] >> 32);
            EntityId dst = EntityId(pair_keys[i] & 0xffffffffu);
            PathSet raw = extract_paths_pcra(g, src, dst, cfg.max_path_len, size_t(cfg.max_paths));
            PathSet composed;
            composed.forward.reserve(raw.forward.size());
            for (GroundedPath& p : raw.forward) {
                GroundedPath c = compose_path(std::move(p), rules);
                composed.backward.push_back(invert_path(c, g.vocab));
                composed.forward.push_back(std::move(c));
            }
            sets[i] = std::move(composed);
        }
    };
    if (workers <= 1) {
        work(0, pair_keys.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (pair_keys.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            size_t begin = std::min(pair_keys.size(), w * chunk);
            size_t end = std::min(pair_keys.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    CandidatePaths out;
    for (size_t i = 0; i < pair_keys.size(); ++i)
        out.insert(EntityId(pair_keys[i] >> 32), EntityId(pair_keys[i] & 0xffffffffu),
                   std::move(sets[i]));
    return out;
}

enum class CorruptionSide { Head, Tail, Both };

// Ranks the correct entity among all entities for head and tail
// replacement under the filter protocol.
inline RankingReport eval_link_prediction(const ScoreContext& ctx, const Graph& g,
                                          const std::vector<Triple>& test,
                                          const CandidatePaths& cand, const FilterIndex& filter,
                                          std::vector<RankRecord>* dump = nullptr,
                                          CorruptionSide side = CorruptionSide::Both) {
    const EntityId n = EntityId(g.vocab.n_entities());
    std::vector<int> ranks;
    ranks.reserve(test.size() * 2);
    std::vector<std::pair<int32_t, double>> scores(static_cast<size_t>(n));

    for (const Triple& t : test) {
        if (side != CorruptionSide::Head) {
            for (EntityId e = 0; e < n; ++e) {
                Triple c{t.head, t.relation, e};
                const PathSet* ps = cand.find(t.head, e);
                EncodedPathSet eps;
                if (ps && !ps->forward.empty() && ctx.lambda > 0.0)
                    eps = encode_path_set(ctx, *ps);
                scores[e] = {e, score_candidate(ctx, c, eps.ps ? &eps : nullptr)};
            }
            std::unordered_set<int32_t> filter_out;
            for (EntityId known : filter.known_tails(t.head, t.relation))
                if (known != t.tail) filter_out.insert(known);
            int rank = filtered_rank(scores, t.tail, filter_out);
            ranks.push_back(rank);
            if (dump) dump->push_back({t, 't', rank});
        }
        if (side != CorruptionSide::Tail) {
            for (EntityId e = 0; e < n; ++e) {
                Triple c{e, t.relation, t.tail};
                const PathSet* ps = cand.find(e, t.tail);
                EncodedPathSet eps;
                if (ps && !ps->forward.empty() && ctx.lambda > 0.0)
                    eps = encode_path_set(ctx, *ps);
                scores[e] = {e, score_candidate(ctx, c, eps.ps ? &eps : nullptr)};
            }
            std::unordered_set<int32_t> filter_out;
            for (EntityId known : filter.known_tails(t.tail, g.vocab.inverse_of(t.relation)))
                if (known != t.head) filter_out.insert(known);
            int rank = filtered_rank(scores, t.head, filter_out);
            ranks.push_back(rank);
            if (dump) dump->push_back({t, 'h', rank});
        }
    }
    return aggregate_ranks(ranks, {1, 3, 10});
}

// Merges the test edges into a copy of the graph so path extraction can
// traverse the whole KG; vocabulary ids are unchanged.
inline Graph merge_test_into_index(const Graph& g) {
    Graph full;
    full.vocab = g.vocab;
    full.train = g.train;
    full.train.insert(full.train.end(), g.test.begin(), g.test.end());
    full.valid = g.valid;
    full.test = g.test;
    full.triples.insert(full.train.begin(), full.train.end());
    full.build_index();
    return full;
}

struct PqaBuildStats {
    size_t cases = 0;
    size_t dropped = 0;  // no path survived removal
};

// One case per test triple per direction. Paths come from the full graph
// (train + test edges); the query edge itself and any walk already present
// in the training path cache are removed.
inline std::vector<PQATestCase> build_pqa_testset(const Graph& full,
                                                  const std::vector<Triple>& test,
                                                  const PathIndex& train_cache, const Config& cfg,
                                                  PqaKind kind, PqaBuildStats* stats = nullptr) {
    // Both directions were exploited in training, so the removal set holds
    // the cached forward paths and their inverses.
    std::unordered_map<uint64_t, std::vector<const GroundedPath*>> cached_by_pair;
    for (const auto& [tr, ps] : train_cache) {
        for (const GroundedPath& p : ps.forward)
            cached_by_pair[(uint64_t(uint32_t(tr.head)) << 32) | uint32_t(tr.tail)].push_back(&p);
        for (const GroundedPath& p : ps.backward)
            cached_by_pair[(uint64_t(uint32_t(tr.tail)) << 32) | uint32_t(tr.head)].push_back(&p);
    }

    std::vector<PQATestCase> cases;
    PqaBuildStats local;
    auto make_case = [&](EntityId src, RelationId rel, EntityId dst) {
        const uint64_t pair = (uint64_t(uint32_t(src)) << 32) | uint32_t(dst);
        auto cached = cached_by_pair.find(pair);
        const size_t n_cached = cached == cached_by_pair.end() ? 0 : cached->second.size();
        PathSet raw = extract_paths_pcra(full, src, dst, cfg.max_path_len,
                                         size_t(cfg.max_paths) + n_cached + 1);
        PathSet kept;
        for (size_t i = 0; i < raw.forward.size(); ++i) {
            const GroundedPath& p = raw.forward[i];
            if (p.length() == 1 && p.relations[0] == rel) continue;
            bool in_cache = false;
            if (n_cached)
                for (const GroundedPath* cp : cached->second)
                    if (cp->same_walk(p)) {
                        in_cache = true;
                        break;
                    }
            if (in_cache) continue;
            kept.forward.push_back(p);
            kept.backward.push_back(raw.backward[i]);
            if (kept.forward.size() == size_t(cfg.max_paths)) break;
        }
        if (kept.empty()) {
            ++local.dropped;
            return;
        }
        ++local.cases;
        cases.push_back({Triple{src, rel, dst}, kind, std::move(kept)});
    };
    for (const Triple& t : test) {
        make_case(t.head, t.relation, t.tail);
        make_case(t.tail, full.vocab.inverse_of(t.relation), t.head);
    }
    if (stats) *stats = local;
    return cases;
}

// Entity prediction: the highest-weight query path p scores candidates by
// E_q = ||h + RNN(p) - t'|| + ||t' + RNN(p^-1) - h||.
inline RankingReport eval_pqa_entity(const ScoreContext& ctx,
                                     const std::vector<PQATestCase>& cases, const Graph& g,
                                     const RuleIndex& rules, const FilterIndex& filter,
                                     std::vector<RankRecord>* dump = nullptr) {
    const EntityId n = EntityId(g.vocab.n_entities());
    std::vector<int> ranks;
    ranks.reserve(cases.size());
    std::vector<std::pair<int32_t, double>> scores(static_cast<size_t>(n));

    for (const PQATestCase& c : cases) {
        size_t best = 0;
        for (size_t i = 1; i < c.paths.forward.size(); ++i)
            if (detail::path_order_before(c.paths.forward[i], c.paths.forward[best])) best = i;

        GroundedPath composed = compose_path(c.paths.forward[best], rules);
        GroundedPath inverse = invert_path(composed, g.vocab);
        Vec rnn_f = encode_path(build_path_sequence(composed, ctx.params, ctx.mode, ctx.types),
                                ctx.params.encoder);
        Vec rnn_b = encode_path(build_path_sequence(inverse, ctx.params, ctx.mode, ctx.types),
                                ctx.params.encoder);

        const Vec& h = ctx.params.entity_emb[c.query.head];
        Vec d(ctx.params.k);
        for (EntityId e = 0; e < n; ++e) {
            const Vec& t = ctx.params.entity_emb[e];
            for (int i = 0; i < ctx.params.k; ++i) d[i] = h[i] + rnn_f[i] - t[i];
            double s = norm_value(d, ctx.norm);
            for (int i = 0; i < ctx.params.k; ++i) d[i] = t[i] + rnn_b[i] - h[i];
            s += norm_value(d, ctx.norm);
            scores[e] = {e, s};
        }
        std::unordered_set<int32_t> filter_out;
        for (EntityId known : filter.known_tails(c.query.head, c.query.relation))
            if (known != c.query.tail) filter_out.insert(known);
        int rank = filtered_rank(scores, c.query.tail, filter_out);
        ranks.push_back(rank);
        if (dump) dump->push_back({c.query, 't', rank});
    }
    return aggregate_ranks(ranks, {1, 10});
}

// Relation inference over all relations (inverses included), plus an
// explanation record whenever a horn rule matches a query path exactly
// and its head lands in the displayed top ranks.
inline RankingReport eval_pqa_relation(const ScoreContext& ctx,
                                       const std::vector<PQATestCase>& cases, const Graph& g,
                                       const RuleIndex& rules, const FilterIndex& filter,
                                       std::vector<RankRecord>* dump = nullptr,
                                       std::vector<Explanation>* explanations = nullptr,
                                       int top_display = 3) {
    const RelationId n = RelationId(g.vocab.n_relations());
    std::vector<int> ranks;
    ranks.reserve(cases.size());
    std::vector<std::pair<int32_t, double>> scores(static_cast<size_t>(n));

    for (const PQATestCase& c : cases) {
        PathSet composed;
        composed.forward.reserve(c.paths.forward.size());
        for (const GroundedPath& p : c.paths.forward) {
            GroundedPath cp = compose_path(p, rules);
            composed.backward.push_back(invert_path(cp, g.vocab));
            composed.forward.push_back(std::move(cp));
        }
        EncodedPathSet eps = encode_path_set(ctx, composed);

        for (RelationId r = 0; r < n; ++r)
            scores[r] = {r, score_candidate(ctx, Triple{c.query.head, r, c.query.tail}, &eps)};

        std::unordered_set<int32_t> filter_out;
        for (RelationId known : filter.relations_between(c.query.head, c.query.tail))
            if (known != c.query.relation) filter_out.insert(known);
        int rank = filtered_rank(scores, c.query.relation, filter_out);
        ranks.push_back(rank);
        if (dump) dump->push_back({c.query, 'r', rank});

        if (explanations) {
            std::vector<std::pair<int32_t, double>> survivors;
            for (const auto& [id, s] : scores)
                if (!filter_out.count(id)) survivors.push_back({id, s});
            std::sort(survivors.begin(), survivors.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
            std::vector<std::pair<RelationId, int>> top;
            for (int i = 0; i < top_display && i < int(survivors.size()); ++i)
                top.push_back({survivors[i].first, i + 1});
            for (const GroundedPath& p : c.paths.forward) {
                if (p.length() != 2) continue;
                const HornRule* rule = rules.find(p.relations[0], p.relations[1]);
                if (!rule) continue;
                bool head_on_top = false;
                for (const auto& [rid, pos] : top)
                    if (rid == rule->head) head_on_top = true;
                if (head_on_top)
                    explanations->push_back({c.query, *rule, rank, top});
            }
        }
    }
    return aggregate_ranks(ranks, {1});
}

inline void print_report(std::ostream& os, const std::string& title, const RankingReport& rep) {
    os << title << " (" << rep.count << " cases)\n";
    os << "  MR      " << rep.mr << "\n";
    os << "  MRR     " << rep.mrr << "\n";
    for (const auto& [n, frac] : rep.hits) os << "  Hits@" << n << (n < 10 ? "  " : " ") << frac << "\n";
}

inline void write_report_csv(const std::string& path, const RankingReport& rep) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write report: " + path);
    out << "metric,value\n";
    out << "count," << rep.count << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", rep.mr);
    out << "mr," << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", rep.mrr);
    out << "mrr," << buf << "\n";
    for (const auto& [n, frac] : rep.hits) {
        std::snprintf(buf, sizeof(buf), "%.17g", frac);
        out << "hits@" << n << "," << buf << "\n";
    }
}

inline void write_rank_dump(const std::string& path, const std::vector<RankRecord>& dump) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write rank dump: " + path);
    out << "head,relation,tail,slot,rank\n";
    for (const RankRecord& r : dump)
        out << r.query.head << "," << r.query.relation << "," << r.query.tail << "," << r.slot
            << "," << r.rank << "\n";
}

}  // namespace pathkg
