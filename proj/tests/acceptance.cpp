// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// Each criterion runs independently with its own timing; thresholds and
// tolerances are fixed in code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <vector>

#include "pathkg/cli.hpp"
#include "pathkg/pathkg.hpp"
#include "grad_instances.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace pathkg;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    std::string name;
    std::function<std::string()> body;  // returns detail text; throws on failure
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// ---- 1. gradient suite ------------------------------------------------------

std::string gradient_suite() {
    const auto t0 = Clock::now();
    uint64_t seed = 9000;
    size_t checked = 0;
    double worst = 0.0;
    std::set<std::string> families_hit;
    const std::pair<ConversionMode, Norm> grid[] = {
        {ConversionMode::EC2_PROJECTION, Norm::L1},
        {ConversionMode::EC2_PROJECTION, Norm::L2},
        {ConversionMode::EC1_TYPE_ATTENTION, Norm::L1},
        {ConversionMode::EC1_TYPE_ATTENTION, Norm::L2},
    };
    for (int i = 0; i < 52; ++i) {
        auto [mode, norm] = grid[i % 4];
        auto gi = testutil::accepted_grad_instance(seed, mode, norm);
        const TypeSystem* ts = gi.types.empty() ? nullptr : &gi.types;
        LossResult lr = margin_losses(gi.params, gi.batch, gi.cfg, ts, gi.graph.vocab);
        auto loss = [&] {
            return margin_losses(gi.params, gi.batch, gi.cfg, ts, gi.graph.vocab).loss;
        };
        auto rep = testutil::fd_check(gi.params, lr.grads, loss);
        worst = std::max(worst, rep.max_rel_err);
        require(rep.max_rel_err <= 1e-4,
                "relative error " + std::to_string(rep.max_rel_err) + " in family " +
                    rep.worst_family + " at config " + std::to_string(i));
        if (!lr.grads.entity.empty()) families_hit.insert("entity");
        if (!lr.grads.relation.empty()) families_hit.insert("relation");
        if (!lr.grads.type_emb.empty()) families_hit.insert("type");
        if (!lr.grads.projection.empty()) families_hit.insert("projection");
        if (lr.grads.encoder_touched) {
            families_hit.insert("wh");
            families_hit.insert("wi");
        }
        ++checked;
    }
    for (const char* fam : {"entity", "relation", "type", "projection", "wh", "wi"})
        require(families_hit.count(fam) > 0, std::string("family never exercised: ") + fam);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    require(secs < 60.0, "took " + std::to_string(secs) + "s (budget 60s)");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu configs, all 6 families, max rel err %.2e, %.1fs",
                  checked, worst, secs);
    return buf;
}

// ---- 2. PCRA oracle ---------------------------------------------------------

std::string pcra_oracle() {
    const auto t0 = Clock::now();
    size_t paths_checked = 0, sums_checked = 0;
    Rng rng(777);
    for (unsigned graph_i = 0; graph_i < 20; ++graph_i) {
        testutil::TempDir tmp("acc_pcra" + std::to_string(graph_i));
        const int nodes = 10 + int(rng.next_below(21));   // <= 30
        const int edges = 30 + int(rng.next_below(71));   // <= 100
        Graph g = testutil::make_graph(
            tmp, testutil::random_triples(1000 + graph_i, nodes, 1 + int(rng.next_below(4)),
                                          edges));
        for (int q = 0; q < 12; ++q) {
            EntityId h = EntityId(rng.next_below(g.vocab.n_entities()));
            EntityId t = EntityId(rng.next_below(g.vocab.n_entities()));
            if (h == t) continue;
            const int max_len = 1 + int(rng.next_below(3));
            PathSet ps = extract_paths_pcra(g, h, t, max_len, size_t(1) << 40);
            auto walks = testutil::oracle_walks(g.train, g.vocab, h, t, max_len);
            require(ps.size() == walks.size(),
                    "path count mismatch: " + std::to_string(ps.size()) + " vs oracle " +
                        std::to_string(walks.size()));
            std::map<std::pair<std::vector<RelationId>, std::vector<EntityId>>, double> oracle;
            std::map<std::vector<RelationId>, double> seq_sum;
            for (const auto& w : walks) {
                oracle[{w.rels, w.ents}] = w.alpha;
                seq_sum[w.rels] += w.alpha;
            }
            for (const GroundedPath& p : ps.forward) {
                auto it = oracle.find({p.relations, p.entities});
                require(it != oracle.end(), "extracted walk missing from oracle");
                require(std::fabs(p.alpha - it->second) <= 1e-12, "alpha mismatch");
                ++paths_checked;
            }
            for (const auto& [seq, total] : seq_sum) {
                require(total <= 1.0 + 1e-12, "per-sequence alpha sum exceeds 1");
                ++sums_checked;
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    require(secs < 30.0, "took " + std::to_string(secs) + "s (budget 30s)");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "20 graphs, %zu alphas and %zu sequence sums verified, %.1fs",
                  paths_checked, sums_checked, secs);
    return buf;
}

// ---- 3. rule composition ----------------------------------------------------

std::string rule_composition() {
    testutil::TempDir tmp("acc_rules");
    std::vector<testutil::NameTriple> train;
    for (int i = 0; i < 8; ++i) train.push_back({"x", "r" + std::to_string(i), "y"});
    train.push_back({"jon", "has_sibling", "simon"});
    train.push_back({"simon", "person_born_in_city", "york"});
    Graph g = testutil::make_graph(tmp, train);
    auto rid = [&](const std::string& n) { return g.vocab.relation_id(n); };

    {  // full chain: confidence is the exact float product
        const double c1 = 0.97, c2 = 0.81, c3 = 0.73;
        RuleIndex rules;
        rules.insert({rid("r0"), rid("r1"), rid("r4"), c1});
        rules.insert({rid("r4"), rid("r2"), rid("r5"), c2});
        rules.insert({rid("r5"), rid("r3"), rid("r6"), c3});
        GroundedPath p;
        p.relations = {rid("r0"), rid("r1"), rid("r2"), rid("r3")};
        p.entities = {1, 2, 3};
        p.source = 0;
        p.target = 4;
        GroundedPath out = compose_path(p, rules);
        require(out.relations == std::vector<RelationId>{rid("r6")} && out.entities.empty(),
                "chain did not condense to a single relation");
        require(out.confidence == c1 * c2 * c3, "chain confidence is not the exact product");
    }
    {  // interior window: flanking hops survive
        RuleIndex rules;
        rules.insert({rid("r1"), rid("r2"), rid("r5"), 0.8});
        GroundedPath p;
        p.relations = {rid("r0"), rid("r1"), rid("r2"), rid("r3")};
        p.entities = {7, 8, 9};
        p.source = 0;
        p.target = 4;
        GroundedPath out = compose_path(p, rules);
        require(out.relations ==
                        std::vector<RelationId>{rid("r0"), rid("r5"), rid("r3")} &&
                    out.entities == std::vector<EntityId>{7, 9},
                "interior window composition altered the flanks");
        require(out.confidence == 0.8, "interior composition confidence wrong");
    }
    {  // the sibling example: confidence exactly 1.0
        RuleIndex rules;
        rules.insert(
            {rid("has_sibling"), rid("person_born_in_city"), rid("person_born_in_city"), 1.0});
        GroundedPath p;
        p.relations = {rid("has_sibling"), rid("person_born_in_city")};
        p.entities = {g.vocab.entity_id("simon")};
        p.source = g.vocab.entity_id("jon");
        p.target = g.vocab.entity_id("york");
        GroundedPath out = compose_path(p, rules);
        require(out.relations == std::vector<RelationId>{rid("person_born_in_city")},
                "sibling path did not compose to person_born_in_city");
        require(out.confidence == 1.0, "sibling composition confidence is not exactly 1.0");
    }
    return "full chain (exact product), interior window, sibling example";
}

// ---- 4. encoder exactness ---------------------------------------------------

std::string encoder_exactness() {
    testutil::TempDir tmp("acc_enc");
    Graph g = testutil::make_graph(tmp, {{"a", "r0", "b"}, {"b", "r1", "c"}});
    Config cfg;
    cfg.k = 4;
    Rng rng(3);
    ModelParams params = init_params(g.vocab.n_entities(), g.vocab.n_relations(), 0, cfg, rng);

    GroundedPath single;
    single.relations = {g.vocab.relation_id("r1")};
    single.source = 0;
    single.target = 1;
    PathSequence seq =
        build_path_sequence(single, params, ConversionMode::EC2_PROJECTION, nullptr);
    Vec out = encode_path(seq, params.encoder);
    const Vec& expect = params.relation_emb[g.vocab.relation_id("r1")];
    for (int i = 0; i < cfg.k; ++i)
        require(out[i] == expect[i], "length-1 encoding is not bit-identical");

    PathSequence hand;
    hand.n_relations = 2;
    hand.elements = {Vec{0.7, -0.1}, Vec{0.2, 0.9}, Vec{-0.6, 0.4}};
    EncoderParams enc;
    enc.wh = Mat(2, 2);
    enc.wi = Mat(2, 2);
    enc.wh(0, 0) = 0.3; enc.wh(0, 1) = -0.7; enc.wh(1, 0) = 0.5; enc.wh(1, 1) = 0.2;
    enc.wi(0, 0) = 0.9; enc.wi(0, 1) = 0.1; enc.wi(1, 0) = -0.4; enc.wi(1, 1) = 0.6;
    Vec got = encode_path(hand, enc);
    Vec oracle = testutil::oracle_encode(hand.elements, enc.wh, enc.wi);
    for (int i = 0; i < 2; ++i)
        require(std::fabs(got[i] - oracle[i]) <= 1e-12, "k=2 recurrence drifts from the oracle");
    return "length-1 bit-identity and k=2 scalar-loop agreement";
}

// ---- 5. ranking oracle ------------------------------------------------------

std::string ranking_oracle() {
    testutil::TempDir tmp("acc_rank");
    Graph g = testutil::make_graph(tmp, testutil::random_triples(404, 16, 3, 60), {},
                                   {{"e1", "r0", "e9"}, {"e3", "r1", "e12"}, {"e5", "r2", "e2"}});
    require(g.vocab.n_entities() <= 20, "toy KG grew past 20 entities");
    testutil::write_lines(tmp.file("rules.tsv"), {"r0\tr1\tr2\t0.85"});
    RuleIndex rules = parse_rule_file(tmp.file("rules.tsv"), g.vocab, 0.7);
    Config cfg;
    cfg.k = 5;
    cfg.max_paths = 6;
    Rng rng(11);
    ModelParams params = init_params(g.vocab.n_entities(), g.vocab.n_relations(), 0, cfg, rng);
    FilterIndex filter(g);
    ScoreContext ctx = ScoreContext::from(params, g.vocab, cfg, nullptr);
    std::set<Triple> known;
    for (const auto* split : {&g.train, &g.valid, &g.test})
        known.insert(split->begin(), split->end());
    const EntityId n_ent = EntityId(g.vocab.n_entities());

    {  // link prediction
        CandidatePaths cand = build_candidate_paths(g, g.test, rules, cfg);
        std::vector<RankRecord> dump;
        RankingReport rep = eval_link_prediction(ctx, g, g.test, cand, filter, &dump);
        std::vector<int> oracle_ranks;
        for (const Triple& t : g.test) {
            for (char side : {'t', 'h'}) {
                std::vector<std::pair<int32_t, double>> scores;
                std::set<int32_t> filt;
                for (EntityId e = 0; e < n_ent; ++e) {
                    Triple c = side == 't' ? Triple{t.head, t.relation, e}
                                           : Triple{e, t.relation, t.tail};
                    const PathSet* ps =
                        side == 't' ? cand.find(t.head, e) : cand.find(e, t.tail);
                    scores.push_back({e, testutil::oracle_score(params, g.vocab, c, ps,
                                                                cfg.lambda, cfg.norm)});
                    EntityId correct = side == 't' ? t.tail : t.head;
                    if (e != correct && known.count(c)) filt.insert(e);
                }
                oracle_ranks.push_back(testutil::oracle_rank(
                    scores, side == 't' ? t.tail : t.head, filt));
            }
        }
        require(dump.size() == oracle_ranks.size(), "lp case count mismatch");
        for (size_t i = 0; i < dump.size(); ++i)
            require(dump[i].rank == oracle_ranks[i], "lp rank mismatch at case " +
                                                         std::to_string(i));
        double mr = 0, mrr = 0;
        std::map<int, double> hits{{1, 0}, {3, 0}, {10, 0}};
        for (int r : oracle_ranks) {
            mr += r;
            mrr += 1.0 / r;
            for (auto& [nn, v] : hits)
                if (r <= nn) v += 1;
        }
        const double cnt = double(oracle_ranks.size());
        require(rep.mr == mr / cnt && rep.mrr == mrr / cnt, "lp MR/MRR mismatch");
        for (auto& [nn, v] : hits)
            require(rep.hits.at(nn) == v / cnt, "lp hits mismatch");
    }

    PathIndex cache = build_path_index(g, cfg.max_path_len, size_t(cfg.max_paths), true);
    Graph full = merge_test_into_index(g);

    {  // pqa entity
        auto cases = build_pqa_testset(full, g.test, cache, cfg, PqaKind::Entity);
        require(!cases.empty(), "no pqa entity cases");
        std::vector<RankRecord> dump;
        RankingReport rep = eval_pqa_entity(ctx, cases, g, rules, filter, &dump);
        std::vector<int> oracle_ranks;
        for (const PQATestCase& c : cases) {
            size_t best = 0;
            for (size_t i = 1; i < c.paths.forward.size(); ++i) {
                const GroundedPath &x = c.paths.forward[i], &y = c.paths.forward[best];
                if (x.alpha > y.alpha ||
                    (x.alpha == y.alpha &&
                     (x.relations < y.relations ||
                      (x.relations == y.relations && x.entities < y.entities))))
                    best = i;
            }
            GroundedPath sel = compose_path(c.paths.forward[best], rules);
            Vec rnn_f = testutil::oracle_encode_path(params, sel);
            Vec rnn_b = testutil::oracle_encode_path(params, invert_path(sel, g.vocab));
            std::vector<std::pair<int32_t, double>> scores;
            std::set<int32_t> filt;
            const Vec& h = params.entity_emb[c.query.head];
            for (EntityId e = 0; e < n_ent; ++e) {
                const Vec& t = params.entity_emb[e];
                double s1 = 0, s2 = 0;
                for (int i = 0; i < params.k; ++i) s1 += std::fabs(h[i] + rnn_f[i] - t[i]);
                for (int i = 0; i < params.k; ++i) s2 += std::fabs(t[i] + rnn_b[i] - h[i]);
                scores.push_back({e, s1 + s2});
                bool is_known =
                    c.query.relation < g.vocab.n_original_relations()
                        ? known.count(Triple{c.query.head, c.query.relation, e}) > 0
                        : known.count(Triple{e, g.vocab.inverse_of(c.query.relation),
                                             c.query.head}) > 0;
                if (e != c.query.tail && is_known) filt.insert(e);
            }
            oracle_ranks.push_back(testutil::oracle_rank(scores, c.query.tail, filt));
        }
        require(dump.size() == oracle_ranks.size(), "pqa entity case count mismatch");
        double mr = 0, mrr = 0;
        std::map<int, double> hits{{1, 0}, {10, 0}};
        for (size_t i = 0; i < dump.size(); ++i) {
            require(dump[i].rank == oracle_ranks[i], "pqa entity rank mismatch");
            mr += oracle_ranks[i];
            mrr += 1.0 / oracle_ranks[i];
            for (auto& [nn, v] : hits)
                if (oracle_ranks[i] <= nn) v += 1;
        }
        const double cnt = double(oracle_ranks.size());
        require(rep.mr == mr / cnt && rep.mrr == mrr / cnt, "pqa entity MR/MRR mismatch");
        for (auto& [nn, v] : hits)
            require(rep.hits.at(nn) == v / cnt, "pqa entity hits mismatch");
    }

    {  // pqa relation
        auto cases = build_pqa_testset(full, g.test, cache, cfg, PqaKind::Relation);
        require(!cases.empty(), "no pqa relation cases");
        std::vector<RankRecord> dump;
        RankingReport rep = eval_pqa_relation(ctx, cases, g, rules, filter, &dump);
        std::vector<int> oracle_ranks;
        const RelationId n_rel = RelationId(g.vocab.n_relations());
        for (const PQATestCase& c : cases) {
            PathSet composed;
            for (const GroundedPath& raw : c.paths.forward) {
                GroundedPath cp = compose_path(raw, rules);
                composed.backward.push_back(invert_path(cp, g.vocab));
                composed.forward.push_back(std::move(cp));
            }
            std::vector<std::pair<int32_t, double>> scores;
            std::set<int32_t> filt;
            for (RelationId r = 0; r < n_rel; ++r) {
                scores.push_back(
                    {r, testutil::oracle_score(params, g.vocab,
                                               Triple{c.query.head, r, c.query.tail}, &composed,
                                               cfg.lambda, cfg.norm)});
                if (r == c.query.relation) continue;
                bool connects = known.count(Triple{c.query.head, r, c.query.tail}) > 0;
                if (r >= g.vocab.n_original_relations())
                    connects |= known.count(Triple{c.query.tail, g.vocab.inverse_of(r),
                                                   c.query.head}) > 0;
                if (connects) filt.insert(r);
            }
            oracle_ranks.push_back(testutil::oracle_rank(scores, c.query.relation, filt));
        }
        require(dump.size() == oracle_ranks.size(), "pqa relation case count mismatch");
        double mr = 0, mrr = 0, h1 = 0;
        for (size_t i = 0; i < dump.size(); ++i) {
            require(dump[i].rank == oracle_ranks[i], "pqa relation rank mismatch");
            mr += oracle_ranks[i];
            mrr += 1.0 / oracle_ranks[i];
            h1 += oracle_ranks[i] <= 1;
        }
        const double cnt = double(oracle_ranks.size());
        require(rep.mr == mr / cnt && rep.mrr == mrr / cnt && rep.hits.at(1) == h1 / cnt,
                "pqa relation metrics mismatch");
    }
    return "lp, pqa-entity, pqa-relation all equal the brute-force scorer exactly";
}

// ---- 6. planted rule --------------------------------------------------------

std::string planted_rule() {
    const auto t0 = Clock::now();
    const uint64_t seed = 20260810;
    testutil::TempDir tmp("acc_planted");
    auto kg = testutil::make_planted_kg(seed);
    testutil::write_lines(tmp.file("rules.tsv"), kg.rule_lines);
    Graph g = testutil::make_graph(tmp, kg.train, {}, kg.test);
    require(g.vocab.n_entities() == 200, "planted KG must have 200 entities");
    require(g.vocab.n_original_relations() == 8, "planted KG must have 8 relations");
    RuleIndex rules = parse_rule_file(tmp.file("rules.tsv"), g.vocab, 0.7);

    Config cfg;
    cfg.k = 32;
    cfg.epochs = 200;
    cfg.seed = seed;
    PathIndex paths = build_path_index(g, cfg.max_path_len, size_t(cfg.max_paths), true);

    auto tail_hits1 = [&](const ModelParams& params, double lambda) {
        Config ecfg = cfg;
        ecfg.lambda = lambda;
        CandidatePaths cand;
        if (lambda > 0.0) cand = build_candidate_paths(g, g.test, rules, ecfg);
        FilterIndex filter(g);
        ScoreContext ctx = ScoreContext::from(params, g.vocab, ecfg, nullptr);
        return eval_link_prediction(ctx, g, g.test, cand, filter, nullptr,
                                    CorruptionSide::Tail)
            .hits.at(1);
    };

    std::vector<EpochTrace> trace;
    ModelParams full = train(g, paths, rules, cfg, nullptr, &trace);
    const double hits_full = tail_hits1(full, cfg.lambda);

    // trace trend: the window-10 smoothed loss converges and never climbs
    // more than 5% between consecutive windows
    {
        const size_t window = 10;
        std::vector<double> smoothed;
        for (size_t i = 0; i + window <= trace.size(); ++i) {
            double s = 0.0;
            for (size_t j = 0; j < window; ++j) s += trace[i + j].loss;
            smoothed.push_back(s / double(window));
        }
        size_t good = 0;
        for (size_t i = 1; i < smoothed.size(); ++i)
            if (smoothed[i] <= smoothed[i - 1] * 1.05) ++good;
        const double frac = double(good) / double(smoothed.size() - 1);
        require(frac >= 0.95, "smoothed loss rose >5% in " +
                                  std::to_string(100.0 * (1.0 - frac)) + "% of steps");
        require(smoothed.back() <= 0.2 * smoothed.front(),
                "smoothed loss did not converge: " + std::to_string(smoothed.front()) + " -> " +
                    std::to_string(smoothed.back()));
    }

    Config ablation_cfg = cfg;
    ablation_cfg.lambda = 0.0;
    ModelParams ablation = train(g, paths, rules, ablation_cfg);
    const double hits_ablation = tail_hits1(ablation, 0.0);

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    require(hits_full >= 0.8, "full-model Hits@1 " + std::to_string(hits_full) + " < 0.8");
    require(hits_full >= 1.5 * hits_ablation,
            "Hits@1 " + std::to_string(hits_full) + " is not 1.5x the ablation's " +
                std::to_string(hits_ablation));
    require(secs < 300.0, "took " + std::to_string(secs) + "s (budget 300s)");
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "hits@1 %.3f vs lambda=0 ablation %.3f (%.1fx) on %zu held-out edges, %.1fs",
                  hits_full, hits_ablation,
                  hits_ablation > 0 ? hits_full / hits_ablation : 999.0, g.test.size(), secs);
    return buf;
}

// ---- 7. determinism ---------------------------------------------------------

std::string determinism() {
    testutil::TempDir tmp("acc_det");
    testutil::write_triples(tmp.file("train.txt"),
                            testutil::random_triples(31, 14, 3, 60));
    testutil::write_triples(tmp.file("valid.txt"), {{"e1", "r0", "e2"}});
    testutil::write_triples(tmp.file("test.txt"), {{"e2", "r1", "e3"}});
    testutil::write_lines(tmp.file("rules.tsv"), {"r0\tr1\tr2\t0.9"});

    auto run = [&](const std::string& out) {
        std::vector<std::string> args = {
            "train",      "--train",  tmp.file("train.txt"), "--valid", tmp.file("valid.txt"),
            "--test",     tmp.file("test.txt"), "--rules",   tmp.file("rules.tsv"),
            "--out",      tmp.file(out),        "--k",       "8",
            "--epochs",   "12",       "--batch-size", "16",  "--seed",  "2718",
            "--workers",  "1"};
        std::ostringstream sink;
        std::streambuf* saved = std::cerr.rdbuf(sink.rdbuf());
        int rc = cli::run_command(args);
        std::cerr.rdbuf(saved);
        require(rc == 0, "training run failed");
    };
    run("runA");
    run("runB");

    require(slurp(tmp.file("runA/loss.csv")) == slurp(tmp.file("runB/loss.csv")),
            "loss traces differ");
    require(!slurp(tmp.file("runA/loss.csv")).empty(), "loss trace is empty");
    for (const char* f : {"manifest.txt", "entity_emb.bin", "relation_emb.bin",
                          "projections.bin", "encoder_wh.bin", "encoder_wi.bin"}) {
        require(slurp(tmp.file("runA/checkpoint/") + f) ==
                    slurp(tmp.file("runB/checkpoint/") + f),
                std::string("checkpoint file differs: ") + f);
    }
    return "two seeded runs: loss CSVs and all checkpoint files byte-identical";
}

// ---- 8. data fidelity -------------------------------------------------------

std::string data_fidelity() {
    std::string dir;
    std::string source;
    if (const char* env = std::getenv("PATHKG_DATA_DIR")) {
        std::string candidate = std::string(env) + "/FB15K";
        if (std::filesystem::exists(candidate + "/train.txt")) {
            dir = candidate;
            source = "real FB15K from PATHKG_DATA_DIR";
        }
    }
    testutil::TempDir tmp("acc_fidelity");
    if (dir.empty()) {
        testutil::write_shaped_corpus(tmp.dir.string(),
                                      {14951, 1345, 483142, 50000, 59071}, 99);
        dir = tmp.dir.string();
        source = "synthetic corpus with FB15K table statistics";
    }
    Graph g = load_dataset(dir + "/train.txt", dir + "/valid.txt", dir + "/test.txt");
    require(g.vocab.n_entities() == 14951,
            "entities: " + std::to_string(g.vocab.n_entities()) + " != 14951");
    require(g.vocab.n_original_relations() == 1345,
            "relations: " + std::to_string(g.vocab.n_original_relations()) + " != 1345");
    require(g.vocab.n_relations() == 2690, "relations with inverses != 2690");
    require(g.train.size() == 483142, "train: " + std::to_string(g.train.size()));
    require(g.valid.size() == 50000, "valid: " + std::to_string(g.valid.size()));
    require(g.test.size() == 59071, "test: " + std::to_string(g.test.size()));
    require(g.indexed_edge_count() == 2 * 483142, "index must hold both edge directions");
    return "14951/1345/483142/50000/59071 reproduced (" + source + ")";
}

// ---- 9. checkpoint roundtrip --------------------------------------------------

std::string checkpoint_roundtrip() {
    testutil::TempDir tmp("acc_ckpt");
    Graph g = testutil::make_graph(tmp, testutil::random_triples(88, 10, 4, 30));
    Config cfg;
    cfg.k = 7;
    Rng rng(12);
    ModelParams params = init_params(g.vocab.n_entities(), g.vocab.n_relations(), 0, cfg, rng);
    CheckpointManifest m{1,       cfg.k,    g.vocab.n_entities(), g.vocab.n_relations(), 0,
                         cfg.converter, cfg.norm, cfg.seed};
    save_checkpoint(tmp.file("c1"), params, m);
    ModelParams loaded = load_checkpoint(tmp.file("c1"), read_manifest(tmp.file("c1")));
    save_checkpoint(tmp.file("c2"), loaded, read_manifest(tmp.file("c1")));
    for (const char* f : {"manifest.txt", "entity_emb.bin", "relation_emb.bin",
                          "projections.bin", "encoder_wh.bin", "encoder_wi.bin"})
        require(slurp(tmp.file("c1/") + f) == slurp(tmp.file("c2/") + f),
                std::string("file differs after save-load-save: ") + f);

    bool rejected = false;
    try {
        check_compatible(read_manifest(tmp.file("c1")), g.vocab, 0, 14);
    } catch (const Error& e) {
        rejected = e.kind() == ErrorKind::Incompatible;
    }
    require(rejected, "k mismatch was not rejected");
    return "save-load-save byte-identical, k mismatch rejected";
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"gradient suite", gradient_suite},
        {"pcra oracle", pcra_oracle},
        {"rule composition", rule_composition},
        {"encoder exactness", encoder_exactness},
        {"ranking oracle", ranking_oracle},
        {"planted rule end-to-end", planted_rule},
        {"determinism", determinism},
        {"data fidelity", data_fidelity},
        {"checkpoint roundtrip", checkpoint_roundtrip},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        try {
            std::string detail = c.body();
            std::printf("[PASS] %-26s %s\n", c.name.c_str(), detail.c_str());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] %-26s %s\n", c.name.c_str(), e.what());
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
