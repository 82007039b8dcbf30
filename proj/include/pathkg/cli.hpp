#pragma once
// The pathkg command line: one executable, one subcommand per pipeline
// stage. Every run snapshots its configuration, input checksums, and
// stage timings into a run manifest so it can be reproduced from that
// file alone.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathkg/checkpoint.hpp"
#include "pathkg/evaluator.hpp"

namespace pathkg::cli {

inline constexpr const char* kVersion = "pathkg 0.1.0";

namespace fs = std::filesystem;

inline uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= uint8_t(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

struct StageClock {
    using Clock = std::chrono::steady_clock;
    std::vector<std::pair<std::string, double>> stages;
    Clock::time_point mark = Clock::now();

    void lap(const std::string& name) {
        auto now = Clock::now();
        stages.push_back({name, std::chrono::duration<double>(now - mark).count()});
        mark = now;
    }
};

// Dataset + model options shared by the subcommands.
struct Options {
    std::string config_path;
    std::string data_dir;
    std::string train_path, valid_path, test_path, types_path;
    std::string column_order = "hrt";
    std::string rules_path;
    std::string paths_cache;
    std::string out_dir = "out";
    std::string checkpoint_dir;
    Config cfg;
    bool explicit_k = false;

    std::string resolve(const std::string& explicit_path, const char* name) const {
        if (!explicit_path.empty()) return explicit_path;
        if (!data_dir.empty()) return (fs::path(data_dir) / name).string();
        throw Error(ErrorKind::Config,
                    std::string("no path for ") + name + ": pass the flag or set --data-dir");
    }
    std::string train_file() const { return resolve(train_path, "train.txt"); }
    std::string valid_file() const { return resolve(valid_path, "valid.txt"); }
    std::string test_file() const { return resolve(test_path, "test.txt"); }
    std::string cache_file() const {
        return paths_cache.empty() ? (fs::path(out_dir) / "paths.txt").string() : paths_cache;
    }
    ColumnOrder order() const {
        if (column_order == "hrt") return ColumnOrder::HRT;
        if (column_order == "htr") return ColumnOrder::HTR;
        throw Error(ErrorKind::Config, "unknown column order: " + column_order);
    }
};

inline void write_atomically(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

inline std::string config_snapshot(const Config& c) {
    std::ostringstream os;
    os << "k=" << c.k << "\nlearning_rate=" << c.learning_rate << "\nmargin1=" << c.margin1
       << "\nmargin2=" << c.margin2 << "\nlambda=" << c.lambda << "\nepochs=" << c.epochs
       << "\nbatch_size=" << c.batch_size << "\nmax_path_len=" << c.max_path_len
       << "\nmax_paths=" << c.max_paths << "\nmin_rule_confidence=" << c.min_rule_confidence
       << "\nnorm=" << norm_name(c.norm) << "\nconverter=" << converter_name(c.converter)
       << "\nseed=" << c.seed << "\nl1_reg=" << c.l1_reg << "\nclip_norm=" << c.clip_norm
       << "\nworkers=" << c.workers << "\nrelation_negatives=" << c.relation_negatives << "\n";
    return os.str();
}

class RunManifest {
public:
    RunManifest(const Options& opt, const std::string& subcommand) : opt_(opt), sub_(subcommand) {
        fs::create_directories(opt.out_dir);
        path_ = (fs::path(opt.out_dir) / "run_manifest.txt").string();
        write("running");
    }

    void add_input(const std::string& label, const std::string& file) {
        std::ostringstream os;
        os << "input." << label << "=" << file << "\n"
           << "checksum." << label << "=" << std::hex << fnv1a_file(file) << std::dec << "\n";
        inputs_ += os.str();
    }

    void finalize(const StageClock& clock) {
        std::ostringstream os;
        char buf[64];
        for (const auto& [name, secs] : clock.stages) {
            std::snprintf(buf, sizeof(buf), "%.3f", secs);
            os << "seconds." << name << "=" << buf << "\n";
        }
        timings_ = os.str();
        write("complete");
    }

private:
    void write(const char* status) const {
        std::ostringstream os;
        os << "version=" << kVersion << "\nsubcommand=" << sub_ << "\nstatus=" << status << "\n"
           << inputs_ << config_snapshot(opt_.cfg) << timings_;
        write_atomically(path_, os.str());
    }

    Options opt_;
    std::string sub_, path_, inputs_, timings_;
};

// ---- stage helpers ---------------------------------------------------------

inline Graph load_graph(const Options& opt, RunManifest* manifest) {
    if (manifest) {
        manifest->add_input("train", opt.train_file());
        manifest->add_input("valid", opt.valid_file());
        manifest->add_input("test", opt.test_file());
    }
    return load_dataset(opt.train_file(), opt.valid_file(), opt.test_file(), opt.order(),
                        &std::cerr);
}

inline std::optional<TypeSystem> load_types_if_any(const Options& opt, const Graph& g,
                                                   RunManifest* manifest) {
    std::string path = opt.types_path;
    if (path.empty() && !opt.data_dir.empty()) {
        std::string candidate = (fs::path(opt.data_dir) / "types.txt").string();
        if (fs::exists(candidate)) path = candidate;
    }
    if (path.empty()) return std::nullopt;
    if (manifest) manifest->add_input("types", path);
    return load_type_system(path, g, &std::cerr);
}

inline RuleIndex load_rules_if_any(const Options& opt, const Graph& g, RunManifest* manifest) {
    if (opt.rules_path.empty()) return RuleIndex{};
    if (manifest) manifest->add_input("rules", opt.rules_path);
    return parse_rule_file(opt.rules_path, g.vocab, opt.cfg.min_rule_confidence, &std::cerr);
}

inline std::string cache_meta_path(const std::string& cache) { return cache + ".meta"; }

inline std::string cache_meta_content(const Options& opt, const Graph& g) {
    std::ostringstream os;
    os << "max_path_len=" << opt.cfg.max_path_len << "\nmax_paths=" << opt.cfg.max_paths
       << "\ntrain_triples=" << g.train.size() << "\ntrain_checksum=" << std::hex
       << fnv1a_file(opt.train_file()) << std::dec << "\n";
    return os.str();
}

inline bool cache_is_current(const Options& opt, const Graph& g) {
    const std::string cache = opt.cache_file();
    if (!fs::exists(cache) || !fs::exists(cache_meta_path(cache))) return false;
    std::ifstream in(cache_meta_path(cache));
    std::string on_disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return on_disk == cache_meta_content(opt, g);
}

inline PathIndex prepare_paths(const Options& opt, const Graph& g, bool exclude_direct,
                               bool* rebuilt = nullptr) {
    const std::string cache = opt.cache_file();
    if (cache_is_current(opt, g)) {
        if (rebuilt) *rebuilt = false;
        std::cerr << "path cache " << cache << " is current; skipping extraction\n";
        return read_path_cache(cache, g);
    }
    PathIndex index =
        build_path_index(g, opt.cfg.max_path_len, size_t(opt.cfg.max_paths), exclude_direct,
                         opt.cfg.workers);
    fs::create_directories(fs::path(cache).parent_path().empty() ? "." : fs::path(cache).parent_path());
    write_path_cache(cache, g, index);
    write_atomically(cache_meta_path(cache), cache_meta_content(opt, g));
    if (rebuilt) *rebuilt = true;
    size_t total = 0;
    for (const auto& [tr, ps] : index) total += ps.size();
    std::cerr << "extracted " << total << " paths over " << g.train.size() << " triples -> "
              << cache << "\n";
    return index;
}

// The checkpoint is authoritative for the model shape: k, converter, and
// norm are adopted from its manifest unless the session pinned k itself.
inline ModelParams load_model(const Options& opt, const Graph& g, const TypeSystem* types,
                              Config& cfg, bool explicit_k) {
    const std::string dir = opt.checkpoint_dir.empty()
                                ? (fs::path(opt.out_dir) / "checkpoint").string()
                                : opt.checkpoint_dir;
    CheckpointManifest m = read_manifest(dir);
    check_compatible(m, g.vocab, types ? types->n_types() : 0, explicit_k ? cfg.k : 0);
    cfg.k = m.k;
    cfg.converter = m.converter;
    cfg.norm = m.norm;
    return load_checkpoint(dir, m);
}

// ---- subcommands -----------------------------------------------------------

inline int cmd_prepare_paths(Options& opt) {
    RunManifest manifest(opt, "prepare-paths");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    clock.lap("load");
    prepare_paths(opt, g, true);
    clock.lap("paths");
    manifest.finalize(clock);
    return 0;
}

inline int cmd_mine_import(Options& opt, const std::string& in_path,
                           const std::string& out_path, size_t conf_col) {
    RunManifest manifest(opt, "mine-import");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    manifest.add_input("rules", in_path);
    clock.lap("load");
    RuleIndex idx =
        parse_rule_file(in_path, g.vocab, opt.cfg.min_rule_confidence, &std::cerr, conf_col);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write rules: " + out_path);
    std::vector<HornRule> rules;
    idx.for_each([&](const HornRule& r) { rules.push_back(r); });
    std::sort(rules.begin(), rules.end(), [](const HornRule& a, const HornRule& b) {
        return std::tie(a.body_first, a.body_second) < std::tie(b.body_first, b.body_second);
    });
    char buf[32];
    for (const HornRule& r : rules) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.confidence);
        out << g.vocab.relation_name(r.body_first) << "\t" << g.vocab.relation_name(r.body_second)
            << "\t" << g.vocab.relation_name(r.head) << "\t" << buf << "\n";
    }
    std::cerr << "wrote " << rules.size() << " rules -> " << out_path << "\n";
    clock.lap("import");
    manifest.finalize(clock);
    return 0;
}

inline int cmd_train(Options& opt) {
    RunManifest manifest(opt, "train");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    auto types = load_types_if_any(opt, g, &manifest);
    if (opt.cfg.converter == ConversionMode::EC1_TYPE_ATTENTION && (!types || types->empty()))
        throw Error(ErrorKind::Config, "converter ec1 requires --types (or types.txt in --data-dir)");
    RuleIndex rules = load_rules_if_any(opt, g, &manifest);
    clock.lap("load");

    PathIndex paths = prepare_paths(opt, g, true);
    clock.lap("paths");

    std::vector<EpochTrace> trace;
    ModelParams params =
        train(g, paths, rules, opt.cfg, types ? &*types : nullptr, &trace, &std::cerr);
    clock.lap("train");

    const std::string ckpt = (fs::path(opt.out_dir) / "checkpoint").string();
    CheckpointManifest m{1,
                         opt.cfg.k,
                         g.vocab.n_entities(),
                         g.vocab.n_relations(),
                         types ? types->n_types() : 0,
                         opt.cfg.converter,
                         opt.cfg.norm,
                         opt.cfg.seed};
    save_checkpoint(ckpt, params, m);
    write_loss_trace((fs::path(opt.out_dir) / "loss.csv").string(), trace);
    std::cerr << "checkpoint -> " << ckpt << "\n";
    clock.lap("save");
    manifest.finalize(clock);
    return 0;
}

inline const std::vector<Triple>& pick_split(const Graph& g, const std::string& split) {
    if (split == "test") return g.test;
    if (split == "valid") return g.valid;
    throw Error(ErrorKind::Config, "unknown split: " + split + " (expected test or valid)");
}

inline int cmd_eval_lp(Options& opt, const std::string& split, bool path_rerank) {
    RunManifest manifest(opt, "eval-lp");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    auto types = load_types_if_any(opt, g, &manifest);
    RuleIndex rules = load_rules_if_any(opt, g, &manifest);
    ModelParams params = load_model(opt, g, types ? &*types : nullptr, opt.cfg, opt.explicit_k);
    clock.lap("load");

    const std::vector<Triple>& cases = pick_split(g, split);
    if (cases.empty()) throw Error(ErrorKind::Validation, "split " + split + " is empty");
    CandidatePaths cand;
    if (path_rerank && opt.cfg.lambda > 0.0)
        cand = build_candidate_paths(g, cases, rules, opt.cfg, opt.cfg.workers);
    clock.lap("candidate_paths");

    FilterIndex filter(g);
    ScoreContext ctx = ScoreContext::from(params, g.vocab, opt.cfg, types ? &*types : nullptr);
    std::vector<RankRecord> dump;
    RankingReport rep = eval_link_prediction(ctx, g, cases, cand, filter, &dump);
    clock.lap("rank");

    print_report(std::cout, "link prediction [" + split + "]", rep);
    write_report_csv((fs::path(opt.out_dir) / "lp_report.csv").string(), rep);
    write_rank_dump((fs::path(opt.out_dir) / "lp_ranks.csv").string(), dump);
    manifest.finalize(clock);
    return 0;
}

inline int cmd_eval_pqa(Options& opt, const std::string& split, PqaKind kind) {
    const bool relation = kind == PqaKind::Relation;
    RunManifest manifest(opt, relation ? "eval-pqa-relation" : "eval-pqa-entity");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    auto types = load_types_if_any(opt, g, &manifest);
    RuleIndex rules = load_rules_if_any(opt, g, &manifest);
    ModelParams params = load_model(opt, g, types ? &*types : nullptr, opt.cfg, opt.explicit_k);
    clock.lap("load");

    PathIndex train_cache = prepare_paths(opt, g, true);
    clock.lap("paths");

    Graph full = merge_test_into_index(g);
    PqaBuildStats stats;
    auto cases = build_pqa_testset(full, pick_split(g, split), train_cache, opt.cfg, kind, &stats);
    std::cerr << "pqa test set: " << stats.cases << " cases (" << stats.dropped
              << " dropped for having no fresh path)\n";
    if (cases.empty()) throw Error(ErrorKind::Validation, "no pqa cases survived construction");
    clock.lap("testset");

    FilterIndex filter(g);
    ScoreContext ctx = ScoreContext::from(params, g.vocab, opt.cfg, types ? &*types : nullptr);
    std::vector<RankRecord> dump;
    RankingReport rep;
    if (relation) {
        std::vector<Explanation> explanations;
        rep = eval_pqa_relation(ctx, cases, g, rules, filter, &dump, &explanations);
        std::ofstream out((fs::path(opt.out_dir) / "pqa_explanations.txt").string(),
                          std::ios::trunc);
        for (const Explanation& e : explanations) {
            out << "query: (" << g.vocab.entity_name(e.query.head) << ", ?, "
                << g.vocab.entity_name(e.query.tail) << ")\n"
                << "rule:  " << g.vocab.relation_name(e.rule.head) << "(x, y) <= "
                << g.vocab.relation_name(e.rule.body_first) << "(x, z) ^ "
                << g.vocab.relation_name(e.rule.body_second) << "(z, y)"
                << "  (confidence: " << e.rule.confidence << ")\n"
                << "rank of the correct relation: " << e.correct_rank << "\n";
            for (const auto& [rel, pos] : e.top)
                out << "  " << pos << ". " << g.vocab.relation_name(rel) << "\n";
            out << "\n";
        }
    } else {
        rep = eval_pqa_entity(ctx, cases, g, rules, filter, &dump);
    }
    clock.lap("rank");

    const std::string label = relation ? "pqa relation inference" : "pqa entity prediction";
    print_report(std::cout, label + " [" + split + "]", rep);
    write_report_csv((fs::path(opt.out_dir) / (relation ? "pqa_relation_report.csv"
                                                        : "pqa_entity_report.csv"))
                         .string(),
                     rep);
    write_rank_dump(
        (fs::path(opt.out_dir) / (relation ? "pqa_relation_ranks.csv" : "pqa_entity_ranks.csv"))
            .string(),
        dump);
    manifest.finalize(clock);
    return 0;
}

inline int cmd_explain(Options& opt, const std::string& query_str, const std::string& path_str,
                       const std::string& gold) {
    RunManifest manifest(opt, "explain");
    StageClock clock;
    Graph g = load_graph(opt, &manifest);
    auto types = load_types_if_any(opt, g, &manifest);
    RuleIndex rules = load_rules_if_any(opt, g, &manifest);
    ModelParams params = load_model(opt, g, types ? &*types : nullptr, opt.cfg, opt.explicit_k);
    clock.lap("load");

    auto tokens = [](const std::string& s) {
        std::istringstream ss(s);
        std::vector<std::string> out;
        std::string t;
        while (ss >> t) out.push_back(t);
        return out;
    };
    auto q = tokens(query_str);
    if (q.size() != 3) throw Error(ErrorKind::Config, "--query must be 'head ? tail'");
    EntityId head = g.vocab.entity_id(q[0]), tail = g.vocab.entity_id(q[2]);
    if (head < 0 || tail < 0)
        throw Error(ErrorKind::Validation, "unknown query entity in: " + query_str);

    auto pt = tokens(path_str);
    if (pt.empty() || pt.size() % 2 == 0)
        throw Error(ErrorKind::Config, "--path must alternate 'r1 e1 r2 ... rn'");
    GroundedPath path;
    path.source = head;
    path.target = tail;
    for (size_t i = 0; i < pt.size(); ++i) {
        if (i % 2 == 0) {
            RelationId r = g.vocab.relation_id(pt[i]);
            if (r < 0) throw Error(ErrorKind::Validation, "unknown relation: " + pt[i]);
            path.relations.push_back(r);
        } else {
            EntityId e = g.vocab.entity_id(pt[i]);
            if (e < 0) throw Error(ErrorKind::Validation, "unknown entity: " + pt[i]);
            path.entities.push_back(e);
        }
    }

    CompositionTrace trace;
    GroundedPath composed = compose_path(path, rules, &trace);
    PathSet ps;
    ps.backward.push_back(invert_path(composed, g.vocab));
    ps.forward.push_back(std::move(composed));

    ScoreContext ctx = ScoreContext::from(params, g.vocab, opt.cfg, types ? &*types : nullptr);
    EncodedPathSet eps = encode_path_set(ctx, ps);
    std::vector<std::pair<int32_t, double>> scores;
    for (RelationId r = 0; r < RelationId(g.vocab.n_relations()); ++r)
        scores.push_back({r, score_candidate(ctx, Triple{head, r, tail}, &eps)});
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });

    std::cout << "query: (" << q[0] << ", ?, " << q[2] << ")\n";
    std::cout << "path:  " << path_str << "\n";
    if (trace.applied.empty()) {
        std::cout << "matching rule: none\n";
    } else {
        double overall = 1.0;
        for (const HornRule& r : trace.applied) {
            std::cout << "matching rule: " << g.vocab.relation_name(r.head) << "(x, y) <= "
                      << g.vocab.relation_name(r.body_first) << "(x, z) ^ "
                      << g.vocab.relation_name(r.body_second) << "(z, y)"
                      << "  (confidence: " << r.confidence << ")\n";
            overall *= r.confidence;
        }
        std::cout << "overall confidence: " << overall << "\n";
    }
    std::cout << "top relations:\n";
    for (size_t i = 0; i < scores.size() && i < 3; ++i)
        std::cout << "  " << (i + 1) << ". " << g.vocab.relation_name(scores[i].first) << "\n";
    if (!gold.empty()) {
        RelationId gr = g.vocab.relation_id(gold);
        if (gr < 0) throw Error(ErrorKind::Validation, "unknown gold relation: " + gold);
        std::cout << "rank of " << gold << ": " << filtered_rank(scores, gr, {}) << "\n";
    }
    clock.lap("explain");
    manifest.finalize(clock);
    return 0;
}

inline int cmd_inspect(Options& opt) {
    const std::string dir = opt.checkpoint_dir.empty()
                                ? (fs::path(opt.out_dir) / "checkpoint").string()
                                : opt.checkpoint_dir;
    CheckpointManifest m = read_manifest(dir);
    ModelParams p = load_checkpoint(dir, m);
    std::cout << "checkpoint " << dir << "\n"
              << "  k          " << m.k << "\n"
              << "  entities   " << m.entities << "\n"
              << "  relations  " << m.relations << "\n"
              << "  types      " << m.types << "\n"
              << "  converter  " << converter_name(m.converter) << "\n"
              << "  norm       " << norm_name(m.norm) << "\n"
              << "  seed       " << m.seed << "\n";
    auto stats = [](const char* name, auto&& values) {
        double lo = 1e300, hi = -1e300, sum = 0;
        size_t n = 0;
        for (const auto& row : values)
            for (double x : row) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                sum += x;
                ++n;
            }
        std::cout << "  " << name << ": " << n << " values in [" << lo << ", " << hi
                  << "], mean " << (n ? sum / double(n) : 0.0) << "\n";
    };
    stats("entity_emb", p.entity_emb);
    stats("relation_emb", p.relation_emb);
    if (!p.type_emb.empty()) stats("type_emb", p.type_emb);
    if (!p.projections.empty()) {
        std::vector<std::vector<double>> rows;
        for (const Mat& m2 : p.projections) rows.push_back(m2.a);
        stats("projections", rows);
    }
    stats("encoder", std::vector<std::vector<double>>{p.encoder.wh.a, p.encoder.wi.a});
    return 0;
}

// ---- argument wiring --------------------------------------------------------

inline int run_command(std::vector<std::string> args) {
    CLI::App app{kVersion};
    app.require_subcommand(1);
    Options opt;
    if (const char* env = std::getenv("PATHKG_DATA_DIR")) opt.data_dir = env;

    std::string converter_flag, norm_flag, split = "test";
    std::string mine_in, mine_out, query_str, path_str, gold;
    size_t amie_col = 3;
    bool no_path_rerank = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "key=value config file");
        sub->add_option("--data-dir", opt.data_dir,
                        "directory holding train.txt/valid.txt/test.txt (env PATHKG_DATA_DIR)");
        sub->add_option("--train", opt.train_path);
        sub->add_option("--valid", opt.valid_path);
        sub->add_option("--test", opt.test_path);
        sub->add_option("--types", opt.types_path, "entity-type file (required for ec1)");
        sub->add_option("--column-order", opt.column_order)->check(CLI::IsMember({"hrt", "htr"}));
        sub->add_option("--rules", opt.rules_path, "horn rule file (native or AMIE+)");
        sub->add_option("--paths", opt.paths_cache, "path cache file");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--checkpoint", opt.checkpoint_dir, "checkpoint directory");
        sub->add_option("--seed", opt.cfg.seed);
        sub->add_option("--workers", opt.cfg.workers, "1 = deterministic reference mode");
        sub->add_option("--converter", converter_flag)->check(CLI::IsMember({"ec1", "ec2"}));
        sub->add_option("--norm", norm_flag)->check(CLI::IsMember({"l1", "l2"}));
        sub->add_option("--max-path-len", opt.cfg.max_path_len);
        sub->add_option("--max-paths", opt.cfg.max_paths);
        sub->add_option("--min-rule-conf", opt.cfg.min_rule_confidence);
        sub->add_option("--k", opt.cfg.k);
        sub->add_option("--epochs", opt.cfg.epochs);
        sub->add_option("--batch-size", opt.cfg.batch_size);
        sub->add_option("--lambda", opt.cfg.lambda);
        sub->add_option("--learning-rate", opt.cfg.learning_rate);
    };

    CLI::App* prepare = app.add_subcommand("prepare-paths", "extract and cache training paths");
    add_common(prepare);
    CLI::App* mine = app.add_subcommand("mine-import", "import mined rules into the native format");
    add_common(mine);
    mine->add_option("--in", mine_in, "AMIE+ or native rule file")->required();
    mine->add_option("--out-rules", mine_out, "output native TSV")->required();
    mine->add_option("--amie-conf-col", amie_col, "confidence column in AMIE+ exports");
    CLI::App* train_cmd = app.add_subcommand("train", "train embeddings");
    add_common(train_cmd);
    CLI::App* eval_lp = app.add_subcommand("eval-lp", "filtered link prediction");
    add_common(eval_lp);
    eval_lp->add_option("--split", split)->check(CLI::IsMember({"test", "valid"}));
    eval_lp->add_flag("--no-path-rerank", no_path_rerank,
                      "score with the triple energy only (skips candidate path extraction)");
    CLI::App* pqa_e = app.add_subcommand("eval-pqa-entity", "path query answering: entities");
    add_common(pqa_e);
    pqa_e->add_option("--split", split)->check(CLI::IsMember({"test", "valid"}));
    CLI::App* pqa_r = app.add_subcommand("eval-pqa-relation", "path query answering: relations");
    add_common(pqa_r);
    pqa_r->add_option("--split", split)->check(CLI::IsMember({"test", "valid"}));
    CLI::App* explain = app.add_subcommand("explain", "rule-traced explanation for a path query");
    add_common(explain);
    explain->add_option("--query", query_str, "'head ? tail'")->required();
    explain->add_option("--path", path_str, "'r1 e1 r2 ... rn'")->required();
    explain->add_option("--gold", gold, "known correct relation, to report its rank");
    CLI::App* inspect = app.add_subcommand("inspect-checkpoint", "print checkpoint metadata");
    add_common(inspect);

    // CLI11 wants argv order reversed, with no program name
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        // config file first, then any flag the user actually passed overrides it
        CLI::App* active = app.get_subcommands().front();
        auto was_set = [&](const std::string& flag) {
            const CLI::Option* o = active->get_option_no_throw(flag);
            return o && o->count() > 0;
        };
        std::set<std::string> file_keys;
        if (!opt.config_path.empty()) {
            Config flags = opt.cfg;
            Config merged = load_config(opt.config_path, &file_keys);
            if (was_set("--seed")) merged.seed = flags.seed;
            if (was_set("--workers")) merged.workers = flags.workers;
            if (was_set("--max-path-len")) merged.max_path_len = flags.max_path_len;
            if (was_set("--max-paths")) merged.max_paths = flags.max_paths;
            if (was_set("--min-rule-conf")) merged.min_rule_confidence = flags.min_rule_confidence;
            if (was_set("--k")) merged.k = flags.k;
            if (was_set("--epochs")) merged.epochs = flags.epochs;
            if (was_set("--batch-size")) merged.batch_size = flags.batch_size;
            if (was_set("--lambda")) merged.lambda = flags.lambda;
            if (was_set("--learning-rate")) merged.learning_rate = flags.learning_rate;
            opt.cfg = merged;
        }
        opt.explicit_k = was_set("--k") || file_keys.count("k") > 0;
        if (!converter_flag.empty()) opt.cfg.converter = parse_converter(converter_flag);
        if (!norm_flag.empty()) opt.cfg.norm = parse_norm(norm_flag);
        opt.cfg.validate();

        if (prepare->parsed()) return cmd_prepare_paths(opt);
        if (mine->parsed()) return cmd_mine_import(opt, mine_in, mine_out, amie_col);
        if (train_cmd->parsed()) return cmd_train(opt);
        if (eval_lp->parsed()) return cmd_eval_lp(opt, split, !no_path_rerank);
        if (pqa_e->parsed()) return cmd_eval_pqa(opt, split, PqaKind::Entity);
        if (pqa_r->parsed()) return cmd_eval_pqa(opt, split, PqaKind::Relation);
        if (explain->parsed()) return cmd_explain(opt, query_str, path_str, gold);
        if (inspect->parsed()) return cmd_inspect(opt);
        std::cerr << app.help();
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Io ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pathkg::cli
