#pragma once
// Margin-based training over triples and multi-hop paths.
//
// Per positive triple the loss is L1 + lambda * L2. L1 is the
// translational hinge [margin1 + E1(pos) - E1(neg)]+. L2 compares the
// relation against its bi-directional path sets,
// [margin2 + (E2(r, P) + E2(r^-1, P^-1))/2 - E2(r', P)]+, where E2 is the
// alpha-normalized, confidence-weighted distance between the relation
// embedding and the encoded paths. Positives without paths contribute L1
// only. One SGD step per minibatch; entity embeddings are pulled back
// into the unit ball after every epoch.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "pathkg/encoder.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/paths.hpp"
#include "pathkg/rules.hpp"

namespace pathkg {

inline Vec triple_diff(const ModelParams& p, const Triple& t) {
    const Vec& h = p.entity_emb[t.head];
    const Vec& r = p.relation_emb[t.relation];
    const Vec& tl = p.entity_emb[t.tail];
    Vec d(p.k);
    for (int i = 0; i < p.k; ++i) d[i] = h[i] + r[i] - tl[i];
    return d;
}

// E1: || h + r - t ||
inline double energy_triple(const ModelParams& p, const Triple& t, Norm norm) {
    return norm_value(triple_diff(p, t), norm);
}

// E2 over one direction, encodings precomputed:
// (1 / sum alpha_i) * sum c_i alpha_i ||r - RNN(p_i)||. Empty set -> 0.
inline double energy_path_set(const ModelParams& p, RelationId r,
                              const std::vector<GroundedPath>& paths,
                              const std::vector<Vec>& encodings, Norm norm) {
    counters::path_energy_calls()++;
    if (paths.empty()) return 0.0;
    double alpha_sum = 0.0, acc = 0.0;
    for (const GroundedPath& path : paths) alpha_sum += path.alpha;
    const Vec& rv = p.relation_emb[r];
    Vec d(p.k);
    for (size_t i = 0; i < paths.size(); ++i) {
        for (int j = 0; j < p.k; ++j) d[j] = rv[j] - encodings[i][j];
        acc += paths[i].confidence * paths[i].alpha * norm_value(d, norm);
    }
    return acc / alpha_sum;
}

// Self-contained variant that encodes in place.
inline double energy_path_set(const ModelParams& p, RelationId r,
                              const std::vector<GroundedPath>& paths, Norm norm,
                              ConversionMode mode, const TypeSystem* types) {
    std::vector<Vec> encodings;
    encodings.reserve(paths.size());
    for (const GroundedPath& path : paths)
        encodings.push_back(encode_path(build_path_sequence(path, p, mode, types), p.encoder));
    return energy_path_set(p, r, paths, encodings, norm);
}

struct NegativeSample {
    Triple triple;
    RelationId relation;  // r' for the path loss
};

inline RelationId sample_negative_relation(const Graph& g, RelationId r, Rng& rng) {
    RelationId rq;
    do {
        rq = RelationId(rng.next_below(g.vocab.n_relations()));
    } while (rq == r);
    return rq;
}

// Corrupts a uniformly chosen slot with a uniform draw over that slot's
// vocabulary, rejecting anything already observed in the training set.
inline NegativeSample sample_negatives(const Graph& g, const Triple& tr, Rng& rng) {
    const int slot = int(rng.next_below(3));
    Triple cand;
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        cand = tr;
        if (slot == 0)
            cand.head = EntityId(rng.next_below(g.vocab.n_entities()));
        else if (slot == 1)
            cand.relation = RelationId(rng.next_below(g.vocab.n_relations()));
        else
            cand.tail = EntityId(rng.next_below(g.vocab.n_entities()));
        ok = cand != tr && !g.has_triple(cand);
    }
    if (!ok)
        throw Error(ErrorKind::Validation,
                    "negative sampling exhausted 100 attempts for triple (" +
                        std::to_string(tr.head) + ", " + std::to_string(tr.relation) + ", " +
                        std::to_string(tr.tail) + ")");
    return {cand, sample_negative_relation(g, tr.relation, rng)};
}

struct Batch {
    std::vector<Triple> positives;
    std::vector<Triple> negatives;
    std::vector<const PathSet*> path_sets;  // rule-composed; null or empty -> L1 only
    std::vector<std::vector<RelationId>> negative_relations;
};

struct LossResult {
    double loss = 0.0;
    double triple_loss = 0.0;
    double path_loss = 0.0;  // lambda-scaled
    GradientBundle grads;
};

inline LossResult margin_losses(const ModelParams& params, const Batch& batch, const Config& cfg,
                                const TypeSystem* types, const Vocab& vocab) {
    LossResult res{0.0, 0.0, 0.0, GradientBundle(params.k)};
    GradientBundle& grads = res.grads;

    for (size_t i = 0; i < batch.positives.size(); ++i) {
        const Triple& pos = batch.positives[i];
        const Triple& neg = batch.negatives[i];

        Vec dp = triple_diff(params, pos);
        Vec dn = triple_diff(params, neg);
        const double slack1 = cfg.margin1 + norm_value(dp, cfg.norm) - norm_value(dn, cfg.norm);
        if (slack1 > 0.0) {
            res.triple_loss += slack1;
            Vec gp = norm_grad(dp, cfg.norm);
            Vec gn = norm_grad(dn, cfg.norm);
            axpy(grads.entity_slot(pos.head), gp, 1.0);
            axpy(grads.relation_slot(pos.relation), gp, 1.0);
            axpy(grads.entity_slot(pos.tail), gp, -1.0);
            axpy(grads.entity_slot(neg.head), gn, -1.0);
            axpy(grads.relation_slot(neg.relation), gn, -1.0);
            axpy(grads.entity_slot(neg.tail), gn, 1.0);
        }

        const PathSet* ps = batch.path_sets[i];
        if (cfg.lambda <= 0.0 || !ps || ps->forward.empty()) continue;

        const size_t m = ps->forward.size();
        const RelationId rel = pos.relation;
        const RelationId rel_inv = vocab.inverse_of(rel);

        std::vector<PathSequence> fseq(m), bseq(m);
        std::vector<EncodeTrace> ftrace(m), btrace(m);
        std::vector<const Vec*> fenc(m), benc(m);
        double alpha_sum = 0.0;
        for (size_t j = 0; j < m; ++j) {
            fseq[j] = build_path_sequence(ps->forward[j], params, cfg.converter, types);
            bseq[j] = build_path_sequence(ps->backward[j], params, cfg.converter, types);
            fenc[j] = &encode_path_traced(fseq[j], params.encoder, ftrace[j]);
            benc[j] = &encode_path_traced(bseq[j], params.encoder, btrace[j]);
            alpha_sum += ps->forward[j].alpha;
        }
        counters::path_energy_calls() += 2;

        // weights and distances shared across every hinge on this positive
        std::vector<double> w(m), dist_f(m), dist_b(m);
        std::vector<Vec> u_f(m), u_b(m);
        double e2_f = 0.0, e2_b = 0.0;
        Vec d(params.k);
        for (size_t j = 0; j < m; ++j) {
            w[j] = ps->forward[j].confidence * ps->forward[j].alpha / alpha_sum;
            for (int c = 0; c < params.k; ++c) d[c] = params.relation_emb[rel][c] - (*fenc[j])[c];
            dist_f[j] = norm_value(d, cfg.norm);
            u_f[j] = norm_grad(d, cfg.norm);
            e2_f += w[j] * dist_f[j];
            for (int c = 0; c < params.k; ++c)
                d[c] = params.relation_emb[rel_inv][c] - (*benc[j])[c];
            dist_b[j] = norm_value(d, cfg.norm);
            u_b[j] = norm_grad(d, cfg.norm);
            e2_b += w[j] * dist_b[j];
        }

        std::vector<Vec> up_f(m, Vec(params.k, 0.0)), up_b(m, Vec(params.k, 0.0));
        bool any_hinge = false;
        for (RelationId rq : batch.negative_relations[i]) {
            counters::path_energy_calls()++;
            double e2_q = 0.0;
            std::vector<Vec> u_q(m);
            for (size_t j = 0; j < m; ++j) {
                for (int c = 0; c < params.k; ++c)
                    d[c] = params.relation_emb[rq][c] - (*fenc[j])[c];
                e2_q += w[j] * norm_value(d, cfg.norm);
                u_q[j] = norm_grad(d, cfg.norm);
            }
            const double slack2 = cfg.margin2 + 0.5 * (e2_f + e2_b) - e2_q;
            if (slack2 <= 0.0) continue;
            any_hinge = true;
            res.path_loss += cfg.lambda * slack2;
            for (size_t j = 0; j < m; ++j) {
                const double lw = cfg.lambda * w[j];
                axpy(grads.relation_slot(rel), u_f[j], 0.5 * lw);
                axpy(grads.relation_slot(rel_inv), u_b[j], 0.5 * lw);
                axpy(grads.relation_slot(rq), u_q[j], -lw);
                // d/d enc_f: -1/2 lw u_f + lw u_q ; d/d enc_b: -1/2 lw u_b
                axpy(up_f[j], u_f[j], -0.5 * lw);
                axpy(up_f[j], u_q[j], lw);
                axpy(up_b[j], u_b[j], -0.5 * lw);
            }
        }
        if (any_hinge) {
            for (size_t j = 0; j < m; ++j) {
                grads.merge_from(encode_backward(fseq[j], params.encoder, ftrace[j], up_f[j],
                                                 params, cfg.clip_norm));
                grads.merge_from(encode_backward(bseq[j], params.encoder, btrace[j], up_b[j],
                                                 params, cfg.clip_norm));
            }
        }
    }
    res.loss = res.triple_loss + res.path_loss;
    return res;
}

// Rule-composes every forward path once; backward paths are the inverses
// of the composed forward paths, matching the training-time ordering.
inline std::unordered_map<Triple, PathSet, TripleHash> compose_path_index(
    const PathIndex& raw, const RuleIndex& rules, const Vocab& vocab) {
    std::unordered_map<Triple, PathSet, TripleHash> out;
    out.reserve(raw.size());
    for (const auto& [tr, ps] : raw) {
        PathSet cps;
        cps.forward.reserve(ps.forward.size());
        cps.backward.reserve(ps.forward.size());
        for (const GroundedPath& p : ps.forward) {
            GroundedPath composed = compose_path(p, rules);
            cps.backward.push_back(invert_path(composed, vocab));
            cps.forward.push_back(std::move(composed));
        }
        out.emplace(tr, std::move(cps));
    }
    return out;
}

struct EpochTrace {
    int epoch = 0;
    double loss = 0.0;
    double triple_loss = 0.0;
    double path_loss = 0.0;
    double seconds = 0.0;  // 0 in the deterministic reference mode
};

inline void write_loss_trace(const std::string& path, const std::vector<EpochTrace>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write loss trace: " + path);
    out << "epoch,loss,l1_component,l2_component,seconds\n";
    char buf[160];
    for (const EpochTrace& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.3f\n", r.epoch, r.loss,
                      r.triple_loss, r.path_loss, r.seconds);
        out << buf;
    }
}

// Algorithm: per epoch, shuffle the training triples, walk them in
// minibatches, corrupt each positive, look up its composed paths in both
// directions, take one SGD step per batch, renorm entities at epoch end.
// Single-threaded runs with a fixed seed are bit-reproducible.
inline ModelParams train(const Graph& g, const PathIndex& path_index, const RuleIndex& rules,
                         const Config& cfg, const TypeSystem* types = nullptr,
                         std::vector<EpochTrace>* trace = nullptr, std::ostream* diag = nullptr) {
    cfg.validate();
    if (cfg.converter == ConversionMode::EC1_TYPE_ATTENTION && (!types || types->empty()))
        throw Error(ErrorKind::Config, "ec1 converter requires a non-empty type system");

    Rng rng(cfg.seed);
    ModelParams params = init_params(g.vocab.n_entities(), g.vocab.n_relations(),
                                     types ? types->n_types() : 0, cfg, rng);
    const auto composed =
        cfg.lambda > 0.0 ? compose_path_index(path_index, rules, g.vocab)
                         : std::unordered_map<Triple, PathSet, TripleHash>{};

    std::vector<size_t> order(g.train.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        double ep_loss = 0.0, ep_l1 = 0.0, ep_l2 = 0.0;
        size_t batch_index = 0;
        for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size), ++batch_index) {
            const size_t end = std::min(order.size(), start + size_t(cfg.batch_size));
            Batch batch;
            batch.positives.reserve(end - start);
            for (size_t i = start; i < end; ++i) {
                const Triple& pos = g.train[order[i]];
                NegativeSample ns = sample_negatives(g, pos, rng);
                std::vector<RelationId> rqs{ns.relation};
                for (int extra = 1; extra < cfg.relation_negatives; ++extra)
                    rqs.push_back(sample_negative_relation(g, pos.relation, rng));
                batch.positives.push_back(pos);
                batch.negatives.push_back(ns.triple);
                batch.negative_relations.push_back(std::move(rqs));
                const PathSet* ps = nullptr;
                if (cfg.lambda > 0.0) {
                    auto it = composed.find(pos);
                    if (it != composed.end()) ps = &it->second;
                }
                batch.path_sets.push_back(ps);
            }

            LossResult lr;
            if (cfg.workers <= 1 || batch.positives.size() < 2) {
                lr = margin_losses(params, batch, cfg, types, g.vocab);
            } else {
                const int n_workers = std::min<int>(cfg.workers, int(batch.positives.size()));
                std::vector<LossResult> parts(n_workers);
                std::vector<std::thread> pool;
                const size_t chunk = (batch.positives.size() + n_workers - 1) / n_workers;
                for (int w = 0; w < n_workers; ++w) {
                    pool.emplace_back([&, w] {
                        Batch sub;
                        const size_t b = std::min(batch.positives.size(), w * chunk);
                        const size_t e = std::min(batch.positives.size(), b + chunk);
                        sub.positives.assign(batch.positives.begin() + b, batch.positives.begin() + e);
                        sub.negatives.assign(batch.negatives.begin() + b, batch.negatives.begin() + e);
                        sub.path_sets.assign(batch.path_sets.begin() + b, batch.path_sets.begin() + e);
                        sub.negative_relations.assign(batch.negative_relations.begin() + b,
                                                      batch.negative_relations.begin() + e);
                        parts[w] = margin_losses(params, sub, cfg, types, g.vocab);
                    });
                }
                for (auto& th : pool) th.join();
                lr.grads = GradientBundle(params.k);
                for (auto& part : parts) {
                    lr.loss += part.loss;
                    lr.triple_loss += part.triple_loss;
                    lr.path_loss += part.path_loss;
                    lr.grads.merge_from(part.grads);
                }
            }

            if (!std::isfinite(lr.loss))
                throw Error(ErrorKind::Internal, "non-finite loss at epoch " +
                                                     std::to_string(epoch) + ", batch " +
                                                     std::to_string(batch_index));
            apply_sgd(params, lr.grads, cfg.learning_rate, cfg.l1_reg);
            ep_loss += lr.loss;
            ep_l1 += lr.triple_loss;
            ep_l2 += lr.path_loss;
        }
        renorm_entities(params);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (trace)
            trace->push_back({epoch, ep_loss, ep_l1, ep_l2, cfg.workers <= 1 ? 0.0 : wall});
        if (diag)
            *diag << "epoch " << epoch << " loss " << ep_loss << " (l1 " << ep_l1 << ", l2 "
                  << ep_l2 << ") " << wall << "s\n";
    }
    return params;
}

}  // namespace pathkg
