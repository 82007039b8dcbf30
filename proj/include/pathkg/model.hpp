#pragma once
// Trainable parameters and sparse gradient accumulation.

#include <cmath>
#include <unordered_map>
#include <vector>

#include "pathkg/config.hpp"
#include "pathkg/math.hpp"
#include "pathkg/types.hpp"

namespace pathkg {

struct EncoderParams {
    Mat wh;  // hidden-to-hidden
    Mat wi;  // input-to-hidden
};

struct ModelParams {
    int k = 0;
    std::vector<Vec> entity_emb;
    std::vector<Vec> relation_emb;   // inverses included
    std::vector<Vec> type_emb;       // EC1 only
    std::vector<Mat> projections;    // EC2 only, one k x k per relation id
    EncoderParams encoder;
};

inline void renorm_entities(ModelParams& p) {
    for (Vec& e : p.entity_emb) {
        double len = l2_norm(e);
        if (len > 1.0)
            for (double& x : e) x /= len;
    }
}

inline ModelParams init_params(size_t n_entities, size_t n_relations, size_t n_types,
                               const Config& cfg, Rng& rng) {
    ModelParams p;
    p.k = cfg.k;
    const double bound = 6.0 / std::sqrt(double(cfg.k));
    auto rand_vec = [&] {
        Vec v(cfg.k);
        for (double& x : v) x = rng.uniform(-bound, bound);
        return v;
    };
    p.entity_emb.reserve(n_entities);
    for (size_t i = 0; i < n_entities; ++i) p.entity_emb.push_back(rand_vec());
    renorm_entities(p);
    p.relation_emb.reserve(n_relations);
    for (size_t i = 0; i < n_relations; ++i) p.relation_emb.push_back(rand_vec());

    if (cfg.converter == ConversionMode::EC1_TYPE_ATTENTION) {
        p.type_emb.reserve(n_types);
        for (size_t i = 0; i < n_types; ++i) p.type_emb.push_back(rand_vec());
    } else {
        // near-identity so early training approximates pass-through
        p.projections.reserve(n_relations);
        for (size_t i = 0; i < n_relations; ++i) {
            Mat m = Mat::identity(cfg.k);
            for (double& x : m.a) x += rng.uniform(-0.01, 0.01);
            p.projections.push_back(std::move(m));
        }
    }

    // scaled toward identity: keeps the ReLU recurrence stable at the start
    p.encoder.wh = Mat::identity(cfg.k);
    p.encoder.wi = Mat::identity(cfg.k);
    for (double& x : p.encoder.wh.a) x = 0.5 * x + rng.uniform(-0.05, 0.05);
    for (double& x : p.encoder.wi.a) x = 0.5 * x + rng.uniform(-0.05, 0.05);
    return p;
}

// Sparse per-parameter gradients. Dense encoder blocks are materialized
// only when a multi-element sequence actually touched them.
struct GradientBundle {
    int k = 0;
    std::unordered_map<EntityId, Vec> entity;
    std::unordered_map<RelationId, Vec> relation;
    std::unordered_map<TypeId, Vec> type_emb;
    std::unordered_map<RelationId, Mat> projection;
    Mat wh, wi;
    bool encoder_touched = false;

    explicit GradientBundle(int dim = 0) : k(dim) {}

    Vec& entity_slot(EntityId e) {
        auto [it, fresh] = entity.try_emplace(e);
        if (fresh) it->second.assign(k, 0.0);
        return it->second;
    }
    Vec& relation_slot(RelationId r) {
        auto [it, fresh] = relation.try_emplace(r);
        if (fresh) it->second.assign(k, 0.0);
        return it->second;
    }
    Vec& type_slot(TypeId t) {
        auto [it, fresh] = type_emb.try_emplace(t);
        if (fresh) it->second.assign(k, 0.0);
        return it->second;
    }
    Mat& projection_slot(RelationId r) {
        auto [it, fresh] = projection.try_emplace(r);
        if (fresh) it->second = Mat(k, k);
        return it->second;
    }
    void touch_encoder() {
        if (!encoder_touched) {
            wh = Mat(k, k);
            wi = Mat(k, k);
            encoder_touched = true;
        }
    }

    double squared_norm() const {
        double s = 0.0;
        auto acc_map = [&s](const auto& m) {
            for (const auto& [id, v] : m)
                for (double x : v) s += x * x;
        };
        acc_map(entity);
        acc_map(relation);
        acc_map(type_emb);
        for (const auto& [id, m] : projection)
            for (double x : m.a) s += x * x;
        if (encoder_touched) {
            for (double x : wh.a) s += x * x;
            for (double x : wi.a) s += x * x;
        }
        return s;
    }

    void scale(double s) {
        auto scale_map = [s](auto& m) {
            for (auto& [id, v] : m)
                for (double& x : v) x *= s;
        };
        scale_map(entity);
        scale_map(relation);
        scale_map(type_emb);
        for (auto& [id, m] : projection)
            for (double& x : m.a) x *= s;
        if (encoder_touched) {
            for (double& x : wh.a) x *= s;
            for (double& x : wi.a) x *= s;
        }
    }

    // Scales so the global L2 norm does not exceed max_norm.
    void clip_global_norm(double max_norm) {
        if (max_norm <= 0.0) return;
        double n2 = squared_norm();
        if (n2 > max_norm * max_norm) scale(max_norm / std::sqrt(n2));
    }

    void merge_from(const GradientBundle& o) {
        for (const auto& [id, v] : o.entity) axpy(entity_slot(id), v, 1.0);
        for (const auto& [id, v] : o.relation) axpy(relation_slot(id), v, 1.0);
        for (const auto& [id, v] : o.type_emb) axpy(type_slot(id), v, 1.0);
        for (const auto& [id, m] : o.projection) {
            Mat& dst = projection_slot(id);
            for (size_t i = 0; i < m.a.size(); ++i) dst.a[i] += m.a[i];
        }
        if (o.encoder_touched) {
            touch_encoder();
            for (size_t i = 0; i < o.wh.a.size(); ++i) wh.a[i] += o.wh.a[i];
            for (size_t i = 0; i < o.wi.a.size(); ++i) wi.a[i] += o.wi.a[i];
        }
    }

    bool empty() const {
        return entity.empty() && relation.empty() && type_emb.empty() && projection.empty() &&
               !encoder_touched;
    }
};

// One SGD step. l1_reg adds subgradient shrinkage toward zero on every
// parameter the bundle touches.
inline void apply_sgd(ModelParams& p, const GradientBundle& g, double rate, double l1_reg) {
    auto step_vec = [&](Vec& param, const Vec& grad) {
        for (size_t i = 0; i < param.size(); ++i) {
            double gi = grad[i];
            if (l1_reg != 0.0)
                gi += l1_reg * (param[i] > 0.0 ? 1.0 : (param[i] < 0.0 ? -1.0 : 0.0));
            param[i] -= rate * gi;
        }
    };
    for (const auto& [id, v] : g.entity) step_vec(p.entity_emb[id], v);
    for (const auto& [id, v] : g.relation) step_vec(p.relation_emb[id], v);
    for (const auto& [id, v] : g.type_emb) step_vec(p.type_emb[id], v);
    for (const auto& [id, m] : g.projection) step_vec(p.projections[id].a, m.a);
    if (g.encoder_touched) {
        step_vec(p.encoder.wh.a, g.wh.a);
        step_vec(p.encoder.wi.a, g.wi.a);
    }
}

}  // namespace pathkg
