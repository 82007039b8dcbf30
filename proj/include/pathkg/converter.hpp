#pragma once
// Entity conversion: an intermediate path entity becomes a k-vector at
// relation semantic level, governed by the relation immediately after it.
//
// EC1 sums the type embeddings inside the entity's domain matching the
// relation's domain. The fallback chain keeps the function total: domain
// mismatch falls back to the mean of all the entity's type embeddings,
// and an entity with no types at all falls back to its raw embedding.
// EC2 multiplies by the relation's projection matrix.

#include <vector>

#include "pathkg/graph.hpp"
#include "pathkg/model.hpp"

namespace pathkg {

// Where a sequence element came from, for routing gradients back to the
// parameter tables.
struct ElementSource {
    enum class Kind { Relation, ProjectedEntity, TypeSum, EntityRaw };
    Kind kind = Kind::Relation;
    RelationId relation = -1;       // embedding id, or the projecting relation
    EntityId entity = -1;
    std::vector<TypeId> types;      // TypeSum only
    double type_scale = 1.0;        // 1 for a domain sum, 1/N for the mean fallback
};

// Hard attention of the type hierarchy: D(r) if the entity carries that
// domain, otherwise none (-1).
inline DomainId select_domain(const TypeSystem& types, EntityId e, RelationId r) {
    DomainId d = types.relation_domain(r);
    if (d >= 0 && types.entity_has_domain(e, d)) return d;
    return -1;
}

inline Vec convert_entity_typed(const ModelParams& params, const TypeSystem& types, EntityId e,
                                RelationId r, ElementSource* src = nullptr) {
    DomainId d = select_domain(types, e, r);
    if (d >= 0) {
        const auto& attended = types.domain_types(e, d);
        if (!attended.empty()) {
            Vec out(params.k, 0.0);
            for (TypeId t : attended) axpy(out, params.type_emb[t], 1.0);
            if (src) *src = {ElementSource::Kind::TypeSum, r, e, {attended.begin(), attended.end()}, 1.0};
            return out;
        }
    }
    const auto& all = types.types_of(e);
    if (!all.empty()) {
        Vec out(params.k, 0.0);
        const double scale = 1.0 / double(all.size());
        for (TypeId t : all) axpy(out, params.type_emb[t], scale);
        if (src) *src = {ElementSource::Kind::TypeSum, r, e, {all.begin(), all.end()}, scale};
        return out;
    }
    if (src) *src = {ElementSource::Kind::EntityRaw, r, e, {}, 1.0};
    return params.entity_emb[e];
}

inline Vec convert_entity_projected(const ModelParams& params, EntityId e, RelationId r,
                                    ElementSource* src = nullptr) {
    Vec out;
    matvec(params.projections[r], params.entity_emb[e], out);
    if (src) *src = {ElementSource::Kind::ProjectedEntity, r, e, {}, 1.0};
    return out;
}

inline Vec convert_entity(const ModelParams& params, ConversionMode mode, const TypeSystem* types,
                          EntityId e, RelationId r, ElementSource* src = nullptr) {
    if (mode == ConversionMode::EC1_TYPE_ATTENTION) {
        if (!types || types->empty())
            throw Error(ErrorKind::Config, "ec1 converter requires a loaded type system");
        return convert_entity_typed(params, *types, e, r, src);
    }
    return convert_entity_projected(params, e, r, src);
}

// Routes an upstream gradient through the conversion recorded in src.
inline void convert_backward(const ModelParams& params, const ElementSource& src,
                             const Vec& upstream, GradientBundle& out) {
    switch (src.kind) {
        case ElementSource::Kind::Relation:
            axpy(out.relation_slot(src.relation), upstream, 1.0);
            break;
        case ElementSource::Kind::ProjectedEntity: {
            add_outer(out.projection_slot(src.relation), upstream, params.entity_emb[src.entity]);
            Vec back;
            matvec_t(params.projections[src.relation], upstream, back);
            axpy(out.entity_slot(src.entity), back, 1.0);
            break;
        }
        case ElementSource::Kind::TypeSum:
            for (TypeId t : src.types) axpy(out.type_slot(t), upstream, src.type_scale);
            break;
        case ElementSource::Kind::EntityRaw:
            axpy(out.entity_slot(src.entity), upstream, 1.0);
            break;
    }
}

}  // namespace pathkg
