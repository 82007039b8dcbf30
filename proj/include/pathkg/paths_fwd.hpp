#pragma once
// Grounded paths: alternating relation/entity sequences between a pair.

#include <vector>

#include "pathkg/types.hpp"

namespace pathkg {

// relations has length n >= 1; entities holds the n - 1 intermediates.
// alpha is the resource-allocation weight from extraction, confidence the
// product of horn-rule confidences from composition (1 when none applied).
struct GroundedPath {
    std::vector<RelationId> relations;
    std::vector<EntityId> entities;
    EntityId source = -1;
    EntityId target = -1;
    double alpha = 1.0;
    double confidence = 1.0;

    size_t length() const { return relations.size(); }

    // Identity of the walk itself, ignoring weights.
    bool same_walk(const GroundedPath& o) const {
        return source == o.source && target == o.target && relations == o.relations &&
               entities == o.entities;
    }
};

// Relations reversed and mapped through their inverses, entities reversed,
// endpoints swapped. Weight and confidence carry over unchanged.
inline GroundedPath invert_path(const GroundedPath& p, const Vocab& vocab) {
    GroundedPath inv;
    inv.relations.reserve(p.relations.size());
    for (auto it = p.relations.rbegin(); it != p.relations.rend(); ++it)
        inv.relations.push_back(vocab.inverse_of(*it));
    inv.entities.assign(p.entities.rbegin(), p.entities.rend());
    inv.source = p.target;
    inv.target = p.source;
    inv.alpha = p.alpha;
    inv.confidence = p.confidence;
    return inv;
}

// forward holds the paths in the direction of the relation, backward their
// inverses, pairwise: backward[i] == invert_path(forward[i]).
struct PathSet {
    std::vector<GroundedPath> forward;
    std::vector<GroundedPath> backward;

    bool empty() const { return forward.empty(); }
    size_t size() const { return forward.size(); }
};

}  // namespace pathkg
