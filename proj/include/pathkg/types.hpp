#pragma once
// Core identifiers, the triple record, and the vocabulary.
//
// Ids are dense and 0-based. Relation ids cover the original relations
// first, then one synthesized inverse per original, so
// |relation_names| == 2 * n_original and inverse_of(inverse_of(r)) == r.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathkg/error.hpp"

namespace pathkg {

using EntityId = int32_t;
using RelationId = int32_t;
using TypeId = int32_t;
using DomainId = int32_t;

// Suffix marking a synthesized inverse relation; rejected in input files.
inline constexpr const char* kInverseMarker = "^-1";

struct Triple {
    EntityId head = -1;
    RelationId relation = -1;
    EntityId tail = -1;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    size_t operator()(const Triple& t) const {
        uint64_t h = 1469598103934665603ULL;
        for (uint64_t v : {uint64_t(t.head), uint64_t(t.relation), uint64_t(t.tail)}) {
            h ^= v + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return size_t(h);
    }
};

class Vocab {
public:
    // Interns a name, assigning the next dense id on first sight.
    EntityId intern_entity(const std::string& name) {
        auto it = entity_ids_.find(name);
        if (it != entity_ids_.end()) return it->second;
        EntityId id = EntityId(entity_names_.size());
        entity_names_.push_back(name);
        entity_ids_.emplace(name, id);
        return id;
    }

    RelationId intern_relation(const std::string& name) {
        auto it = relation_ids_.find(name);
        if (it != relation_ids_.end()) return it->second;
        RelationId id = RelationId(relation_names_.size());
        relation_names_.push_back(name);
        relation_ids_.emplace(name, id);
        return id;
    }

    // Appends one inverse per original relation. Call exactly once,
    // after all originals are interned.
    void finalize_inverses() {
        n_original_ = RelationId(relation_names_.size());
        for (RelationId r = 0; r < n_original_; ++r) {
            std::string inv = relation_names_[r] + kInverseMarker;
            relation_names_.push_back(inv);
            relation_ids_.emplace(std::move(inv), n_original_ + r);
        }
    }

    RelationId inverse_of(RelationId r) const {
        return r < n_original_ ? r + n_original_ : r - n_original_;
    }
    bool is_inverse(RelationId r) const { return r >= n_original_; }
    RelationId original_of(RelationId r) const { return is_inverse(r) ? r - n_original_ : r; }

    size_t n_entities() const { return entity_names_.size(); }
    size_t n_relations() const { return relation_names_.size(); }  // inverses included
    RelationId n_original_relations() const { return n_original_; }

    const std::string& entity_name(EntityId e) const { return entity_names_[e]; }
    const std::string& relation_name(RelationId r) const { return relation_names_[r]; }

    // -1 when absent
    EntityId entity_id(const std::string& name) const {
        auto it = entity_ids_.find(name);
        return it == entity_ids_.end() ? -1 : it->second;
    }
    RelationId relation_id(const std::string& name) const {
        auto it = relation_ids_.find(name);
        return it == relation_ids_.end() ? -1 : it->second;
    }

private:
    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
    RelationId n_original_ = 0;
};

}  // namespace pathkg
