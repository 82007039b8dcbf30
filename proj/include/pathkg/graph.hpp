#pragma once
// Dataset loading and the in-memory graph index.
//
// The vocabulary is built over all three splits so every test entity is
// scorable, but out_index covers the training split only: paths must not
// traverse held-out edges. Every training edge is indexed in both
// directions, (t, r^-1) -> h alongside (h, r) -> t.

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pathkg/error.hpp"
#include "pathkg/types.hpp"

namespace pathkg {

enum class ColumnOrder { HRT, HTR };

struct LoadStats {
    size_t entities = 0;
    size_t original_relations = 0;
    size_t train = 0, valid = 0, test = 0;
    size_t duplicate_lines = 0;

    void report(std::ostream& os) const {
        os << "loaded " << entities << " entities, " << original_relations
           << " relations (" << 2 * original_relations << " with inverses), triples "
           << train << "/" << valid << "/" << test << " train/valid/test";
        if (duplicate_lines) os << ", " << duplicate_lines << " duplicate lines dropped";
        os << "\n";
    }
};

class Graph {
public:
    Vocab vocab;
    std::vector<Triple> train, valid, test;
    std::unordered_set<Triple, TripleHash> triples;  // training split

    void build_index() {
        adjacency_.assign(vocab.n_entities(), {});
        for (const Triple& t : train) {
            add_edge(t.head, t.relation, t.tail);
            add_edge(t.tail, vocab.inverse_of(t.relation), t.head);
        }
        for (auto& per_entity : adjacency_) {
            std::sort(per_entity.begin(), per_entity.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (auto& [rel, succ] : per_entity) std::sort(succ.begin(), succ.end());
        }
    }

    // Successors of e via r, ascending; empty when none.
    const std::vector<EntityId>& neighbors(EntityId e, RelationId r) const {
        const auto& per_entity = adjacency_[e];
        auto it = std::lower_bound(per_entity.begin(), per_entity.end(), r,
                                   [](const auto& p, RelationId rel) { return p.first < rel; });
        if (it != per_entity.end() && it->first == r) return it->second;
        return empty_;
    }

    // All (relation, successors) pairs leaving e, ascending by relation.
    const std::vector<std::pair<RelationId, std::vector<EntityId>>>& edges_from(EntityId e) const {
        return adjacency_[e];
    }

    bool has_triple(const Triple& t) const { return triples.count(t) > 0; }

    size_t indexed_edge_count() const {
        size_t n = 0;
        for (const auto& per_entity : adjacency_)
            for (const auto& [rel, succ] : per_entity) n += succ.size();
        return n;
    }

private:
    void add_edge(EntityId from, RelationId rel, EntityId to) {
        auto& per_entity = adjacency_[from];
        for (auto& [r, succ] : per_entity) {
            if (r == rel) {
                succ.push_back(to);
                return;
            }
        }
        per_entity.push_back({rel, {to}});
    }

    std::vector<std::vector<std::pair<RelationId, std::vector<EntityId>>>> adjacency_;
    inline static const std::vector<EntityId> empty_{};
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

inline void read_split(const std::string& path, ColumnOrder order, Vocab& vocab,
                       std::vector<Triple>& out, LoadStats& stats) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open triple file: " + path);
    std::unordered_set<Triple, TripleHash> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw parse_error(path, lineno,
                              "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        const std::string& h = fields[0];
        const std::string& r = order == ColumnOrder::HRT ? fields[1] : fields[2];
        const std::string& t = order == ColumnOrder::HRT ? fields[2] : fields[1];
        if (r.find(kInverseMarker) != std::string::npos)
            throw parse_error(path, lineno,
                              std::string("relation name contains reserved marker ") + kInverseMarker);
        Triple tr{vocab.intern_entity(h), vocab.intern_relation(r), vocab.intern_entity(t)};
        if (!seen.insert(tr).second) {
            ++stats.duplicate_lines;
            continue;
        }
        out.push_back(tr);
    }
}

}  // namespace detail

inline Graph load_dataset(const std::string& train_path, const std::string& valid_path,
                          const std::string& test_path, ColumnOrder order = ColumnOrder::HRT,
                          std::ostream* diag = nullptr) {
    Graph g;
    LoadStats stats;
    detail::read_split(train_path, order, g.vocab, g.train, stats);
    detail::read_split(valid_path, order, g.vocab, g.valid, stats);
    detail::read_split(test_path, order, g.vocab, g.test, stats);
    if (g.train.empty()) throw Error(ErrorKind::Validation, "training split is empty: " + train_path);
    g.vocab.finalize_inverses();
    g.triples.insert(g.train.begin(), g.train.end());
    g.build_index();

    stats.entities = g.vocab.n_entities();
    stats.original_relations = size_t(g.vocab.n_original_relations());
    stats.train = g.train.size();
    stats.valid = g.valid.size();
    stats.test = g.test.size();
    if (diag) stats.report(*diag);
    return g;
}

// Two-level Freebase-style hierarchy: the type /film/actor lives in the
// domain /film. A relation's domain is the first slash segment of its
// name; inverse relations inherit the original's domain.
class TypeSystem {
public:
    std::vector<std::string> domain_names;
    std::vector<std::string> type_names;

    bool empty() const { return type_names.empty(); }
    size_t n_types() const { return type_names.size(); }

    bool entity_has_domain(EntityId e, DomainId d) const {
        if (size_t(e) >= entity_domains_.size()) return false;
        const auto& doms = entity_domains_[e];
        return std::binary_search(doms.begin(), doms.end(), d);
    }

    const std::vector<DomainId>& domains_of(EntityId e) const {
        if (size_t(e) >= entity_domains_.size()) return no_domains_;
        return entity_domains_[e];
    }

    // DT(e, d): the types of e inside domain d.
    const std::vector<TypeId>& domain_types(EntityId e, DomainId d) const {
        auto it = domain_types_.find(key(e, d));
        return it == domain_types_.end() ? no_types_ : it->second;
    }

    // All types of e, any domain.
    const std::vector<TypeId>& types_of(EntityId e) const {
        if (size_t(e) >= entity_types_.size()) return no_types_;
        return entity_types_[e];
    }

    // D(r); -1 when the relation name yields no domain.
    DomainId relation_domain(RelationId r) const {
        if (size_t(r) >= relation_domain_.size()) return -1;
        return relation_domain_[r];
    }

    struct Builder;

private:
    static uint64_t key(EntityId e, DomainId d) { return (uint64_t(uint32_t(e)) << 32) | uint32_t(d); }

    std::vector<std::vector<DomainId>> entity_domains_;
    std::vector<std::vector<TypeId>> entity_types_;
    std::unordered_map<uint64_t, std::vector<TypeId>> domain_types_;
    std::vector<DomainId> relation_domain_;
    inline static const std::vector<DomainId> no_domains_{};
    inline static const std::vector<TypeId> no_types_{};
};

struct TypeSystem::Builder {
    TypeSystem ts;
    std::unordered_map<std::string, DomainId> domain_ids;
    std::unordered_map<std::string, TypeId> type_ids;

    explicit Builder(size_t n_entities) {
        ts.entity_domains_.resize(n_entities);
        ts.entity_types_.resize(n_entities);
    }

    DomainId intern_domain(const std::string& name) {
        auto it = domain_ids.find(name);
        if (it != domain_ids.end()) return it->second;
        DomainId id = DomainId(ts.domain_names.size());
        ts.domain_names.push_back(name);
        domain_ids.emplace(name, id);
        return id;
    }

    TypeId intern_type(const std::string& name) {
        auto it = type_ids.find(name);
        if (it != type_ids.end()) return it->second;
        TypeId id = TypeId(ts.type_names.size());
        ts.type_names.push_back(name);
        type_ids.emplace(name, id);
        return id;
    }

    // type_str is the full /domain/type string, already validated.
    void add_entity_type(EntityId e, const std::string& domain_str, const std::string& type_str) {
        DomainId d = intern_domain(domain_str);
        TypeId t = intern_type(type_str);
        auto& doms = ts.entity_domains_[e];
        if (!std::binary_search(doms.begin(), doms.end(), d))
            doms.insert(std::upper_bound(doms.begin(), doms.end(), d), d);
        auto& dt = ts.domain_types_[TypeSystem::key(e, d)];
        if (std::find(dt.begin(), dt.end(), t) == dt.end()) dt.push_back(t);
        auto& all = ts.entity_types_[e];
        if (std::find(all.begin(), all.end(), t) == all.end()) all.push_back(t);
    }

    // D(r) from the leading slash segment of each original relation name;
    // inverses inherit the original's domain.
    void assign_relation_domains(const Vocab& vocab) {
        RelationId n_orig = vocab.n_original_relations();
        ts.relation_domain_.assign(vocab.n_relations(), -1);
        for (RelationId r = 0; r < n_orig; ++r) {
            const std::string& name = vocab.relation_name(r);
            if (name.empty() || name[0] != '/') continue;
            size_t second_slash = name.find('/', 1);
            std::string domain_str =
                second_slash == std::string::npos ? name : name.substr(0, second_slash);
            auto it = domain_ids.find(domain_str);
            if (it != domain_ids.end()) {
                ts.relation_domain_[r] = it->second;
                ts.relation_domain_[vocab.inverse_of(r)] = it->second;
            }
        }
    }
};

inline TypeSystem load_type_system(const std::string& path, const Graph& graph,
                                   std::ostream* diag = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open type file: " + path);

    TypeSystem::Builder b(graph.vocab.n_entities());

    size_t skipped_entities = 0, typed_entities = 0;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto fields = detail::split_tabs(line);
        EntityId e = graph.vocab.entity_id(fields[0]);
        if (e < 0) {
            ++skipped_entities;
            continue;
        }
        ++typed_entities;
        for (size_t i = 1; i < fields.size(); ++i) {
            const std::string& type_str = fields[i];
            if (type_str.empty()) continue;
            if (type_str[0] != '/')
                throw parse_error(path, lineno, "type string must start with '/': " + type_str);
            size_t second_slash = type_str.find('/', 1);
            std::string domain_str =
                second_slash == std::string::npos ? type_str : type_str.substr(0, second_slash);
            b.add_entity_type(e, domain_str, type_str);
        }
    }
    b.assign_relation_domains(graph.vocab);

    if (diag)
        *diag << "type system: " << b.ts.domain_names.size() << " domains, "
              << b.ts.type_names.size() << " types over " << typed_entities << " entities"
              << (skipped_entities ? " (" + std::to_string(skipped_entities) + " unknown entities skipped)"
                                   : "")
              << "\n";
    return std::move(b.ts);
}

}  // namespace pathkg
