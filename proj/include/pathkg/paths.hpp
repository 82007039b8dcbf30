#pragma once
// Path extraction with resource-allocation weights, and the path cache.
//
// The weight of a grounded path is computed by resource flow: a unit
// resource starts at the source, and at every hop a node holding R and
// leaving through relation r hands R / |neighbors(node, r)| to each
// successor. A path's alpha is the resource delivered along its exact
// node sequence, so for a fixed relation sequence the alphas over all
// groundings sum to at most 1. Traversal uses the training index, which
// already contains both edge directions.

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "pathkg/error.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/paths_fwd.hpp"

namespace pathkg {

namespace detail {

// Hop distances from src over the (symmetric) edge set, capped at max_len.
inline std::vector<int> bounded_distances(const Graph& g, EntityId src, int max_len) {
    std::vector<int> dist(g.vocab.n_entities(), -1);
    dist[src] = 0;
    std::deque<EntityId> queue{src};
    while (!queue.empty()) {
        EntityId u = queue.front();
        queue.pop_front();
        if (dist[u] == max_len) continue;
        for (const auto& [rel, succ] : g.edges_from(u)) {
            for (EntityId v : succ) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return dist;
}

inline bool path_order_before(const GroundedPath& a, const GroundedPath& b) {
    if (a.alpha != b.alpha) return a.alpha > b.alpha;
    if (a.relations != b.relations) return a.relations < b.relations;
    return a.entities < b.entities;
}

struct WalkEnumerator {
    const Graph& g;
    EntityId target;
    int max_len;
    const std::vector<int>& dist_to_target;
    std::vector<RelationId> rel_stack;
    std::vector<EntityId> ent_stack;  // nodes after the source, including the current one
    std::vector<GroundedPath>& out;

    void run(EntityId node, double resource, int depth) {
        for (const auto& [rel, succ] : g.edges_from(node)) {
            const double share = resource / double(succ.size());
            for (EntityId v : succ) {
                rel_stack.push_back(rel);
                if (v == target) emit(share);
                if (depth + 1 < max_len && dist_to_target[v] >= 0 &&
                    dist_to_target[v] <= max_len - (depth + 1)) {
                    ent_stack.push_back(v);
                    run(v, share, depth + 1);
                    ent_stack.pop_back();
                }
                rel_stack.pop_back();
            }
        }
    }

    void emit(double alpha) {
        GroundedPath p;
        p.relations = rel_stack;
        p.entities = ent_stack;
        p.source = -1;  // filled by caller
        p.target = target;
        p.alpha = alpha;
        out.push_back(std::move(p));
    }
};

}  // namespace detail

// All grounded paths from h to t with at most max_len relations, weighted
// by resource flow, truncated to the max_paths largest alphas (ties broken
// by lexicographic id order). h == t yields an empty set.
inline PathSet extract_paths_pcra(const Graph& g, EntityId h, EntityId t, int max_len,
                                  size_t max_paths) {
    PathSet result;
    if (h == t || max_len < 1) return result;

    auto dist = detail::bounded_distances(g, t, max_len);
    if (dist[h] < 0) return result;

    std::vector<GroundedPath> found;
    detail::WalkEnumerator walker{g, t, max_len, dist, {}, {}, found};
    walker.run(h, 1.0, 0);
    for (auto& p : found) p.source = h;

    std::sort(found.begin(), found.end(), detail::path_order_before);
    if (found.size() > max_paths) found.resize(max_paths);

    result.backward.reserve(found.size());
    for (const auto& p : found) result.backward.push_back(invert_path(p, g.vocab));
    result.forward = std::move(found);
    return result;
}

using PathIndex = std::unordered_map<Triple, PathSet, TripleHash>;

// Paths for every training triple. With exclude_direct the length-1 path
// consisting of exactly the triple's own relation is dropped, so a triple
// cannot explain itself.
inline PathIndex build_path_index(const Graph& g, int max_len, size_t max_paths,
                                  bool exclude_direct, int workers = 1) {
    std::vector<PathSet> per_triple(g.train.size());
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const Triple& tr = g.train[i];
            PathSet ps = extract_paths_pcra(g, tr.head, tr.tail, max_len, max_paths + 1);
            if (exclude_direct) {
                for (size_t j = 0; j < ps.forward.size();) {
                    if (ps.forward[j].length() == 1 && ps.forward[j].relations[0] == tr.relation) {
                        ps.forward.erase(ps.forward.begin() + j);
                        ps.backward.erase(ps.backward.begin() + j);
                    } else {
                        ++j;
                    }
                }
            }
            if (ps.forward.size() > max_paths) {
                ps.forward.resize(max_paths);
                ps.backward.resize(max_paths);
            }
            per_triple[i] = std::move(ps);
        }
    };
    if (workers <= 1) {
        work(0, g.train.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (g.train.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            size_t begin = std::min(g.train.size(), w * chunk);
            size_t end = std::min(g.train.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    PathIndex index;
    index.reserve(g.train.size());
    for (size_t i = 0; i < g.train.size(); ++i) index.emplace(g.train[i], std::move(per_triple[i]));
    return index;
}

// Cache format: per training triple a record "h<tab>r<tab>t<tab>k"
// followed by k lines "alpha r1 e1 r2 ...". Alphas carry 17 significant
// digits so a reload is bit-exact.
inline void write_path_cache(const std::string& path, const Graph& g, const PathIndex& index) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write path cache: " + path);
    char buf[64];
    for (const Triple& tr : g.train) {
        auto it = index.find(tr);
        const PathSet& ps = it == index.end() ? PathSet{} : it->second;
        out << tr.head << '\t' << tr.relation << '\t' << tr.tail << '\t' << ps.forward.size()
            << '\n';
        for (const GroundedPath& p : ps.forward) {
            std::snprintf(buf, sizeof(buf), "%.17g", p.alpha);
            out << buf;
            for (size_t i = 0; i < p.relations.size(); ++i) {
                out << ' ' << p.relations[i];
                if (i < p.entities.size()) out << ' ' << p.entities[i];
            }
            out << '\n';
        }
    }
    if (!out) throw Error(ErrorKind::Io, "failed while writing path cache: " + path);
}

inline PathIndex read_path_cache(const std::string& path, const Graph& g) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open path cache: " + path);
    PathIndex index;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Triple tr;
        size_t n_paths = 0;
        if (std::sscanf(line.c_str(), "%d\t%d\t%d\t%zu", &tr.head, &tr.relation, &tr.tail,
                        &n_paths) != 4)
            throw parse_error(path, lineno, "bad cache record header");
        PathSet ps;
        ps.forward.reserve(n_paths);
        for (size_t i = 0; i < n_paths; ++i) {
            if (!std::getline(in, line)) throw parse_error(path, lineno, "truncated cache record");
            ++lineno;
            std::istringstream ss(line);
            GroundedPath p;
            p.source = tr.head;
            p.target = tr.tail;
            if (!(ss >> p.alpha)) throw parse_error(path, lineno, "bad alpha field");
            int id;
            bool relation_next = true;
            while (ss >> id) {
                if (relation_next)
                    p.relations.push_back(id);
                else
                    p.entities.push_back(id);
                relation_next = !relation_next;
            }
            if (p.relations.empty() || p.entities.size() + 1 != p.relations.size())
                throw parse_error(path, lineno, "bad path sequence");
            ps.backward.push_back(invert_path(p, g.vocab));
            ps.forward.push_back(std::move(p));
        }
        index.emplace(tr, std::move(ps));
    }
    return index;
}

}  // namespace pathkg
