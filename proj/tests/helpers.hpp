#pragma once
// Shared fixtures: throwaway directories and tiny hand-built datasets.

#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pathkg/graph.hpp"

namespace testutil {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;

    explicit TempDir(const std::string& tag) {
        dir = fs::temp_directory_path() / ("pathkg_" + tag + "_" + std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string file(const std::string& name) const { return (dir / name).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : lines) out << l << "\n";
}

using NameTriple = std::array<std::string, 3>;  // head, relation, tail

inline void write_triples(const std::string& path, const std::vector<NameTriple>& triples) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& t : triples) out << t[0] << "\t" << t[1] << "\t" << t[2] << "\n";
}

// Loads a graph from in-memory triples, writing the three split files.
inline pathkg::Graph make_graph(const TempDir& tmp, const std::vector<NameTriple>& train,
                                const std::vector<NameTriple>& valid = {},
                                const std::vector<NameTriple>& test = {}) {
    write_triples(tmp.file("train.txt"), train);
    write_triples(tmp.file("valid.txt"), valid);
    write_triples(tmp.file("test.txt"), test);
    return pathkg::load_dataset(tmp.file("train.txt"), tmp.file("valid.txt"), tmp.file("test.txt"));
}

// Random multigraph with n_nodes entities and n_rels relations; edges are
// unique triples. Deterministic in the seed.
inline std::vector<NameTriple> random_triples(unsigned seed, int n_nodes, int n_rels,
                                              int n_edges) {
    std::mt19937 gen(seed);
    std::vector<NameTriple> triples;
    std::set<std::array<int, 3>> seen;
    while (int(triples.size()) < n_edges) {
        int h = int(gen() % n_nodes), r = int(gen() % n_rels), t = int(gen() % n_nodes);
        if (h == t) continue;
        if (!seen.insert({h, r, t}).second) continue;
        triples.push_back({"e" + std::to_string(h), "r" + std::to_string(r), "e" + std::to_string(t)});
    }
    return triples;
}

}  // namespace testutil
