#pragma once
// Run configuration: a flat key=value file, overridable from the CLI.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "pathkg/error.hpp"
#include "pathkg/math.hpp"

namespace pathkg {

// EC1 converts path entities through attended type embeddings and needs a
// type file; EC2 projects them with a per-relation matrix and works on any KG.
enum class ConversionMode { EC1_TYPE_ATTENTION, EC2_PROJECTION };

struct Config {
    int k = 100;                       // embedding dimension
    double learning_rate = 0.01;
    double margin1 = 1.0;              // triple-loss margin
    double margin2 = 1.0;              // path-loss margin
    double lambda = 1.0;               // path-loss tradeoff
    int epochs = 500;
    int batch_size = 1024;
    int max_path_len = 2;
    int max_paths = 20;                // per entity pair
    double min_rule_confidence = 0.7;
    Norm norm = Norm::L1;
    ConversionMode converter = ConversionMode::EC2_PROJECTION;
    uint64_t seed = 42;

    double l1_reg = 1e-5;              // subgradient shrinkage; 0 disables
    double clip_norm = 5.0;            // per-path gradient clip
    int workers = 1;                   // 1 is the deterministic reference mode
    int relation_negatives = 1;        // corrupted relations per positive in the path loss

    void validate() const {
        if (k <= 0) throw Error(ErrorKind::Config, "k must be positive");
        if (learning_rate <= 0) throw Error(ErrorKind::Config, "learning_rate must be positive");
        if (margin1 <= 0 || margin2 <= 0) throw Error(ErrorKind::Config, "margins must be positive");
        if (lambda < 0) throw Error(ErrorKind::Config, "lambda must be nonnegative");
        if (batch_size <= 0) throw Error(ErrorKind::Config, "batch_size must be positive");
        if (max_path_len < 1 || max_path_len > 3)
            throw Error(ErrorKind::Config, "max_path_len must be 1, 2, or 3");
        if (max_paths < 1) throw Error(ErrorKind::Config, "max_paths must be positive");
        if (workers < 1) throw Error(ErrorKind::Config, "workers must be positive");
        if (relation_negatives < 1)
            throw Error(ErrorKind::Config, "relation_negatives must be positive");
    }
};

inline Norm parse_norm(const std::string& s) {
    if (s == "l1" || s == "L1") return Norm::L1;
    if (s == "l2" || s == "L2") return Norm::L2;
    throw Error(ErrorKind::Config, "unknown norm: " + s + " (expected l1 or l2)");
}

inline ConversionMode parse_converter(const std::string& s) {
    if (s == "ec1") return ConversionMode::EC1_TYPE_ATTENTION;
    if (s == "ec2") return ConversionMode::EC2_PROJECTION;
    throw Error(ErrorKind::Config, "unknown converter: " + s + " (expected ec1 or ec2)");
}

inline const char* norm_name(Norm n) { return n == Norm::L1 ? "l1" : "l2"; }
inline const char* converter_name(ConversionMode m) {
    return m == ConversionMode::EC1_TYPE_ATTENTION ? "ec1" : "ec2";
}

inline void apply_config_entry(Config& cfg, const std::string& key, const std::string& value) {
    auto num = [&](auto& field) {
        std::istringstream ss(value);
        ss >> field;
        if (!ss || !ss.eof()) throw Error(ErrorKind::Config, "bad value for " + key + ": " + value);
    };
    if (key == "k") num(cfg.k);
    else if (key == "learning_rate") num(cfg.learning_rate);
    else if (key == "margin1") num(cfg.margin1);
    else if (key == "margin2") num(cfg.margin2);
    else if (key == "lambda") num(cfg.lambda);
    else if (key == "epochs") num(cfg.epochs);
    else if (key == "batch_size") num(cfg.batch_size);
    else if (key == "max_path_len") num(cfg.max_path_len);
    else if (key == "max_paths") num(cfg.max_paths);
    else if (key == "min_rule_confidence") num(cfg.min_rule_confidence);
    else if (key == "norm") cfg.norm = parse_norm(value);
    else if (key == "converter") cfg.converter = parse_converter(value);
    else if (key == "seed") num(cfg.seed);
    else if (key == "l1_reg") num(cfg.l1_reg);
    else if (key == "clip_norm") num(cfg.clip_norm);
    else if (key == "workers") num(cfg.workers);
    else if (key == "relation_negatives") num(cfg.relation_negatives);
    else throw Error(ErrorKind::Config, "unknown config key: " + key);
}

inline Config load_config(const std::string& path, std::set<std::string>* keys_seen = nullptr) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file: " + path);
    Config cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(path, lineno, "expected key=value");
        auto trim = [](std::string s) {
            size_t i = s.find_first_not_of(" \t");
            if (i == std::string::npos) return std::string();
            size_t j = s.find_last_not_of(" \t");
            return s.substr(i, j - i + 1);
        };
        std::string key = trim(line.substr(0, eq));
        apply_config_entry(cfg, key, trim(line.substr(eq + 1)));
        if (keys_seen) keys_seen->insert(key);
    }
    return cfg;
}

}  // namespace pathkg
