#pragma once
// Checkpoints: a key=value manifest plus one binary tensor file per
// parameter family. Tensor files carry a 16-byte header (magic "PKGT"
// and three little-endian uint32 dims) followed by row-major
// little-endian float32 data, so save -> load -> save is byte-identical.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pathkg/model.hpp"
#include "pathkg/types.hpp"

namespace pathkg {

struct CheckpointManifest {
    int format_version = 1;
    int k = 0;
    size_t entities = 0;
    size_t relations = 0;  // inverses included
    size_t types = 0;
    ConversionMode converter = ConversionMode::EC2_PROJECTION;
    Norm norm = Norm::L1;
    uint64_t seed = 0;
};

namespace detail {

inline constexpr char kTensorMagic[4] = {'P', 'K', 'G', 'T'};

inline void write_u32le(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline uint32_t read_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

inline void write_tensor(const std::string& path, const double* data, size_t d0, size_t d1,
                         size_t d2) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write tensor file: " + path);
    out.write(kTensorMagic, 4);
    write_u32le(out, uint32_t(d0));
    write_u32le(out, uint32_t(d1));
    write_u32le(out, uint32_t(d2));
    const size_t n = d0 * d1 * d2;
    std::vector<unsigned char> buf(n * 4);
    for (size_t i = 0; i < n; ++i) {
        float f = float(data[i]);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        buf[4 * i] = bits & 0xff;
        buf[4 * i + 1] = (bits >> 8) & 0xff;
        buf[4 * i + 2] = (bits >> 16) & 0xff;
        buf[4 * i + 3] = (bits >> 24) & 0xff;
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out) throw Error(ErrorKind::Io, "failed while writing tensor file: " + path);
}

inline std::vector<double> read_tensor(const std::string& path, size_t d0, size_t d1, size_t d2) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open tensor file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTensorMagic, 4) != 0)
        throw Error(ErrorKind::Incompatible, "bad tensor magic in " + path);
    size_t f0 = read_u32le(in), f1 = read_u32le(in), f2 = read_u32le(in);
    if (f0 != d0 || f1 != d1 || f2 != d2)
        throw Error(ErrorKind::Incompatible,
                    "tensor dims mismatch in " + path + ": file has " + std::to_string(f0) + "x" +
                        std::to_string(f1) + "x" + std::to_string(f2) + ", expected " +
                        std::to_string(d0) + "x" + std::to_string(d1) + "x" + std::to_string(d2));
    const size_t n = d0 * d1 * d2;
    std::vector<unsigned char> buf(n * 4);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) throw Error(ErrorKind::Io, "truncated tensor file: " + path);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits = uint32_t(buf[4 * i]) | (uint32_t(buf[4 * i + 1]) << 8) |
                        (uint32_t(buf[4 * i + 2]) << 16) | (uint32_t(buf[4 * i + 3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        out[i] = double(f);
    }
    return out;
}

inline void write_rows(const std::string& path, const std::vector<Vec>& rows, size_t k) {
    std::vector<double> flat(rows.size() * k);
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), flat.begin() + i * k);
    write_tensor(path, flat.data(), rows.size(), k, 1);
}

inline std::vector<Vec> read_rows(const std::string& path, size_t n, size_t k) {
    auto flat = read_tensor(path, n, k, 1);
    std::vector<Vec> rows(n, Vec(k));
    for (size_t i = 0; i < n; ++i)
        std::copy(flat.begin() + i * k, flat.begin() + (i + 1) * k, rows[i].begin());
    return rows;
}

}  // namespace detail

inline void save_checkpoint(const std::string& dir, const ModelParams& params,
                            const CheckpointManifest& m) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);

    {
        std::ofstream out(dir + "/manifest.txt", std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write manifest: " + dir);
        out << "format_version=" << m.format_version << "\n"
            << "k=" << m.k << "\n"
            << "entities=" << m.entities << "\n"
            << "relations=" << m.relations << "\n"
            << "types=" << m.types << "\n"
            << "converter=" << converter_name(m.converter) << "\n"
            << "norm=" << norm_name(m.norm) << "\n"
            << "seed=" << m.seed << "\n";
    }
    const size_t k = size_t(params.k);
    detail::write_rows(dir + "/entity_emb.bin", params.entity_emb, k);
    detail::write_rows(dir + "/relation_emb.bin", params.relation_emb, k);
    if (m.converter == ConversionMode::EC1_TYPE_ATTENTION) {
        detail::write_rows(dir + "/type_emb.bin", params.type_emb, k);
    } else {
        std::vector<double> flat(params.projections.size() * k * k);
        for (size_t i = 0; i < params.projections.size(); ++i)
            std::copy(params.projections[i].a.begin(), params.projections[i].a.end(),
                      flat.begin() + i * k * k);
        detail::write_tensor(dir + "/projections.bin", flat.data(), params.projections.size(), k, k);
    }
    detail::write_tensor(dir + "/encoder_wh.bin", params.encoder.wh.a.data(), k, k, 1);
    detail::write_tensor(dir + "/encoder_wi.bin", params.encoder.wi.a.data(), k, k, 1);
}

inline CheckpointManifest read_manifest(const std::string& dir) {
    std::ifstream in(dir + "/manifest.txt");
    if (!in) throw Error(ErrorKind::Io, "cannot open manifest: " + dir + "/manifest.txt");
    CheckpointManifest m;
    std::string line;
    while (std::getline(in, line)) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "format_version") m.format_version = std::stoi(value);
        else if (key == "k") m.k = std::stoi(value);
        else if (key == "entities") m.entities = std::stoull(value);
        else if (key == "relations") m.relations = std::stoull(value);
        else if (key == "types") m.types = std::stoull(value);
        else if (key == "converter") m.converter = parse_converter(value);
        else if (key == "norm") m.norm = parse_norm(value);
        else if (key == "seed") m.seed = std::stoull(value);
    }
    if (m.k <= 0) throw Error(ErrorKind::Incompatible, "manifest missing k: " + dir);
    return m;
}

// Validates the manifest against the live session before any tensor load.
inline void check_compatible(const CheckpointManifest& m, const Vocab& vocab, size_t n_types,
                             int expected_k = 0) {
    if (expected_k > 0 && m.k != expected_k)
        throw Error(ErrorKind::Incompatible, "checkpoint k=" + std::to_string(m.k) +
                                                 " does not match session k=" +
                                                 std::to_string(expected_k));
    if (m.entities != vocab.n_entities() || m.relations != vocab.n_relations())
        throw Error(ErrorKind::Incompatible,
                    "checkpoint vocabulary (" + std::to_string(m.entities) + " entities, " +
                        std::to_string(m.relations) + " relations) does not match the loaded graph");
    if (m.converter == ConversionMode::EC1_TYPE_ATTENTION && m.types != n_types)
        throw Error(ErrorKind::Incompatible, "checkpoint type table size does not match");
}

inline ModelParams load_checkpoint(const std::string& dir, const CheckpointManifest& m) {
    ModelParams p;
    p.k = m.k;
    const size_t k = size_t(m.k);
    p.entity_emb = detail::read_rows(dir + "/entity_emb.bin", m.entities, k);
    p.relation_emb = detail::read_rows(dir + "/relation_emb.bin", m.relations, k);
    if (m.converter == ConversionMode::EC1_TYPE_ATTENTION) {
        p.type_emb = detail::read_rows(dir + "/type_emb.bin", m.types, k);
    } else {
        auto flat = detail::read_tensor(dir + "/projections.bin", m.relations, k, k);
        p.projections.assign(m.relations, Mat(int(k), int(k)));
        for (size_t i = 0; i < m.relations; ++i)
            std::copy(flat.begin() + i * k * k, flat.begin() + (i + 1) * k * k,
                      p.projections[i].a.begin());
    }
    p.encoder.wh = Mat(int(k), int(k));
    p.encoder.wi = Mat(int(k), int(k));
    auto wh = detail::read_tensor(dir + "/encoder_wh.bin", k, k, 1);
    auto wi = detail::read_tensor(dir + "/encoder_wi.bin", k, k, 1);
    p.encoder.wh.a = std::move(wh);
    p.encoder.wi.a = std::move(wi);
    return p;
}

}  // namespace pathkg
