#pragma once
// The path encoder: a shared-parameter ReLU RNN over alternating
// relation/entity sequences.
//
// A path with n relations yields the 2n-1 element sequence
// r_1, e_{r1}, r_2, ..., r_n, each entity converted under the relation
// following it. The first element seeds the hidden state, every later
// element is consumed by h_t = ReLU(W_h h_{t-1} + W_i x_t), and the final
// hidden state is the path representation. A single-relation sequence is
// returned as that relation's embedding, bit for bit.

#include <atomic>
#include <vector>

#include "pathkg/converter.hpp"
#include "pathkg/paths_fwd.hpp"

namespace pathkg {

namespace counters {
// Instrumentation for the lambda = 0 reduction contract: with the path
// loss disabled, none of these may move.
inline std::atomic<uint64_t>& encoder_calls() {
    static std::atomic<uint64_t> c{0};
    return c;
}
inline std::atomic<uint64_t>& path_energy_calls() {
    static std::atomic<uint64_t> c{0};
    return c;
}
inline void reset() {
    encoder_calls() = 0;
    path_energy_calls() = 0;
}
}  // namespace counters

struct PathSequence {
    std::vector<Vec> elements;          // length 2n - 1
    std::vector<ElementSource> sources; // parallel to elements
    int n_relations = 0;
};

inline PathSequence build_path_sequence(const GroundedPath& path, const ModelParams& params,
                                        ConversionMode mode, const TypeSystem* types) {
    PathSequence seq;
    seq.n_relations = int(path.relations.size());
    seq.elements.reserve(2 * path.relations.size() - 1);
    seq.sources.reserve(2 * path.relations.size() - 1);
    for (size_t i = 0; i < path.relations.size(); ++i) {
        if (i > 0) {
            ElementSource src;
            seq.elements.push_back(
                convert_entity(params, mode, types, path.entities[i - 1], path.relations[i], &src));
            seq.sources.push_back(std::move(src));
        }
        seq.elements.push_back(params.relation_emb[path.relations[i]]);
        seq.sources.push_back({ElementSource::Kind::Relation, path.relations[i], -1, {}, 1.0});
    }
    return seq;
}

// Forward activations kept for backpropagation through time.
struct EncodeTrace {
    std::vector<Vec> hidden;   // h_0 .. h_T
    std::vector<Vec> preact;   // a_1 .. a_T
};

inline const Vec& encode_path_traced(const PathSequence& seq, const EncoderParams& enc,
                                     EncodeTrace& trace) {
    counters::encoder_calls()++;
    trace.hidden.clear();
    trace.preact.clear();
    trace.hidden.push_back(seq.elements[0]);
    Vec wh_h, wi_x;
    for (size_t t = 1; t < seq.elements.size(); ++t) {
        matvec(enc.wh, trace.hidden.back(), wh_h);
        matvec(enc.wi, seq.elements[t], wi_x);
        Vec a(wh_h.size());
        for (size_t i = 0; i < a.size(); ++i) a[i] = wh_h[i] + wi_x[i];
        Vec h(a.size());
        for (size_t i = 0; i < a.size(); ++i) h[i] = a[i] > 0.0 ? a[i] : 0.0;
        trace.preact.push_back(std::move(a));
        trace.hidden.push_back(std::move(h));
    }
    return trace.hidden.back();
}

inline Vec encode_path(const PathSequence& seq, const EncoderParams& enc) {
    EncodeTrace trace;
    return encode_path_traced(seq, enc, trace);
}

// BPTT for one path. Gradients w.r.t. the sequence elements are routed to
// their source parameters; the returned bundle is clipped to clip_norm
// (<= 0 disables clipping). The ReLU subgradient at 0 is 0.
inline GradientBundle encode_backward(const PathSequence& seq, const EncoderParams& enc,
                                      const EncodeTrace& trace, const Vec& upstream,
                                      const ModelParams& params, double clip_norm = 0.0) {
    GradientBundle out(params.k);
    const size_t steps = trace.preact.size();  // == elements.size() - 1
    Vec g = upstream;
    if (steps > 0) out.touch_encoder();
    Vec masked(params.k);
    for (size_t t = steps; t >= 1; --t) {
        const Vec& a = trace.preact[t - 1];
        for (int i = 0; i < params.k; ++i) masked[i] = a[i] > 0.0 ? g[i] : 0.0;
        add_outer(out.wh, masked, trace.hidden[t - 1]);
        add_outer(out.wi, masked, seq.elements[t]);
        Vec dx;
        matvec_t(enc.wi, masked, dx);
        convert_backward(params, seq.sources[t], dx, out);
        matvec_t(enc.wh, masked, g);
    }
    convert_backward(params, seq.sources[0], g, out);
    if (clip_norm > 0.0) out.clip_global_norm(clip_norm);
    return out;
}

}  // namespace pathkg
