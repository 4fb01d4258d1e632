#include "iscc/dnn_profile.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

namespace iscc {

const char* to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::VirtualInput: return "input";
        case LayerKind::Convolutional: return "conv";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::FullyConnected: return "fc";
    }
    return "unknown";
}

std::int64_t LayerSpec::output_elements() const {
    return kind == LayerKind::FullyConnected ? e : a * b * c;
}

ProfileError::ProfileError(const std::string& what, int layer)
    : std::runtime_error(layer >= 0 ? "layer " + std::to_string(layer) + ": " + what : what),
      layer_(layer) {}

Flops flops_of_layer(const LayerSpec& layer, const LayerSpec& prev) {
    switch (layer.kind) {
        case LayerKind::VirtualInput:
            return 0;
        case LayerKind::Convolutional: {
            if (prev.kind == LayerKind::FullyConnected)
                throw ProfileError("convolution cannot follow a fully connected layer");
            const Flops per_output = 2 * prev.c * layer.d * layer.d - 1;
            return per_output * layer.a * layer.b * layer.c;
        }
        case LayerKind::MaxPool:
            if (prev.kind == LayerKind::FullyConnected)
                throw ProfileError("pooling cannot follow a fully connected layer");
            return layer.a * layer.b * layer.c * layer.d * layer.d;
        case LayerKind::FullyConnected: {
            // spatial predecessors are flattened
            const Flops fan_in = prev.output_elements();
            return (2 * fan_in - 1) * layer.e;
        }
    }
    return 0;
}

namespace {

void validate_layer(const LayerSpec& layer, int index) {
    const bool spatial = layer.kind != LayerKind::FullyConnected;
    if (spatial) {
        if (layer.a < 1 || layer.b < 1 || layer.c < 1)
            throw ProfileError("spatial layer needs a, b, c >= 1", index);
        if (layer.kind != LayerKind::VirtualInput && layer.d < 1)
            throw ProfileError("filter size d must be >= 1", index);
    } else if (layer.e < 1) {
        throw ProfileError("fully connected layer needs e >= 1", index);
    }
}

}  // namespace

DnnProfile::DnnProfile(std::string name, std::vector<LayerSpec> layers, int element_bits)
    : name_(std::move(name)), element_bits_(element_bits), layers_(std::move(layers)) {
    if (element_bits_ < 1) throw ProfileError("element_bits must be positive");
    if (layers_.size() < 2) throw ProfileError("profile needs an input layer and at least one computational layer");
    if (layers_[0].kind != LayerKind::VirtualInput) throw ProfileError("first layer must be the input layer", 0);

    flops_.assign(layers_.size(), 0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& layer = layers_[l];
        const int index = static_cast<int>(l);
        if (l > 0 && layer.kind == LayerKind::VirtualInput)
            throw ProfileError("input layer may only appear at index 0", index);
        validate_layer(layer, index);
        layer.out_bits = layer.output_elements() * element_bits_;
        if (l > 0) {
            try {
                flops_[l] = flops_of_layer(layer, layers_[l - 1]);
            } catch (const ProfileError& err) {
                throw ProfileError(err.what(), index);
            }
        }
    }
    prefix_.resize(flops_.size());
    std::partial_sum(flops_.begin(), flops_.end(), prefix_.begin());
    total_ = prefix_.back();
    if (total_ <= 0) throw ProfileError("total FLOPs must be positive");
}

DnnProfile DnnProfile::truncated(int depth) const {
    if (depth < 1 || depth > this->depth())
        throw std::out_of_range("truncation depth out of range");
    std::vector<LayerSpec> kept(layers_.begin(), layers_.begin() + depth + 1);
    return DnnProfile(name_ + "[:" + std::to_string(depth) + "]", std::move(kept), element_bits_);
}

nlohmann::json DnnProfile::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : layers_) {
        nlohmann::json j{{"kind", to_string(layer.kind)}};
        if (layer.kind == LayerKind::FullyConnected) {
            j["e"] = layer.e;
        } else {
            j["a"] = layer.a;
            j["b"] = layer.b;
            j["c"] = layer.c;
            if (layer.kind != LayerKind::VirtualInput) j["d"] = layer.d;
        }
        layers.push_back(std::move(j));
    }
    return {{"name", name_}, {"element_bits", element_bits_}, {"layers", std::move(layers)}};
}

bool is_valid(const DnnProfile& profile, PartitionPair p) {
    return 0 <= p.l1 && p.l1 <= p.l2 && p.l2 <= profile.depth();
}

WorkloadSplit workload_split(const DnnProfile& profile, PartitionPair p) {
    if (!is_valid(profile, p)) {
        std::ostringstream msg;
        msg << "partition (" << p.l1 << ", " << p.l2 << ") outside 0 <= l1 <= l2 <= " << profile.depth();
        throw std::out_of_range(msg.str());
    }
    WorkloadSplit split;
    split.s_local = profile.prefix_[static_cast<std::size_t>(p.l1)];
    split.s_mec = p.l1 == p.l2 ? 0 : profile.prefix_[static_cast<std::size_t>(p.l2)] - split.s_local;
    split.s_cloud = profile.total_ - split.s_local - split.s_mec;
    return split;
}

std::vector<PartitionPair> enumerate_partitions(const DnnProfile& profile) {
    const int L = profile.depth();
    std::vector<PartitionPair> pairs;
    pairs.reserve(static_cast<std::size_t>((L + 1) * (L + 2) / 2));
    for (int l1 = 0; l1 <= L; ++l1)
        for (int l2 = l1; l2 <= L; ++l2) pairs.push_back({l1, l2});
    return pairs;
}

namespace {

LayerKind parse_kind(const std::string& s, int index) {
    if (s == "input") return LayerKind::VirtualInput;
    if (s == "conv" || s == "convolutional") return LayerKind::Convolutional;
    if (s == "maxpool" || s == "pool") return LayerKind::MaxPool;
    if (s == "fc" || s == "fully_connected") return LayerKind::FullyConnected;
    throw ProfileError("unknown layer kind '" + s + "'", index);
}

std::int64_t field(const nlohmann::json& j, const char* key, int index) {
    auto it = j.find(key);
    if (it == j.end()) return 0;
    if (!it->is_number_integer()) throw ProfileError(std::string("field '") + key + "' must be an integer", index);
    return it->get<std::int64_t>();
}

}  // namespace

DnnProfile load_profile(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ProfileError("profile document must be an object");
    auto layers_it = doc.find("layers");
    if (layers_it == doc.end() || !layers_it->is_array()) throw ProfileError("profile needs a 'layers' array");
    if (layers_it->empty()) throw ProfileError("profile has no layers");

    std::vector<LayerSpec> layers;
    int index = 0;
    for (const auto& j : *layers_it) {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
            throw ProfileError("layer needs a string 'kind'", index);
        LayerSpec layer;
        layer.kind = parse_kind(j["kind"].get<std::string>(), index);
        layer.a = field(j, "a", index);
        layer.b = field(j, "b", index);
        layer.c = field(j, "c", index);
        layer.d = field(j, "d", index);
        layer.e = field(j, "e", index);
        layers.push_back(layer);
        ++index;
    }
    const int bits = doc.value("element_bits", 32);
    return DnnProfile(doc.value("name", std::string("unnamed")), std::move(layers), bits);
}

DnnProfile load_profile_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProfileError("cannot open profile file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& err) {
        throw ProfileError(path.string() + ": " + err.what());
    }
    return load_profile(doc);
}

DnnProfile alexnet_profile(int element_bits) {
    using K = LayerKind;
    auto spatial = [](K kind, std::int64_t hw, std::int64_t c, std::int64_t d) {
        LayerSpec l;
        l.kind = kind;
        l.a = l.b = hw;
        l.c = c;
        l.d = d;
        return l;
    };
    auto dense = [](std::int64_t e) {
        LayerSpec l;
        l.kind = K::FullyConnected;
        l.e = e;
        return l;
    };
    return DnnProfile("alexnet",
                      {
                          spatial(K::VirtualInput, 227, 3, 0),
                          spatial(K::Convolutional, 55, 96, 11),
                          spatial(K::MaxPool, 27, 96, 3),
                          spatial(K::Convolutional, 27, 256, 5),
                          spatial(K::MaxPool, 13, 256, 3),
                          spatial(K::Convolutional, 13, 384, 3),
                          spatial(K::Convolutional, 13, 384, 3),
                          spatial(K::Convolutional, 13, 256, 3),
                          spatial(K::MaxPool, 6, 256, 3),
                          dense(4096),
                          dense(4096),
                          dense(1000),
                      },
                      element_bits);
}

}  // namespace iscc
