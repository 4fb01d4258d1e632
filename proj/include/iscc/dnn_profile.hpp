#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace iscc {

using Flops = std::int64_t;

enum class LayerKind { VirtualInput, Convolutional, MaxPool, FullyConnected };

const char* to_string(LayerKind kind);

/// One layer of a chain DNN. Spatial layers use (a, b, c, d); fully
/// connected layers use e. The input layer carries the raw input shape.
struct LayerSpec {
    LayerKind kind = LayerKind::VirtualInput;
    std::int64_t a = 0;  // output height
    std::int64_t b = 0;  // output width
    std::int64_t c = 0;  // output channels
    std::int64_t d = 0;  // filter size
    std::int64_t e = 0;  // neuron count
    std::int64_t out_bits = 0;

    /// Elements produced by this layer; a*b*c for spatial layers, e otherwise.
    std::int64_t output_elements() const;
};

/// Raised for malformed profiles. `layer()` is -1 when the error is not tied
/// to a specific layer.
class ProfileError : public std::runtime_error {
public:
    ProfileError(const std::string& what, int layer = -1);
    int layer() const { return layer_; }

private:
    int layer_;
};

struct PartitionPair {
    int l1 = 0;  // last layer run on the device
    int l2 = 0;  // last layer run on the MEC server

    friend bool operator==(const PartitionPair&, const PartitionPair&) = default;
    friend auto operator<=>(const PartitionPair&, const PartitionPair&) = default;
};

struct WorkloadSplit {
    Flops s_local = 0;
    Flops s_mec = 0;
    Flops s_cloud = 0;
};

/// FLOPs of `layer` given its predecessor. Throws ProfileError when the
/// predecessor cannot feed the layer (e.g. a convolution after a dense layer).
Flops flops_of_layer(const LayerSpec& layer, const LayerSpec& prev);

/// Validated chain DNN. Index 0 is always the virtual input layer, so
/// `depth()` (L) is the number of computational layers.
class DnnProfile {
public:
    DnnProfile(std::string name, std::vector<LayerSpec> layers, int element_bits = 32);

    const std::string& name() const { return name_; }
    int element_bits() const { return element_bits_; }
    int depth() const { return static_cast<int>(layers_.size()) - 1; }
    std::span<const LayerSpec> layers() const { return layers_; }
    const LayerSpec& layer(int l) const { return layers_.at(static_cast<std::size_t>(l)); }

    Flops layer_flops(int l) const { return flops_.at(static_cast<std::size_t>(l)); }
    Flops total_flops() const { return total_; }
    /// Output size o(l) in bits.
    std::int64_t out_bits(int l) const { return layer(l).out_bits; }

    /// Keeps the input layer and the first `depth` computational layers.
    DnnProfile truncated(int depth) const;

    nlohmann::json to_json() const;

private:
    std::string name_;
    int element_bits_;
    std::vector<LayerSpec> layers_;
    std::vector<Flops> flops_;
    std::vector<Flops> prefix_;  // prefix_[l] = sum of flops_[0..l]
    Flops total_ = 0;

    friend WorkloadSplit workload_split(const DnnProfile&, PartitionPair);
};

bool is_valid(const DnnProfile& profile, PartitionPair p);

/// Local / MEC / cloud FLOPs for a partition pair. Throws std::out_of_range
/// when the pair does not satisfy 0 <= l1 <= l2 <= L.
WorkloadSplit workload_split(const DnnProfile& profile, PartitionPair p);

/// All pairs 0 <= l1 <= l2 <= L in lexicographic order.
std::vector<PartitionPair> enumerate_partitions(const DnnProfile& profile);

DnnProfile load_profile(const nlohmann::json& doc);
DnnProfile load_profile_file(const std::filesystem::path& path);

/// AlexNet with a 227x227x3 input: 5 convolutional, 3 max-pool and 3 fully
/// connected layers.
DnnProfile alexnet_profile(int element_bits = 32);

}  // namespace iscc
