#pragma once

#include <array>
#include <string>
#include <vector>

#include "dpsim/costmodel.hpp"
#include "dpsim/workload.hpp"

namespace dpsim {

struct SizeClass {
    std::string label;
    int width = 0;
    int height = 0;
    double seconds = 0.0;  // 0 for still images
};

struct Preset {
    CostProfile profile;
    double rate = 1.0;       // requests per second on the reference 128-GPU cluster
    double t_win = 300.0;    // monitor window, seconds
    double pixels_per_token = 256.0;
    double latent_fps = 0.0; // latent frames per second of video; 0 for images
    std::vector<SizeClass> classes;
    std::array<MixSpec, 3> mixes;  // Light, Medium, Heavy

    double tokens(const SizeClass& c) const;
    const MixSpec& mix(const std::string& name) const;
    double max_len() const;
};

inline constexpr int kReferenceGpus = 128;

std::string data_dir();
Preset preset_from_json(const nlohmann::json& j);
Preset load_preset_file(const std::string& path);
Preset load_preset(const std::string& name);  // sd3 | flux | cog | hyv

// Synthetic stand-in for the Dynamic workload's proportion pattern, six 5-minute spans.
std::vector<Span> default_dynamic_schedule(double duration = 1800.0);

MixSpec scale_rate(MixSpec m, double factor);

}  // namespace dpsim
