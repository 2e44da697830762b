#include "dpsim/preset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>

#ifndef DPSIM_DATA_DIR
#define DPSIM_DATA_DIR "data"
#endif

namespace dpsim {

double Preset::tokens(const SizeClass& c) const {
    double per_frame = static_cast<double>(c.width) * c.height / pixels_per_token;
    if (c.seconds > 0) return std::round(per_frame * latent_fps * c.seconds);
    return std::round(per_frame);
}

const MixSpec& Preset::mix(const std::string& name) const {
    for (const auto& m : mixes)
        if (m.name == name) return m;
    throw std::invalid_argument("unknown mix: " + name);
}

double Preset::max_len() const {
    double best = 0;
    for (const auto& c : classes) best = std::max(best, tokens(c));
    return best;
}

std::string data_dir() {
    if (const char* env = std::getenv("DPSIM_DATA_DIR")) return env;
    return DPSIM_DATA_DIR;
}

Preset preset_from_json(const nlohmann::json& j) {
    Preset p;
    p.profile = profile_from_json(j.at("profile"));
    const auto& w = j.at("workload");
    p.rate = w.at("rate_rps").get<double>();
    p.t_win = w.at("t_win_s").get<double>();
    p.pixels_per_token = w.value("pixels_per_token", 256.0);
    p.latent_fps = w.value("latent_fps", 0.0);
    std::map<std::string, SizeClass> by_label;
    for (const auto& c : w.at("classes")) {
        SizeClass sc{c.at("label").get<std::string>(), c.at("width").get<int>(),
                     c.at("height").get<int>(), c.value("seconds", 0.0)};
        by_label[sc.label] = sc;
        p.classes.push_back(sc);
    }
    const char* names[3] = {"Light", "Medium", "Heavy"};
    for (int m = 0; m < 3; ++m) {
        MixSpec mix;
        mix.name = names[m];
        mix.rate = p.rate;
        for (const auto& grp : w.at("mixes").at(names[m])) {
            int weight = grp.at("weight").get<int>();
            for (const auto& lbl : grp.at("classes")) {
                auto it = by_label.find(lbl.get<std::string>());
                if (it == by_label.end())
                    throw std::invalid_argument("mix references unknown class " + lbl.dump());
                mix.entries.push_back({it->first, p.tokens(it->second), weight});
            }
        }
        p.mixes[m] = mix;
    }
    return p;
}

Preset load_preset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open preset " + path);
    return preset_from_json(nlohmann::json::parse(in));
}

Preset load_preset(const std::string& name) {
    return load_preset_file(data_dir() + "/presets/" + name + ".json");
}

std::vector<Span> default_dynamic_schedule(double duration) {
    static const std::array<std::array<double, 3>, 6> shape{{{0.6, 0.3, 0.1},
                                                             {0.2, 0.6, 0.2},
                                                             {0.1, 0.3, 0.6},
                                                             {0.3, 0.5, 0.2},
                                                             {0.1, 0.2, 0.7},
                                                             {0.5, 0.4, 0.1}}};
    std::vector<Span> out;
    const double step = duration / shape.size();
    for (size_t i = 0; i < shape.size(); ++i)
        out.push_back({step * i, i + 1 == shape.size() ? duration : step * (i + 1), shape[i]});
    return out;
}

MixSpec scale_rate(MixSpec m, double factor) {
    m.rate *= factor;
    return m;
}

}  // namespace dpsim
