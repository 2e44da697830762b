#pragma once

#include <array>
#include <string>

#include <json.hpp>

namespace dpsim {

enum class Stage : int { E = 0, D = 1, C = 2 };

inline constexpr std::array<Stage, 3> kStages{Stage::E, Stage::D, Stage::C};
inline constexpr std::array<int, 4> kDegrees{1, 2, 4, 8};

const char* stage_name(Stage s);
inline int stage_index(Stage s) { return static_cast<int>(s); }
bool valid_degree(int k);

// Per-stage coefficients. Serial time is overhead + time_coef * len^time_exp,
// multiplied by the denoise step count for D. The parallel fraction grows with
// length as par_max * len / (len + par_half_len).
struct StageCoeffs {
    double overhead_s = 0.0;
    double time_coef = 0.0;
    double time_exp = 1.0;
    double par_max = 0.0;
    double par_half_len = 1.0;
    double act_bytes_per_len = 0.0;
    double params_billion = 0.0;
};

enum class Edge { ED, DC };

struct CostProfile {
    int schema_version = 1;
    std::string name;
    std::array<StageCoeffs, 3> stages{};
    double bytes_per_param = 2.0;
    int denoise_steps = 1;
    double bytes_ed = 0.0;  // bytes per unit of l_E
    double bytes_dc = 0.0;  // bytes per unit of l_D
    double bw_intra = 24e9;
    double bw_inter = 12.5e9;
    double reinstance_hot_s = 0.002;
    double reinstance_cold_s = 0.200;

    const StageCoeffs& at(Stage s) const { return stages[stage_index(s)]; }
    void validate() const;
};

inline constexpr int kProfileSchemaVersion = 1;

double serial_time(const CostProfile& p, Stage s, double len);
double parallel_fraction(const CostProfile& p, Stage s, double len);
double stage_time(const CostProfile& p, Stage s, double len, int k);
double efficiency(const CostProfile& p, Stage s, double len, int k);
int optimal_degree(const CostProfile& p, Stage s, double len);
double peak_mem(const CostProfile& p, Stage s, double len, int k);
double params_bytes(const CostProfile& p, Stage s);
double comm_time(const CostProfile& p, Edge e, double len, bool inter_node);
double comm_bytes(const CostProfile& p, Edge e, double len);

inline constexpr double kEfficiencyThreshold = 0.8;

CostProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const CostProfile& p);

}  // namespace dpsim
