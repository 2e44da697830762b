#include "dpsim/costmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace dpsim {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::E: return "E";
        case Stage::D: return "D";
        case Stage::C: return "C";
    }
    throw std::invalid_argument("unknown stage");
}

bool valid_degree(int k) { return k == 1 || k == 2 || k == 4 || k == 8; }

static void check_args(Stage s, double len, int k) {
    if (stage_index(s) < 0 || stage_index(s) > 2) throw std::invalid_argument("unknown stage");
    if (!(len > 0.0)) throw std::invalid_argument("length must be positive");
    if (!valid_degree(k)) throw std::invalid_argument("degree must be one of 1,2,4,8");
}

void CostProfile::validate() const {
    if (schema_version != kProfileSchemaVersion)
        throw std::invalid_argument("unsupported profile schema_version");
    for (const auto& c : stages) {
        if (!(c.overhead_s > 0 && c.time_coef > 0 && c.time_exp > 0 && c.par_half_len > 0 &&
              c.act_bytes_per_len > 0 && c.params_billion > 0))
            throw std::invalid_argument("profile coefficients must be positive");
        if (c.par_max < 0.0 || c.par_max > 1.0)
            throw std::invalid_argument("parallel fraction must lie in [0,1]");
    }
    if (!(bytes_per_param > 0 && denoise_steps > 0 && bytes_ed > 0 && bytes_dc > 0 &&
          bw_intra > 0 && bw_inter > 0 && reinstance_hot_s > 0 && reinstance_cold_s > 0))
        throw std::invalid_argument("profile coefficients must be positive");
}

double serial_time(const CostProfile& p, Stage s, double len) {
    check_args(s, len, 1);
    const auto& c = p.at(s);
    double t = c.overhead_s + c.time_coef * std::pow(len, c.time_exp);
    if (s == Stage::D) t *= p.denoise_steps;
    return t;
}

double parallel_fraction(const CostProfile& p, Stage s, double len) {
    const auto& c = p.at(s);
    return c.par_max * len / (len + c.par_half_len);
}

double stage_time(const CostProfile& p, Stage s, double len, int k) {
    check_args(s, len, k);
    const double t1 = serial_time(p, s, len);
    if (k == 1) return t1;
    const double f = parallel_fraction(p, s, len);
    return t1 * ((1.0 - f) + f / k);
}

double efficiency(const CostProfile& p, Stage s, double len, int k) {
    check_args(s, len, k);
    if (k == 1) return 1.0;
    return (serial_time(p, s, len) / stage_time(p, s, len, k)) / k;
}

int optimal_degree(const CostProfile& p, Stage s, double len) {
    int best = 1;
    for (int k : kDegrees)
        if (k > 1 && efficiency(p, s, len, k) > kEfficiencyThreshold) best = k;
    return best;
}

double peak_mem(const CostProfile& p, Stage s, double len, int k) {
    check_args(s, len, k);
    return p.at(s).act_bytes_per_len * len / k;
}

double params_bytes(const CostProfile& p, Stage s) {
    return p.at(s).params_billion * 1e9 * p.bytes_per_param;
}

double comm_bytes(const CostProfile& p, Edge e, double len) {
    if (!(len > 0.0)) throw std::invalid_argument("length must be positive");
    return (e == Edge::ED ? p.bytes_ed : p.bytes_dc) * len;
}

double comm_time(const CostProfile& p, Edge e, double len, bool inter_node) {
    return comm_bytes(p, e, len) / (inter_node ? p.bw_inter : p.bw_intra);
}

static StageCoeffs stage_from_json(const nlohmann::json& j) {
    StageCoeffs c;
    c.overhead_s = j.at("overhead_s").get<double>();
    c.time_coef = j.at("time_coef").get<double>();
    c.time_exp = j.value("time_exp", 1.0);
    c.par_max = j.at("par_max").get<double>();
    c.par_half_len = j.at("par_half_len").get<double>();
    c.act_bytes_per_len = j.at("act_bytes_per_len").get<double>();
    c.params_billion = j.at("params_billion").get<double>();
    return c;
}

static nlohmann::json stage_to_json(const StageCoeffs& c) {
    return {{"overhead_s", c.overhead_s},       {"time_coef", c.time_coef},
            {"time_exp", c.time_exp},           {"par_max", c.par_max},
            {"par_half_len", c.par_half_len},   {"act_bytes_per_len", c.act_bytes_per_len},
            {"params_billion", c.params_billion}};
}

CostProfile profile_from_json(const nlohmann::json& j) {
    CostProfile p;
    p.schema_version = j.at("schema_version").get<int>();
    p.name = j.value("name", "");
    const auto& st = j.at("stages");
    p.stages[0] = stage_from_json(st.at("E"));
    p.stages[1] = stage_from_json(st.at("D"));
    p.stages[2] = stage_from_json(st.at("C"));
    p.bytes_per_param = j.value("bytes_per_param", 2.0);
    p.denoise_steps = j.at("denoise_steps").get<int>();
    p.bytes_ed = j.at("bytes_ed_per_len").get<double>();
    p.bytes_dc = j.at("bytes_dc_per_len").get<double>();
    p.bw_intra = j.value("bw_intra_Bps", 24e9);
    p.bw_inter = j.value("bw_inter_Bps", 12.5e9);
    p.reinstance_hot_s = j.value("reinstance_hot_s", 0.002);
    p.reinstance_cold_s = j.value("reinstance_cold_s", 0.200);
    p.validate();
    return p;
}

nlohmann::json profile_to_json(const CostProfile& p) {
    return {{"schema_version", p.schema_version},
            {"name", p.name},
            {"stages",
             {{"E", stage_to_json(p.stages[0])},
              {"D", stage_to_json(p.stages[1])},
              {"C", stage_to_json(p.stages[2])}}},
            {"bytes_per_param", p.bytes_per_param},
            {"denoise_steps", p.denoise_steps},
            {"bytes_ed_per_len", p.bytes_ed},
            {"bytes_dc_per_len", p.bytes_dc},
            {"bw_intra_Bps", p.bw_intra},
            {"bw_inter_Bps", p.bw_inter},
            {"reinstance_hot_s", p.reinstance_hot_s},
            {"reinstance_cold_s", p.reinstance_cold_s}};
}

}  // namespace dpsim
