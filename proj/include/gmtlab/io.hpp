#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gmtlab/common.hpp"
#include "gmtlab/kplane.hpp"
#include "gmtlab/measures.hpp"
#include "gmtlab/projections.hpp"
#include "gmtlab/spectral.hpp"
#include "gmtlab/unions.hpp"

namespace gmtlab::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Measures

inline json to_json(const DiscreteMeasure& mu) {
    json pts = json::array();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto p = mu.point(i);
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    return json{{"ambient_dim", mu.ambient_dim}, {"points", pts}, {"weights", mu.weights}};
}

inline DiscreteMeasure measure_from_json(const json& j) {
    require(j.contains("ambient_dim") && j.contains("points") && j.contains("weights"),
            "measure json: missing ambient_dim/points/weights");
    DiscreteMeasure mu;
    mu.ambient_dim = j.at("ambient_dim").get<int>();
    require(mu.ambient_dim >= 1, "measure json: ambient_dim must be >= 1");
    const auto& pts = j.at("points");
    require(pts.is_array() && !pts.empty(), "measure json: points must be a nonempty array");
    for (const auto& p : pts) {
        require(p.is_array() && static_cast<int>(p.size()) == mu.ambient_dim,
                "measure json: point arity mismatch");
        for (const auto& c : p) {
            const double v = c.get<double>();
            require(std::isfinite(v), "measure json: non-finite coordinate");
            mu.coords.push_back(v);
        }
    }
    for (const auto& w : j.at("weights")) {
        const double v = w.get<double>();
        require(std::isfinite(v) && v >= 0.0, "measure json: weights must be finite and >= 0");
        mu.weights.push_back(v);
    }
    mu.refresh_diameter();
    mu.validate();
    return mu;
}

inline json to_json(const PlaneSet& S) {
    json j = to_json(S.measure);
    j["d"] = S.d;
    j["k"] = S.k;
    j["layout"] = "row-major-intercept-first";
    return j;
}

inline PlaneSet plane_set_from_json(const json& j) {
    require(j.contains("d") && j.contains("k"), "plane set json: missing d/k header");
    require(!j.contains("layout") || j.at("layout") == "row-major-intercept-first",
            "plane set json: unsupported layout");
    PlaneSet S;
    S.d = j.at("d").get<int>();
    S.k = j.at("k").get<int>();
    S.measure = measure_from_json(j);
    S.validate();
    return S;
}

// ---------------------------------------------------------------------------
// Fields

inline json to_json(const GridField& f) {
    return json{{"d", f.d},
                {"shape", f.shape},
                {"box", {{"lo", f.lo}, {"hi", f.hi}}},
                {"values", f.values}};
}

inline GridField grid_field_from_json(const json& j) {
    GridField f;
    f.d = j.at("d").get<int>();
    f.shape = j.at("shape").get<std::vector<int>>();
    f.lo = j.at("box").at("lo").get<std::vector<double>>();
    f.hi = j.at("box").at("hi").get<std::vector<double>>();
    f.values = j.at("values").get<std::vector<double>>();
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const SlopeFit& fit) {
    json pts = json::array();
    for (auto [x, y] : fit.sample_points) pts.push_back({x, y});
    return json{{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"residual", fit.residual},
                {"sample_points", pts}};
}

inline json to_json(const FrostmanReport& r) {
    return json{{"exponent", r.exponent},
                {"constant", r.constant},
                {"radii", r.radii},
                {"fit", to_json(r.fit)}};
}

inline json to_json(const ShellEnergyProfile& p) {
    json shells = json::array();
    for (const auto& s : p.shells)
        shells.push_back({{"j", s.j}, {"energy", s.energy}, {"stderr", s.mc_stderr}});
    return json{{"sigma", p.sigma},
                {"l", p.l},
                {"samples_per_shell", p.samples_per_shell},
                {"seed", p.seed},
                {"shells", shells}};
}

inline json to_json(const SobolevEstimate& e) {
    return json{{"sigma_max", e.sigma_max},
                {"profile", to_json(e.profile)},
                {"fit", to_json(e.fit)},
                {"low_confidence", e.low_confidence},
                {"residual_threshold", e.residual_threshold}};
}

inline json to_json(const LemmaDecayReport& r) {
    json shells = json::array();
    for (const auto& s : r.shells)
        shells.push_back(
            {{"j", s.j}, {"R", s.R}, {"value", s.value}, {"stderr", s.mc_stderr}});
    return json{{"n", r.n},
                {"l", r.l},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"shells", shells},
                {"fit", to_json(r.fit)},
                {"predicted_exponent", r.predicted_exponent},
                {"tolerance", r.tolerance},
                {"residual_threshold", r.residual_threshold},
                {"samples_per_shell", r.samples_per_shell},
                {"seed", r.seed},
                {"pass", r.pass}};
}

inline json to_json(const TransformBoundConfig& c) {
    return json{{"d", c.d},     {"k", c.k}, {"alpha", c.alpha},
                {"eps", c.eps}, {"q", c.q}, {"q_conj", c.q_conj}};
}

inline json to_json(const BoundRatioReport& r) {
    json trials = json::array();
    for (const auto& t : r.trials)
        trials.push_back({{"f", t.f_descriptor},
                          {"per_axis", t.per_axis},
                          {"transform_norm", t.transform_norm},
                          {"mixed_norm", t.mixed},
                          {"ratio", t.ratio}});
    json sweep = json::array();
    for (const auto& s : r.resolution_sweep)
        sweep.push_back({{"per_axis", s.per_axis}, {"max_ratio", s.max_ratio}});
    return json{{"config", to_json(r.config)},
                {"trials", trials},
                {"resolution_sweep", sweep},
                {"fit", to_json(r.fit)},
                {"slope_threshold", r.slope_threshold},
                {"pass", r.pass}};
}

inline json to_json(const OccupancyReport& r) {
    return json{{"resolutions", r.resolutions},
                {"occupancy", r.occupancy},
                {"fit", to_json(r.fit)},
                {"clip_lo", r.clip_lo},
                {"clip_hi", r.clip_hi},
                {"verdict", r.verdict}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string shell_profile_csv(const ShellEnergyProfile& p) {
    std::ostringstream os;
    os.precision(17);
    os << "j,R,energy,stderr\n";
    for (const auto& s : p.shells)
        os << s.j << ',' << std::exp2(s.j) << ',' << s.energy << ',' << s.mc_stderr << '\n';
    return os.str();
}

inline std::string lemma_report_csv(const LemmaDecayReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "j,R,value,stderr\n";
    for (const auto& s : r.shells)
        os << s.j << ',' << s.R << ',' << s.value << ',' << s.mc_stderr << '\n';
    return os.str();
}

inline std::string occupancy_csv(const OccupancyReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "per_axis,occupancy\n";
    for (std::size_t i = 0; i < r.resolutions.size(); ++i)
        os << r.resolutions[i] << ',' << r.occupancy[i] << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Files

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), "atomic_write: cannot open " + tmp.string());
        out << content;
        require(out.good(), "atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "read_file: cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// 2-D occupancy mask as a portable graymap for visual inspection.
inline std::string mask_to_pgm(const GridField& mask) {
    require(mask.d == 2, "mask_to_pgm: only 2-D masks supported");
    std::ostringstream os;
    os << "P2\n" << mask.shape[1] << ' ' << mask.shape[0] << "\n255\n";
    for (int i = 0; i < mask.shape[0]; ++i) {
        for (int j = 0; j < mask.shape[1]; ++j) {
            os << (mask.values[static_cast<std::size_t>(i) * mask.shape[1] + j] > 0.0 ? 255 : 0);
            os << (j + 1 == mask.shape[1] ? '\n' : ' ');
        }
    }
    return os.str();
}

}  // namespace gmtlab::io
