// gmtlab experiment runner: one experiment per invocation, machine-readable
// output, deterministic for a fixed seed regardless of the worker count.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmtlab/gmtlab.hpp"

using namespace gmtlab;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

// exit codes: 0 ok/pass, 2 validation error, 3 budget exceeded, 4 verdict FAIL
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerdictFail = 4;

struct Common {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "-";
    std::string format = "json";
    std::string config_path;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "RNG seed");
    cmd->add_option("--threads", c.threads, "worker cap (never changes results)");
    cmd->add_option("--out", c.out, "output path, '-' for stdout");
    cmd->add_option("--format", c.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--config", c.config_path, "JSON config file overriding flags");
}

json load_overrides(const Common& c) {
    par::set_worker_count(std::max(1, c.threads));
    if (c.config_path.empty()) return json::object();
    json j = json::parse(io::read_file(c.config_path), nullptr, false);
    require(!j.is_discarded() && j.is_object(), "config file is not a JSON object");
    return j;
}

template <class T>
void ov(const json& j, const char* key, T& v) {
    if (j.contains(key)) v = j.at(key).get<T>();
}

std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_text(const std::string& out, const std::string& text) {
    if (out == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
        io::atomic_write(out, text);
    }
}

/// Assembles and writes the artifact. CSV carries the config in comment lines;
/// JSON keeps the timestamp isolated under "metadata" so result payloads can be
/// byte-compared across runs.
void emit(const Common& c, const std::string& command, const json& cfg, const json& result,
          const std::string& csv = "") {
    if (c.format == "csv") {
        require(!csv.empty(), command + ": csv output is not defined for this command");
        std::ostringstream os;
        os << "# gmtlab " << kArtifactVersion << ' ' << command << '\n';
        os << "# config: " << cfg.dump() << '\n';
        os << csv;
        write_text(c.out, os.str());
        return;
    }
    json doc;
    doc["artifact_version"] = kArtifactVersion;
    doc["command"] = command;
    doc["config"] = cfg;
    doc["result"] = result;
    doc["metadata"] = {{"timestamp", timestamp_utc()}};
    write_text(c.out, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Small parsers

std::pair<int, int> parse_range(const std::string& s) {
    const auto pos = s.find("..");
    require(pos != std::string::npos, "range must look like LO..HI");
    try {
        const int lo = std::stoi(s.substr(0, pos));
        const int hi = std::stoi(s.substr(pos + 2));
        require(hi >= lo, "range must satisfy LO <= HI");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        throw ValidationError("range must look like LO..HI");
    }
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(item));
            else
                out.push_back(std::stod(item));
        } catch (const std::invalid_argument&) {
            throw ValidationError("bad list entry: " + item);
        }
    }
    require(!out.empty(), "empty list");
    return out;
}

/// Measure specs: "cantor:B,R,D" | "grid:DIM,PER" | "cantor2d:D" | "file:PATH".
DiscreteMeasure parse_measure_spec(const std::string& spec) {
    const auto pos = spec.find(':');
    require(pos != std::string::npos, "measure spec must be KIND:ARGS");
    const std::string kind = spec.substr(0, pos);
    const std::string args = spec.substr(pos + 1);
    if (kind == "cantor") {
        const auto v = parse_list<double>(args);
        require(v.size() == 3, "cantor spec needs branches,ratio,depth");
        return make_cantor_measure({static_cast<int>(v[0]), v[1], static_cast<int>(v[2])});
    }
    if (kind == "grid") {
        const auto v = parse_list<int>(args);
        require(v.size() == 2, "grid spec needs dim,per_axis");
        return uniform_grid_measure(v[0], v[1]);
    }
    if (kind == "cantor2d") {
        const auto v = parse_list<int>(args);
        require(v.size() == 1, "cantor2d spec needs depth");
        const DiscreteMeasure c = make_cantor_measure({2, 1.0 / 3.0, v[0]});
        return product_measure(c, c);
    }
    if (kind == "file") return io::measure_from_json(json::parse(io::read_file(args)));
    throw ValidationError("unknown measure kind: " + kind);
}

/// Geometric default radii: diameter/4 halved down to the resolution floor.
std::vector<double> default_radii(const DiscreteMeasure& mu) {
    const double top = (mu.diameter_hint > 0.0 ? mu.diameter_hint : 1.0) / 4.0;
    const double floor_r = mu.resolution_hint > 0.0 ? 2.0 * mu.resolution_hint : top / 64.0;
    std::vector<double> radii;
    for (double r = top; r >= floor_r && radii.size() < 7; r /= 2.0) radii.push_back(r);
    require(radii.size() >= 3, "measure too coarse for a default radius ladder");
    return radii;
}

json radii_json(const std::vector<double>& radii) { return json(radii); }

// ---------------------------------------------------------------------------
// Preset plane families

PlaneSet preset_plane_set(const std::string& preset) {
    if (preset == "counterexample-d2k1")
        return counterexample_set(2, 1, {2, 1.0 / 3.0, 8}, 1);
    if (preset == "lines-d2-full") {
        PlaneSet S;
        S.d = 2;
        S.k = 1;
        S.measure = uniform_grid_measure(2, 512);
        return S;
    }
    if (preset == "single-line-d2") {
        PlaneSet S;
        S.d = 2;
        S.k = 1;
        S.measure = point_mass({0.0, 0.0});
        return S;
    }
    throw ValidationError("unknown plane-set preset: " + preset);
}

void preset_clip(const std::string& preset, int d, int k, std::vector<double>& lo,
                 std::vector<double>& hi) {
    if (preset == "counterexample-d2k1" || preset == "single-line-d2") {
        lo = {0.0, 0.0};
        hi = {1.0, 1.0};
    } else if (preset == "lines-d2-full") {
        lo = {0.0, 0.0};
        hi = {1.0, 2.0};
    } else {
        default_clip_box(d, k, lo, hi);
    }
}

// ---------------------------------------------------------------------------
// Command runners (each returns the process exit code)

int run_make_measure(const Common& c, std::string spec) {
    const json file = load_overrides(c);
    ov(file, "measure", spec);
    const DiscreteMeasure mu = parse_measure_spec(spec);
    json doc = io::to_json(mu);
    doc["artifact_version"] = kArtifactVersion;
    doc["config"] = {{"measure", spec}};
    doc["metadata"] = {{"timestamp", timestamp_utc()}};
    require(c.format == "json", "make-measure: only json output");
    write_text(c.out, doc.dump(2) + "\n");
    return kExitOk;
}

int run_frostman(const Common& c, std::string spec, std::string radii_arg,
                 std::size_t max_centers, std::size_t random_centers) {
    const json file = load_overrides(c);
    ov(file, "measure", spec);
    ov(file, "radii", radii_arg);
    ov(file, "max_centers", max_centers);
    ov(file, "random_centers", random_centers);
    const DiscreteMeasure mu = parse_measure_spec(spec);
    const std::vector<double> radii =
        radii_arg.empty() ? default_radii(mu) : parse_list<double>(radii_arg);
    const FrostmanReport rep =
        estimate_frostman_exponent(mu, radii, {max_centers, random_centers, c.seed});
    const json cfg = {{"measure", spec},
                      {"radii", radii_json(radii)},
                      {"max_centers", max_centers},
                      {"random_centers", random_centers},
                      {"seed", c.seed}};
    emit(c, "frostman", cfg, io::to_json(rep));
    return kExitOk;
}

int run_verify_identity(const Common& c, int n, int l, int trials) {
    const json file = load_overrides(c);
    ov(file, "n", n);
    ov(file, "l", l);
    ov(file, "trials", trials);
    require(n >= 2 && l >= 1 && l < n, "verify-identity: need 1 <= l < n");
    require(trials >= 1, "verify-identity: need at least one trial");
    Rng rng(c.seed, 0x1d);
    double max_residual = 0.0, max_margin = 0.0;
    bool ok = true;
    for (int t = 0; t < trials; ++t) {
        ProjectionParam x{n, l, {}};
        x.entries.resize(static_cast<std::size_t>(l) * (n - l));
        for (auto& e : x.entries) e = rng.uniform(-2.0, 2.0);
        std::vector<double> xi(l), p(n);
        for (auto& v : xi) v = rng.uniform(-2.0, 2.0);
        for (auto& v : p) v = rng.uniform(-2.0, 2.0);
        const double res = check_duality_identity(x, xi, p);
        const double bound = 1e-12 * (1.0 + norm(xi)) * (1.0 + norm(p)) * (1.0 + norm(x.entries));
        max_residual = std::max(max_residual, res);
        max_margin = std::max(max_margin, res / bound);
        if (res > bound) ok = false;
    }
    const json cfg = {{"n", n}, {"l", l}, {"trials", trials}, {"seed", c.seed}};
    emit(c, "verify-identity", cfg,
         {{"max_residual", max_residual}, {"max_bound_fraction", max_margin}, {"pass", ok}});
    return ok ? kExitOk : kExitVerdictFail;
}

int run_slice_frostman(const Common& c, std::string preset, std::string lambda_file,
                       int n_random_dirs, std::string radii_arg) {
    const json file = load_overrides(c);
    ov(file, "preset", preset);
    ov(file, "lambda", lambda_file);
    ov(file, "random_directions", n_random_dirs);
    ov(file, "radii", radii_arg);
    DiscreteMeasure lambda;
    int l = 1;
    if (!lambda_file.empty()) {
        lambda = io::measure_from_json(json::parse(io::read_file(lambda_file)));
    } else if (preset == "grid-d2k1") {
        lambda = uniform_grid_measure(1, 512);
    } else if (preset == "grid-d3k2") {
        lambda = uniform_grid_measure(2, 256);
    } else {
        throw ValidationError("unknown slice-frostman preset: " + preset);
    }
    const std::vector<double> dirs = make_directions(l, n_random_dirs, c.seed);
    const std::vector<double> radii =
        radii_arg.empty() ? default_radii(lambda) : parse_list<double>(radii_arg);
    const FrostmanReport rep =
        slice_frostman_exponent(lambda, l, dirs, radii, {1024, 0, c.seed});
    const json cfg = {{"preset", preset},
                      {"lambda", lambda_file},
                      {"l", l},
                      {"random_directions", n_random_dirs},
                      {"radii", radii_json(radii)},
                      {"seed", c.seed}};
    emit(c, "slice-frostman", cfg, io::to_json(rep));
    return kExitOk;
}

int run_shells(const Common& c, std::string spec, std::string j_arg, double sigma,
               std::size_t samples) {
    const json file = load_overrides(c);
    ov(file, "measure", spec);
    ov(file, "j", j_arg);
    ov(file, "sigma", sigma);
    ov(file, "samples", samples);
    const DiscreteMeasure mu = parse_measure_spec(spec);
    const auto [j_lo, j_hi] = parse_range(j_arg);
    const ShellEnergyProfile profile =
        shell_energy_profile(direct_evaluator(mu), mu.ambient_dim, j_lo, j_hi, sigma, samples,
                             c.seed, mu.resolution_hint);
    const json cfg = {{"measure", spec}, {"j", j_arg},       {"sigma", sigma},
                      {"samples", samples}, {"seed", c.seed}};
    emit(c, "shells", cfg, io::to_json(profile), io::shell_profile_csv(profile));
    return kExitOk;
}

int run_sobolev_dim(const Common& c, std::string spec, std::string j_arg, std::size_t samples) {
    const json file = load_overrides(c);
    ov(file, "measure", spec);
    ov(file, "j", j_arg);
    ov(file, "samples", samples);
    const DiscreteMeasure mu = parse_measure_spec(spec);
    const auto [j_lo, j_hi] = parse_range(j_arg);
    const SobolevEstimate est = sobolev_dimension_estimate(mu, j_lo, j_hi, samples, c.seed);
    const json cfg = {
        {"measure", spec}, {"j", j_arg}, {"samples", samples}, {"seed", c.seed}};
    emit(c, "sobolev-dim", cfg, io::to_json(est));
    return kExitOk;
}

int run_lemma_decay(const Common& c, std::string preset, std::string mu_file,
                    std::string lambda_file, std::string j_arg, std::size_t samples,
                    double tolerance, double residual_threshold) {
    const json file = load_overrides(c);
    ov(file, "preset", preset);
    ov(file, "mu", mu_file);
    ov(file, "lambda", lambda_file);
    ov(file, "j", j_arg);
    ov(file, "samples", samples);
    ov(file, "tolerance", tolerance);
    ov(file, "residual_threshold", residual_threshold);
    const auto [j_lo, j_hi] = parse_range(j_arg);

    LemmaDecayReport rep;
    json cfg = {{"preset", preset},       {"j", j_arg},
                {"samples", samples},     {"seed", c.seed},
                {"tolerance", tolerance}, {"residual_threshold", residual_threshold}};
    if (!mu_file.empty() || !lambda_file.empty()) {
        require(!mu_file.empty() && !lambda_file.empty(),
                "lemma-decay: supply both --mu and --lambda or neither");
        cfg["mu"] = mu_file;
        cfg["lambda"] = lambda_file;
        const DiscreteMeasure mu = io::measure_from_json(json::parse(io::read_file(mu_file)));
        const DiscreteMeasure lambda =
            io::measure_from_json(json::parse(io::read_file(lambda_file)));
        require(mu.ambient_dim >= 2, "lemma-decay: mu must live in dimension >= 2");
        // recover l from lambda.ambient_dim = l (n - l)
        const int n = mu.ambient_dim;
        int l = 0;
        for (int cand = 1; cand < n; ++cand)
            if (cand * (n - cand) == lambda.ambient_dim) {
                l = cand;
                break;
            }
        require(l >= 1, "lemma-decay: lambda dimension is not l(n-l) for any l");
        const FrostmanReport alpha = estimate_frostman_exponent(mu, default_radii(mu));
        const FrostmanReport beta = estimate_frostman_exponent(lambda, default_radii(lambda));
        rep = lemma_decay_report(direct_evaluator(mu), n, lambda, l, j_lo, j_hi, samples,
                                 c.seed, alpha, beta, mu.resolution_hint, tolerance,
                                 residual_threshold);
    } else {
        require(preset == "cantor2d", "unknown lemma-decay preset: " + preset);
        // n = 2, l = 1: mu = depth-8 planar Cantor square (transform factors into
        // two 1-d sums), lambda = fine grid on [0,1]
        const CantorSpec cs{2, 1.0 / 3.0, 8};
        const DiscreteMeasure c1 = make_cantor_measure(cs);
        const DiscreteMeasure mu = product_measure(c1, c1);
        const DiscreteMeasure lambda = uniform_grid_measure(1, 512);
        const FrostmanReport alpha =
            estimate_frostman_exponent(mu, default_radii(mu), {1024, 0, c.seed});
        const FrostmanReport beta = estimate_frostman_exponent(lambda, default_radii(lambda));
        const FreqEval eval =
            product_evaluator(direct_evaluator(c1), 1, direct_evaluator(c1));
        rep = lemma_decay_report(eval, 2, lambda, 1, j_lo, j_hi, samples, c.seed, alpha, beta,
                                 mu.resolution_hint, tolerance, residual_threshold);
    }
    emit(c, "lemma-decay", cfg, io::to_json(rep), io::lemma_report_csv(rep));
    return rep.pass ? kExitOk : kExitVerdictFail;
}

int run_kplane_ratio(const Common& c, double eps, int n_bumps, std::string res_arg,
                     int nodes) {
    const json file = load_overrides(c);
    ov(file, "eps", eps);
    ov(file, "bumps", n_bumps);
    ov(file, "res", res_arg);
    ov(file, "nodes", nodes);
    require(n_bumps >= 1, "kplane-ratio: need at least one test bump");
    const std::vector<int> resolutions = parse_list<int>(res_arg);

    // plane family: Cantor intercepts x uniform slopes in [0,1]; alpha ~ 1.63
    PlaneSet S;
    S.d = 2;
    S.k = 1;
    S.measure = product_measure(make_cantor_measure({2, 1.0 / 3.0, 6}),
                                uniform_grid_measure(1, 128));
    const FrostmanReport alpha =
        estimate_frostman_exponent(S.measure, default_radii(S.measure), {512, 0, c.seed});

    Rng rng(c.seed, 0x6b706c);
    std::vector<GridField> family;
    family.reserve(n_bumps);
    for (int b = 0; b < n_bumps; ++b) {
        const double cx = rng.uniform(0.15, 0.85);
        const double cv = rng.uniform(0.2, 1.8);
        const double w = rng.uniform(4.0, 16.0);
        family.push_back(sample_field(
            2, std::vector<int>{512, 512}, std::vector<double>{0.0, -0.5},
            std::vector<double>{1.0, 2.5}, [cx, cv, w](std::span<const double> p) {
                const double dx = p[0] - cx, dv = p[1] - cv;
                return std::exp(-w * (dx * dx + dv * dv));
            }));
    }
    const BoundRatioReport rep =
        bound_ratio_experiment(S, alpha, eps, family, resolutions, nodes);
    const json cfg = {{"eps", eps},     {"bumps", n_bumps}, {"res", res_arg},
                      {"nodes", nodes}, {"seed", c.seed},   {"alpha", alpha.exponent}};
    emit(c, "kplane-ratio", cfg, io::to_json(rep));
    return rep.pass ? kExitOk : kExitVerdictFail;
}

int run_compute_q(const Common& c, int d, int k, double alpha, double eps) {
    const json file = load_overrides(c);
    ov(file, "d", d);
    ov(file, "k", k);
    ov(file, "alpha", alpha);
    ov(file, "eps", eps);
    const TransformBoundConfig cfg = compute_q(d, k, alpha, eps);
    emit(c, "compute-q", {{"d", d}, {"k", k}, {"alpha", alpha}, {"eps", eps}},
         io::to_json(cfg));
    return kExitOk;
}

int run_union_sweep(const Common& c, std::string preset, std::string set_file,
                    std::string res_arg) {
    const json file = load_overrides(c);
    ov(file, "preset", preset);
    ov(file, "set", set_file);
    ov(file, "res", res_arg);
    const std::vector<int> resolutions = parse_list<int>(res_arg);
    PlaneSet S = set_file.empty()
                     ? preset_plane_set(preset)
                     : io::plane_set_from_json(json::parse(io::read_file(set_file)));
    std::vector<double> lo, hi;
    preset_clip(set_file.empty() ? preset : "", S.d, S.k, lo, hi);
    const OccupancyReport rep = occupancy_sweep(S, lo, hi, resolutions);
    const json cfg = {{"preset", preset}, {"set", set_file}, {"res", res_arg},
                      {"clip_lo", lo},    {"clip_hi", hi},   {"seed", c.seed}};
    emit(c, "union-sweep", cfg, io::to_json(rep), io::occupancy_csv(rep));
    return kExitOk;
}

int run_counterexample(const Common& c, int d, int k, int branches, double ratio, int depth,
                       int fill) {
    const json file = load_overrides(c);
    ov(file, "d", d);
    ov(file, "k", k);
    ov(file, "branches", branches);
    ov(file, "ratio", ratio);
    ov(file, "depth", depth);
    ov(file, "fill", fill);
    const PlaneSet S = counterexample_set(d, k, {branches, ratio, depth}, fill);
    json doc = io::to_json(S);
    doc["artifact_version"] = kArtifactVersion;
    doc["config"] = {{"d", d},         {"k", k},         {"branches", branches},
                     {"ratio", ratio}, {"depth", depth}, {"fill", fill}};
    doc["metadata"] = {{"timestamp", timestamp_utc()}};
    require(c.format == "json", "counterexample: only json output");
    write_text(c.out, doc.dump(2) + "\n");
    return kExitOk;
}

int run_union_dim(const Common& c, std::string preset, std::string set_file,
                  std::string res_arg) {
    const json file = load_overrides(c);
    ov(file, "preset", preset);
    ov(file, "set", set_file);
    ov(file, "res", res_arg);
    const std::vector<int> resolutions = parse_list<int>(res_arg);
    PlaneSet S = set_file.empty()
                     ? preset_plane_set(preset)
                     : io::plane_set_from_json(json::parse(io::read_file(set_file)));
    std::vector<double> lo, hi;
    preset_clip(set_file.empty() ? preset : "", S.d, S.k, lo, hi);
    const SlopeFit fit = union_dimension_estimate(S, lo, hi, resolutions);
    const json cfg = {{"preset", preset}, {"set", set_file}, {"res", res_arg},
                      {"clip_lo", lo},    {"clip_hi", hi},   {"seed", c.seed}};
    emit(c, "union-dim", cfg, {{"dimension", fit.slope}, {"fit", io::to_json(fit)}});
    return kExitOk;
}

int run_sumset(const Common& c, std::string a0_spec, std::string a1_spec, double x,
               std::string j_arg, std::size_t samples) {
    const json file = load_overrides(c);
    ov(file, "a0", a0_spec);
    ov(file, "a1", a1_spec);
    ov(file, "x", x);
    ov(file, "j", j_arg);
    ov(file, "samples", samples);
    const DiscreteMeasure a0 = parse_measure_spec(a0_spec);
    const DiscreteMeasure a1 = parse_measure_spec(a1_spec);
    const json cfg = {{"a0", a0_spec}, {"a1", a1_spec},     {"x", x},
                      {"j", j_arg},    {"samples", samples}, {"seed", c.seed}};
    if (!j_arg.empty()) {
        // factorized spectrum: no materialization of the |a0| x |a1| atom cloud
        require(a0.ambient_dim == a1.ambient_dim, "sumset: ambient dimensions differ");
        const auto [j_lo, j_hi] = parse_range(j_arg);
        double res = 0.0;
        if (a0.resolution_hint > 0.0 && a1.resolution_hint > 0.0 && x != 0.0)
            res = std::min(a0.resolution_hint, std::abs(x) * a1.resolution_hint);
        const FreqEval eval =
            scaled_sum_evaluator(direct_evaluator(a0), direct_evaluator(a1), x);
        const SobolevEstimate est = sobolev_dimension_estimate(eval, a0.ambient_dim, j_lo,
                                                               j_hi, samples, c.seed, res);
        emit(c, "sumset", cfg, io::to_json(est));
        return kExitOk;
    }
    const DiscreteMeasure s = sumset_section(a0, a1, x, 1u << 20);
    json doc = io::to_json(s);
    doc["artifact_version"] = kArtifactVersion;
    doc["config"] = cfg;
    doc["metadata"] = {{"timestamp", timestamp_utc()}};
    require(c.format == "json", "sumset: only json output for the measure form");
    write_text(c.out, doc.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for projections, plane unions, and plane transforms"};
    app.require_subcommand(1);

    int rc = kExitOk;

    // make-measure
    Common c_mm;
    std::string mm_spec = "cantor:2,0.3333333333333333,10";
    auto* mm = app.add_subcommand("make-measure", "construct a measure and write it as JSON");
    mm->add_option("--measure", mm_spec, "cantor:B,R,D | grid:DIM,PER | cantor2d:D | file:PATH");
    add_common(mm, c_mm);
    mm->callback([&] { rc = run_make_measure(c_mm, mm_spec); });

    // frostman
    Common c_fr;
    std::string fr_spec = "cantor:2,0.3333333333333333,10", fr_radii;
    std::size_t fr_centers = 4096, fr_random = 0;
    auto* fr = app.add_subcommand("frostman", "fit a ball-mass growth exponent");
    fr->add_option("--measure", fr_spec, "measure spec");
    fr->add_option("--radii", fr_radii, "comma list, strictly decreasing");
    fr->add_option("--max-centers", fr_centers, "atom-center probe cap");
    fr->add_option("--random-centers", fr_random, "extra random probe centers");
    add_common(fr, c_fr);
    fr->callback([&] { rc = run_frostman(c_fr, fr_spec, fr_radii, fr_centers, fr_random); });

    // verify-identity
    Common c_vi;
    int vi_n = 5, vi_l = 2, vi_trials = 1000;
    auto* vi = app.add_subcommand("verify-identity", "residuals of the projection duality");
    vi->add_option("--n", vi_n, "ambient dimension");
    vi->add_option("--l", vi_l, "projection dimension");
    vi->add_option("--trials", vi_trials, "random instances");
    add_common(vi, c_vi);
    vi->callback([&] { rc = run_verify_identity(c_vi, vi_n, vi_l, vi_trials); });

    // slice-frostman
    Common c_sf;
    std::string sf_preset = "grid-d2k1", sf_lambda, sf_radii;
    int sf_dirs = 4;
    auto* sf = app.add_subcommand("slice-frostman", "tube-mass exponent of a slice measure");
    sf->add_option("--preset", sf_preset, "grid-d2k1 | grid-d3k2");
    sf->add_option("--lambda", sf_lambda, "measure JSON file (overrides preset)");
    sf->add_option("--random-directions", sf_dirs, "extra random directions");
    sf->add_option("--radii", sf_radii, "comma list");
    add_common(sf, c_sf);
    sf->callback([&] { rc = run_slice_frostman(c_sf, sf_preset, sf_lambda, sf_dirs, sf_radii); });

    // shells
    Common c_sh;
    std::string sh_spec = "grid:1,4096", sh_j = "2..7";
    double sh_sigma = 0.0;
    std::size_t sh_samples = 4000;
    auto* sh = app.add_subcommand("shells", "dyadic-shell energies of a measure");
    sh->add_option("--measure", sh_spec, "measure spec");
    sh->add_option("--j", sh_j, "shell range LO..HI");
    sh->add_option("--sigma", sh_sigma, "weight exponent (0 = raw energy)");
    sh->add_option("--samples", sh_samples, "Monte Carlo samples per shell");
    add_common(sh, c_sh);
    sh->callback([&] { rc = run_shells(c_sh, sh_spec, sh_j, sh_sigma, sh_samples); });

    // sobolev-dim
    Common c_sd;
    std::string sd_spec = "cantor:2,0.3333333333333333,12", sd_j = "2..8";
    std::size_t sd_samples = 3000;
    auto* sd = app.add_subcommand("sobolev-dim", "shell-decay Sobolev dimension estimate");
    sd->add_option("--measure", sd_spec, "measure spec");
    sd->add_option("--j", sd_j, "shell range LO..HI");
    sd->add_option("--samples", sd_samples, "Monte Carlo samples per shell");
    add_common(sd, c_sd);
    sd->callback([&] { rc = run_sobolev_dim(c_sd, sd_spec, sd_j, sd_samples); });

    // lemma-decay
    Common c_ld;
    std::string ld_preset = "cantor2d", ld_mu, ld_lambda, ld_j = "3..8";
    std::size_t ld_samples = 20000;
    // the self-similar spectrum oscillates log-periodically around its decay
    // trend, so the default max-residual gate is wider than the slope tolerance
    double ld_tol = 0.25, ld_resid = 1.0;
    auto* ld = app.add_subcommand("lemma-decay", "projected-energy decay verifier");
    ld->add_option("--preset", ld_preset, "cantor2d");
    ld->add_option("--mu", ld_mu, "measure JSON file");
    ld->add_option("--lambda", ld_lambda, "measure JSON file");
    ld->add_option("--j", ld_j, "shell range LO..HI (R = 2^j)");
    ld->add_option("--samples", ld_samples, "Monte Carlo samples per shell");
    ld->add_option("--tolerance", ld_tol, "slope tolerance above n-alpha-beta");
    ld->add_option("--residual-threshold", ld_resid, "max-residual gate on the fit");
    add_common(ld, c_ld);
    ld->callback([&] {
        rc = run_lemma_decay(c_ld, ld_preset, ld_mu, ld_lambda, ld_j, ld_samples, ld_tol,
                             ld_resid);
    });

    // kplane-ratio
    Common c_kr;
    double kr_eps = 0.3;
    int kr_bumps = 20, kr_nodes = 256;
    std::string kr_res = "64,128,256,512";
    auto* kr = app.add_subcommand("kplane-ratio", "transform-bound ratio stability experiment");
    kr->add_option("--eps", kr_eps, "epsilon in the exponent formula");
    kr->add_option("--bumps", kr_bumps, "random test bumps");
    kr->add_option("--res", kr_res, "per-axis resolutions, comma list");
    kr->add_option("--nodes", kr_nodes, "quadrature nodes per axis");
    add_common(kr, c_kr);
    kr->callback([&] { rc = run_kplane_ratio(c_kr, kr_eps, kr_bumps, kr_res, kr_nodes); });

    // compute-q
    Common c_cq;
    int cq_d = 2, cq_k = 1;
    double cq_alpha = 1.5, cq_eps = 0.25;
    auto* cq = app.add_subcommand("compute-q", "exponent bookkeeping for the transform bound");
    cq->add_option("--d", cq_d, "ambient dimension");
    cq->add_option("--k", cq_k, "plane dimension");
    cq->add_option("--alpha", cq_alpha, "Frostman exponent of the plane family");
    cq->add_option("--eps", cq_eps, "epsilon");
    add_common(cq, c_cq);
    cq->callback([&] { rc = run_compute_q(c_cq, cq_d, cq_k, cq_alpha, cq_eps); });

    // union-sweep
    Common c_us;
    std::string us_preset = "lines-d2-full", us_set, us_res = "64,128,256,512";
    auto* us = app.add_subcommand("union-sweep", "occupancy of a union across resolutions");
    us->add_option("--preset", us_preset,
                   "lines-d2-full | counterexample-d2k1 | single-line-d2");
    us->add_option("--set", us_set, "plane-set JSON file (overrides preset)");
    us->add_option("--res", us_res, "per-axis resolutions, comma list");
    add_common(us, c_us);
    us->callback([&] { rc = run_union_sweep(c_us, us_preset, us_set, us_res); });

    // counterexample
    Common c_ce;
    int ce_d = 2, ce_k = 1, ce_branches = 2, ce_depth = 8, ce_fill = 1;
    double ce_ratio = 1.0 / 3.0;
    auto* ce = app.add_subcommand("counterexample", "build the null-union plane family");
    ce->add_option("--d", ce_d, "ambient dimension");
    ce->add_option("--k", ce_k, "plane dimension");
    ce->add_option("--branches", ce_branches, "Cantor branches");
    ce->add_option("--ratio", ce_ratio, "Cantor contraction ratio");
    ce->add_option("--depth", ce_depth, "Cantor depth");
    ce->add_option("--fill", ce_fill, "grid fill per free parameter axis");
    add_common(ce, c_ce);
    ce->callback([&] {
        rc = run_counterexample(c_ce, ce_d, ce_k, ce_branches, ce_ratio, ce_depth, ce_fill);
    });

    // union-dim
    Common c_ud;
    std::string ud_preset = "counterexample-d2k1", ud_set, ud_res = "27,81,243";
    auto* ud = app.add_subcommand("union-dim", "box-counting dimension of a union");
    ud->add_option("--preset", ud_preset,
                   "counterexample-d2k1 | lines-d2-full | single-line-d2");
    ud->add_option("--set", ud_set, "plane-set JSON file (overrides preset)");
    ud->add_option("--res", ud_res, "per-axis resolutions, comma list");
    add_common(ud, c_ud);
    ud->callback([&] { rc = run_union_dim(c_ud, ud_preset, ud_set, ud_res); });

    // sumset
    Common c_ss;
    std::string ss_a0 = "cantor:2,0.3333333333333333,6";
    std::string ss_a1 = "cantor:2,0.3333333333333333,6";
    std::string ss_j;
    double ss_x = 1.0;
    std::size_t ss_samples = 3000;
    auto* ss = app.add_subcommand("sumset", "scaled sumset section A0 + x A1");
    ss->add_option("--a0", ss_a0, "first measure spec");
    ss->add_option("--a1", ss_a1, "second measure spec");
    ss->add_option("--x", ss_x, "scale parameter");
    ss->add_option("--j", ss_j, "shell range: compute a Sobolev estimate instead");
    ss->add_option("--samples", ss_samples, "Monte Carlo samples per shell");
    add_common(ss, c_ss);
    ss->callback([&] { rc = run_sumset(c_ss, ss_a0, ss_a1, ss_x, ss_j, ss_samples); });

    try {
        app.parse(argc, argv);
        // honor --threads from whichever subcommand ran; set before callbacks
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    } catch (const BudgetError& e) {
        std::cerr << json{{"error", e.what()}, {"kind", "budget"}}.dump() << "\n";
        return kExitBudget;
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"kind", "internal"}}.dump() << "\n";
        return kExitValidation;
    }
    return rc;
}
