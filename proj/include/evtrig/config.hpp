#pragma once

// JSON run configuration. Presets are plain config trees, so every preset can
// be written to disk, edited and fed back through --config.
//
//   model        {"type": "polynomial", matrices, "terms", optional "Kn", "p"}
//                or {"type": "mip", "params": {...}, "gains": [6 numbers]}
//   certificate  {"Q", "s_f", "s_y"}
//   manifold     {"order"}
//   trigger      {"variant", "sigma", "p", "p_e", "use_w", "r_s", "inner"}
//   sim          {"dt", "t_final", "x0": {"y", "z"}, "zeno_guard_min",
//                 "record_stride", "validity_radius"}
//   batch        {"generator": "circle" | "random", "radius", "count", "split_time"}
//   compare      {"period"}  (0: use the measured MIET)
//   seed

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evtrig/certificates.hpp"
#include "evtrig/dynamics.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/models.hpp"
#include "evtrig/sim.hpp"
#include "evtrig/trigger.hpp"

namespace evtrig {

using Json = nlohmann::json;

namespace config_detail {

inline const Json& at(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    return number(j.at(key), where + "." + key);
}

inline Matrix matrix(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(where + ": expected a list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (j[r].size() != static_cast<std::size_t>(cols)) throw ConfigError(where + ": ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(j[r][c], where);
    }
    return m;
}

inline Vector vector(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected a list");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
    return v;
}

inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

/// Variable index for a monomial key: y / y1..yk, z1..znz, u1..um.
inline int variable_index(const std::string& key, int k, int nz, int m) {
    if (key == "y" && k == 1) return 0;
    if (key.size() < 2) throw ConfigError("unknown monomial variable '" + key + "'");
    const char kind = key[0];
    int idx = 0;
    try {
        std::size_t used = 0;
        idx = std::stoi(key.substr(1), &used);
        if (used != key.size() - 1) throw ConfigError("");
    } catch (...) {
        throw ConfigError("unknown monomial variable '" + key + "'");
    }
    const int n = kind == 'y' ? k : kind == 'z' ? nz : kind == 'u' ? m : 0;
    if (n == 0 || idx < 1 || idx > n) throw ConfigError("monomial variable '" + key + "' out of range");
    return (kind == 'y' ? 0 : kind == 'z' ? k : k + nz) + idx - 1;
}

inline PlantModel polynomial_model(const Json& j) {
    const std::string w = "model";
    Matrix A2 = matrix(at(j, "A2", w), w + ".A2");
    Matrix B2 = matrix(at(j, "B2", w), w + ".B2");
    Matrix K11 = matrix(at(j, "K11", w), w + ".K11");
    Matrix A1 = j.contains("A1") ? matrix(j["A1"], w + ".A1") : Matrix::Zero(1, 1);
    Matrix K12 = j.contains("K12") ? matrix(j["K12"], w + ".K12") : Matrix::Zero(B2.cols(), A1.rows());
    const int k = static_cast<int>(A1.rows()), nz = static_cast<int>(A2.rows()), m = static_cast<int>(B2.cols());

    PolynomialField f;
    const Json& terms = at(j, "terms", w);
    if (!terms.is_array() || terms.size() != static_cast<std::size_t>(k + nz))
        throw ConfigError("model.terms must list k + nz rows");
    for (const auto& row : terms) {
        std::vector<Monomial> monos;
        for (const auto& t : row) {
            Monomial mono;
            mono.coef = 1.0;
            mono.powers.assign(static_cast<std::size_t>(k + nz + m), 0);
            for (const auto& [key, val] : t.items()) {
                if (key == "c") {
                    mono.coef = number(val, "model.terms.c");
                } else {
                    if (!val.is_number_integer() || val.get<int>() < 0)
                        throw ConfigError("model.terms: exponent of '" + key + "' must be a non-negative integer");
                    mono.powers[static_cast<std::size_t>(variable_index(key, k, nz, m))] += val.get<int>();
                }
            }
            monos.push_back(std::move(mono));
        }
        f.rows.push_back(std::move(monos));
    }
    PlantModel model = make_polynomial_model(j.value("name", std::string("polynomial")), A1, A2, B2, K11, K12,
                                             std::move(f), number_or(j, "p", 3.0, w));
    if (j.contains("Kn")) {
        std::vector<std::vector<std::pair<int, double>>> kn;
        for (const auto& row : j["Kn"]) {
            std::vector<std::pair<int, double>> r;
            for (const auto& t : row) r.emplace_back(t.at(0).get<int>(), number(t.at(1), "model.Kn"));
            kn.push_back(std::move(r));
        }
        set_polynomial_feedback(model, std::move(kn));
    }
    if (j.contains("V1")) {
        const std::string v1 = j["V1"].get<std::string>();
        if (v1 == "y^2/2") model.V1 = ReducedLyapunov{[](double y) { return 0.5 * y * y; }, v1};
        else if (v1 == "|y|") model.V1 = ReducedLyapunov{[](double y) { return std::abs(y); }, v1};
        else throw ConfigError("model.V1 must be \"y^2/2\" or \"|y|\"");
    }
    return model;
}

inline PlantModel mip_model(const Json& j) {
    models::MipParams p;
    if (j.contains("params")) {
        const Json& q = j["params"];
        const std::string w = "model.params";
        p.b = number_or(q, "b", p.b, w);
        p.r = number_or(q, "r", p.r, w);
        p.b1 = number_or(q, "b1", p.b1, w);
        p.b2 = number_or(q, "b2", p.b2, w);
        p.b3 = number_or(q, "b3", p.b3, w);
        p.b4 = number_or(q, "b4", p.b4, w);
        p.b5 = number_or(q, "b5", p.b5, w);
        p.ag = number_or(q, "ag", p.ag, w);
    }
    if (j.contains("gains")) {
        const Vector g = vector(j["gains"], "model.gains");
        if (g.size() != 6) throw ConfigError("model.gains must have 6 entries");
        for (int i = 0; i < 6; ++i) p.g[i] = g(i);
    }
    return models::mip(p);
}

}  // namespace config_detail

inline PlantModel model_from_json(const Json& j) {
    const std::string type = j.value("type", std::string("polynomial"));
    if (type == "polynomial") return config_detail::polynomial_model(j);
    if (type == "mip") return config_detail::mip_model(j);
    throw ConfigError("model.type must be 'polynomial' or 'mip', got '" + type + "'");
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"example1", "example2", "mip"};
    return names;
}

/// Full configuration tree of a preset experiment.
inline Json preset_config(const std::string& name) {
    if (name == "example1") {
        return Json::parse(R"({
  "model": {
    "type": "polynomial", "name": "example1",
    "A1": [[0]], "A2": [[1]], "B2": [[1]], "K11": [[-2]], "K12": [[0]],
    "terms": [
      [{"c": -1, "y": 1, "z1": 1}],
      [{"c": 1, "y": 2}, {"c": -2, "z1": 2}]
    ],
    "p": 3, "V1": "y^2/2"
  },
  "certificate": {"Q": [[2]], "s_f": 0.75, "s_y": 0.5},
  "manifold": {"order": 2},
  "trigger": {"variant": "manifold-weighted", "sigma": 0.0625, "p": 3},
  "sim": {"dt": 0.0001, "t_final": 25, "x0": {"y": [0.1], "z": [0]}, "record_stride": 10},
  "batch": {"generator": "circle", "radius": 0.1, "count": 10, "split_time": 15},
  "compare": {"period": 0},
  "seed": 1
})");
    }
    if (name == "example2") {
        return Json::parse(R"({
  "model": {
    "type": "polynomial", "name": "example2",
    "A1": [[0]], "A2": [[0, 1], [-2, 3]], "B2": [[0], [1]], "K11": [[1, -4]], "K12": [[0]],
    "terms": [
      [{"c": -1, "y": 1, "z1": 1}, {"c": 4, "y": 1, "z2": 1}],
      [{"c": 1, "y": 2}],
      []
    ],
    "p": 3, "V1": "|y|"
  },
  "certificate": {"Q": [[1, 0], [0, 1]], "s_f": 0.5, "s_y": 0.5},
  "manifold": {"order": 2},
  "trigger": {"variant": "manifold-weighted", "sigma": 0.03, "p": 3},
  "sim": {"dt": 0.0001, "t_final": 25, "x0": {"y": [0.04], "z": [0.01, 0.01]}, "record_stride": 10},
  "batch": {"generator": "random", "radius": 0.05, "count": 10, "split_time": 15},
  "compare": {"period": 0},
  "seed": 1
})");
    }
    if (name == "mip") {
        Json j = Json::parse(R"({
  "model": {"type": "mip"},
  "certificate": {"Q": [[1,0,0,0,0],[0,1,0,0,0],[0,0,1,0,0],[0,0,0,1,0],[0,0,0,0,1]], "s_f": 0.5, "s_y": 0.5},
  "manifold": {"order": 3},
  "trigger": {"variant": "manifold-weighted", "sigma": 0.0001, "p": 3},
  "sim": {"dt": 0.00001, "t_final": 2, "x0": {"y": [0.05], "z": [0, 0, 0, 0, 0]}, "record_stride": 100},
  "batch": {"generator": "random", "radius": 0.05, "count": 4, "split_time": 1},
  "compare": {"period": 0},
  "seed": 1
})");
        const models::MipParams p;
        j["model"]["params"] = {{"b", p.b}, {"r", p.r}, {"b1", p.b1}, {"b2", p.b2}, {"b3", p.b3},
                                {"b4", p.b4}, {"b5", p.b5}, {"ag", p.ag}};
        j["model"]["gains"] = Json(std::vector<double>(std::begin(p.g), std::end(p.g)));
        return j;
    }
    throw ConfigError("unknown preset '" + name + "' (expected example1, example2 or mip)");
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

struct TriggerSpec {
    std::string variant = "manifold-weighted";
    double sigma = 0.0;
    double p = 3.0;
    double p_e = 1.0;
    bool use_w = false;
    double r_s = 0.0;  // dead zone only
    std::string inner = "manifold-weighted";
};

struct BatchSpec {
    std::string generator = "circle";
    double radius = 0.1;
    int count = 10;
    double split_time = std::numeric_limits<double>::infinity();
};

/// Parsed configuration plus the resolved tree it came from.
struct RunConfig {
    Json tree;
    PlantModel model;
    CertificateOptions cert;
    int order = 2;
    TriggerSpec trigger;
    SimConfig sim;
    BatchSpec batch;
    double compare_period = 0.0;
    std::uint64_t seed = 1;
};

namespace config_detail {

inline TriggerRule simple_rule(const std::string& variant, const TriggerSpec& t) {
    if (variant == "manifold-weighted") return {ManifoldWeighted{t.sigma, t.p, t.p_e}};
    if (variant == "relative-full") return {RelativeFull{t.sigma}};
    if (variant == "raw-coordinates") return {RawCoordinates{t.sigma, t.p}};
    if (variant == "relative-yv") return {RelativeYV{t.sigma, t.use_w}};
    throw ConfigError("unknown trigger variant '" + variant + "'");
}

inline void reject_unknown(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

}  // namespace config_detail

/// Builds the trigger rule; the dead-zone radius needs the certificate's P.
inline TriggerRule make_rule(const TriggerSpec& t, const Certificate& cert) {
    if (!(t.sigma > 0.0)) throw ConfigError("trigger.sigma must be positive");
    if (t.variant == "dead-zone") {
        if (!(t.r_s > 0.0)) throw ConfigError("trigger.r_s must be positive for the dead-zone rule");
        return make_dead_zone(config_detail::simple_rule(t.inner, t), dead_zone_radius(cert.P, t.r_s));
    }
    return config_detail::simple_rule(t.variant, t);
}

inline RunConfig parse_config(const Json& tree) {
    using namespace config_detail;
    reject_unknown(tree, {"model", "certificate", "manifold", "trigger", "sim", "batch", "compare", "seed"}, "config");
    RunConfig rc;
    rc.tree = tree;
    rc.model = model_from_json(at(tree, "model", "config"));

    if (tree.contains("certificate")) {
        const Json& c = tree["certificate"];
        reject_unknown(c, {"Q", "s_f", "s_y"}, "certificate");
        if (c.contains("Q")) rc.cert.Q = matrix(c["Q"], "certificate.Q");
        rc.cert.s_f = number_or(c, "s_f", 0.5, "certificate");
        rc.cert.s_y = number_or(c, "s_y", 0.5, "certificate");
    }
    if (tree.contains("manifold")) {
        reject_unknown(tree["manifold"], {"order"}, "manifold");
        rc.order = tree["manifold"].value("order", 2);
    }
    if (rc.order < 2) throw ConfigError("manifold.order must be >= 2");

    const Json& t = at(tree, "trigger", "config");
    reject_unknown(t, {"variant", "sigma", "p", "p_e", "use_w", "r_s", "inner"}, "trigger");
    rc.trigger.variant = t.value("variant", rc.trigger.variant);
    rc.trigger.sigma = number(at(t, "sigma", "trigger"), "trigger.sigma");
    rc.trigger.p = number_or(t, "p", rc.model.p, "trigger");
    rc.trigger.p_e = number_or(t, "p_e", 1.0, "trigger");
    rc.trigger.use_w = t.value("use_w", false);
    rc.trigger.r_s = number_or(t, "r_s", 0.0, "trigger");
    rc.trigger.inner = t.value("inner", rc.trigger.inner);
    rc.cert.variant = rc.trigger.variant == "relative-full" ? SigmaVariant::RelativeFull : SigmaVariant::ManifoldWeighted;

    const Json& s = at(tree, "sim", "config");
    reject_unknown(s, {"dt", "t_final", "x0", "zeno_guard_min", "record_stride", "validity_radius"}, "sim");
    rc.sim.dt = number_or(s, "dt", rc.sim.dt, "sim");
    rc.sim.t_final = number_or(s, "t_final", rc.sim.t_final, "sim");
    rc.sim.zeno_guard_min = number_or(s, "zeno_guard_min", 0.0, "sim");
    rc.sim.record_stride = s.value("record_stride", 1);
    rc.sim.validity_radius = number_or(s, "validity_radius", rc.sim.validity_radius, "sim");
    const Json& x0 = at(s, "x0", "sim");
    rc.sim.x0 = {vector(at(x0, "y", "sim.x0"), "sim.x0.y"), vector(at(x0, "z", "sim.x0"), "sim.x0.z")};
    detail::check_dims(rc.model, rc.sim.x0.y, rc.sim.x0.z);
    rc.sim.validate();

    if (tree.contains("batch")) {
        const Json& b = tree["batch"];
        reject_unknown(b, {"generator", "radius", "count", "split_time"}, "batch");
        rc.batch.generator = b.value("generator", rc.batch.generator);
        rc.batch.radius = number_or(b, "radius", rc.batch.radius, "batch");
        rc.batch.count = b.value("count", rc.batch.count);
        rc.batch.split_time = number_or(b, "split_time", rc.batch.split_time, "batch");
        if (rc.batch.generator != "circle" && rc.batch.generator != "random")
            throw ConfigError("batch.generator must be 'circle' or 'random'");
    }
    if (tree.contains("compare")) rc.compare_period = number_or(tree["compare"], "period", 0.0, "compare");
    rc.seed = tree.value("seed", std::uint64_t{1});
    return rc;
}

inline std::vector<StatePoint> batch_initial_conditions(const RunConfig& rc) {
    if (rc.batch.generator == "circle") return circle_initial_conditions(rc.model, rc.batch.radius, rc.batch.count);
    return random_initial_conditions(rc.model, rc.batch.radius, rc.batch.count, rc.seed);
}

/// Command-line overrides written into the tree so the manifest records them.
struct Overrides {
    std::optional<int> order;
    std::optional<double> sigma, dt, t_final;
    std::optional<std::uint64_t> seed;
};

inline Json apply_overrides(Json tree, const Overrides& o) {
    if (o.order) tree["manifold"]["order"] = *o.order;
    if (o.sigma) tree["trigger"]["sigma"] = *o.sigma;
    if (o.dt) tree["sim"]["dt"] = *o.dt;
    if (o.t_final) tree["sim"]["t_final"] = *o.t_final;
    if (o.seed) tree["seed"] = *o.seed;
    return tree;
}

}  // namespace evtrig
