#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "linalg.hpp"
#include "multimodal.hpp"
#include "objectives.hpp"
#include "solvers.hpp"
#include "trace_io.hpp"

namespace ssopga {

using json = nlohmann::json;

namespace detail {

inline const json& require_field(const json& j, const char* key, const char* what)
{
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string(what) + ": missing field '" + key + "'");
    }
    return j.at(key);
}

inline Vector vector_from_json(const json& j, const char* what)
{
    if (!j.is_array()) throw std::invalid_argument(std::string(what) + ": expected an array");
    Vector v;
    v.reserve(j.size());
    for (const json& e : j) {
        if (!e.is_number()) throw std::invalid_argument(std::string(what) + ": non-numeric entry");
        v.push_back(e.get<double>());
    }
    return v;
}

inline DenseMatrix matrix_from_json(const json& j, const char* what)
{
    if (!j.is_array() || j.empty()) {
        throw std::invalid_argument(std::string(what) + ": expected a non-empty array of rows");
    }
    std::vector<Vector> rows;
    for (const json& r : j) rows.push_back(vector_from_json(r, what));
    return DenseMatrix::from_rows(rows);
}

inline json matrix_to_json(const DenseMatrix& A)
{
    json rows = json::array();
    for (std::size_t i = 0; i < A.rows(); ++i) {
        const auto r = A.row(i);
        rows.push_back(Vector(r.begin(), r.end()));
    }
    return rows;
}

}  // namespace detail

/// {"H": [[...], ...], "x": [...]}, H row-major.
inline LinearInverseProblem problem_from_json(const json& j)
{
    return LinearInverseProblem(
        detail::matrix_from_json(detail::require_field(j, "H", "problem"), "problem.H"),
        detail::vector_from_json(detail::require_field(j, "x", "problem"), "problem.x"));
}

inline json problem_to_json(const LinearInverseProblem& p)
{
    return {{"H", detail::matrix_to_json(p.H())}, {"x", p.x()}};
}

/*
 * {"K": [[..]], "S": [[..]], "f": [[..]], "X": [..], "Y": [..],
 *  "beta": b, "gamma": g, "alpha1": a1, "alpha2": a2, "prox_weight": w}
 * prox_weight is optional; > 0 selects the soft-threshold stand-in for
 * the prior's proximal map.
 */
inline MultiModalModel multimodal_from_json(const json& j)
{
    MultiModalModel m;
    m.K = detail::matrix_from_json(detail::require_field(j, "K", "multimodal"), "multimodal.K");
    m.S = detail::matrix_from_json(detail::require_field(j, "S", "multimodal"), "multimodal.S");
    m.F = detail::matrix_from_json(detail::require_field(j, "f", "multimodal"), "multimodal.f");
    m.X = detail::vector_from_json(detail::require_field(j, "X", "multimodal"), "multimodal.X");
    m.Y = detail::vector_from_json(detail::require_field(j, "Y", "multimodal"), "multimodal.Y");
    m.beta = j.value("beta", 1.0);
    m.gamma = j.value("gamma", 1.0);
    m.alpha1 = j.value("alpha1", 0.0);
    m.alpha2 = j.value("alpha2", 0.0);
    const double w = j.value("prox_weight", 0.0);
    m.prox_phi = w > 0.0 ? ProximalTerm::l1(w) : ProximalTerm::identity();
    m.validate();
    return m;
}

inline json multimodal_to_json(const MultiModalModel& m)
{
    return {{"K", detail::matrix_to_json(m.K)},
            {"S", detail::matrix_to_json(m.S)},
            {"f", detail::matrix_to_json(m.F)},
            {"X", m.X},
            {"Y", m.Y},
            {"beta", m.beta},
            {"gamma", m.gamma},
            {"alpha1", m.alpha1},
            {"alpha2", m.alpha2},
            {"prox_weight", m.prox_phi.is_identity() ? 0.0 : m.prox_phi.weight()}};
}

/// Field names mirror SolverConfig; absent fields keep their defaults and
/// "clip" may be null.
inline SolverConfig config_from_json(const json& j)
{
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    SolverConfig c;
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("max_iters")) {
        const double v = j.at("max_iters").get<double>();
        if (!(v >= 1.0)) throw std::invalid_argument("config: max_iters must be >= 1");
        c.max_iters = static_cast<std::size_t>(v);
    }
    c.tolerance = j.value("tolerance", c.tolerance);
    if (j.contains("clip") && !j.at("clip").is_null()) c.clip = j.at("clip").get<double>();
    c.epsilon = j.value("epsilon", c.epsilon);
    c.certified = j.value("certified", c.certified);
    c.oscillation_window = j.value("oscillation_window", c.oscillation_window);
    c.record_dimension_cap = j.value("record_dimension_cap", c.record_dimension_cap);
    c.validate();
    return c;
}

inline json config_to_json(const SolverConfig& c)
{
    json j = {{"method", to_string(c.method)},
              {"alpha", c.alpha},
              {"learning_rate", c.learning_rate},
              {"max_iters", c.max_iters},
              {"tolerance", c.tolerance},
              {"clip", nullptr},
              {"epsilon", c.epsilon},
              {"certified", c.certified},
              {"oscillation_window", c.oscillation_window},
              {"record_dimension_cap", c.record_dimension_cap}};
    if (c.clip) j["clip"] = *c.clip;
    return j;
}

inline json load_json_file(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace ssopga
