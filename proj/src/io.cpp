#include "gpacforge/io.hpp"

#include <fstream>
#include <ostream>

namespace gpacforge {

Json rational_to_json(const Rational& q) {
    return Json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}};
}

Rational rational_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw ParseError("rational: expected {num, den} object");
    return rational_from_strings(j["num"].get<std::string>(), j["den"].get<std::string>());
}

Json poly_to_json(const MultiPoly& p) {
    Json terms = Json::array();
    for (const auto& [e, c] : p.terms()) {
        Json t;
        t["exp"] = e;
        t["num"] = c.get_num().get_str();
        t["den"] = c.get_den().get_str();
        terms.push_back(std::move(t));
    }
    return Json{{"arity", p.arity()}, {"terms", std::move(terms)}};
}

MultiPoly poly_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("arity") || !j.contains("terms"))
        throw ParseError("polynomial: expected {arity, terms}");
    MultiPoly p(j["arity"].get<int>());
    for (const auto& t : j["terms"]) {
        auto exps = t["exp"].get<std::vector<std::uint32_t>>();
        Rational c = rational_from_strings(t["num"].get<std::string>(),
                                           t["den"].get<std::string>());
        if (static_cast<int>(exps.size()) != p.arity())
            throw DimensionError("polynomial term: exponent length != arity");
        p.add_term(exps, c);
    }
    return p;
}

Json pivp_to_json(const Pivp& p) {
    p.validate();
    Json j;
    j["dim"] = p.dim;
    j["output_arity"] = p.output_arity;
    Json rhs = Json::array();
    for (const auto& q : p.rhs) rhs.push_back(poly_to_json(q));
    j["rhs"] = std::move(rhs);
    if (p.init_point) {
        Json vals = Json::array();
        for (const auto& v : p.init_point->values) vals.push_back(rational_to_json(v));
        j["init"] = Json{{"kind", "point"}, {"values", std::move(vals)}};
    } else {
        Json polys = Json::array();
        for (const auto& q : p.init_poly->polys) polys.push_back(poly_to_json(q));
        j["init"] = Json{{"kind", "polynomial"},
                         {"input_arity", p.init_poly->input_arity},
                         {"polys", std::move(polys)}};
    }
    if (!p.var_names.empty()) j["var_names"] = p.var_names;
    if (p.init_error != 0) j["init_error"] = rational_to_json(p.init_error);
    return j;
}

Pivp pivp_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("rhs") || !j.contains("init"))
        throw ParseError("pivp: expected {dim, output_arity, rhs, init}");
    Pivp p;
    p.dim = j["dim"].get<int>();
    p.output_arity = j.value("output_arity", 1);
    for (const auto& q : j["rhs"]) p.rhs.push_back(poly_from_json(q));
    const Json& init = j["init"];
    std::string kind = init.value("kind", "");
    if (kind == "point") {
        Pivp::PointInit pi;
        for (const auto& v : init["values"]) pi.values.push_back(rational_from_json(v));
        p.init_point = std::move(pi);
    } else if (kind == "polynomial") {
        Pivp::PolyInit pi;
        pi.input_arity = init["input_arity"].get<int>();
        for (const auto& q : init["polys"]) pi.polys.push_back(poly_from_json(q));
        p.init_poly = std::move(pi);
    } else {
        throw ParseError("pivp init: kind must be 'point' or 'polynomial'");
    }
    if (j.contains("var_names")) p.var_names = j["var_names"].get<std::vector<std::string>>();
    if (j.contains("init_error")) p.init_error = rational_from_json(j["init_error"]);
    p.validate();
    return p;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.samples.empty()) return;
    const int d = static_cast<int>(traj.samples.front().y.size());
    os << "t";
    for (int i = 1; i <= d; ++i) os << ",y" << i;
    os << ",len,pslen\n";
    for (const auto& s : traj.samples) {
        os << s.t.str();
        for (const auto& v : s.y) os << "," << v.str();
        os << "," << s.len.str() << "," << s.pslen.str() << "\n";
    }
}

Json trajectory_sidecar(const Trajectory& traj, const IntegrationConfig& cfg,
                        std::uint64_t seed) {
    Json j;
    j["stop_reason"] = to_string(traj.stop_reason);
    j["global_error_bound"] = traj.global_error_bound.str();
    j["quadrature_error"] = traj.quadrature_error.str();
    j["accepted_steps"] = traj.accepted_steps;
    j["rejected_steps"] = traj.rejected_steps;
    j["seed"] = seed;
    j["config"] = Json{{"order", cfg.order},
                       {"precision_bits", cfg.precision_bits},
                       {"local_tol_log2", cfg.local_tol_log2},
                       {"max_steps", cfg.max_steps}};
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace gpacforge
