#include "mixrisk/io.hpp"

#include <fstream>
#include <variant>

#include "mixrisk/errors.hpp"

namespace mixrisk {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "." + key + ": missing");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path + ": expected a number");
    return v.get<double>();
}

Vector<double> vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path + ": expected an array of numbers");
    Vector<double> out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[Eigen::Index(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

Matrix<double> matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ValidationError(path + ": expected a non-empty array of rows");
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Matrix<double> out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!v[r].is_array() || v[r].size() != cols)
            throw ValidationError(rp + ": expected a row of " + std::to_string(cols) + " numbers");
        for (std::size_t c = 0; c < cols; ++c)
            out(Eigen::Index(r), Eigen::Index(c)) = number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return out;
}

GeneratorKind<double> generator(const json& v, const std::string& path) {
    const json& type = field(v, "type", path);
    if (!type.is_string()) throw ValidationError(path + ".type: expected a string");
    const auto name = type.get<std::string>();
    if (name == "normal") return Normal{};
    if (name == "student-t") return StudentT<double>{number(field(v, "nu", path), path + ".nu")};
    throw ValidationError(path + ".type: unknown generator \"" + name + "\" (expected student-t or normal)");
}

json rows(const Matrix<double>& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

json list(const Vector<double>& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

}  // namespace

ModelFile parse_model_file(const json& j) {
    ModelFile file;
    const json& dim = field(j, "dimension", "$");
    if (!dim.is_number_integer()) throw ValidationError("$.dimension: expected an integer");
    file.model.dimension = dim.get<int>();
    const json& comps = field(j, "components", "$");
    if (!comps.is_array()) throw ValidationError("$.components: expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string path = "components[" + std::to_string(i) + "]";
        const json& c = comps[i];
        EllipticComponent<double> comp;
        comp.weight = number(field(c, "weight", path), path + ".weight");
        comp.mean = vector(field(c, "mean", path), path + ".mean");
        comp.scale = matrix(field(c, "scale", path), path + ".scale");
        comp.generator = generator(field(c, "generator", path), path + ".generator");
        file.model.components.push_back(std::move(comp));
    }
    if (j.contains("portfolio")) {
        const json& p = j["portfolio"];
        Portfolio<double> port;
        port.delta = vector(field(p, "delta", "portfolio"), "portfolio.delta");
        if (p.contains("theta")) port.theta = number(p["theta"], "portfolio.theta");
        if (p.contains("horizon")) port.horizon = number(p["horizon"], "portfolio.horizon");
        file.portfolio = std::move(port);
    }
    return file;
}

ModelFile load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("input: " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_model_file(j);
}

json to_json(const MixtureModel<double>& model) {
    json comps = json::array();
    for (const auto& c : model.components) {
        json g;
        if (const auto* t = std::get_if<StudentT<double>>(&c.generator)) {
            g = {{"type", "student-t"}, {"nu", t->nu}};
        } else if (std::holds_alternative<Normal>(c.generator)) {
            g = {{"type", "normal"}};
        } else {
            throw ValidationError("to_json: custom generators have no file representation");
        }
        comps.push_back({{"weight", c.weight}, {"mean", list(c.mean)}, {"scale", rows(c.scale)}, {"generator", g}});
    }
    return {{"dimension", model.dimension}, {"components", comps}};
}

json to_json(const Portfolio<double>& p) {
    return {{"delta", list(p.delta)}, {"theta", p.theta}, {"horizon", p.horizon}};
}

json to_json(const ModelFile& file) {
    json j = to_json(file.model);
    if (file.portfolio) j["portfolio"] = to_json(*file.portfolio);
    return j;
}

}  // namespace mixrisk
