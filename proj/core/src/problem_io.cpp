#include "mflq/problem_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mflq/errors.hpp"

namespace mflq {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); }

const Json& field(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError("missing field " + key);
    return *it;
}

double number(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int positive_int(const Json& obj, const std::string& key) {
    const auto& v = field(obj, key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) fail("/" + key, "expected a positive integer");
    return v.get<int>();
}

Vector vector_from(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], path + "/" + std::to_string(i));
    return out;
}

Matrix matrix_from(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty 2-D array");
    const auto rows = v.size();
    if (!v[0].is_array() || v[0].empty()) fail(path + "/0", "expected a non-empty array of numbers");
    const auto cols = v[0].size();
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row_path = path + "/" + std::to_string(i);
        if (!v[i].is_array()) fail(row_path, "expected an array of numbers");
        if (v[i].size() != cols) fail(row_path, "ragged row (expected " + std::to_string(cols) + " entries)");
        for (std::size_t j = 0; j < cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                number(v[i][j], row_path + "/" + std::to_string(j));
        }
    }
    return out;
}

bool is_broadcast(const Json& v) {
    return v.is_array() && !v.empty() && v[0].is_array() && !v[0].empty() && !v[0][0].is_array();
}

std::vector<Matrix> sequence_from(const Json& doc, const std::string& key, int horizon) {
    const auto& v = field(doc, key);
    const auto path = "/" + key;
    if (is_broadcast(v)) return std::vector<Matrix>(static_cast<std::size_t>(horizon), matrix_from(v, path));
    if (!v.is_array()) fail(path, "expected a 2-D array or an array of 2-D arrays");
    if (v.size() < static_cast<std::size_t>(horizon)) {
        fail(path, "missing stage k=" + std::to_string(v.size()) + " (N=" + std::to_string(horizon) + ")");
    }
    if (v.size() > static_cast<std::size_t>(horizon)) {
        fail(path, "has " + std::to_string(v.size()) + " stages, expected N=" + std::to_string(horizon));
    }
    std::vector<Matrix> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(matrix_from(v[k], path + "/" + std::to_string(k)));
    return out;
}

InitialCondition initial_from(const Json& doc, int n) {
    auto it = doc.find("initial");
    if (it == doc.end()) return InitialCondition::deterministic(Vector::Zero(n));
    const Json& init = *it;
    if (!init.is_object()) fail("/initial", "expected an object");
    auto kind_it = init.find("kind");
    if (kind_it == init.end() || !kind_it->is_string()) fail("/initial/kind", "expected a string");
    const auto kind = kind_it->get<std::string>();

    auto check_dim = [n](Eigen::Index got, const std::string& path) {
        if (got != n) fail(path, "dimension " + std::to_string(got) + ", expected n=" + std::to_string(n));
    };

    try {
        if (kind == "deterministic") {
            auto zeta = vector_from(field(init, "zeta"), "/initial/zeta");
            check_dim(zeta.size(), "/initial/zeta");
            return InitialCondition::deterministic(std::move(zeta));
        }
        if (kind == "gaussian") {
            auto mean = vector_from(field(init, "mean"), "/initial/mean");
            check_dim(mean.size(), "/initial/mean");
            auto cov = matrix_from(field(init, "covariance"), "/initial/covariance");
            return InitialCondition::gaussian(std::move(mean), std::move(cov));
        }
        if (kind == "finite_support") {
            const auto& atoms_json = field(init, "atoms");
            if (!atoms_json.is_array() || atoms_json.empty()) fail("/initial/atoms", "expected a non-empty array");
            std::vector<InitialCondition::Atom> atoms;
            for (std::size_t i = 0; i < atoms_json.size(); ++i) {
                const auto path = "/initial/atoms/" + std::to_string(i);
                if (!atoms_json[i].is_object()) fail(path, "expected an object");
                auto point = vector_from(field(atoms_json[i], "point"), path + "/point");
                check_dim(point.size(), path + "/point");
                atoms.push_back({std::move(point), number(field(atoms_json[i], "probability"), path + "/probability")});
            }
            return InitialCondition::finite_support(std::move(atoms));
        }
    } catch (const ArgumentError& e) {
        throw ParseError(e.what());
    }
    fail("/initial/kind", "unknown kind \"" + kind + "\"");
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

template <typename Get>
Json sequence_json(const ProblemSpec& spec, Get get) {
    const auto& stages = spec.stages();
    bool constant = true;
    for (const auto& s : stages) constant = constant && get(s) == get(stages.front());
    if (constant) return matrix_json(get(stages.front()));
    Json out = Json::array();
    for (const auto& s : stages) out.push_back(matrix_json(get(s)));
    return out;
}

}  // namespace

LoadedProblem load_problem(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("/: expected a JSON object");

    const int n = positive_int(doc, "n");
    const int m = positive_int(doc, "m");
    const int horizon = positive_int(doc, "N");

    const auto A = sequence_from(doc, "A", horizon);
    const auto Abar = sequence_from(doc, "Abar", horizon);
    const auto B = sequence_from(doc, "B", horizon);
    const auto Bbar = sequence_from(doc, "Bbar", horizon);
    const auto C = sequence_from(doc, "C", horizon);
    const auto Cbar = sequence_from(doc, "Cbar", horizon);
    const auto D = sequence_from(doc, "D", horizon);
    const auto Dbar = sequence_from(doc, "Dbar", horizon);
    const auto Q = sequence_from(doc, "Q", horizon);
    const auto Qbar = sequence_from(doc, "Qbar", horizon);
    const auto R = sequence_from(doc, "R", horizon);
    const auto Rbar = sequence_from(doc, "Rbar", horizon);
    auto G = matrix_from(field(doc, "G_N"), "/G_N");
    auto Gbar = matrix_from(field(doc, "Gbar_N"), "/Gbar_N");

    std::vector<StageCoefficients> stages(static_cast<std::size_t>(horizon));
    for (std::size_t k = 0; k < stages.size(); ++k) {
        stages[k] = {A[k], Abar[k], C[k], Cbar[k], B[k], Bbar[k], D[k], Dbar[k], Q[k], Qbar[k], R[k], Rbar[k]};
    }
    ProblemSpec spec(n, m, std::move(stages), std::move(G), std::move(Gbar));
    auto initial = initial_from(doc, n);
    return {std::move(spec), std::move(initial)};
}

LoadedProblem load_problem_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_problem(buf.str());
}

std::string serialize_problem(const ProblemSpec& spec, const InitialCondition& initial) {
    // Keys in a fixed, readable order; each value is dumped compactly on its own line.
    std::vector<std::pair<std::string, Json>> entries;
    entries.emplace_back("n", spec.n());
    entries.emplace_back("m", spec.m());
    entries.emplace_back("N", spec.horizon());
    entries.emplace_back("A", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.A; }));
    entries.emplace_back("Abar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Abar; }));
    entries.emplace_back("B", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.B; }));
    entries.emplace_back("Bbar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Bbar; }));
    entries.emplace_back("C", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.C; }));
    entries.emplace_back("Cbar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Cbar; }));
    entries.emplace_back("D", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.D; }));
    entries.emplace_back("Dbar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Dbar; }));
    entries.emplace_back("Q", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Q; }));
    entries.emplace_back("Qbar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Qbar; }));
    entries.emplace_back("R", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.R; }));
    entries.emplace_back("Rbar", sequence_json(spec, [](const StageCoefficients& s) -> const Matrix& { return s.Rbar; }));
    entries.emplace_back("G_N", matrix_json(spec.G()));
    entries.emplace_back("Gbar_N", matrix_json(spec.Gbar()));

    Json init = Json::object();
    switch (initial.kind()) {
        case InitialCondition::Kind::deterministic:
            init["kind"] = "deterministic";
            init["zeta"] = vector_json(initial.mean());
            break;
        case InitialCondition::Kind::gaussian:
            init["kind"] = "gaussian";
            init["mean"] = vector_json(initial.gaussian_mean());
            init["covariance"] = matrix_json(initial.gaussian_covariance());
            break;
        case InitialCondition::Kind::finite_support: {
            init["kind"] = "finite_support";
            Json atoms = Json::array();
            for (const auto& a : initial.support()) {
                atoms.push_back(Json{{"point", vector_json(a.point)}, {"probability", a.probability}});
            }
            init["atoms"] = std::move(atoms);
            break;
        }
    }
    entries.emplace_back("initial", std::move(init));

    std::string out = "{\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out += "  " + Json(entries[i].first).dump() + ": " + entries[i].second.dump();
        out += i + 1 < entries.size() ? ",\n" : "\n";
    }
    out += "}\n";
    return out;
}

}  // namespace mflq
