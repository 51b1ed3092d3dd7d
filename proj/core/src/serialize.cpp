#include "r1/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace r1 {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid JSON document");
    return j;
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
    return *it;
}

std::vector<complexd> vector_from_json(const json& j, std::size_t expect_dim) {
    const json& re = field(j, "re");
    const json& im = field(j, "im");
    if (!re.is_array() || !im.is_array() || re.size() != im.size())
        throw ParseError("field \"re\"/\"im\": expected arrays of equal length");
    if (expect_dim != 0 && re.size() != expect_dim)
        throw ParseError("field \"re\": vector length does not match \"n\"");
    std::vector<complexd> v(re.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = complexd(re[i].get<double>(), im[i].get<double>());
    return v;
}

json vector_to_json(const std::vector<complexd>& v) {
    json re = json::array(), im = json::array();
    for (const auto& e : v) {
        re.push_back(e.real());
        im.push_back(e.imag());
    }
    return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

}  // namespace

std::string matrix_to_json(const HermitianMatrix& Z) {
    const std::size_t n = Z.dim();
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json re_row = json::array(), im_row = json::array();
        for (std::size_t j = 0; j < n; ++j) {
            re_row.push_back(Z(i, j).real());
            im_row.push_back(Z(i, j).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    json out{{"n", n}, {"re", std::move(re)}, {"im", std::move(im)}};
    return out.dump();
}

HermitianMatrix matrix_from_json(const std::string& text) {
    json j = parse_or_throw(text);
    const std::size_t n = field(j, "n").get<std::size_t>();
    const json& re = field(j, "re");
    const json& im = field(j, "im");
    if (!re.is_array() || re.size() != n) throw ParseError("field \"re\": expected n rows");
    if (!im.is_array() || im.size() != n) throw ParseError("field \"im\": expected n rows");
    std::vector<complexd> entries(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (re[i].size() != n || im[i].size() != n)
            throw ParseError("field \"re\"/\"im\": ragged rows");
        for (std::size_t k = 0; k < n; ++k)
            entries[i * n + k] = complexd(re[i][k].get<double>(), im[i][k].get<double>());
    }
    return HermitianMatrix::from_entries(n, entries);
}

std::string design_to_json(const WeightedDesign& d, std::uint64_t seed, double theta_inf) {
    json vectors = json::array();
    for (const auto& v : d.vectors) vectors.push_back(vector_to_json(v));
    json out{{"n", d.dim},
             {"t", d.order},
             {"vectors", std::move(vectors)},
             {"weights", d.weights},
             {"meta", json{{"seed", seed}, {"theta_inf", theta_inf}}}};
    return out.dump();
}

WeightedDesign design_from_json(const std::string& text) {
    json j = parse_or_throw(text);
    WeightedDesign d;
    d.dim = field(j, "n").get<std::size_t>();
    d.order = field(j, "t").get<int>();
    const json& vectors = field(j, "vectors");
    if (!vectors.is_array() || vectors.empty()) throw ParseError("field \"vectors\": expected nonempty array");
    for (const auto& v : vectors) d.vectors.push_back(vector_from_json(v, d.dim));
    const json& weights = field(j, "weights");
    if (!weights.is_array() || weights.size() != d.vectors.size())
        throw ParseError("field \"weights\": length must match \"vectors\"");
    for (const auto& w : weights) d.weights.push_back(w.get<double>());
    try {
        d.validate();
    } catch (const std::invalid_argument& err) {
        throw ParseError(std::string("design invariants violated: ") + err.what());
    }
    return d;
}

std::string ensemble_to_json(const MeasurementEnsemble& e) {
    json vectors = json::array();
    for (const auto& v : e.vectors) vectors.push_back(vector_to_json(v));
    json out{{"n", e.dim},
             {"m", e.count()},
             {"vectors", std::move(vectors)},
             {"matrix_scale", e.matrix_scale},
             {"field", e.field == Field::Complex ? "complex" : "real"}};
    return out.dump();
}

MeasurementEnsemble ensemble_from_json(const std::string& text) {
    json j = parse_or_throw(text);
    MeasurementEnsemble e;
    e.dim = field(j, "n").get<std::size_t>();
    e.matrix_scale = field(j, "matrix_scale").get<double>();
    const std::string f = field(j, "field").get<std::string>();
    if (f == "complex")
        e.field = Field::Complex;
    else if (f == "real")
        e.field = Field::Real;
    else
        throw ParseError("field \"field\": expected \"complex\" or \"real\"");
    const json& vectors = field(j, "vectors");
    if (!vectors.is_array()) throw ParseError("field \"vectors\": expected array");
    for (const auto& v : vectors) e.vectors.push_back(vector_from_json(v, e.dim));
    if (j.contains("m") && j["m"].get<std::size_t>() != e.vectors.size())
        throw ParseError("field \"m\": does not match number of vectors");
    return e;
}

std::string check_report_to_json(const CheckReport& report) {
    json out{{"quantity", report.quantity},
             {"estimate", report.estimate},
             {"stderr", report.stderr_},
             {"bound", report.bound},
             {"bound_source", report.bound_source},
             {"pass", report.pass}};
    return out.dump();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void save_design(const WeightedDesign& d, const std::string& path, std::uint64_t seed,
                 double theta_inf) {
    write_text_file(path, design_to_json(d, seed, theta_inf));
}

WeightedDesign load_design(const std::string& path) { return design_from_json(read_text_file(path)); }

}  // namespace r1
