#include "dacert/controllers.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace dacert::ctrl {

using Kind = WeightsError::Kind;
using nlohmann::json;

namespace {

void require_finite(std::span<const double> v, const std::string& where) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw WeightsError(Kind::non_finite, where + " contains a non-finite entry");
        }
    }
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) {
        throw WeightsError(Kind::wrong_type, where + " must be an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw WeightsError(Kind::missing_field, where + " is missing \"" + key + "\"");
    }
    return *it;
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
            throw WeightsError(Kind::wrong_type, where + " has unknown key \"" + item.key() + "\"");
        }
    }
}

double number(const json& v, const std::string& where) {
    if (v.is_null()) {
        throw WeightsError(Kind::non_finite, where + " is null");
    }
    if (!v.is_number()) {
        throw WeightsError(Kind::wrong_type, where + " must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw WeightsError(Kind::non_finite, where + " is not finite");
    }
    return x;
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) {
        throw WeightsError(Kind::wrong_type, where + " must be an array");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

AffineScale parse_scale(const json& obj, const std::string& where) {
    AffineScale s;
    s.offset = numbers(field(obj, "offset", where), where + ".offset");
    s.scale = numbers(field(obj, "scale", where), where + ".scale");
    only_keys(obj, {"offset", "scale"}, where);
    return s;
}

json scale_json(const AffineScale& s) { return {{"offset", s.offset}, {"scale", s.scale}}; }

} // namespace

void SirenNetwork::validate() const {
    if (layers.empty()) {
        throw WeightsError(Kind::missing_field, "network has no layers");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        const std::string where = "layer " + std::to_string(l);
        if (L.rows == 0 || L.cols == 0 || L.W.size() != L.rows * L.cols || L.b.size() != L.rows) {
            throw WeightsError(Kind::dimension_mismatch, where + " has inconsistent W/b sizes");
        }
        if (l > 0 && L.cols != layers[l - 1].rows) {
            throw WeightsError(Kind::dimension_mismatch, where + " expects " + std::to_string(L.cols) +
                                                             " inputs but the previous layer has " +
                                                             std::to_string(layers[l - 1].rows) + " outputs");
        }
        if (L.linear != (l + 1 == layers.size())) {
            throw WeightsError(Kind::wrong_type, "exactly the last layer must be linear (" + where + ")");
        }
        if (!L.linear && !(L.omega > 0.0 && std::isfinite(L.omega))) {
            throw WeightsError(Kind::non_finite, where + " needs a positive finite omega");
        }
        require_finite(L.W, where + ".W");
        require_finite(L.b, where + ".b");
    }
    auto check_scale = [](const AffineScale& s, std::size_t n, const std::string& name) {
        if (s.offset.size() != n || s.scale.size() != n) {
            throw WeightsError(Kind::dimension_mismatch,
                               name + " must have " + std::to_string(n) + " offsets and scales");
        }
        require_finite(s.offset, name + ".offset");
        require_finite(s.scale, name + ".scale");
    };
    check_scale(input, input_dim(), "input_scale");
    check_scale(output, output_dim(), "output_scale");
}

SirenNetwork init_siren(std::span<const std::size_t> dims, double omega, std::uint64_t seed) {
    if (dims.size() < 3) {
        throw DimensionError("init_siren needs inputs, at least one hidden layer and outputs");
    }
    if (!(omega > 0.0)) {
        throw DomainError("init_siren: omega must be positive");
    }
    std::mt19937_64 rng(seed);
    SirenNetwork net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer L;
        L.cols = dims[l];
        L.rows = dims[l + 1];
        if (L.cols == 0 || L.rows == 0) {
            throw DimensionError("init_siren: zero layer size");
        }
        L.omega = omega;
        L.linear = l + 2 == dims.size();
        const double M = static_cast<double>(L.cols);
        const double bound = l == 0 ? 1.0 / M : std::sqrt(6.0 / M) / omega;
        std::uniform_real_distribution<double> u(-bound, bound);
        L.W.resize(L.rows * L.cols);
        for (auto& w : L.W) {
            w = u(rng);
        }
        L.b.assign(L.rows, 0.0);
        net.layers.push_back(std::move(L));
    }
    net.input = {std::vector<double>(dims.front(), 0.0), std::vector<double>(dims.front(), 1.0)};
    net.output = {std::vector<double>(dims.back(), 0.0), std::vector<double>(dims.back(), 1.0)};
    return net;
}

SirenNetwork parse_siren(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        static const std::regex non_finite(R"((^|[^A-Za-z"])-?(NaN|Infinity)\b)");
        if (std::regex_search(json_text, non_finite)) {
            throw WeightsError(Kind::non_finite, "weights file contains NaN or Infinity");
        }
        throw WeightsError(Kind::wrong_type, std::string("weights file is not valid JSON: ") + e.what());
    }
    SirenNetwork net;
    net.input = parse_scale(field(doc, "input_scale", "weights"), "input_scale");
    net.output = parse_scale(field(doc, "output_scale", "weights"), "output_scale");
    if (auto it = doc.find("normalize_output"); it != doc.end()) {
        if (!it->is_boolean()) {
            throw WeightsError(Kind::wrong_type, "normalize_output must be a boolean");
        }
        net.normalize_output = it->get<bool>();
    }
    only_keys(doc, {"input_scale", "output_scale", "normalize_output", "layers"}, "weights");
    const auto& layers = field(doc, "layers", "weights");
    if (!layers.is_array() || layers.empty()) {
        throw WeightsError(Kind::wrong_type, "layers must be a non-empty array");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string where = "layers[" + std::to_string(l) + "]";
        const auto& jl = layers[l];
        const auto& type = field(jl, "type", where);
        if (!type.is_string() || (type != "siren" && type != "linear")) {
            throw WeightsError(Kind::wrong_type, where + ".type must be \"siren\" or \"linear\"");
        }
        DenseLayer L;
        L.linear = type == "linear";
        if (L.linear) {
            only_keys(jl, {"type", "W", "b"}, where);
        } else {
            only_keys(jl, {"type", "omega", "W", "b"}, where);
        }
        if (!L.linear) {
            if (auto it = jl.find("omega"); it != jl.end()) {
                L.omega = number(*it, where + ".omega");
            }
        }
        const auto& W = field(jl, "W", where);
        if (!W.is_array() || W.empty()) {
            throw WeightsError(Kind::wrong_type, where + ".W must be a non-empty array of rows");
        }
        L.rows = W.size();
        for (std::size_t i = 0; i < W.size(); ++i) {
            auto row = numbers(W[i], where + ".W[" + std::to_string(i) + "]");
            if (i == 0) {
                L.cols = row.size();
            } else if (row.size() != L.cols) {
                throw WeightsError(Kind::dimension_mismatch, where + ".W has ragged rows");
            }
            L.W.insert(L.W.end(), row.begin(), row.end());
        }
        L.b = numbers(field(jl, "b", where), where + ".b");
        net.layers.push_back(std::move(L));
    }
    net.validate();
    return net;
}

SirenNetwork load_siren(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw WeightsError(Kind::io, "cannot read weights file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_siren(ss.str());
}

std::string dump_siren(const SirenNetwork& net) {
    net.validate();
    json doc;
    doc["input_scale"] = scale_json(net.input);
    doc["output_scale"] = scale_json(net.output);
    doc["normalize_output"] = net.normalize_output;
    json layers = json::array();
    for (const auto& L : net.layers) {
        json jl;
        jl["type"] = L.linear ? "linear" : "siren";
        if (!L.linear) {
            jl["omega"] = L.omega;
        }
        json W = json::array();
        for (std::size_t i = 0; i < L.rows; ++i) {
            W.push_back(std::vector<double>(L.W.begin() + i * L.cols, L.W.begin() + (i + 1) * L.cols));
        }
        jl["W"] = std::move(W);
        jl["b"] = L.b;
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(1) + "\n";
}

void save_siren(const SirenNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw WeightsError(Kind::io, "cannot write weights file " + path.string());
    }
    out << dump_siren(net);
}

SirenController::SirenController(SirenNetwork net) : net_(std::move(net)) { net_.validate(); }

void SirenController::apply(std::span<const double> x, std::span<double> u) const {
    auto y = net_.forward(x);
    std::copy(y.begin(), y.end(), u.begin());
}

void SirenController::apply(std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> u) const {
    auto y = net_.forward(x);
    std::move(y.begin(), y.end(), u.begin());
}

AnalyticController::AnalyticController(std::size_t inputs, std::vector<double> K, std::vector<double> c,
                                       double saturation)
    : inputs_(inputs), K_(std::move(K)), c_(std::move(c)), s_(saturation) {
    if (inputs_ == 0 || c_.empty() || K_.size() != inputs_ * c_.size()) {
        throw DimensionError("analytic controller: gain matrix must be outputs x inputs");
    }
    if (!(s_ > 0.0) || !std::isfinite(s_)) {
        throw DomainError("analytic controller: saturation must be positive");
    }
}

template <class S>
void AnalyticController::eval(std::span<const S> x, std::span<S> u) const {
    using da::tanh;
    using std::tanh;
    if (x.size() != inputs_ || u.size() != c_.size()) {
        throw DimensionError("analytic controller: dimension mismatch");
    }
    for (std::size_t i = 0; i < c_.size(); ++i) {
        S acc = x[0];
        acc = c_[i];
        for (std::size_t j = 0; j < inputs_; ++j) {
            da::add_scaled(acc, K_[i * inputs_ + j], x[j]);
        }
        u[i] = s_ * tanh(acc * (1.0 / s_));
    }
}

void AnalyticController::apply(std::span<const double> x, std::span<double> u) const { eval(x, u); }
void AnalyticController::apply(std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> u) const {
    eval(x, u);
}

} // namespace dacert::ctrl
