#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dacert/da/taylor_poly.hpp"
#include "dacert/errors.hpp"

namespace dacert::ctrl {

// Smooth state feedback u = g(x), evaluable on floats and polynomials.
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual void apply(std::span<const double> x, std::span<double> u) const = 0;
    virtual void apply(std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> u) const = 0;
};

// y = sin(omega (W x + b)), or W x + b for the final linear layer.
// W is row-major, rows x cols.
struct DenseLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> W;
    std::vector<double> b;
    double omega = 30.0;
    bool linear = false;

    double weight(std::size_t i, std::size_t j) const { return W[i * cols + j]; }
};

// z = (x - offset) * scale on the way in; u = y * scale + offset on the way out.
struct AffineScale {
    std::vector<double> offset;
    std::vector<double> scale;
};

class SirenNetwork {
public:
    std::vector<DenseLayer> layers;
    AffineScale input;
    AffineScale output;
    bool normalize_output = false;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().rows; }

    // Checks chaining, layer kinds, scaler lengths and finiteness.
    void validate() const;

    template <class S>
    std::vector<S> forward(std::span<const S> x) const;
};

// dims = {inputs, hidden..., outputs}; the first layer draws from
// U(-1/M, 1/M), later ones from U(-sqrt(6/M)/omega, sqrt(6/M)/omega), M the
// fan-in. Biases start at zero and scalers at the identity.
SirenNetwork init_siren(std::span<const std::size_t> dims, double omega, std::uint64_t seed);

SirenNetwork parse_siren(const std::string& json_text);
SirenNetwork load_siren(const std::filesystem::path& path);
std::string dump_siren(const SirenNetwork& net);
void save_siren(const SirenNetwork& net, const std::filesystem::path& path);

class SirenController final : public Controller {
public:
    explicit SirenController(SirenNetwork net);

    std::size_t input_dim() const override { return net_.input_dim(); }
    std::size_t output_dim() const override { return net_.output_dim(); }
    void apply(std::span<const double> x, std::span<double> u) const override;
    void apply(std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> u) const override;

    const SirenNetwork& network() const { return net_; }

private:
    SirenNetwork net_;
};

// u_i = s tanh((K x + c)_i / s): saturated linear feedback, |u_i| < s.
class AnalyticController final : public Controller {
public:
    AnalyticController(std::size_t inputs, std::vector<double> K, std::vector<double> c, double saturation);

    std::size_t input_dim() const override { return inputs_; }
    std::size_t output_dim() const override { return c_.size(); }
    void apply(std::span<const double> x, std::span<double> u) const override;
    void apply(std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> u) const override;

    double saturation() const { return s_; }

private:
    template <class S>
    void eval(std::span<const S> x, std::span<S> u) const;

    std::size_t inputs_;
    std::vector<double> K_;
    std::vector<double> c_;
    double s_;
};

template <class S>
std::vector<S> SirenNetwork::forward(std::span<const S> x) const {
    using da::sin;
    using std::sin;
    using da::sqrt;
    using std::sqrt;
    if (layers.empty()) {
        throw DimensionError("network has no layers");
    }
    if (x.size() != input_dim()) {
        throw DimensionError("network expects " + std::to_string(input_dim()) + " inputs, got " +
                             std::to_string(x.size()));
    }
    std::vector<S> cur(x.begin(), x.end());
    if (!input.scale.empty()) {
        for (std::size_t i = 0; i < cur.size(); ++i) {
            cur[i] -= input.offset[i];
            cur[i] *= input.scale[i];
        }
    }
    std::vector<S> next;
    for (const auto& L : layers) {
        next.clear();
        next.reserve(L.rows);
        for (std::size_t i = 0; i < L.rows; ++i) {
            S acc = cur[0];
            acc = L.b[i];
            for (std::size_t j = 0; j < L.cols; ++j) {
                da::add_scaled(acc, L.weight(i, j), cur[j]);
            }
            if (L.linear) {
                next.push_back(std::move(acc));
            } else {
                next.push_back(sin(L.omega * acc));
            }
        }
        std::swap(cur, next);
    }
    if (!output.scale.empty()) {
        for (std::size_t i = 0; i < cur.size(); ++i) {
            cur[i] *= output.scale[i];
            cur[i] += output.offset[i];
        }
    }
    if (normalize_output) {
        S sq = cur[0] * cur[0];
        for (std::size_t i = 1; i < cur.size(); ++i) {
            sq += cur[i] * cur[i];
        }
        if (!(sqrt(da::constant_part(sq)) > 1e-6)) {
            throw DomainError("network output norm below 1e-6; direction undefined");
        }
        const S inv = 1.0 / sqrt(sq);
        for (auto& v : cur) {
            v *= inv;
        }
    }
    return cur;
}

} // namespace dacert::ctrl
