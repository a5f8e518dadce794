#include "asc/tensor.hpp"

#include "asc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

namespace asc {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(what) + " must be 2-D, got " + t.shape_string());
    }
}

} // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s += "x";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw DimensionError("tensor shape " + asc::shape_string(shape_) + " needs " +
                             std::to_string(element_count(shape_)) + " values, got " +
                             std::to_string(data_.size()));
    }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<float>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r > 0 ? rows.begin()->size() : 0;
    std::vector<float> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw DimensionError("ragged matrix literal");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<float> values) {
    return Tensor({values.size()}, std::vector<float>(values));
}

std::size_t Tensor::rows() const noexcept {
    if (shape_.empty()) {
        return 0;
    }
    return shape_.size() == 1 ? 1 : shape_[0];
}

std::size_t Tensor::cols() const noexcept {
    if (shape_.empty()) {
        return 0;
    }
    return shape_.back();
}

std::span<float> Tensor::row(std::size_t r) {
    return std::span<float>(data_).subspan(r * cols(), cols());
}

std::span<const float> Tensor::row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * cols(), cols());
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor::bit_equal(const Tensor& other) const noexcept {
    return shape_ == other.shape_ && data_.size() == other.data_.size() &&
           (data_.empty() ||
            std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

std::string Tensor::shape_string() const { return asc::shape_string(shape_); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul lhs");
    require_matrix(b, "matmul rhs");
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    const std::size_t n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul inner dimensions disagree: " + a.shape_string() + " x " +
                             b.shape_string());
    }
    Tensor out({m, n});
    std::vector<double> acc(n);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const auto arow = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const auto brow = b.row(p);
            for (std::size_t j = 0; j < n; ++j) {
                acc[j] += av * static_cast<double>(brow[j]);
            }
        }
        auto orow = out.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            orow[j] = static_cast<float>(acc[j]);
        }
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    require_matrix(x, "linear input");
    require_matrix(w, "linear weight");
    const std::size_t n = x.rows();
    const std::size_t k = x.cols();
    const std::size_t m = w.cols();
    if (w.rows() != k) {
        throw DimensionError("linear weight " + w.shape_string() + " does not accept input " +
                             x.shape_string());
    }
    if (bias.size() != m) {
        throw DimensionError("linear bias " + bias.shape_string() + " does not match weight " +
                             w.shape_string());
    }
    Tensor out({n, m});
    std::vector<double> acc(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            acc[j] = bias[j];
        }
        const auto xrow = x.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = xrow[p];
            const auto wrow = w.row(p);
            for (std::size_t j = 0; j < m; ++j) {
                acc[j] += xv * static_cast<double>(wrow[j]);
            }
        }
        auto orow = out.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            orow[j] = static_cast<float>(acc[j]);
        }
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    Tensor out(x.shape());
    const std::size_t n = x.cols();
    std::vector<double> e(n);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto in = x.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            e[j] = std::exp(static_cast<double>(in[j]) - mx);
            sum += e[j];
        }
        auto o = out.row(r);
        for (std::size_t j = 0; j < n; ++j) {
            o[j] = static_cast<float>(e[j] / sum);
        }
    }
    return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    const std::size_t d = x.cols();
    if (gamma.size() != d || beta.size() != d) {
        throw DimensionError("layernorm parameters " + gamma.shape_string() + "/" +
                             beta.shape_string() + " do not match input " + x.shape_string());
    }
    Tensor out(x.shape());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto in = x.row(r);
        double mean = 0.0;
        for (float v : in) {
            mean += v;
        }
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (float v : in) {
            const double c = v - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        auto o = out.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            o[j] = static_cast<float>((in[j] - mean) * inv * gamma[j] + beta[j]);
        }
    }
    return out;
}

Tensor layernorm(const Tensor& x, float eps) {
    std::vector<float> ones(x.cols(), 1.0f);
    return layernorm(x, Tensor({x.cols()}, std::move(ones)), Tensor({x.cols()}), eps);
}

float gelu(float x) {
    const double v = x;
    const double inner = kGeluSqrt2OverPi * (v + kGeluCubic * v * v * v);
    return static_cast<float>(0.5 * v * (1.0 + std::tanh(inner)));
}

Tensor gelu(const Tensor& x) {
    Tensor out(x.shape());
    std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                   [](float v) { return gelu(v); });
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("add shape mismatch: " + a.shape_string() + " vs " +
                             b.shape_string());
    }
    Tensor out(a.shape());
    std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                   std::plus<>());
    return out;
}

double dot(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw DimensionError("dot length mismatch: " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    }
    return s;
}

double l2_norm(std::span<const float> u) {
    double s = 0.0;
    for (float x : u) {
        s += static_cast<double>(x) * static_cast<double>(x);
    }
    return std::sqrt(s);
}

double cosine_from_parts(double dot_uv, double norm_u, double norm_v) {
    if (norm_u < kCosineZeroNorm || norm_v < kCosineZeroNorm) {
        return 0.0;
    }
    const double c = dot_uv / (norm_u * norm_v);
    return std::clamp(c, -1.0, 1.0);
}

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine length mismatch: " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
    }
    return cosine_from_parts(dot(u, v), l2_norm(u), l2_norm(v));
}

double cosine(const Tensor& u, const Tensor& v) { return cosine(u.data(), v.data()); }

} // namespace asc
