#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace asc {

// Dense row-major float32 array. Only 1-D and 2-D shapes are used in this project.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<float> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor matrix(std::initializer_list<std::initializer_list<float>> rows);
    static Tensor vector(std::initializer_list<float> values);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    // rows()/cols() treat a 1-D tensor as a single row.
    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<float> row(std::size_t r);
    std::span<const float> row(std::size_t r) const;

    float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    bool all_finite() const noexcept;

    // Exact equality of shape and element bits (distinguishes -0.0 from 0.0, NaN payloads).
    bool bit_equal(const Tensor& other) const noexcept;

    std::string shape_string() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

// Kernels. Every reduction accumulates in double and stores float.

Tensor matmul(const Tensor& a, const Tensor& b);

// x[n x k] * w[k x m] + bias[m]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

Tensor softmax_rows(const Tensor& x);

inline constexpr float kDefaultLayerNormEps = 1e-12f;

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 float eps = kDefaultLayerNormEps);

// Row normalization with unit gamma and zero beta.
Tensor layernorm(const Tensor& x, float eps = kDefaultLayerNormEps);

// sqrt(2/pi) truncated to the literal used by the tanh approximation. Evaluation happens in
// double and is rounded once to float.
inline constexpr double kGeluSqrt2OverPi = 0.7978845608;
inline constexpr double kGeluCubic = 0.044715;

float gelu(float x);
Tensor gelu(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);

// Norms below this count as zero; cosine against a zero vector is 0.
inline constexpr double kCosineZeroNorm = 1e-12;

double cosine(std::span<const float> u, std::span<const float> v);
double cosine(const Tensor& u, const Tensor& v);

// Cosine from a precomputed dot product and the two Euclidean norms. Shares the exact formula
// used by cosine() so batched callers get identical bits.
double cosine_from_parts(double dot, double norm_u, double norm_v);

double dot(std::span<const float> u, std::span<const float> v);
double l2_norm(std::span<const float> u);

} // namespace asc
