#include "asc/error.hpp"
#include "asc/tensor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace asc;
using asc::testing::random_tensor;

namespace {

std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t p = 0; p < k; ++p) {
                c[i * n + j] += static_cast<double>(a.at(i, p)) * b.at(p, j);
            }
        }
    }
    return c;
}

} // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
    const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
    EXPECT_EQ(matmul(eye, m), m);
}

TEST(Matmul, RowTimesColumn) {
    const Tensor c = matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}}));
    ASSERT_EQ(c.shape(), (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(c[0], 11.0f);
}

TEST(Matmul, MatchesNaiveTripleLoop) {
    Rng rng(7);
    const Tensor a = random_tensor({5, 7}, rng);
    const Tensor b = random_tensor({7, 3}, rng);
    const Tensor c = matmul(a, b);
    const auto ref = naive_matmul(a, b);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_NEAR(c[i], ref[i], 1e-6);
    }
}

TEST(Matmul, RandomShapesUpTo32MatchOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng.below(32), k = 1 + rng.below(32), n = 1 + rng.below(32);
        const Tensor a = random_tensor({m, k}, rng);
        const Tensor b = random_tensor({k, n}, rng);
        const Tensor c = matmul(a, b);
        const auto ref = naive_matmul(a, b);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ASSERT_NEAR(c[i], ref[i], 1e-6) << m << "x" << k << "x" << n;
        }
    }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
    try {
        matmul(Tensor({2, 3}), Tensor({2, 3}));
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3] x [2x3]"), std::string::npos) << msg;
    }
}

TEST(Softmax, EqualLogitsGiveUniformRows) {
    const Tensor s = softmax_rows(Tensor::matrix({{0, 0}}));
    EXPECT_FLOAT_EQ(s[0], 0.5f);
    EXPECT_FLOAT_EQ(s[1], 0.5f);

    const Tensor big = softmax_rows(Tensor::matrix({{1000, 1000, 1000}}));
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(big[j], 1.0 / 3.0, 1e-7);
    }
}

TEST(Softmax, MatchesDirectFormula) {
    const Tensor s = softmax_rows(Tensor::matrix({{1, 2, 3}}));
    const double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    EXPECT_NEAR(s[0], std::exp(1.0) / denom, 1e-7);
    EXPECT_NEAR(s[1], std::exp(2.0) / denom, 1e-7);
    EXPECT_NEAR(s[2], std::exp(3.0) / denom, 1e-7);
}

TEST(Softmax, RowsSumToOneForLargeInputs) {
    Rng rng(3);
    const Tensor x = random_tensor({20, 17}, rng, -1e4, 1e4);
    const Tensor s = softmax_rows(x);
    ASSERT_TRUE(s.all_finite());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double sum = 0.0;
        for (float v : s.row(r)) {
            EXPECT_GE(v, 0.0f);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
    }
}

TEST(LayerNorm, ConstantRowBecomesZero) {
    const Tensor y = layernorm(Tensor::matrix({{1, 1, 1}}));
    for (float v : y.data()) {
        EXPECT_EQ(v, 0.0f);
    }
}

TEST(LayerNorm, AlreadyNormalisedRowUnchanged) {
    const Tensor y = layernorm(Tensor::matrix({{-1, 1}}));
    EXPECT_NEAR(y[0], -1.0, 1e-5);
    EXPECT_NEAR(y[1], 1.0, 1e-5);
}

TEST(LayerNorm, RandomRowsHaveZeroMeanUnitVariance) {
    Rng rng(5);
    const Tensor y = layernorm(random_tensor({3, 8}, rng, -4, 4));
    for (std::size_t r = 0; r < 3; ++r) {
        double mean = 0.0, var = 0.0;
        for (float v : y.row(r)) {
            mean += v;
        }
        mean /= 8.0;
        for (float v : y.row(r)) {
            var += (v - mean) * (v - mean);
        }
        var /= 8.0;
        EXPECT_LT(std::abs(mean), 1e-6);
        EXPECT_GE(var, 1.0 - 1e-4);
        EXPECT_LE(var, 1.0 + 1e-4);
    }
}

TEST(LayerNorm, AppliesGammaAndBeta) {
    const Tensor y = layernorm(Tensor::matrix({{-1, 1}}), Tensor::vector({2, 3}),
                               Tensor::vector({0.5f, -0.5f}));
    EXPECT_NEAR(y[0], -1.5, 1e-5);
    EXPECT_NEAR(y[1], 2.5, 1e-5);
    EXPECT_THROW(layernorm(Tensor({1, 3}), Tensor({2}), Tensor({2})), DimensionError);
}

TEST(Gelu, ZeroAndAsymptote) {
    EXPECT_EQ(gelu(0.0f), 0.0f);
    EXPECT_LT(std::abs(gelu(10.0f) - 10.0f), 1e-4);
}

TEST(Gelu, MatchesDoubleFormulaAtOne) {
    const double ref = 0.5 * (1.0 + std::tanh(0.7978845608 * (1.0 + 0.044715)));
    EXPECT_NEAR(gelu(1.0f), ref, 1e-6);
}

TEST(Cosine, BasicCases) {
    EXPECT_EQ(cosine(Tensor::vector({1, 0, 0}), Tensor::vector({1, 0, 0})), 1.0);
    EXPECT_EQ(cosine(Tensor::vector({1, 0}), Tensor::vector({0, 1})), 0.0);
    EXPECT_NEAR(cosine(Tensor::vector({3, 4}), Tensor::vector({4, 3})), 24.0 / 25.0, 1e-15);
}

TEST(Cosine, ZeroVectorIsZero) {
    EXPECT_EQ(cosine(Tensor::vector({0, 0}), Tensor::vector({1, 2})), 0.0);
    EXPECT_EQ(cosine(Tensor::vector({0, 0}), Tensor::vector({0, 0})), 0.0);
}

TEST(Cosine, LengthMismatchThrows) {
    EXPECT_THROW(cosine(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3})), DimensionError);
}

TEST(Cosine, PropertiesOnRandomVectors) {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + rng.below(64);
        const Tensor u = random_tensor({d}, rng, -10, 10);
        const Tensor v = random_tensor({d}, rng, -10, 10);
        EXPECT_NEAR(cosine(u, u), 1.0, 1e-9);
        EXPECT_EQ(cosine(u, v), cosine(v, u));
        const double c = cosine(u, v);
        EXPECT_GE(c, -1.0);
        EXPECT_LE(c, 1.0);

        const double alpha = rng.uniform(0.01, 100.0);
        Tensor scaled = u;
        for (float& x : scaled.data()) {
            x = static_cast<float>(x * alpha);
        }
        // Scaling happens in float, so the tolerance reflects one rounding per element.
        EXPECT_NEAR(cosine(scaled, v), c, 1e-6);
    }
}

TEST(Cosine, ScaleInvarianceExactForPowersOfTwo) {
    Rng rng(17);
    const Tensor u = random_tensor({16}, rng);
    const Tensor v = random_tensor({16}, rng);
    Tensor scaled = u;
    for (float& x : scaled.data()) {
        x *= 8.0f;
    }
    EXPECT_NEAR(cosine(scaled, v), cosine(u, v), 1e-9);
}

TEST(Tensor, ShapeDataInvariant) {
    EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), DimensionError);
    const Tensor t({3, 4});
    EXPECT_EQ(t.size(), 12u);
    EXPECT_EQ(t.rows(), 3u);
    EXPECT_EQ(t.cols(), 4u);
}
