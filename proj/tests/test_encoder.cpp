#include "asc/encoder.hpp"
#include "asc/error.hpp"
#include "asc/synth.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace asc;
using asc::testing::random_tensor;

namespace {

ModelConfig make_config(std::size_t layers, std::size_t d, std::size_t h, NormMode mode) {
    ModelConfig c;
    c.vocab_size = 11;
    c.num_layers = layers;
    c.hidden_dim = d;
    c.num_heads = h;
    c.ffn_dim = 2 * d;
    c.max_seq_len = 9;
    c.norm_mode = mode;
    c.layer_ids = identity_layer_ids(layers);
    return c;
}

ModelWeights random_weights(const ModelConfig& c, std::uint64_t seed) {
    ModelWeights w = zero_weights(c);
    Rng rng(seed);
    for (auto& nt : named_tensors(w)) {
        *nt.tensor = random_tensor(nt.tensor->shape(), rng, -0.8, 0.8);
    }
    return w;
}

// Independent 64-bit reference for one post-norm encoder block.
using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t) {
    Mat m(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            m[i][j] = t.at(i, j);
        }
    }
    return m;
}

Mat affine(const Mat& x, const Tensor& w, const Tensor& b) {
    Mat y(x.size(), std::vector<double>(w.cols()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            double s = b[j];
            for (std::size_t p = 0; p < w.rows(); ++p) {
                s += x[i][p] * w.at(p, j);
            }
            y[i][j] = s;
        }
    }
    return y;
}

Mat norm_rows(const Mat& x, const Tensor& g, const Tensor& b, double eps) {
    Mat y = x;
    for (auto& row : y) {
        double mu = 0, var = 0;
        for (double v : row) mu += v;
        mu /= row.size();
        for (double v : row) var += (v - mu) * (v - mu);
        var /= row.size();
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = (row[j] - mu) / std::sqrt(var + eps) * g[j] + b[j];
        }
    }
    return y;
}

Mat reference_layer(const ModelConfig& c, const LayerWeights& l, const Mat& x) {
    const std::size_t n = x.size(), d = c.hidden_dim, hd = c.head_dim();
    const Mat q = affine(x, l.wq, l.bq), k = affine(x, l.wk, l.bk), v = affine(x, l.wv, l.bv);
    Mat ctx(n, std::vector<double>(d, 0.0));
    for (std::size_t h = 0; h < c.num_heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> s(n);
            double mx = -1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double dot = 0;
                for (std::size_t t = 0; t < hd; ++t) dot += q[i][h * hd + t] * k[j][h * hd + t];
                s[j] = dot / std::sqrt(static_cast<double>(hd));
                mx = std::max(mx, s[j]);
            }
            double z = 0;
            for (auto& e : s) z += (e = std::exp(e - mx));
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t t = 0; t < hd; ++t) ctx[i][h * hd + t] += s[j] / z * v[j][h * hd + t];
            }
        }
    }
    const Mat attn = affine(ctx, l.wo, l.bo);
    Mat y1(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) y1[i][j] = x[i][j] + attn[i][j];
    const bool norm = c.norm_mode == NormMode::standard;
    if (norm) y1 = norm_rows(y1, l.ln1_g, l.ln1_b, c.layer_norm_eps);
    Mat hidden = affine(y1, l.w1, l.b1);
    for (auto& row : hidden)
        for (auto& v : row) v = 0.5 * v * (1 + std::tanh(0.7978845608 * (v + 0.044715 * v * v * v)));
    const Mat f = affine(hidden, l.w2, l.b2);
    Mat y(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) y[i][j] = y1[i][j] + f[i][j];
    if (norm) y = norm_rows(y, l.ln2_g, l.ln2_b, c.layer_norm_eps);
    return y;
}

} // namespace

TEST(Embed, ZeroEmbeddingsGiveZeroRow) {
    ModelConfig c = make_config(1, 4, 2, NormMode::none);
    const ModelWeights w = zero_weights(c);
    const Tensor x = embed(c, w, std::vector<int>{3});
    for (float v : x.data()) {
        EXPECT_EQ(v, 0.0f);
    }
}

TEST(Embed, RawSumWithoutNorm) {
    ModelConfig c = make_config(1, 4, 2, NormMode::none);
    const ModelWeights w = random_weights(c, 1);
    const std::vector<int> seq{5, 2, 5};
    const Tensor x = embed(c, w, seq);
    for (std::size_t t = 0; t < seq.size(); ++t) {
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_EQ(x.at(t, j), w.token_embedding.at(seq[t], j) + w.position_embedding.at(t, j));
        }
    }
}

TEST(Embed, StandardModeNormalisesRows) {
    ModelConfig c = make_config(1, 8, 2, NormMode::standard);
    const ModelWeights w = random_weights(c, 2);
    const Tensor x = embed(c, w, std::vector<int>{0, 1, 2, 3});
    for (std::size_t t = 0; t < x.rows(); ++t) {
        double mu = 0, var = 0;
        for (float v : x.row(t)) mu += v;
        mu /= 8;
        for (float v : x.row(t)) var += (v - mu) * (v - mu);
        var /= 8;
        EXPECT_LT(std::abs(mu), 1e-6);
        EXPECT_NEAR(var, 1.0, 1e-4);
    }
}

TEST(Embed, RejectsBadSequences) {
    ModelConfig c = make_config(1, 4, 2, NormMode::none);
    const ModelWeights w = zero_weights(c);
    EXPECT_THROW(embed(c, w, std::vector<int>{11}), ValidationError);
    EXPECT_THROW(embed(c, w, std::vector<int>{-1}), ValidationError);
    EXPECT_THROW(embed(c, w, std::vector<int>{}), ValidationError);
    EXPECT_THROW(embed(c, w, std::vector<int>(10, 0)), ValidationError);
}

TEST(EncoderLayer, PlantedIdentityPassesInputThroughExactly) {
    ModelConfig c = make_config(1, 8, 2, NormMode::none);
    ModelWeights w = random_weights(c, 3);
    LayerWeights& l = w.layers[0];
    for (Tensor* t : {&l.wv, &l.bv, &l.wo, &l.bo, &l.w1, &l.b1, &l.w2, &l.b2}) {
        *t = Tensor(t->shape());
    }
    Rng rng(4);
    const Tensor x = random_tensor({5, 8}, rng, -3, 3);
    EXPECT_TRUE(encoder_layer(c, l, x).bit_equal(x));
}

TEST(EncoderLayer, HandTraceSingleTokenMatchesReference) {
    ModelConfig c = make_config(1, 2, 1, NormMode::standard);
    LayerWeights l = zero_layer(c);
    l.wq = Tensor::matrix({{0.5f, -0.25f}, {1.0f, 0.75f}});
    l.wk = Tensor::matrix({{-1.0f, 0.5f}, {0.25f, 0.5f}});
    l.wv = Tensor::matrix({{0.2f, 0.4f}, {-0.6f, 0.8f}});
    l.bv = Tensor::vector({0.1f, -0.1f});
    l.wo = Tensor::matrix({{1.5f, 0.0f}, {0.5f, -1.0f}});
    l.bo = Tensor::vector({0.05f, 0.0f});
    l.w1 = Tensor::matrix({{0.3f, -0.7f, 1.1f, 0.2f}, {0.9f, 0.4f, -0.5f, 0.6f}});
    l.b1 = Tensor::vector({0.0f, 0.1f, -0.2f, 0.3f});
    l.w2 = Tensor::matrix({{1.0f, 0.5f}, {-0.5f, 0.25f}, {0.75f, -1.0f}, {0.2f, 0.2f}});
    l.b2 = Tensor::vector({-0.1f, 0.2f});
    l.ln1_g = Tensor::vector({1.5f, 0.5f});
    l.ln1_b = Tensor::vector({0.1f, -0.2f});
    l.ln2_g = Tensor::vector({0.8f, 1.2f});
    l.ln2_b = Tensor::vector({0.0f, 0.3f});
    c.layer_norm_eps = 1e-5f;
    const Tensor x = Tensor::matrix({{0.7f, -1.3f}});

    const Tensor y = encoder_layer(c, l, x);
    const Mat ref = reference_layer(c, l, to_mat(x));
    EXPECT_NEAR(y.at(0, 0), ref[0][0], 1e-5);
    EXPECT_NEAR(y.at(0, 1), ref[0][1], 1e-5);

    c.norm_mode = NormMode::none;
    const Tensor y_raw = encoder_layer(c, l, x);
    const Mat ref_raw = reference_layer(c, l, to_mat(x));
    EXPECT_NEAR(y_raw.at(0, 0), ref_raw[0][0], 1e-5);
    EXPECT_NEAR(y_raw.at(0, 1), ref_raw[0][1], 1e-5);
}

TEST(EncoderLayer, MultiTokenMultiHeadMatchesReference) {
    for (NormMode mode : {NormMode::standard, NormMode::none}) {
        ModelConfig c = make_config(1, 8, 4, mode);
        const ModelWeights w = random_weights(c, 21);
        Rng rng(22);
        const Tensor x = random_tensor({6, 8}, rng, -1, 1);
        const Tensor y = encoder_layer(c, w.layers[0], x);
        const Mat ref = reference_layer(c, w.layers[0], to_mat(x));
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                EXPECT_NEAR(y.at(i, j), ref[i][j], 1e-4);
            }
        }
    }
}

TEST(EncoderLayer, OutputShapeEqualsInputShape) {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t h = 1 + rng.below(4);
        const std::size_t d = h * (1 + rng.below(4));
        const std::size_t n = 1 + rng.below(7);
        ModelConfig c = make_config(1, d, h, trial % 2 ? NormMode::none : NormMode::standard);
        const ModelWeights w = random_weights(c, 100 + trial);
        const Tensor x = random_tensor({n, d}, rng);
        const Tensor y = encoder_layer(c, w.layers[0], x);
        EXPECT_EQ(y.shape(), x.shape());
        EXPECT_TRUE(y.all_finite());
    }
}

TEST(ForwardTaps, AllIdentityLayersGiveIdenticalOutputs) {
    const Model m = gen_model(2, 8, 2, 16, 11, {1, 2}, 4);
    const std::vector<int> seq{1, 4, 9, 0};
    std::size_t frames = 0;
    forward_with_taps(m.config, m.weights, seq, [&](const LayerTapFrame& f) {
        ASSERT_EQ(f.layer_outputs.size(), 3u);
        EXPECT_EQ(f.token_index, frames);
        for (std::size_t k = 1; k < 3; ++k) {
            ASSERT_EQ(f.layer_outputs[k].size(), 8u);
            for (std::size_t j = 0; j < 8; ++j) {
                EXPECT_EQ(f.layer_outputs[k][j], f.layer_outputs[0][j]);
            }
        }
        ++frames;
    });
    EXPECT_EQ(frames, seq.size());
}

TEST(ForwardTaps, FirstTapIsEmbeddingAndLastIsForward) {
    ModelConfig c = make_config(3, 8, 2, NormMode::standard);
    const ModelWeights w = random_weights(c, 9);
    const std::vector<int> seq{3, 1, 4, 1, 5};
    const Tensor e = embed(c, w, seq);
    const Tensor y = forward(c, w, seq);
    std::size_t frames = 0;
    forward_with_taps(c, w, seq, [&](const LayerTapFrame& f) {
        ASSERT_EQ(f.layer_outputs.size(), 4u);
        for (std::size_t j = 0; j < 8; ++j) {
            EXPECT_EQ(f.layer_outputs[0][j], e.at(f.token_index, j));
            EXPECT_EQ(f.layer_outputs[3][j], y.at(f.token_index, j));
        }
        ++frames;
    });
    EXPECT_EQ(frames, seq.size());
}

TEST(ForwardTaps, PlantedIdentityLayerRepeatsPreviousOutput) {
    const Model m = gen_model(4, 8, 2, 16, 11, {3}, 12);
    const std::vector<int> seq{2, 7, 7, 1, 0, 10};
    forward_with_taps(m.config, m.weights, seq, [&](const LayerTapFrame& f) {
        for (std::size_t j = 0; j < 8; ++j) {
            EXPECT_EQ(f.layer_outputs[3][j], f.layer_outputs[2][j]);
        }
        EXPECT_NE(f.layer_outputs[2][0], f.layer_outputs[1][0]);
    });
}

TEST(ForwardTaps, DeterministicAcrossRuns) {
    ModelConfig c = make_config(2, 8, 2, NormMode::standard);
    const ModelWeights w = random_weights(c, 10);
    const std::vector<int> seq{1, 2, 3};
    const auto a = forward_hidden_states(c, w, seq);
    const auto b = forward_hidden_states(c, w, seq);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_TRUE(a[k].bit_equal(b[k]));
    }
}

TEST(ForwardTaps, EmbeddingOnlyModelHasSingleTap) {
    ModelConfig c = make_config(0, 4, 2, NormMode::none);
    const ModelWeights w = random_weights(c, 11);
    forward_with_taps(c, w, std::vector<int>{1, 2},
                      [](const LayerTapFrame& f) { EXPECT_EQ(f.layer_outputs.size(), 1u); });
}
