#include <gtest/gtest.h>

#include <algorithm>
#include <array>

#include "pilu/model.hpp"

namespace pilu {
namespace {

struct ConvSpec {
    std::size_t out_hw, filters;
};

// Independent count: conv kernels and biases, activation sets per scheme, output layer.
std::size_t expected_count(std::size_t classes, ActivationKind kind, SharingScheme scheme) {
    const std::array<ConvSpec, 5> convs{{{30, 16}, {13, 16}, {11, 32}, {9, 32}, {7, 64}}};
    std::size_t total = 0, in_ch = 3;
    for (const auto& c : convs) {
        total += 3 * 3 * in_ch * c.filters + c.filters;
        std::size_t sets = 1;
        if (scheme == SharingScheme::ChannelWise) sets = c.filters;
        if (scheme == SharingScheme::NeuronWise) sets = c.out_hw * c.out_hw * c.filters;
        total += arity(kind) * sets;
        in_ch = c.filters;
    }
    return total + 64 * classes + classes;
}

TEST(PaperModel, ChannelWiseCountsCifar10) {
    EXPECT_EQ(count_parameters(build_paper_model<float>(10, {ActivationKind::ReLU})), 35802u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(10, {ActivationKind::PReLU})), 35962u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(10, {ActivationKind::DoubleReLU})), 35962u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(10, {ActivationKind::PiLU})), 36282u);
}

TEST(PaperModel, ChannelWiseCountsCifar100) {
    EXPECT_EQ(count_parameters(build_paper_model<float>(100, {ActivationKind::ReLU})), 41652u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(100, {ActivationKind::PReLU})), 41812u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(100, {ActivationKind::DoubleReLU})), 41812u);
    EXPECT_EQ(count_parameters(build_paper_model<float>(100, {ActivationKind::PiLU})), 42132u);
}

TEST(PaperModel, CountsMatchOracleForEverySchemeAndKind) {
    for (const std::size_t classes : {10u, 100u})
        for (const auto kind : {ActivationKind::Linear, ActivationKind::ReLU, ActivationKind::LReLU,
                                ActivationKind::PReLU, ActivationKind::DoubleReLU, ActivationKind::PiLU})
            for (const auto scheme : {SharingScheme::LayerWise, SharingScheme::ChannelWise, SharingScheme::NeuronWise})
                EXPECT_EQ(count_parameters(build_paper_model<double>(classes, {kind, scheme})),
                          expected_count(classes, kind, scheme))
                    << to_string(kind) << "/" << to_string(scheme) << " " << classes;
}

TEST(PaperModel, LayerShapes) {
    const auto m = build_paper_model<float>(10, {ActivationKind::PiLU});
    const auto& s = m.shapes();
    EXPECT_EQ(s.front(), (Shape{32, 32, 3}));
    EXPECT_EQ(s[1], (Shape{30, 30, 16}));
    EXPECT_EQ(s[3], (Shape{15, 15, 16}));
    EXPECT_EQ(s.back(), (Shape{10}));
    EXPECT_EQ(m.layer_count(), 15u);
}

TEST(PaperModel, SummaryTable) {
    const auto text = model_summary(build_paper_model<float>(10, {ActivationKind::PiLU}));
    EXPECT_NE(text.find("3x3, 16 CONV2D"), std::string::npos);
    EXPECT_NE(text.find("2x2, Max Pool"), std::string::npos);
    EXPECT_NE(text.find("10, Fully Connected"), std::string::npos);
    EXPECT_NE(text.find("18,496"), std::string::npos);
    EXPECT_NE(text.find("Total parameters: 36,282"), std::string::npos);
}

TEST(PaperModel, InitializationIsSeededAndBiasesZero) {
    Rng a = make_stream(11, Stream::Init), b = make_stream(11, Stream::Init), c = make_stream(12, Stream::Init);
    auto m1 = build_paper_model<double>(10, {ActivationKind::PiLU}, a);
    auto m2 = build_paper_model<double>(10, {ActivationKind::PiLU}, b);
    auto m3 = build_paper_model<double>(10, {ActivationKind::PiLU}, c);
    const auto p1 = m1.parameters(), p2 = m2.parameters(), p3 = m3.parameters();
    ASSERT_EQ(p1.size(), p2.size());
    bool differs = false;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        EXPECT_EQ(p1[i]->name, p2[i]->name);
        EXPECT_TRUE(std::ranges::equal(p1[i]->value.data(), p2[i]->value.data()));
        differs |= !std::ranges::equal(p1[i]->value.data(), p3[i]->value.data());
        if (p1[i]->name.ends_with(".bias")) {
            for (const double v : p1[i]->value.data()) EXPECT_EQ(v, 0.0);
        }
    }
    EXPECT_TRUE(differs);
}

TEST(Model, RejectsIncompatibleLayer) {
    Model<double> m({8, 8, 3});
    m.emplace<Conv2DLayer<double>>("c", 3, 4);
    EXPECT_THROW(m.emplace<Conv2DLayer<double>>("d", 5, 4), std::invalid_argument);
}

TEST(Model, ForwardProducesProbabilities) {
    Rng init = make_stream(0, Stream::Init);
    auto m = build_paper_model<float>(10, {ActivationKind::PiLU}, init);
    Tensor<float> x({2, 32, 32, 3});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(i % 255) / 255.0f;
    const auto p = m.forward(x, Mode::Eval);
    ASSERT_EQ(p.shape(), (Shape{2, 10}));
    for (std::size_t r = 0; r < 2; ++r) {
        float s = 0;
        for (std::size_t k = 0; k < 10; ++k) s += p[r * 10 + k];
        EXPECT_NEAR(s, 1.0f, 1e-5f);
    }
}

}  // namespace
}  // namespace pilu
