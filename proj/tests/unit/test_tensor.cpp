#include <gtest/gtest.h>

#include "pilu/format.hpp"
#include "pilu/tensor.hpp"

namespace pilu {
namespace {

TEST(Tensor, DefaultIsEmpty) {
    Tensor<float> t;
    EXPECT_EQ(t.shape(), Shape{0});
    EXPECT_TRUE(t.empty());
}

TEST(Tensor, DataLengthMustMatchShape) {
    EXPECT_THROW(Tensor<double>({2, 3}, std::vector<double>(5)), std::invalid_argument);
    EXPECT_NO_THROW(Tensor<double>({2, 3}, std::vector<double>(6)));
}

TEST(Tensor, ChannelsLastIndexing) {
    Tensor<int> t({2, 3, 4, 5});
    t.at(1, 2, 3, 4) = 7;
    EXPECT_EQ(t[((1 * 3 + 2) * 4 + 3) * 5 + 4], 7);
    EXPECT_EQ(t[t.size() - 1], 7);
}

TEST(Tensor, ReshapeKeepsDataAndChecksSize) {
    Tensor<int> t({2, 3}, std::vector<int>{1, 2, 3, 4, 5, 6});
    const auto r = t.reshaped({3, 2});
    EXPECT_EQ(r.shape(), (Shape{3, 2}));
    EXPECT_EQ(r[5], 6);
    EXPECT_THROW((void)t.reshaped({4, 2}), std::invalid_argument);
}

TEST(Tensor, Shape4RejectsZeroDims) {
    EXPECT_THROW(Shape4::of({1, 0, 2, 2}), std::invalid_argument);
    EXPECT_THROW(Shape4::of({1, 2, 2}), std::invalid_argument);
}

TEST(Tensor, SpatialMeanAndAdjoint) {
    // (1, 2, 2, 2): channel 0 holds 1..4, channel 1 holds 10..40.
    Tensor<double> x({1, 2, 2, 2}, std::vector<double>{1, 10, 2, 20, 3, 30, 4, 40});
    const auto m = reduce_mean_spatial(x);
    ASSERT_EQ(m.shape(), (Shape{1, 2}));
    EXPECT_DOUBLE_EQ(m[0], 2.5);
    EXPECT_DOUBLE_EQ(m[1], 25.0);

    // <dy, mean(x)> == <adjoint(dy), x> for any dy.
    Tensor<double> dy({1, 2}, std::vector<double>{0.3, -1.7});
    const auto dx = reduce_mean_spatial_backward(dy, Shape4::of(x.shape()));
    double lhs = dy[0] * m[0] + dy[1] * m[1], rhs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rhs += dx[i] * x[i];
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Format, GroupThousands) {
    EXPECT_EQ(group_thousands(0), "0");
    EXPECT_EQ(group_thousands(999), "999");
    EXPECT_EQ(group_thousands(1000), "1,000");
    EXPECT_EQ(group_thousands(36282), "36,282");
    EXPECT_EQ(group_thousands(1234567), "1,234,567");
}

TEST(Format, DoubleRoundTrips) {
    for (const double v : {0.1, 1.0 / 3.0, 2.302585092994046, 1e-300, -7.25}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

}  // namespace
}  // namespace pilu
