#include <gtest/gtest.h>

#include "oracles/ssim_cases.hpp"
#include "support/oracles.hpp"

using namespace bgmix;

namespace {

Image from_levels(const std::vector<int>& levels, int channels)
{
    std::vector<double> v;
    for (int l : levels) v.push_back(l / 255.0);
    return Image(16, 16, channels, v);
}

} // namespace

TEST(Ssim, MatchesFrozenReferenceValues)
{
    ASSERT_EQ(ssim_cases::all().size(), 10u);
    for (const auto& c : ssim_cases::all())
        EXPECT_NEAR(ssim(from_levels(c.a, c.channels), from_levels(c.b, c.channels)), c.expected, 1e-6);
}

TEST(Ssim, MatchesDirectWindowOracle)
{
    Rng rng(21);
    for (int i = 0; i < 8; ++i) {
        const int h = 3 + i * 2, w = 17 - i;
        const Image a = oracle::random_image(rng, h, w, i % 2 ? 3 : 1);
        const Image b = oracle::random_image(rng, h, w, i % 2 ? 3 : 1);
        EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-12) << h << "x" << w;
    }
}

TEST(Ssim, SelfSimilarityIsExactlyOne)
{
    Rng rng(22);
    for (int i = 0; i < 10; ++i) {
        const Image a = oracle::random_image(rng, 9 + i, 12, i % 2 ? 3 : 1);
        EXPECT_EQ(ssim(a, a), 1.0);
    }
    EXPECT_EQ(ssim(Image(8, 8, 1, 0.0), Image(8, 8, 1, 0.0)), 1.0);
}

TEST(Ssim, SymmetricAndBounded)
{
    Rng rng(23);
    const Image a = oracle::random_image(rng, 12, 12, 1);
    const Image b = oracle::random_image(rng, 12, 12, 1);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
    EXPECT_LT(ssim(a, b), 1.0);
    EXPECT_GE(ssim(a, b), -1.0);
}

TEST(Ssim, ReusedReferenceMatchesOneShot)
{
    Rng rng(24);
    const Image a = oracle::random_image(rng, 10, 14, 3);
    const SsimReference ref(a);
    for (int i = 0; i < 3; ++i) {
        const Image b = oracle::random_image(rng, 10, 14, 3);
        EXPECT_EQ(ref.compare(b), ssim(a, b));
    }
    EXPECT_THROW(ref.compare(Image(10, 14, 1)), ShapeError);
}
