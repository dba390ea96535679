#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <filesystem>
#include <fstream>
#include <random>

#include "finite_diff.hpp"
#include "lidardrive/tensorgrad/checkpoint.hpp"
#include "lidardrive/tensorgrad/ops.hpp"
#include "lidardrive/tensorgrad/optimizer.hpp"

using namespace lidardrive::tensorgrad;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Reduces any tensor to a scalar through fixed random weights so that every
// output element carries a distinct gradient.
Var probe(Tape& t, Var v, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  const Tensor& val = t.value(v);
  Var w = t.constant(random_tensor(val.shape(), rng));
  return sum(t, mul(t, v, w));
}

Tensor naive_conv(const Tensor& in, const Tensor& k, const Tensor* bias, const Conv2dParams& p) {
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t O = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const std::size_t Ho = (H + 2 * p.pad_h - p.dilation_h * (kh - 1) - 1) / p.stride_h + 1;
  const std::size_t Wo = (W + 2 * p.pad_w - p.dilation_w * (kw - 1) - 1) / p.stride_w + 1;
  Tensor out({O, Ho, Wo});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        double acc = bias ? (*bias)[o] : 0.0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) {
              const long r = static_cast<long>(y * p.stride_h + i * p.dilation_h) - static_cast<long>(p.pad_h);
              const long s = static_cast<long>(x * p.stride_w + j * p.dilation_w) - static_cast<long>(p.pad_w);
              if (r < 0 || s < 0 || r >= static_cast<long>(H) || s >= static_cast<long>(W)) continue;
              acc += k[((o * C + c) * kh + i) * kw + j] * in[(c * H + r) * W + s];
            }
        out[(o * Ho + y) * Wo + x] = acc;
      }
  return out;
}

Tensor naive_pool(const Tensor& in, PoolKind kind, std::size_t wh, std::size_t ww, std::size_t sh,
                  std::size_t sw) {
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t Ho = (H - wh) / sh + 1, Wo = (W - ww) / sw + 1;
  Tensor out({C, Ho, Wo});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        double best = -INFINITY, acc = 0.0;
        for (std::size_t i = 0; i < wh; ++i)
          for (std::size_t j = 0; j < ww; ++j) {
            const double v = in[(c * H + y * sh + i) * W + x * sw + j];
            best = std::max(best, v);
            acc += v;
          }
        out[(c * Ho + y) * Wo + x] = kind == PoolKind::kMax ? best : acc / double(wh * ww);
      }
  return out;
}

void expect_near(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], tol) << "element " << i;
}

}  // namespace

// ---- conv2d ----

TEST(Conv2d, OutputSizeFormula) {
  EXPECT_EQ(conv_output_size(5, 3, 1, 2, 0), 1u);
  EXPECT_EQ(conv_output_size(64, 3, 2, 1, 1), 32u);
  EXPECT_EQ(conv_output_size(7, 3, 1, 3, 3), 7u);
  EXPECT_THROW(conv_output_size(3, 3, 1, 2, 0), ShapeError);
}

TEST(Conv2d, IdentityKernelIsIdentity) {
  std::mt19937_64 rng(1);
  Tape t;
  const Tensor in = random_tensor({3, 4, 5}, rng);
  Tensor k({3, 3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) k[c * 3 + c] = 1.0;
  const Var out = conv2d(t, t.constant(in), t.constant(k), t.constant(Tensor({3})), Conv2dParams{});
  EXPECT_EQ(t.value(out), in);
}

TEST(Conv2d, AllOnesGivesNine) {
  Tape t;
  const Var out = conv2d(t, t.constant(Tensor({1, 3, 3}, 1.0)), t.constant(Tensor({1, 1, 3, 3}, 1.0)),
                         Var{}, Conv2dParams{});
  ASSERT_EQ(t.value(out).shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(t.value(out).item(), 9.0);
}

TEST(Conv2d, DilatedTapsOnFiveByFive) {
  Tensor in({1, 5, 5});
  for (std::size_t i = 0; i < 25; ++i) in[i] = double(i + 1);
  Tape t;
  Conv2dParams p;
  p.dilation_h = p.dilation_w = 2;
  const Var out = conv2d(t, t.constant(in), t.constant(Tensor({1, 1, 3, 3}, 1.0)), Var{}, p);
  ASSERT_EQ(t.value(out).size(), 1u);
  // Taps at rows/cols {0, 2, 4}.
  double expect = 0.0;
  for (int r : {0, 2, 4})
    for (int c : {0, 2, 4}) expect += in[r * 5 + c];
  EXPECT_EQ(t.value(out).item(), expect);
  EXPECT_EQ(t.value(out), naive_conv(in, Tensor({1, 1, 3, 3}, 1.0), nullptr, p));
}

TEST(Conv2d, MatchesNaiveOracleAcrossConfigs) {
  std::mt19937_64 rng(2);
  const std::vector<Conv2dParams> configs = {
      {1, 1, 1, 1, 0, 0}, {2, 2, 1, 1, 1, 1}, {1, 1, 2, 2, 2, 2}, {1, 2, 3, 1, 3, 1}, {2, 1, 1, 2, 0, 2}};
  for (const auto& p : configs) {
    const Tensor in = random_tensor({3, 9, 11}, rng);
    const Tensor k = random_tensor({4, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    Tape t;
    const Var out = conv2d(t, t.constant(in), t.constant(k), t.constant(b), p);
    expect_near(t.value(out), naive_conv(in, k, &b, p), 1e-12);
  }
}

TEST(Conv2d, ShapeErrors) {
  Tape t;
  EXPECT_THROW(conv2d(t, t.constant(Tensor({2, 4, 4})), t.constant(Tensor({1, 3, 3, 3})), Var{},
                      Conv2dParams{}),
               ShapeError);
  EXPECT_THROW(conv2d(t, t.constant(Tensor({1, 2, 2})), t.constant(Tensor({1, 1, 3, 3})), Var{},
                      Conv2dParams{}),
               ShapeError);
  Conv2dParams zero_dil;
  zero_dil.dilation_h = 0;
  EXPECT_THROW(conv2d(t, t.constant(Tensor({1, 4, 4})), t.constant(Tensor({1, 1, 3, 3})), Var{},
                      zero_dil),
               ShapeError);
}

TEST(Conv2d, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (const auto& p : {Conv2dParams{1, 1, 1, 1, 1, 1}, Conv2dParams{2, 2, 2, 2, 2, 2}}) {
    ParameterSet ps;
    auto& in = ps.add("in", {2, 6, 7});
    auto& k = ps.add("k", {3, 2, 3, 3});
    auto& b = ps.add("b", {3});
    fdcheck::randomize(ps, rng);
    auto r = fdcheck::check(ps, [&](Tape& t) {
      return probe(t, conv2d(t, t.param(in), t.param(k), t.param(b), p));
    });
    EXPECT_LT(r.max_rel, 1e-4);
    EXPECT_EQ(r.checked, 84u + 54u + 3u);
  }
}

TEST(SparseConv2d, MatchesDenseConvAndGradients) {
  std::mt19937_64 rng(4);
  SparseInput s{3, 8, 9, {}};
  std::uniform_int_distribution<std::uint32_t> ch(0, 2), row(0, 7), col(0, 8);
  for (int i = 0; i < 20; ++i) s.entries.push_back({ch(rng), row(rng), col(rng), 0.25 * (i % 5 + 1)});
  std::sort(s.entries.begin(), s.entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return std::tie(a.channel, a.row, a.col) < std::tie(b.channel, b.row, b.col);
  });
  s.entries.erase(std::unique(s.entries.begin(), s.entries.end(),
                              [](const SparseEntry& a, const SparseEntry& b) {
                                return a.channel == b.channel && a.row == b.row && a.col == b.col;
                              }),
                  s.entries.end());
  ParameterSet ps;
  auto& k = ps.add("k", {4, 3, 3, 3});
  auto& b = ps.add("b", {4});
  fdcheck::randomize(ps, rng);
  for (const auto& p : {Conv2dParams{1, 1, 1, 1, 1, 1}, Conv2dParams{2, 2, 2, 2, 2, 2}}) {
    Tape t;
    const Var sp = sparse_conv2d(t, s, t.param(k), t.param(b), p);
    const Var de = conv2d(t, t.constant(s.to_dense()), t.param(k), t.param(b), p);
    expect_near(t.value(sp), t.value(de), 1e-12);
    auto r = fdcheck::check(ps, [&](Tape& tt) {
      return probe(tt, sparse_conv2d(tt, s, tt.param(k), tt.param(b), p));
    });
    EXPECT_LT(r.max_rel, 1e-4);
  }
}

// ---- pooling ----

TEST(Pool2d, AvgOfConstantIsConstant) {
  Tape t;
  const Var out = pool2d(t, t.constant(Tensor({2, 4, 6}, 3.5)), PoolKind::kAvg, 2, 3, 2, 3);
  for (double v : t.value(out).data()) EXPECT_DOUBLE_EQ(v, 3.5);
}

TEST(Pool2d, MaxHandExample) {
  Tape t;
  const Var out = pool2d(t, t.constant(Tensor({1, 2, 2}, {1, 2, 3, 4})), PoolKind::kMax, 2, 2, 2, 2);
  EXPECT_EQ(t.value(out).item(), 4.0);
}

TEST(Pool2d, MatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  for (auto kind : {PoolKind::kMax, PoolKind::kAvg}) {
    const Tensor in = random_tensor({3, 10, 13}, rng);
    for (auto [wh, ww, sh, sw] : std::vector<std::array<std::size_t, 4>>{{2, 2, 2, 2}, {3, 2, 1, 2}, {2, 4, 2, 4}}) {
      Tape t;
      const Var out = pool2d(t, t.constant(in), kind, wh, ww, sh, sw);
      expect_near(t.value(out), naive_pool(in, kind, wh, ww, sh, sw), 1e-12);
    }
  }
}

TEST(Pool2d, WindowLargerThanInputThrows) {
  Tape t;
  EXPECT_THROW(pool2d(t, t.constant(Tensor({1, 2, 2})), PoolKind::kMax, 3, 3, 1, 1), ShapeError);
}

TEST(Pool2d, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (auto kind : {PoolKind::kMax, PoolKind::kAvg}) {
    ParameterSet ps;
    auto& in = ps.add("in", {2, 6, 6});
    fdcheck::randomize(ps, rng);
    auto r = fdcheck::check(ps, [&](Tape& t) { return probe(t, pool2d(t, t.param(in), kind, 2, 2, 2, 2)); });
    EXPECT_LT(r.max_rel, 1e-4);
  }
}

// ---- pointwise, global pool, dense ----

TEST(PointwiseConv, IdentityAndChannelSum) {
  std::mt19937_64 rng(7);
  const Tensor in = random_tensor({2, 3, 4}, rng);
  Tape t;
  const Var id = pointwise_conv(t, t.constant(in), t.constant(Tensor({2, 2}, {1, 0, 0, 1})));
  EXPECT_EQ(t.value(id), in);
  const Var s = pointwise_conv(t, t.constant(in), t.constant(Tensor({1, 2}, {1, 1})));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_DOUBLE_EQ(t.value(s)[i], in[i] + in[12 + i]);
  EXPECT_THROW(pointwise_conv(t, t.constant(in), t.constant(Tensor({1, 3}))), ShapeError);
}

TEST(PointwiseConv, MatchesOneByOneConv) {
  std::mt19937_64 rng(8);
  const Tensor in = random_tensor({5, 4, 6}, rng);
  const Tensor k = random_tensor({3, 5}, rng);
  const Tensor b = random_tensor({3}, rng);
  Tape t;
  const Var pw = pointwise_conv(t, t.constant(in), t.constant(k), t.constant(b));
  const Var cv = conv2d(t, t.constant(in), t.constant(Tensor({3, 5, 1, 1}, std::vector<double>(k.data().begin(), k.data().end()))),
                        t.constant(b), Conv2dParams{});
  expect_near(t.value(pw), t.value(cv), 1e-12);

  ParameterSet ps;
  auto& pin = ps.add("in", {5, 4, 6});
  auto& pk = ps.add("k", {3, 5});
  auto& pb = ps.add("b", {3});
  fdcheck::randomize(ps, rng);
  auto r = fdcheck::check(ps, [&](Tape& tt) {
    return probe(tt, pointwise_conv(tt, tt.param(pin), tt.param(pk), tt.param(pb)));
  });
  EXPECT_LT(r.max_rel, 1e-4);
}

TEST(GlobalAvgPool, ConstantSinglePixelAndMean) {
  std::mt19937_64 rng(9);
  Tape t;
  const Var c = global_avg_pool(t, t.constant(Tensor({3, 4, 4}, 2.0)));
  for (double v : t.value(c).data()) EXPECT_DOUBLE_EQ(v, 2.0);
  const Var one = global_avg_pool(t, t.constant(Tensor({3, 1, 1}, {1, 2, 3})));
  EXPECT_EQ(t.value(one), Tensor({3}, {1, 2, 3}));
  const Tensor in = random_tensor({2, 5, 3}, rng);
  const Var g = global_avg_pool(t, t.constant(in));
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 15; ++i) acc += in[ch * 15 + i];
    EXPECT_NEAR(t.value(g)[ch], acc / 15.0, 1e-14);
  }
  ParameterSet ps;
  auto& pin = ps.add("in", {2, 5, 3});
  fdcheck::randomize(ps, rng);
  EXPECT_LT(fdcheck::check(ps, [&](Tape& tt) { return probe(tt, global_avg_pool(tt, tt.param(pin))); }).max_rel, 1e-4);
}

TEST(Dense, IdentityZeroWeightAndMatmul) {
  std::mt19937_64 rng(10);
  Tape t;
  const Tensor x = random_tensor({3}, rng);
  EXPECT_EQ(t.value(dense(t, t.constant(x), t.constant(Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1})),
                          t.constant(Tensor({3})))),
            x);
  const Tensor b = random_tensor({2}, rng);
  EXPECT_EQ(t.value(dense(t, t.constant(x), t.constant(Tensor({2, 3})), t.constant(b))), b);
  const Tensor w = random_tensor({4, 3}, rng);
  const Var y = dense(t, t.constant(x), t.constant(w));
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 3; ++j) acc += w[i * 3 + j] * x[j];
    EXPECT_NEAR(t.value(y)[i], acc, 1e-14);
  }
  EXPECT_THROW(dense(t, t.constant(x), t.constant(Tensor({2, 4}))), ShapeError);

  ParameterSet ps;
  auto& px = ps.add("x", {6});
  auto& pw = ps.add("w", {5, 6});
  auto& pb = ps.add("b", {5});
  fdcheck::randomize(ps, rng);
  EXPECT_LT(fdcheck::check(ps, [&](Tape& tt) {
              return probe(tt, dense(tt, tt.param(px), tt.param(pw), tt.param(pb)));
            }).max_rel,
            1e-4);
}

// ---- elementwise ----

TEST(Activations, Examples) {
  Tape t;
  const Var x = t.constant(Tensor::vector({-1.0, 0.0, 2.0}));
  EXPECT_EQ(t.value(relu(t, x)), Tensor::vector({0.0, 0.0, 2.0}));
  EXPECT_EQ(t.value(tanh(t, x))[1], 0.0);
  EXPECT_EQ(t.value(sigmoid(t, x))[1], 0.5);
  EXPECT_NEAR(t.value(sigmoid(t, x))[2], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Activations, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  ParameterSet ps;
  auto& x = ps.add("x", {40});
  fdcheck::randomize(ps, rng, 3.0);
  for (auto& v : x.value.data()) if (std::abs(v) < 1e-3) v = 0.5;  // stay off the relu kink
  using Fn = Var (*)(Tape&, Var);
  for (Fn f : {static_cast<Fn>(relu), static_cast<Fn>(tanh), static_cast<Fn>(sigmoid)}) {
    EXPECT_LT(fdcheck::check(ps, [&](Tape& t) { return probe(t, f(t, t.param(x))); }).max_rel, 1e-4);
  }
}

TEST(Elementwise, ArithmeticAndGradients) {
  std::mt19937_64 rng(12);
  ParameterSet ps;
  auto& a = ps.add("a", {3, 4});
  auto& b = ps.add("b", {3, 4});
  fdcheck::randomize(ps, rng);
  Tape t;
  const Var s = add(t, t.param(a), t.param(b));
  const Var d = sub(t, t.param(a), t.param(b));
  const Var m = mul(t, t.param(a), t.param(b));
  const Var f = affine(t, t.param(a), 2.0, -1.0);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_DOUBLE_EQ(t.value(s)[i], a.value[i] + b.value[i]);
    EXPECT_DOUBLE_EQ(t.value(d)[i], a.value[i] - b.value[i]);
    EXPECT_DOUBLE_EQ(t.value(m)[i], a.value[i] * b.value[i]);
    EXPECT_DOUBLE_EQ(t.value(f)[i], 2.0 * a.value[i] - 1.0);
  }
  EXPECT_THROW(add(t, t.param(a), t.constant(Tensor({4, 3}))), ShapeError);
  auto r = fdcheck::check(ps, [&](Tape& tt) {
    const Var pa = tt.param(a), pb = tt.param(b);
    Var v = mul(tt, add(tt, pa, pb), sub(tt, pa, affine(tt, pb, 0.5, 0.1)));
    return probe(tt, v);
  });
  EXPECT_LT(r.max_rel, 1e-4);
}

TEST(Structural, ConcatSliceStandardizeGradients) {
  std::mt19937_64 rng(13);
  ParameterSet ps;
  auto& a = ps.add("a", {2, 3, 4});
  auto& b = ps.add("b", {1, 3, 4});
  fdcheck::randomize(ps, rng);
  Tape t;
  const Var c = concat(t, {t.param(a), t.param(b)});
  ASSERT_EQ(t.value(c).shape(), (Shape{3, 3, 4}));
  EXPECT_EQ(t.value(c)[24], b.value[0]);
  const Var sl = slice(t, c, 5, 3);
  EXPECT_EQ(t.value(sl), Tensor({3}, {a.value[5], a.value[6], a.value[7]}));
  EXPECT_THROW(concat(t, {t.param(a), t.constant(Tensor({1, 3, 5}))}), ShapeError);
  EXPECT_THROW(slice(t, c, 30, 10), ShapeError);

  const Var st = channel_standardize(t, t.param(a));
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 12; ++i) mean += t.value(st)[ch * 12 + i];
    mean /= 12.0;
    for (std::size_t i = 0; i < 12; ++i) sq += std::pow(t.value(st)[ch * 12 + i] - mean, 2);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq / 12.0, 1.0, 1e-3);
  }

  auto r = fdcheck::check(ps, [&](Tape& tt) {
    const Var cc = concat(tt, {tt.param(a), tt.param(b)});
    return add(tt, probe(tt, channel_standardize(tt, cc)), probe(tt, slice(tt, cc, 7, 20), 5));
  });
  EXPECT_LT(r.max_rel, 1e-4);
}

// ---- l1 loss ----

TEST(L1Loss, Examples) {
  Tape t;
  const Var p = t.constant(Tensor::vector({1.0, 2.0}));
  EXPECT_EQ(t.value(l1_loss(t, p, p)).item(), 0.0);
  EXPECT_EQ(t.value(l1_loss(t, p, t.constant(Tensor::vector({0.0, 3.0})))).item(), 1.0);
  EXPECT_EQ(t.value(l1_loss(t, t.constant(Tensor::scalar(0.3)), t.constant(Tensor::scalar(-0.2)))).item(), 0.5);
  EXPECT_THROW(l1_loss(t, p, t.constant(Tensor::vector({1.0}))), ShapeError);
}

TEST(L1Loss, RandomVsNaiveAndGradient) {
  std::mt19937_64 rng(14);
  ParameterSet ps;
  auto& pred = ps.add("pred", {6});
  fdcheck::randomize(ps, rng);
  const Tensor target = random_tensor({6}, rng, 2.0, 3.0);  // far from pred, no kinks
  Tape t;
  double naive = 0.0;
  for (std::size_t i = 0; i < 6; ++i) naive += std::abs(pred.value[i] - target[i]);
  EXPECT_NEAR(t.value(l1_loss(t, t.param(pred), t.constant(target))).item(), naive / 6.0, 1e-15);
  EXPECT_LT(fdcheck::check(ps, [&](Tape& tt) { return l1_loss(tt, tt.param(pred), tt.constant(target)); }).max_rel,
            1e-4);
}

// ---- GRU ----

namespace {

struct GruFixture {
  ParameterSet ps;
  GruParams bind(Tape& t) {
    auto v = [&](const char* n) { return t.param(ps.at(n)); };
    return {v("wz"), v("uz"), v("bz"), v("wr"), v("ur"), v("br"), v("wn"), v("un"), v("bn")};
  }
  GruFixture(std::size_t in, std::size_t hid) {
    for (const char* n : {"wz", "wr", "wn"}) ps.add(n, {hid, in});
    for (const char* n : {"uz", "ur", "un"}) ps.add(n, {hid, hid});
    for (const char* n : {"bz", "br", "bn"}) ps.add(n, {hid});
  }
};

}  // namespace

TEST(GruCell, SaturatedUpdateGateKeepsState) {
  GruFixture g(3, 2);
  std::mt19937_64 rng(15);
  fdcheck::randomize(g.ps, rng, 0.1);
  g.ps.at("bz").value.fill(60.0);
  Tape t;
  const Tensor h = Tensor::vector({0.3, -0.7});
  const Var out = gru_cell(t, t.constant(Tensor::vector({1, 2, 3})), t.constant(h), g.bind(t));
  expect_near(t.value(out), h, 1e-12);
}

TEST(GruCell, ClosedUpdateOpenResetIsTanhLayer) {
  GruFixture g(3, 2);
  std::mt19937_64 rng(16);
  fdcheck::randomize(g.ps, rng, 0.3);
  g.ps.at("bz").value.fill(-60.0);
  g.ps.at("br").value.fill(60.0);
  Tape t;
  const Tensor x = Tensor::vector({0.2, -0.1, 0.4});
  const Tensor h = Tensor::vector({0.5, -0.25});
  const Var out = gru_cell(t, t.constant(x), t.constant(h), g.bind(t));
  const auto& W = g.ps.at("wn").value;
  const auto& U = g.ps.at("un").value;
  const auto& b = g.ps.at("bn").value;
  for (std::size_t i = 0; i < 2; ++i) {
    double a = b[i];
    for (std::size_t j = 0; j < 3; ++j) a += W[i * 3 + j] * x[j];
    for (std::size_t j = 0; j < 2; ++j) a += U[i * 2 + j] * h[j];
    EXPECT_NEAR(t.value(out)[i], std::tanh(a), 1e-12);
  }
}

TEST(GruCell, GradientMatchesFiniteDifferences) {
  GruFixture g(4, 3);
  auto& x = g.ps.add("x", {4});
  auto& h = g.ps.add("h", {3});
  std::mt19937_64 rng(17);
  fdcheck::randomize(g.ps, rng);
  auto r = fdcheck::check(g.ps, [&](Tape& t) {
    const GruParams p = g.bind(t);
    const Var h1 = gru_cell(t, t.param(x), t.param(h), p);
    const Var h2 = gru_cell(t, t.param(x), h1, p);  // two steps share weights
    return probe(t, h2);
  });
  EXPECT_LT(r.max_rel, 1e-4);
  EXPECT_EQ(r.checked, 3u * 12 + 3u * 9 + 3u * 3 + 4 + 3);
}

TEST(GruCell, ShapeMismatchThrows) {
  GruFixture g(3, 2);
  Tape t;
  EXPECT_THROW(gru_cell(t, t.constant(Tensor({4})), t.constant(Tensor({2})), g.bind(t)), ShapeError);
  EXPECT_THROW(gru_cell(t, t.constant(Tensor({3})), t.constant(Tensor({3})), g.bind(t)), ShapeError);
}

// ---- tape ----

TEST(Tape, UnusedParametersGetZeroGradient) {
  ParameterSet ps;
  auto& used = ps.add("used", {3});
  auto& unused = ps.add("unused", {3});
  used.value.fill(2.0);
  unused.value.fill(5.0);
  unused.grad.fill(7.0);
  ps.zero_grads();
  Tape t;
  t.param(unused);
  t.backward(sum(t, mul(t, t.param(used), t.param(used))));
  t.flush_param_grads();
  EXPECT_EQ(used.grad, Tensor({3}, 4.0));
  EXPECT_EQ(unused.grad, Tensor({3}, 0.0));
}

TEST(Tape, ReusedVarAccumulatesAndLinearityHolds) {
  ParameterSet ps;
  auto& x = ps.add("x", {2});
  x.value = Tensor::vector({1.5, -2.0});
  Tape t;
  const Var v = t.param(x);
  EXPECT_EQ(t.param(x), v);
  const Var loss = add(t, sum(t, affine(t, v, 3.0)), sum(t, affine(t, v, -1.0, 4.0)));
  t.backward(loss, 2.0);
  t.flush_param_grads(0.5);
  EXPECT_EQ(x.grad, Tensor({2}, 2.0));  // 0.5 * 2 * (3 - 1)
}

TEST(Tape, NoGradModeRecordsNoBackward) {
  ParameterSet ps;
  auto& x = ps.add("x", {2});
  Tape t;
  t.set_grad_enabled(false);
  const Var loss = sum(t, t.param(x));
  EXPECT_FALSE(t.requires_grad(loss));
}

TEST(Tape, FiniteCheckRaisesOnNaN) {
  Tape t;
  t.set_finite_check(true);
  EXPECT_THROW(t.constant(Tensor::vector({1.0, std::nan("")})), NonFiniteError);
  Tape quiet;
  EXPECT_NO_THROW(quiet.constant(Tensor::vector({std::nan("")})));
}

TEST(TensorType, SizeInvariant) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_EQ(Tensor({2, 3}).size(), 6u);
  EXPECT_THROW(Tensor::vector({1, 2}).item(), ShapeError);
}

// ---- optimizer ----

TEST(AdamW, FirstStepHandExample) {
  ParameterSet ps;
  auto& p = ps.add("p", {2});
  p.value = Tensor::vector({1.0, -1.0});
  p.grad = Tensor::vector({1.0, -4.0});
  AdamWState st;
  AdamWConfig cfg;
  cfg.weight_decay = 0.1;
  adamw_step(ps, st, 0.1, cfg);
  // Bias-corrected moments give m/sqrt(v) = sign(g) on the first step.
  EXPECT_NEAR(p.value[0], 1.0 * (1 - 0.01) - 0.1, 1e-7);
  EXPECT_NEAR(p.value[1], -1.0 * (1 - 0.01) + 0.1, 1e-7);
  EXPECT_EQ(st.step, 1u);
  ASSERT_EQ(st.m.size(), 1u);
  EXPECT_EQ(st.m[0].shape(), p.value.shape());
}

TEST(AdamW, ZeroGradOnlyDecays) {
  ParameterSet ps;
  auto& p = ps.add("p", {1});
  p.value[0] = 3.0;
  AdamWState st;
  AdamWConfig cfg;
  cfg.weight_decay = 1e-3;
  for (int i = 0; i < 10; ++i) adamw_step(ps, st, 1e-4, cfg);
  EXPECT_NEAR(p.value[0], 3.0 * std::pow(1 - 1e-7, 10), 1e-15);
}

TEST(AdamW, MinimizesQuadratic) {
  ParameterSet ps;
  auto& p = ps.add("p", {3});
  p.value = Tensor::vector({4.0, -2.0, 0.5});
  AdamWState st;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  for (int i = 0; i < 2000; ++i) {
    ps.zero_grads();
    Tape t;
    const Var v = t.param(p);
    t.backward(sum(t, mul(t, v, v)));
    t.flush_param_grads();
    adamw_step(ps, st, 0.01, cfg);
  }
  for (double v : p.value.data()) EXPECT_LT(std::abs(v), 1e-2);
}

// ---- checkpoint ----

TEST(Checkpoint, RoundTripAndErrors) {
  std::mt19937_64 rng(18);
  ParameterSet a;
  a.add("conv.k", {2, 1, 3, 3});
  a.add("dense.w", {4, 5});
  fdcheck::randomize(a, rng);
  const auto dir = std::filesystem::temp_directory_path() / "lidardrive_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "a.dpw", a);

  ParameterSet b;
  b.add("dense.w", {4, 5});
  b.add("conv.k", {2, 1, 3, 3});
  load_checkpoint(dir / "a.dpw", b);
  for (const char* n : {"conv.k", "dense.w"}) {
    const auto& va = a.at(n).value;
    const auto& vb = b.at(n).value;
    for (std::size_t i = 0; i < va.size(); ++i) EXPECT_EQ(vb[i], static_cast<double>(static_cast<float>(va[i])));
  }

  ParameterSet wrong_shape;
  wrong_shape.add("conv.k", {2, 1, 3, 3});
  wrong_shape.add("dense.w", {5, 4});
  EXPECT_THROW(load_checkpoint(dir / "a.dpw", wrong_shape), CheckpointError);
  ParameterSet missing;
  missing.add("conv.k", {2, 1, 3, 3});
  EXPECT_THROW(load_checkpoint(dir / "a.dpw", missing), CheckpointError);
  ParameterSet extra = ParameterSet();
  extra.add("conv.k", {2, 1, 3, 3});
  extra.add("dense.w", {4, 5});
  extra.add("gru.b", {2});
  EXPECT_THROW(load_checkpoint(dir / "a.dpw", extra), CheckpointError);
  EXPECT_THROW(load_checkpoint(dir / "none.dpw", b), CheckpointError);
  { std::ofstream(dir / "bad.dpw") << "XXXX"; }
  EXPECT_THROW(load_checkpoint(dir / "bad.dpw", b), CheckpointError);
  const auto full = std::filesystem::file_size(dir / "a.dpw");
  std::filesystem::resize_file(dir / "a.dpw", full - 3);
  EXPECT_THROW(load_checkpoint(dir / "a.dpw", b), CheckpointError);
  std::filesystem::remove_all(dir);
}
