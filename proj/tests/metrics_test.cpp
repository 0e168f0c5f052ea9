#include <gtest/gtest.h>

#include <cmath>

#include "gssl/data/split.hpp"
#include "gssl/data/synthetic.hpp"
#include "gssl/metrics/ablation.hpp"
#include "gssl/metrics/evaluation.hpp"
#include "gssl/metrics/hoeffding.hpp"

namespace gssl {
namespace {

RowMatrix probs_for(const std::vector<int>& predicted, std::size_t classes) {
  RowMatrix p = RowMatrix::Constant(static_cast<Eigen::Index>(predicted.size()), static_cast<Eigen::Index>(classes), 0.1);
  for (std::size_t i = 0; i < predicted.size(); ++i) p(static_cast<Eigen::Index>(i), predicted[i]) = 0.9;
  return p;
}

Trainer initialised_image_trainer(std::uint64_t seed, std::size_t init_epochs = 60) {
  RunConfig cfg;
  cfg.b = 64;
  cfg.b_l = 16;
  cfg.k = 10;
  cfg.hidden = {32, 16};
  cfg.init_epochs = init_epochs;
  cfg.n_a = 1;
  cfg.augment = false;
  cfg.seed = seed;
  auto train = moon_images(300, seed);
  auto split = make_split(train, {60, seed, true});
  Trainer tr(cfg, {train, split, std::nullopt});
  tr.supervised_init();
  return tr;
}

TEST(Top1Error, AllCorrectAndAllWrong) {
  const std::vector<int> y{0, 1, 2, 1};
  EXPECT_EQ(top1_error(probs_for(y, 3), y), 0.0);
  EXPECT_EQ(top1_error(probs_for({1, 2, 0, 0}, 3), y), 1.0);
  EXPECT_THROW(top1_error(RowMatrix(0, 3), {}), InputError);
}

TEST(Top1Error, MatchesCountingOracle) {
  Rng rng(3);
  Mlp model(MlpSpec{5, {7}, 4, true}, rng);
  RowMatrix x(100, 5);
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) {
    for (int d = 0; d < 5; ++d) x(i, d) = normal(rng);
    y[i] = static_cast<int>(uniform_index(rng, 4));
  }
  const auto probs = model.forward(x).probs;
  int wrong = 0;
  for (int i = 0; i < 100; ++i) {
    int best = 0;
    for (int c = 1; c < 4; ++c)
      if (probs(i, c) > probs(i, best)) best = c;
    wrong += best != y[i];
  }
  const double err = top1_error(model, x, y);
  EXPECT_EQ(err, wrong / 100.0);
  std::size_t right = 0;
  for (int i = 0; i < 100; ++i) right += argmax_row(probs.row(i)) == y[i];
  EXPECT_EQ(err + right / 100.0, 1.0);
}

TEST(Invariance, IdentityAugmentationGivesOne) {
  auto tr = initialised_image_trainer(1);
  const auto ds = moon_images(100, 77);
  const auto rep = augmentation_invariance(tr.model(), ds, identity_augmentation(), {}, {});
  EXPECT_EQ(rep.v_z, 1.0);
  EXPECT_EQ(rep.augmented_accuracy, rep.clean_accuracy);
}

TEST(Invariance, ClassConstantModelGivesOne) {
  Rng rng(2);
  Mlp model(MlpSpec{256, {8}, 2, false}, rng);
  for (auto& l : model.layers()) l.weight.setZero();
  model.layers().back().bias << 1.0, 0.0;
  const auto ds = moon_images(60, 5);
  const auto rep = augmentation_invariance(model, ds, pipeline_augmentation(AugmentPolicy{}), {}, {});
  EXPECT_EQ(rep.v_z, 1.0);
  EXPECT_EQ(rep.clean_accuracy, 0.5);
}

TEST(Invariance, RotationMatchesBruteForceAndDropsAccuracy) {
  auto tr = initialised_image_trainer(3, 150);
  const auto ds = moon_images(200, 91);
  const TransformSpec rot{TransformKind::kRotate, 30.0};
  const auto rep = augmentation_invariance(tr.model(), ds, fixed_transform(rot), {}, {3, 0, 1, "rotate 30"});
  std::size_t clean_hits = 0, rot_hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto img = ds.image_at(i);
    const auto r = apply_transform(img, rot);
    RowMatrix a(1, 256), b(1, 256);
    for (std::size_t p = 0; p < 256; ++p) a(0, p) = img.data[p], b(0, p) = r.data[p];
    clean_hits += argmax_row(tr.model().forward(a).probs.row(0)) == ds.labels[i];
    rot_hits += argmax_row(tr.model().forward(b).probs.row(0)) == ds.labels[i];
  }
  EXPECT_DOUBLE_EQ(rep.clean_accuracy, clean_hits / 200.0);
  EXPECT_DOUBLE_EQ(rep.augmented_accuracy, rot_hits / 200.0);
  EXPECT_DOUBLE_EQ(rep.v_z, static_cast<double>(rot_hits) / static_cast<double>(clean_hits));
  EXPECT_LT(rep.v_z, 1.0);
}

TEST(Invariance, ZeroCleanAccuracyRejected) {
  Rng rng(2);
  Mlp model(MlpSpec{256, {8}, 2, false}, rng);
  for (auto& l : model.layers()) l.weight.setZero();
  model.layers().back().bias << 1.0, 0.0;
  auto ds = moon_images(20, 5);
  ds.labels.assign(20, 1);
  EXPECT_THROW(augmentation_invariance(model, ds, identity_augmentation(), {}, {}), InputError);
}

TEST(Hoeffding, BoundFormula) {
  EXPECT_NEAR(hoeffding_bound(3, 0.5, 1.0), 2.0 * std::exp(-1.5), 1e-15);
  EXPECT_NEAR(hoeffding_bound(3, 0.5, 1.0), 0.4463, 1e-4);
}

TEST(Hoeffding, EmpiricalTailBelowBound) {
  HoeffdingOptions opts;
  opts.trials = 100000;
  opts.mean_draws = 1000000;
  const auto r = hoeffding_check(bernoulli_sampler(0.5), opts);
  EXPECT_LE(r.empirical_tail, r.bound);
  EXPECT_TRUE(r.within_bound());
}

TEST(Hoeffding, DeviationBeyondRangeNeverHappens) {
  HoeffdingOptions opts;
  opts.eps = 1.5;
  opts.trials = 10000;
  opts.mean_draws = 10000;
  const auto r = hoeffding_check(clipped_gaussian_sampler(0.5, 1.0, 0.0, 1.0), opts);
  EXPECT_EQ(r.empirical_tail, 0.0);
}

TEST(Hoeffding, BernoulliTailStrictlyDecreasesInNa) {
  double prev = 2.0;
  for (std::size_t na : {1u, 3u, 5u}) {
    HoeffdingOptions opts;
    opts.n_a = na;
    opts.eps = 0.3;
    opts.trials = 20000;
    opts.mean_draws = 100000;
    const auto r = hoeffding_check(bernoulli_sampler(0.5), opts);
    EXPECT_LT(r.empirical_tail, prev);
    prev = r.empirical_tail;
  }
}

TEST(Hoeffding, ContractViolations) {
  HoeffdingOptions opts;
  opts.trials = 10000;
  opts.mean_draws = 10;
  EXPECT_THROW(hoeffding_check([](Rng&) { return 1.5; }, opts), InputError);
  opts.trials = 100;
  EXPECT_THROW(hoeffding_check(bernoulli_sampler(0.5), opts), InvalidConfig);
}

TEST(VarianceStudy, DeterministicAugmentationHasNoVariance) {
  auto tr = initialised_image_trainer(4, 20);
  const auto ds = moon_images(4, 8);
  for (const auto& row : multisample_variance_study(tr.model(), ds, identity_augmentation(), {1, 3, 5}, 50))
    EXPECT_LT(row.variance, 1e-28);
}

TEST(VarianceStudy, AveragingFourReplicasQuartersVariance) {
  auto tr = initialised_image_trainer(5, 20);
  const auto ds = moon_images(4, 9);
  const auto rows =
      multisample_variance_study(tr.model(), ds, pipeline_augmentation(AugmentPolicy{}), {1, 4}, 10000, 11);
  EXPECT_NEAR(rows[0].variance / rows[1].variance, 4.0, 0.8);
}

TEST(VarianceStudy, VarianceDecreasesAlongTheGrid) {
  auto tr = initialised_image_trainer(6, 20);
  const auto ds = moon_images(4, 10);
  const auto rows =
      multisample_variance_study(tr.model(), ds, pipeline_augmentation(AugmentPolicy{}), {1, 3, 5}, 10000, 12);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].n_a, 1u);
  EXPECT_EQ(rows[2].n_a, 5u);
  EXPECT_GT(rows[0].variance, rows[1].variance);
  EXPECT_GT(rows[1].variance, rows[2].variance);
}

TEST(Ablation, DisconnectedComponentsGraphIsExact) {
  const auto ds = gaussian_blobs(300, circle_centers(3, 20.0), 0.5, 3);
  RunConfig cfg;
  cfg.k = 5;
  cfg.b = 16;
  cfg.b_l = 2;
  cfg.hidden = {16, 8};
  cfg.init_epochs = 30;
  cfg.l2_embedding = false;
  cfg.similarity = "gaussian";
  cfg.augment = false;
  const auto split = make_split(ds, {3, 3, true});
  Trainer tr(cfg, {ds, split, std::nullopt});
  tr.supervised_init();
  const auto snap = compare_pseudo_labels(tr.model(), tr.clean_train(), split, ds.labels, cfg);
  EXPECT_EQ(snap.graph_accuracy, 1.0);
  const auto probs = tr.model().forward(tr.clean_train()).probs;
  std::size_t hits = 0;
  for (std::size_t i : split.unlabelled) hits += argmax_row(probs.row(static_cast<Eigen::Index>(i))) == ds.labels[i];
  EXPECT_EQ(snap.network_accuracy, static_cast<double>(hits) / static_cast<double>(split.unlabelled.size()));
}

TEST(Ablation, VariantsShareFeaturesBitwise) {
  const auto ds = two_moons(200, 0.1, 4);
  const auto split = make_split(ds, {6, 4, true});
  RunConfig cfg;
  cfg.b = 32;
  cfg.b_l = 8;
  cfg.k = 10;
  cfg.hidden = {16, 8};
  cfg.init_epochs = 10;
  RunConfig a = cfg, b = cfg;
  a.pseudo_labels = "network";
  Trainer ta(a, {ds, split, std::nullopt}), tb(b, {ds, split, std::nullopt});
  ta.supervised_init();
  tb.supervised_init();
  EXPECT_EQ(ta.model().forward(ta.clean_train()).embeddings, tb.model().forward(tb.clean_train()).embeddings);
}

TEST(Ablation, PairedRunsReportBothSeries) {
  const auto ds = two_moons(300, 0.1, 5);
  const auto split = make_split(ds, {6, 5, true});
  RunConfig cfg;
  cfg.b = 32;
  cfg.b_l = 8;
  cfg.k = 10;
  cfg.mu = 0.001;
  cfg.S = 20;
  cfg.hidden = {16, 8};
  cfg.init_epochs = 20;
  cfg.l2_embedding = false;
  cfg.similarity = "gaussian";
  const auto rows = pseudo_label_ablation(cfg, {ds, split, std::nullopt});
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().epoch, 1u);
  for (const auto& r : rows) {
    EXPECT_GE(r.graph_pl_accuracy, 0.0);
    EXPECT_LE(r.network_pl_accuracy, 1.0);
  }
}

}  // namespace
}  // namespace gssl
