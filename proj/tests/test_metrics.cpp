#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "xfish/metrics.hpp"

using namespace xfish;

namespace {

// O(P*N) pairwise Mann-Whitney oracle, ties counted half.
double pairwise_auc(const std::vector<ScoredSample>& scores) {
    double wins = 0.0;
    long long p = 0, n = 0;
    for (const auto& pos : scores) {
        if (pos.label != 1) continue;
        ++p;
        for (const auto& neg : scores) {
            if (neg.label != 0) continue;
            if (pos.score > neg.score) wins += 1.0;
            else if (pos.score == neg.score) wins += 0.5;
        }
    }
    for (const auto& s : scores) {
        if (s.label == 0) ++n;
    }
    return wins / (static_cast<double>(p) * static_cast<double>(n));
}

std::vector<ScoredSample> random_scores(int count, std::uint64_t seed, bool with_ties) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> grid(0, 9);
    std::vector<ScoredSample> scores;
    for (int i = 0; i < count; ++i) {
        const double s = with_ties ? grid(rng) / 9.0 : u(rng);
        scores.push_back({s, coin(rng)});
    }
    // Guarantee both classes.
    scores[0].label = 0;
    scores[count - 1].label = 1;
    return scores;
}

}  // namespace

TEST_CASE("confusion matrix rates reproduce the reference table") {
    // Reference counts: FP=34 of N=20104 negatives -> 0.17%; FN=101 of
    // P=16601 positives -> 0.61%.
    ConfusionMatrix cm;
    cm.fp = 34;
    cm.tn = 20104 - 34;
    cm.fn = 101;
    cm.tp = 16601 - 101;
    CHECK(cm.negatives() == 20104);
    CHECK(cm.positives() == 16601);
    CHECK(format_rate_percent(cm.fp, cm.negatives()) == "0.17");
    CHECK(format_rate_percent(cm.fn, cm.positives()) == "0.61");
}

TEST_CASE("confusion_at applies the >= threshold convention") {
    const std::vector<ScoredSample> scores{
        {0.5, 1}, {0.49, 1}, {0.5, 0}, {0.1, 0}, {0.9, 0},
    };
    const ConfusionMatrix cm = confusion_at(scores, 0.5);
    CHECK(cm.tp == 1);  // 0.5 ties go positive
    CHECK(cm.fn == 1);
    CHECK(cm.fp == 2);
    CHECK(cm.tn == 1);

    SUBCASE("all correct at threshold 0.5") {
        const ConfusionMatrix ok = confusion_at({{0.9, 1}, {0.1, 0}}, 0.5);
        CHECK(ok.fp == 0);
        CHECK(ok.fn == 0);
        CHECK(format_rate_percent(ok.fp, ok.negatives()) == "0.00");
    }
    SUBCASE("threshold 0 predicts everything positive") {
        const ConfusionMatrix all_pos = confusion_at(scores, 0.0);
        CHECK(all_pos.fp == all_pos.negatives());
        CHECK(all_pos.fn == 0);
    }
    SUBCASE("threshold above 1 predicts everything negative") {
        const ConfusionMatrix all_neg = confusion_at(scores, 1.01);
        CHECK(all_neg.tp == 0);
        CHECK(all_neg.fp == 0);
    }
    SUBCASE("bad labels are rejected") {
        CHECK_THROWS_AS(confusion_at({{0.5, 2}}), std::invalid_argument);
    }
}

TEST_CASE("confusion class totals are threshold-invariant") {
    const auto scores = random_scores(200, 31, true);
    long long p = 0, n = 0;
    for (const auto& s : scores) s.label ? ++p : ++n;
    for (double threshold : {0.0, 0.3, 0.5, 0.77, 1.0}) {
        const ConfusionMatrix cm = confusion_at(scores, threshold);
        CHECK(cm.positives() == p);
        CHECK(cm.negatives() == n);
        CHECK(cm.total() == p + n);
    }
}

TEST_CASE("roc_auc basics") {
    CHECK(roc_auc({{0.9, 1}, {0.8, 1}, {0.1, 0}, {0.2, 0}}).auc == doctest::Approx(1.0));
    CHECK(roc_auc({{0.4, 1}, {0.4, 1}, {0.4, 0}, {0.4, 0}}).auc == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc_auc({{0.5, 1}, {0.6, 1}}), std::invalid_argument);
}

TEST_CASE("roc_auc equals the pairwise oracle, with and without ties") {
    for (int trial = 0; trial < 30; ++trial) {
        const auto scores = random_scores(50, 100 + static_cast<std::uint64_t>(trial),
                                          trial % 2 == 0);
        const RocResult roc = roc_auc(scores);
        CHECK(roc.auc == doctest::Approx(pairwise_auc(scores)).epsilon(1e-12));

        // Curve endpoints and monotonicity.
        CHECK(roc.fpr.front() == 0.0);
        CHECK(roc.tpr.front() == 0.0);
        CHECK(roc.fpr.back() == doctest::Approx(1.0));
        CHECK(roc.tpr.back() == doctest::Approx(1.0));
        for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
            CHECK(roc.fpr[i] >= roc.fpr[i - 1]);
            CHECK(roc.tpr[i] >= roc.tpr[i - 1]);
            CHECK(roc.thresholds[i] <= roc.thresholds[i - 1]);
        }
    }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> coeff(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto scores = random_scores(80, 200 + static_cast<std::uint64_t>(trial), true);
        const double base = roc_auc(scores).auc;
        const double a = coeff(rng), b = coeff(rng);
        auto transformed = scores;
        for (auto& s : transformed) {
            s.score = 1.0 / (1.0 + std::exp(-(a * s.score + b)));  // monotone map
        }
        CHECK(roc_auc(transformed).auc == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("auc is order-independent") {
    auto scores = random_scores(120, 57, true);
    const double base = roc_auc(scores).auc;
    std::mt19937_64 rng(58);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(scores.begin(), scores.end(), rng);
        CHECK(roc_auc(scores).auc == doctest::Approx(base).epsilon(1e-15));
    }
}

TEST_CASE("ap_ar implements the macro averages") {
    SUBCASE("single class degenerates to precision/recall") {
        const ClassMetrics m = ap_ar({{9, 1, 3}});
        CHECK(m.ap == doctest::Approx(0.9));
        CHECK(m.ar == doctest::Approx(0.75));
    }
    SUBCASE("two classes average") {
        const ClassMetrics m = ap_ar({{10, 0, 0}, {0, 10, 10}});
        CHECK(m.ap == doctest::Approx(0.5));
        CHECK(m.ar == doctest::Approx(0.5));
    }
    SUBCASE("matches an independent recomputation for c=5") {
        std::mt19937_64 rng(61);
        std::uniform_int_distribution<int> count(0, 40);
        std::vector<ClassCounts> classes;
        double ap = 0.0, ar = 0.0;
        for (int j = 0; j < 5; ++j) {
            ClassCounts cc{count(rng) + 1, count(rng), count(rng)};
            classes.push_back(cc);
            ap += static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fp);
            ar += static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fn);
        }
        const ClassMetrics m = ap_ar(classes);
        CHECK(m.ap == doctest::Approx(ap / 5.0).epsilon(1e-15));
        CHECK(m.ar == doctest::Approx(ar / 5.0).epsilon(1e-15));
    }
    SUBCASE("degenerate class contributes zero with a warning") {
        std::vector<std::string> warnings;
        const ClassMetrics m = ap_ar({{0, 0, 5}, {10, 0, 0}}, &warnings);
        CHECK(m.ap == doctest::Approx(0.5));
        CHECK(!warnings.empty());
    }
}
