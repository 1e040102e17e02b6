#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xfish/dataset.hpp"
#include "xfish/model.hpp"

namespace xfish {

struct ScoredSample {
    double score = 0.0;  // in [0,1]
    int label = 0;       // 0 or 1
};

struct ConfusionMatrix {
    long long tp = 0, fp = 0, tn = 0, fn = 0;

    long long negatives() const { return tn + fp; }  // N
    long long positives() const { return tp + fn; }  // P
    long long total() const { return tp + fp + tn + fn; }
    double fp_over_n() const { return negatives() ? static_cast<double>(fp) / negatives() : 0.0; }
    double fn_over_p() const { return positives() ? static_cast<double>(fn) / positives() : 0.0; }

    bool operator==(const ConfusionMatrix&) const = default;
};

/// Thresholded confusion matrix; score >= threshold counts as a positive
/// prediction (ties go positive).
ConfusionMatrix confusion_at(const std::vector<ScoredSample>& scores, double threshold = 0.5);

/// Rate as a percentage with two decimals, e.g. 34/20104 -> "0.17".
std::string format_rate_percent(long long numerator, long long denominator);

struct RocResult {
    std::vector<double> thresholds;
    std::vector<double> tpr;
    std::vector<double> fpr;
    double auc = 0.0;
};

/// ROC sweep + AUC via the Mann-Whitney statistic with midrank tie handling:
/// auc = (#{score_pos > score_neg} + 0.5 * #ties) / (P * N). Throws
/// std::invalid_argument when either class is absent.
RocResult roc_auc(const std::vector<ScoredSample>& scores);

struct ClassCounts {
    long long tp = 0, fp = 0, fn = 0;
};

struct ClassMetrics {
    int c = 0;
    double ap = 0.0;  // (1/c) sum TP_j / (TP_j + FP_j)
    double ar = 0.0;  // (1/c) sum TP_j / (TP_j + FN_j)
};

/// Macro-averaged precision/recall over classes. A class with an empty
/// denominator contributes 0 and emits a warning.
ClassMetrics ap_ar(const std::vector<ClassCounts>& per_class,
                   std::vector<std::string>* warnings = nullptr);

struct FrameScore {
    std::filesystem::path path;
    double score = 0.0;
    int label = 0;
};

struct EvalReport {
    ConfusionMatrix confusion;
    std::optional<RocResult> roc;  // absent when the test split is single-class
    std::string roc_error;
    double throughput_ips = 0.0;
    std::vector<FrameScore> frame_scores;
    std::vector<std::filesystem::path> unreadable;
};

/// Scores every test-split frame of the manifest and reduces to the
/// confusion matrix, FP/N and FN/P rates, and ROC AUC. Unreadable frames are
/// listed and excluded from the metrics.
EvalReport evaluate_model(Model& model, const DatasetManifest& manifest,
                          const PreprocessParams& pp, int batch_size = 4, double threshold = 0.5);

/// Report serialization. Timing is skipped in deterministic mode so that
/// re-running an evaluation reproduces the file byte-for-byte.
void write_eval_report(const EvalReport& report, double threshold,
                       const std::filesystem::path& path, bool include_timing);
void write_scores_csv(const EvalReport& report, const std::filesystem::path& path);
void write_roc_svg(const RocResult& roc, const std::filesystem::path& path);

}  // namespace xfish
