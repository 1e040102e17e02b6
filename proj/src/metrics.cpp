#include "xfish/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xfish/augment.hpp"
#include "xfish/image_io.hpp"

namespace fs = std::filesystem;

namespace xfish {

ConfusionMatrix confusion_at(const std::vector<ScoredSample>& scores, double threshold) {
    if (scores.empty()) throw std::invalid_argument("confusion_at: no scores");
    ConfusionMatrix cm;
    for (const ScoredSample& s : scores) {
        if (s.label != 0 && s.label != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
        const bool pred = s.score >= threshold;
        if (s.label == 1) {
            pred ? ++cm.tp : ++cm.fn;
        } else {
            pred ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

std::string format_rate_percent(long long numerator, long long denominator) {
    const double pct = denominator ? 100.0 * numerator / static_cast<double>(denominator) : 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    return buf;
}

RocResult roc_auc(const std::vector<ScoredSample>& scores) {
    long long p = 0, n = 0;
    for (const ScoredSample& s : scores) {
        if (s.label != 0 && s.label != 1) throw std::invalid_argument("labels must be 0 or 1");
        s.label == 1 ? ++p : ++n;
    }
    if (p == 0 || n == 0) {
        throw std::invalid_argument("AUC undefined: need at least one positive and one negative");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });

    // Midrank sum over positives: AUC = (R_pos - P(P+1)/2) / (P*N).
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (scores[order[k]].label == 1) rank_sum_pos += midrank;
        }
        i = j;
    }

    RocResult roc;
    roc.auc = (rank_sum_pos - 0.5 * static_cast<double>(p) * static_cast<double>(p + 1)) /
              (static_cast<double>(p) * static_cast<double>(n));

    // Curve points: sweep thresholds downward through the unique scores.
    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    roc.fpr.push_back(0.0);
    roc.tpr.push_back(0.0);
    long long tp = 0, fp = 0;
    std::size_t k = order.size();
    while (k > 0) {
        const double threshold = scores[order[k - 1]].score;
        while (k > 0 && scores[order[k - 1]].score == threshold) {
            scores[order[k - 1]].label == 1 ? ++tp : ++fp;
            --k;
        }
        roc.thresholds.push_back(threshold);
        roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(p));
        roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n));
    }
    return roc;
}

ClassMetrics ap_ar(const std::vector<ClassCounts>& per_class, std::vector<std::string>* warnings) {
    if (per_class.empty()) throw std::invalid_argument("ap_ar: need at least one class");
    ClassMetrics m;
    m.c = static_cast<int>(per_class.size());
    for (std::size_t j = 0; j < per_class.size(); ++j) {
        const ClassCounts& cc = per_class[j];
        if (cc.tp < 0 || cc.fp < 0 || cc.fn < 0) {
            throw std::invalid_argument("class counts must be non-negative");
        }
        if (cc.tp + cc.fp > 0) {
            m.ap += static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fp);
        } else if (warnings) {
            warnings->push_back("class " + std::to_string(j) +
                                ": TP+FP = 0, precision contributes 0");
        }
        if (cc.tp + cc.fn > 0) {
            m.ar += static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fn);
        } else if (warnings) {
            warnings->push_back("class " + std::to_string(j) + ": TP+FN = 0, recall contributes 0");
        }
    }
    m.ap /= m.c;
    m.ar /= m.c;
    return m;
}

EvalReport evaluate_model(Model& model, const DatasetManifest& manifest,
                          const PreprocessParams& pp, int batch_size, double threshold) {
    std::vector<const FrameRef*> test_frames;
    for (const FrameRef& e : manifest.entries) {
        if (e.split == Split::test) test_frames.push_back(&e);
    }
    if (test_frames.empty()) throw std::invalid_argument("manifest has no test-split frames");

    EvalReport report;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<GrayF> images;
    std::vector<const FrameRef*> batch_refs;
    auto flush = [&]() {
        if (images.empty()) return;
        nn::Tensor batch(static_cast<int>(images.size()), 1, images[0].rows, images[0].cols);
        for (std::size_t s = 0; s < images.size(); ++s) {
            std::copy(images[s].pix.begin(), images[s].pix.end(),
                      batch.data.begin() + static_cast<std::ptrdiff_t>(s * batch.sample_size()));
        }
        const ForwardResult out = model.forward(batch, false);
        for (std::size_t i = 0; i < batch_refs.size(); ++i) {
            FrameScore fsc;
            fsc.path = batch_refs[i]->path;
            fsc.score = out.probs[i];
            fsc.label = batch_refs[i]->label == ClipLabel::fish ? 1 : 0;
            report.frame_scores.push_back(std::move(fsc));
        }
        images.clear();
        batch_refs.clear();
    };

    for (const FrameRef* ref : test_frames) {
        GrayF img;
        try {
            img = preprocess_only(to_float(read_gray(ref->path)), pp);
        } catch (const std::runtime_error&) {
            report.unreadable.push_back(ref->path);
            continue;
        }
        images.push_back(std::move(img));
        batch_refs.push_back(ref);
        if (static_cast<int>(images.size()) == batch_size) flush();
    }
    flush();

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.throughput_ips =
        static_cast<double>(report.frame_scores.size()) / std::max(seconds, 1e-9);

    if (report.frame_scores.empty()) {
        throw std::runtime_error("no readable test frames to evaluate");
    }
    std::vector<ScoredSample> scored;
    scored.reserve(report.frame_scores.size());
    for (const FrameScore& f : report.frame_scores) scored.push_back({f.score, f.label});
    report.confusion = confusion_at(scored, threshold);
    try {
        report.roc = roc_auc(scored);
    } catch (const std::invalid_argument& e) {
        report.roc_error = e.what();
    }
    return report;
}

void write_eval_report(const EvalReport& report, double threshold, const fs::path& path,
                       bool include_timing) {
    nlohmann::json j;
    j["threshold"] = threshold;
    j["confusion"] = {{"tp", report.confusion.tp},
                      {"fp", report.confusion.fp},
                      {"tn", report.confusion.tn},
                      {"fn", report.confusion.fn},
                      {"n", report.confusion.negatives()},
                      {"p", report.confusion.positives()}};
    j["rates"] = {
        {"fp_over_n_percent", format_rate_percent(report.confusion.fp, report.confusion.negatives())},
        {"fn_over_p_percent", format_rate_percent(report.confusion.fn, report.confusion.positives())},
    };
    if (report.roc) {
        j["auc"] = report.roc->auc;
    } else {
        j["auc_error"] = report.roc_error;
    }
    if (include_timing) j["throughput_imgs_per_sec"] = report.throughput_ips;
    j["scored_frames"] = report.frame_scores.size();
    j["unreadable"] = nlohmann::json::array();
    for (const fs::path& p : report.unreadable) j["unreadable"].push_back(p.string());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval report: " + path.string());
    out << j.dump(2) << "\n";
}

void write_scores_csv(const EvalReport& report, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scores csv: " + path.string());
    out << "path,label,score\n";
    for (const FrameScore& f : report.frame_scores) {
        out << f.path.string() << ',' << f.label << ',' << f.score << "\n";
    }
}

void write_roc_svg(const RocResult& roc, const fs::path& path) {
    constexpr int kSize = 480;
    constexpr int kMargin = 40;
    const int span = kSize - 2 * kMargin;
    auto px = [&](double fpr) { return kMargin + fpr * span; };
    auto py = [&](double tpr) { return kSize - kMargin - tpr * span; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ROC plot: " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kSize << "' height='" << kSize
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << px(0) << "' y1='" << py(0) << "' x2='" << px(1) << "' y2='" << py(1)
        << "' stroke='#bbbbbb' stroke-dasharray='4'/>\n";
    out << "<rect x='" << kMargin << "' y='" << kMargin << "' width='" << span << "' height='"
        << span << "' fill='none' stroke='black'/>\n";
    out << "<polyline fill='none' stroke='#c0392b' stroke-width='2' points='";
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
        out << px(roc.fpr[i]) << ',' << py(roc.tpr[i]) << ' ';
    }
    out << "'/>\n";
    std::ostringstream label;
    label << "ROC  AUC = " << roc.auc;
    out << "<text x='" << kMargin + 10 << "' y='" << kMargin + 20 << "' font-family='monospace'>"
        << label.str() << "</text>\n";
    out << "<text x='" << kSize / 2 - 10 << "' y='" << kSize - 8
        << "' font-family='monospace'>FPR</text>\n";
    out << "<text x='8' y='" << kSize / 2 << "' font-family='monospace'>TPR</text>\n";
    out << "</svg>\n";
}

}  // namespace xfish
