#include "xfish/multidomain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "xfish/util.hpp"

namespace xfish {

int weak_label_for(DomainRole role) {
    return role == DomainRole::external_positive ? 1 : 0;
}

SampleDomain domain_for(DomainRole role) {
    return role == DomainRole::external_positive ? SampleDomain::fish_positive
                                                 : SampleDomain::general_negative;
}

SplitResult stratified_split(const std::vector<TrainSample>& samples, double train_fraction,
                             std::uint64_t seed, std::vector<std::string>* warnings) {
    if (samples.empty()) throw std::invalid_argument("stratified_split: no samples");
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("train_fraction must be in (0,1)");
    }
    SplitResult result;
    for (int label : {0, 1}) {
        std::vector<TrainSample> klass;
        for (const TrainSample& s : samples) {
            if (s.label == label) klass.push_back(s);
        }
        if (klass.empty()) continue;
        if (klass.size() < 2) {
            if (warnings) {
                warnings->push_back("class " + std::to_string(label) +
                                    " has fewer than 2 samples; placing all in train");
            }
            result.train.insert(result.train.end(), klass.begin(), klass.end());
            continue;
        }
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        std::shuffle(klass.begin(), klass.end(), rng);
        const auto n_train = static_cast<std::size_t>(
            std::lround(train_fraction * static_cast<double>(klass.size())));
        for (std::size_t i = 0; i < klass.size(); ++i) {
            (i < n_train ? result.train : result.validation).push_back(klass[i]);
        }
    }
    return result;
}

namespace {

std::vector<TrainSample> draw_without_replacement(const DomainSource& source, int count,
                                                  std::mt19937_64& rng) {
    std::vector<std::size_t> idx(source.pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: only the first `count` slots are needed.
    std::vector<TrainSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
        TrainSample s;
        s.path = source.pool[idx[static_cast<std::size_t>(i)]];
        s.label = weak_label_for(source.role);
        s.domain = domain_for(source.role);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

MultiDomainSampler::MultiDomainSampler(std::vector<TrainSample> project_train,
                                       std::vector<DomainSource> sources, std::uint64_t base_seed,
                                       double train_fraction)
    : project_train_(std::move(project_train)), sources_(std::move(sources)),
      base_seed_(base_seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ConfigError("train_fraction must be in (0,1)");
    }
    for (DomainSource& src : sources_) {
        if (src.draw_count < 0) throw ConfigError("source '" + src.name + "': negative draw_count");
        // Keep the external train:validation ratio equal to the project's.
        const int val_count = static_cast<int>(
            std::lround(src.draw_count * (1.0 - train_fraction) / train_fraction));
        if (static_cast<std::size_t>(src.draw_count + val_count) > src.pool.size()) {
            throw ConfigError("source '" + src.name + "': pool has " +
                              std::to_string(src.pool.size()) + " images but needs " +
                              std::to_string(src.draw_count) + " per epoch + " +
                              std::to_string(val_count) + " reserved for validation");
        }
        std::mt19937_64 rng(derive_seed(base_seed_, std::hash<std::string>{}(src.name)));
        std::shuffle(src.pool.begin(), src.pool.end(), rng);
        for (int i = 0; i < val_count; ++i) {
            TrainSample s;
            s.path = src.pool.back();
            src.pool.pop_back();
            s.label = weak_label_for(src.role);
            s.domain = domain_for(src.role);
            validation_externals_.push_back(std::move(s));
        }
    }
}

std::vector<TrainSample> MultiDomainSampler::draw_epoch(int epoch_index) const {
    std::vector<TrainSample> out = project_train_;
    for (const DomainSource& src : sources_) {
        std::mt19937_64 rng(derive_seed(base_seed_, static_cast<std::uint64_t>(epoch_index),
                                        std::hash<std::string>{}(src.name)));
        std::vector<TrainSample> drawn = draw_without_replacement(src, src.draw_count, rng);
        out.insert(out.end(), drawn.begin(), drawn.end());
    }
    return out;
}

EpochComposition MultiDomainSampler::composition(int epoch_index) const {
    EpochComposition comp;
    comp.epoch_index = epoch_index;
    comp.seed = derive_seed(base_seed_, static_cast<std::uint64_t>(epoch_index));
    comp.n_project = static_cast<int>(project_train_.size());
    for (const DomainSource& src : sources_) comp.per_source[src.name] = src.draw_count;
    return comp;
}

int MultiDomainSampler::epoch_size() const {
    int n = static_cast<int>(project_train_.size());
    for (const DomainSource& src : sources_) n += src.draw_count;
    return n;
}

}  // namespace xfish
