#include <doctest.h>

#include <algorithm>
#include <set>

#include "xfish/multidomain.hpp"
#include "xfish/util.hpp"

using namespace xfish;

namespace {

std::vector<TrainSample> project_samples(int positives, int negatives) {
    std::vector<TrainSample> out;
    for (int i = 0; i < positives; ++i) {
        out.push_back({"proj/pos_" + std::to_string(i) + ".png", 1, SampleDomain::project});
    }
    for (int i = 0; i < negatives; ++i) {
        out.push_back({"proj/neg_" + std::to_string(i) + ".png", 0, SampleDomain::project});
    }
    return out;
}

DomainSource make_source(const std::string& name, DomainRole role, int pool, int draw) {
    DomainSource src;
    src.name = name;
    src.role = role;
    src.draw_count = draw;
    for (int i = 0; i < pool; ++i) {
        src.pool.push_back(name + "/" + std::to_string(i) + ".png");
    }
    return src;
}

}  // namespace

TEST_CASE("stratified split preserves per-class proportions") {
    SUBCASE("exact divisibility") {
        const auto split = stratified_split(project_samples(100, 100), 0.8, 1);
        CHECK(split.train.size() == 160);
        CHECK(split.validation.size() == 40);
        const auto pos_train = std::count_if(split.train.begin(), split.train.end(),
                                             [](const auto& s) { return s.label == 1; });
        CHECK(pos_train == 80);
    }
    SUBCASE("rounding sends the remainder to validation") {
        const auto split = stratified_split(project_samples(5, 5), 0.8, 2);
        CHECK(split.train.size() == 8);
        CHECK(split.validation.size() == 2);
    }
    SUBCASE("deterministic given the seed") {
        const auto a = stratified_split(project_samples(31, 17), 0.8, 3);
        const auto b = stratified_split(project_samples(31, 17), 0.8, 3);
        CHECK(a.train == b.train);
        CHECK(a.validation == b.validation);
    }
    SUBCASE("tiny class goes entirely to train with a warning") {
        std::vector<std::string> warnings;
        const auto split = stratified_split(project_samples(1, 10), 0.8, 4, &warnings);
        CHECK(warnings.size() == 1);
        const auto pos_total = std::count_if(split.train.begin(), split.train.end(),
                                             [](const auto& s) { return s.label == 1; });
        CHECK(pos_total == 1);
    }
    SUBCASE("bad fraction rejected") {
        CHECK_THROWS_AS(stratified_split(project_samples(2, 2), 1.0, 5), std::invalid_argument);
    }
}

TEST_CASE("epoch draws have exact composition and source-consistent labels") {
    auto project = project_samples(20, 20);
    std::vector<DomainSource> sources{
        make_source("gen_neg", DomainRole::external_negative, 300, 40),
        make_source("fish_pos", DomainRole::external_positive, 200, 25),
    };
    MultiDomainSampler sampler(project, sources, 77);

    for (int epoch = 0; epoch < 10; ++epoch) {
        const auto draw = sampler.draw_epoch(epoch);
        CHECK(draw.size() == 40 + 40 + 25);
        int from_neg = 0, from_pos = 0, from_project = 0;
        std::set<std::string> neg_paths;
        for (const TrainSample& s : draw) {
            switch (s.domain) {
                case SampleDomain::project: ++from_project; break;
                case SampleDomain::general_negative:
                    ++from_neg;
                    CHECK(s.label == 0);
                    neg_paths.insert(s.path.string());
                    break;
                case SampleDomain::fish_positive:
                    ++from_pos;
                    CHECK(s.label == 1);
                    break;
            }
        }
        CHECK(from_project == 40);
        CHECK(from_neg == 40);
        CHECK(from_pos == 25);
        CHECK(neg_paths.size() == 40);  // within-epoch sampling without replacement
    }
}

TEST_CASE("consecutive epochs are re-drawn") {
    MultiDomainSampler sampler(project_samples(5, 5),
                               {make_source("gen_neg", DomainRole::external_negative, 2000, 100)},
                               91);
    std::set<std::string> distinct_draws;
    for (int epoch = 0; epoch < 5; ++epoch) {
        auto draw = sampler.draw_epoch(epoch);
        std::vector<std::string> paths;
        for (const auto& s : draw) {
            if (s.domain != SampleDomain::project) paths.push_back(s.path.string());
        }
        std::sort(paths.begin(), paths.end());
        std::string key;
        for (const auto& p : paths) key += p + "|";
        distinct_draws.insert(key);
    }
    CHECK(distinct_draws.size() == 5);
}

TEST_CASE("draws are deterministic in (seed, epoch)") {
    const auto project = project_samples(4, 4);
    const std::vector<DomainSource> sources{
        make_source("gen_neg", DomainRole::external_negative, 100, 10)};
    MultiDomainSampler a(project, sources, 5);
    MultiDomainSampler b(project, sources, 5);
    CHECK(a.draw_epoch(3) == b.draw_epoch(3));
    CHECK(a.draw_epoch(3) != a.draw_epoch(4));
}

TEST_CASE("zero draw counts reduce epochs to the project set") {
    const auto project = project_samples(6, 6);
    MultiDomainSampler sampler(project,
                               {make_source("gen_neg", DomainRole::external_negative, 10, 0)}, 1);
    CHECK(sampler.draw_epoch(0) == project);
    CHECK(sampler.validation_externals().empty());
}

TEST_CASE("validation externals never leak into training draws") {
    MultiDomainSampler sampler(project_samples(8, 8),
                               {make_source("gen_neg", DomainRole::external_negative, 60, 32),
                                make_source("fish_pos", DomainRole::external_positive, 50, 24)},
                               13);
    std::set<std::string> reserved;
    for (const TrainSample& s : sampler.validation_externals()) reserved.insert(s.path.string());
    CHECK(reserved.size() == 8 + 6);  // round(draw * 0.25) per source
    for (int epoch = 0; epoch < 10; ++epoch) {
        for (const TrainSample& s : sampler.draw_epoch(epoch)) {
            CHECK(reserved.count(s.path.string()) == 0);
        }
    }
}

TEST_CASE("undersized pools fail at construction, not at epoch time") {
    CHECK_THROWS_AS(
        MultiDomainSampler(project_samples(2, 2),
                           {make_source("gen_neg", DomainRole::external_negative, 30, 28)}, 3),
        ConfigError);
}
