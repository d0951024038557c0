#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "motus/dataset.hpp"
#include "motus/iar.hpp"
#include "motus/loso.hpp"
#include "synth_fixture.hpp"

using namespace motus;

TEST_CASE("combine_posterior") {
    SECTION("hand multiply-normalize") {
        SoftLabel prior({1.0 / 3.0, 2.0 / 3.0, 0.0});
        SoftLabel lk({0.5, 0.25, 0.25});
        auto out = combine_posterior(prior, lk);
        CHECK_THAT(out[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK_THAT(out[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK(out[2] == 0.0);
    }
    SECTION("unanimous prior is a fixed point for any positive likelihood") {
        SoftLabel prior({1.0, 0.0, 0.0});
        auto out = combine_posterior(prior, SoftLabel({0.01, 0.5, 0.49}));
        CHECK(out[0] == 1.0);
        CHECK(out[1] == 0.0);
        CHECK(out[2] == 0.0);
    }
    SECTION("uniform prior passes the likelihood through") {
        SoftLabel prior({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        SoftLabel lk({0.2, 0.3, 0.5});
        auto out = combine_posterior(prior, lk);
        CHECK_THAT(out[0], Catch::Matchers::WithinAbs(0.2, 1e-12));
        CHECK_THAT(out[1], Catch::Matchers::WithinAbs(0.3, 1e-12));
        CHECK_THAT(out[2], Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("underflow falls back to the prior unchanged") {
        SoftLabel prior({0.5, 0.5, 0.0});
        SoftLabel lk({1e-310, 1e-310, 1e-310});
        auto out = combine_posterior(prior, lk);
        CHECK(out.p == prior.p);
    }
    SECTION("length mismatch rejected") {
        CHECK_THROWS_AS(combine_posterior(SoftLabel(3), SoftLabel(4)), InvalidArgument);
    }
    SECTION("output sums to 1 (property)") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int it = 0; it < 500; ++it) {
            SoftLabel prior(5), lk(5);
            for (std::size_t c = 0; c < 5; ++c) {
                prior[c] = rng() % 3 == 0 ? 0.0 : u(rng);
                lk[c] = u(rng) + 1e-6;
            }
            if (!prior.normalize()) continue;
            auto out = combine_posterior(prior, lk);
            REQUIRE(out.is_normalized());
            for (std::size_t c = 0; c < 5; ++c)
                if (prior[c] == 0.0) REQUIRE(out[c] == 0.0);
        }
    }
}

namespace {

// toy trainer: returns a fixed likelihood favoring class 0 everywhere
IarTrainer constant_trainer(std::size_t classes) {
    return [classes](const std::vector<std::size_t>&, const std::vector<SoftSeq>&,
                     std::size_t target, std::uint64_t) -> SoftSeq {
        (void)target;
        SoftLabel lk(classes);
        for (std::size_t c = 0; c < classes; ++c) lk[c] = c == 0 ? 0.6 : 0.4 / (classes - 1);
        return SoftSeq(4, lk);
    };
}

}  // namespace

TEST_CASE("iar_refine contract") {
    const std::size_t C = 3;
    SECTION("unanimous frames are bit-identical across iterations") {
        std::vector<SoftSeq> originals(3, SoftSeq(4));
        for (auto& seq : originals)
            for (auto& l : seq) l = SoftLabel::one_hot(C, 1);
        auto refined = iar_refine(originals, constant_trainer(C), 5, 1);
        for (std::size_t j = 0; j < refined.size(); ++j)
            for (std::size_t f = 0; f < refined[j].size(); ++f)
                REQUIRE(refined[j][f]->p == originals[j][f]->p);
    }
    SECTION("ambiguous frames move toward the likelihood") {
        std::vector<SoftSeq> originals(2, SoftSeq(4));
        for (auto& seq : originals)
            for (auto& l : seq) l = SoftLabel({1.0 / 3, 1.0 / 3, 1.0 / 3});
        auto refined = iar_refine(originals, constant_trainer(C), 1, 1);
        CHECK((*refined[0][0])[0] > 1.0 / 3);
        CHECK(refined[0][0]->argmax() == 0);
    }
    SECTION("missing priors stay missing") {
        std::vector<SoftSeq> originals(2, SoftSeq(4));
        originals[0][0] = SoftLabel({0.5, 0.5, 0.0});
        auto refined = iar_refine(originals, constant_trainer(C), 2, 1);
        CHECK(refined[0][0].has_value());
        CHECK_FALSE(refined[0][1].has_value());
        CHECK_FALSE(refined[1][0].has_value());
    }
    SECTION("iterations=0 follows the identity flag") {
        std::vector<SoftSeq> originals(2, SoftSeq(1, SoftLabel::one_hot(C, 0)));
        CHECK_THROWS_AS(iar_refine(originals, constant_trainer(C), 0, 1), InvalidArgument);
        auto out = iar_refine(originals, constant_trainer(C), 0, 1, true);
        CHECK(out[0][0]->p == originals[0][0]->p);
    }
    SECTION("fewer than 2 training subjects is an impossible inner fold") {
        std::vector<SoftSeq> one(1, SoftSeq(2, SoftLabel::one_hot(C, 0)));
        REQUIRE_THROWS_WITH(iar_refine(one, constant_trainer(C), 1, 1),
                            Catch::Matchers::ContainsSubstring("inner fold impossible"));
    }
}

TEST_CASE("IAR on a synthetic cohort with the SVM inner trainer") {
    // 20% annotator confusion over generator truth
    auto cohort = testing::make_cohort(5, 150.0, AnnotatorNoise{0.25, 0.2, 0}, 2024, false);
    const auto& ds = cohort.dataset;

    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Svm;
    cfg.iar_enabled = true;
    cfg.iar_iterations = 5;
    cfg.seed = 7;
    cfg.jobs = 2;

    PreparedFeatures feats = prepare_features(ds, 2);
    std::vector<std::size_t> all_ids(ds.subjects.size());
    std::iota(all_ids.begin(), all_ids.end(), 0);
    auto labels =
        fold_training_labels(ds, &feats, nullptr, all_ids, cfg, cfg.seed, true, true);
    REQUIRE(labels.refined[kPosture]);
    REQUIRE(labels.refined[kMovement]);

    SECTION("support never grows and unanimity is preserved bit-exactly") {
        for (int track : {kPosture, kMovement}) {
            for (std::size_t j = 0; j < ds.subjects.size(); ++j) {
                const auto& priors = ds.subjects[j].priors[track];
                const auto& refined = labels.labels[track][j];
                REQUIRE(refined.size() == priors.size());
                for (std::size_t f = 0; f < priors.size(); ++f) {
                    REQUIRE(refined[f].has_value() == priors[f].has_value());
                    if (!priors[f]) continue;
                    REQUIRE(refined[f]->is_normalized(1e-9));
                    bool unanimous = false;
                    for (std::size_t c = 0; c < priors[f]->size(); ++c) {
                        if ((*priors[f])[c] == 0.0) REQUIRE((*refined[f])[c] == 0.0);
                        if ((*priors[f])[c] == 1.0) unanimous = true;
                    }
                    if (unanimous) REQUIRE(refined[f]->p == priors[f]->p);
                }
            }
        }
    }

    SECTION("refined labels agree with hidden truth at least as well as majority vote") {
        for (int track : {kPosture, kMovement}) {
            std::vector<SoftSeq> priors;
            for (const auto& s : ds.subjects) priors.push_back(s.priors[track]);
            const double majority = testing::truth_agreement(cohort, track, priors);
            const double refined =
                testing::truth_agreement(cohort, track, labels.labels[track]);
            INFO("track " << track << " majority " << majority << " refined " << refined);
            CHECK(refined >= majority - 1e-9);
        }
    }

    SECTION("refinement is deterministic") {
        auto again =
            fold_training_labels(ds, &feats, nullptr, all_ids, cfg, cfg.seed, true, true);
        for (int track : {kPosture, kMovement})
            for (std::size_t j = 0; j < ds.subjects.size(); ++j)
                for (std::size_t f = 0; f < labels.labels[track][j].size(); ++f) {
                    const auto& a = labels.labels[track][j][f];
                    const auto& b = again.labels[track][j][f];
                    REQUIRE(a.has_value() == b.has_value());
                    if (a) REQUIRE(a->p == b->p);
                }
    }

    SECTION("refined-label export emits one record per labeled frame") {
        std::vector<std::string> ids;
        for (const auto& s : ds.subjects) ids.push_back(s.id);
        std::ostringstream out;
        write_refined_labels(ids, labels.labels[kPosture], out);
        std::istringstream in(out.str());
        std::string line;
        std::size_t lines = 0, expected = 0;
        while (std::getline(in, line)) {
            ++lines;
            auto rec = nlohmann::json::parse(line);
            REQUIRE(rec.contains("infant"));
            REQUIRE(rec.contains("frame"));
            REQUIRE(rec["class_probs"].size() == 5);
        }
        for (const auto& seq : labels.labels[kPosture])
            for (const auto& l : seq)
                if (l) ++expected;
        CHECK(lines == expected);
    }
}
