#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "motus/annotations.hpp"
#include "motus/channels.hpp"
#include "motus/recording.hpp"
#include "motus/windowing.hpp"

using namespace motus;

namespace {

std::string make_recording_text(std::size_t rows, double fill = 0.25) {
    std::ostringstream out;
    out << "# subject: sX\n# rate: 52\n";
    out << "t";
    for (const auto& n : channel_names()) out << "," << n;
    out << "\n";
    for (std::size_t t = 0; t < rows; ++t) {
        out << t;
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << "," << fill * static_cast<double>(c + 1);
        out << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("channel order is sensor-major, modality-middle, axis-minor") {
    REQUIRE(kNumChannels == 24);
    CHECK(channel_name(channel_at(0)) == "left_arm_accel_x");
    CHECK(channel_name(channel_at(3)) == "left_arm_gyro_x");
    CHECK(channel_name(channel_at(6)) == "right_arm_accel_x");
    CHECK(channel_name(channel_at(23)) == "right_leg_gyro_z");
    for (std::size_t i = 0; i < kNumChannels; ++i) CHECK(channel_at(i).index() == i);
}

TEST_CASE("parse_recording reads a well-formed table") {
    std::istringstream in(make_recording_text(300));
    Recording rec = parse_recording(in);
    CHECK(rec.subject_id == "sX");
    CHECK(rec.sample_rate == 52.0);
    CHECK(rec.num_samples == 300);
    CHECK(rec.samples.size() == 300 * kNumChannels);
    for (char v : rec.valid) CHECK(v == 1);
}

TEST_CASE("parse_recording rejects a missing channel column") {
    std::ostringstream out;
    out << "t";
    for (const auto& n : channel_names())
        if (n != "left_leg_gyro_z") out << "," << n;
    out << "\n";
    std::istringstream in(out.str());
    REQUIRE_THROWS_WITH(parse_recording(in),
                        Catch::Matchers::ContainsSubstring("missing channel") &&
                            Catch::Matchers::ContainsSubstring("left_leg_gyro_z"));
}

TEST_CASE("parse_recording flags NaN samples in the valid mask") {
    std::string text = make_recording_text(5);
    // poison one value on the row with t=2
    auto pos = text.find("\n2,");
    auto comma = text.find(',', pos + 3);
    text.replace(pos + 3, comma - pos - 3, "nan");
    std::istringstream in(text);
    Recording rec = parse_recording(in);
    REQUIRE(rec.num_samples == 5);
    CHECK(rec.valid[1] == 1);
    CHECK(rec.valid[2] == 0);
    CHECK(std::isnan(rec.at(2, 0)));
}

TEST_CASE("parse_recording rejects non-monotone sample indices") {
    std::string text = make_recording_text(3);
    auto pos = text.find("\n2,");
    text.replace(pos + 1, 1, "1");
    std::istringstream in(text);
    REQUIRE_THROWS_WITH(parse_recording(in),
                        Catch::Matchers::ContainsSubstring("non-monotone"));
}

TEST_CASE("parse_recording names the line of an unparseable row") {
    std::string text = make_recording_text(3);
    auto pos = text.find("\n1,");
    auto comma = text.find(',', pos + 3);
    text.replace(pos + 3, comma - pos - 3, "zzz");
    std::istringstream in(text);
    REQUIRE_THROWS_WITH(parse_recording(in), Catch::Matchers::ContainsSubstring("line 5"));
}

TEST_CASE("recording serialize/parse round trip is bit exact") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist(0.0, 3.0);
    Recording rec;
    rec.subject_id = "abc";
    rec.sample_rate = 52.0;
    rec.resize(64);
    for (std::size_t t = 0; t < rec.num_samples; ++t)
        for (std::size_t c = 0; c < kNumChannels; ++c) rec.at(t, c) = dist(rng);
    rec.at(10, 4) = std::numeric_limits<double>::quiet_NaN();

    std::ostringstream out;
    serialize_recording(rec, out);
    std::istringstream in(out.str());
    Recording back = parse_recording(in);

    REQUIRE(back.num_samples == rec.num_samples);
    CHECK(back.subject_id == rec.subject_id);
    CHECK(back.valid[10] == 0);
    for (std::size_t t = 0; t < rec.num_samples; ++t)
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            const double a = rec.at(t, c);
            const double b = back.at(t, c);
            if (std::isnan(a))
                CHECK(std::isnan(b));
            else
                CHECK(a == b);
        }
}

TEST_CASE("window_frames count matches the closed-form formula") {
    SECTION("examples") {
        auto idx = window_frames(std::size_t{300}, 120, 60);
        REQUIRE(idx.starts == std::vector<std::size_t>{0, 60, 120, 180});
        CHECK(window_frames(std::size_t{120}, 120, 60).size() == 1);
        CHECK(window_frames(std::size_t{119}, 120, 60).size() == 0);
    }
    SECTION("property over random sizes") {
        std::mt19937_64 rng(99);
        for (int it = 0; it < 200; ++it) {
            std::size_t win = 1 + rng() % 200;
            std::size_t hop = 1 + rng() % win;
            std::size_t t = rng() % 2000;
            auto idx = window_frames(t, win, hop);
            std::size_t expect = t >= win ? (t - win) / hop + 1 : 0;
            REQUIRE(idx.size() == expect);
            for (std::size_t f = 0; f < idx.size(); ++f) {
                REQUIRE(idx.starts[f] == f * hop);
                REQUIRE(idx.starts[f] + win <= t);
            }
        }
    }
    SECTION("bad hop") {
        CHECK_THROWS_AS(window_frames(std::size_t{100}, 10, 11), InvalidArgument);
        CHECK_THROWS_AS(window_frames(std::size_t{100}, 10, 0), InvalidArgument);
    }
}

TEST_CASE("frame_label majority rule") {
    AnnotationSet track;
    track.annotator_id = "a1";
    track.track = Track::Posture;

    SECTION("span fully inside one interval") {
        track.intervals = {{0.0, 10.0, "supine"}};
        auto label = frame_label(track, 2.0, 4.0, 52.0);
        REQUIRE(label.has_value());
        CHECK(*label == "supine");
    }
    SECTION("40/60 split goes to the majority class") {
        // span [0, 2.30769...]s = 120 samples; boundary at 40% of the span
        const double rate = 52.0;
        const double span_end = 120.0 / rate;
        const double boundary = 48.0 / rate;
        track.intervals = {{0.0, boundary, "prone"}, {boundary, 100.0, "crawl posture"}};
        auto label = frame_label(track, 0.0, span_end, rate);
        REQUIRE(label.has_value());
        CHECK(*label == "crawl posture");

        // independent sample-count oracle
        long long prone_count = 0, crawl_count = 0;
        for (long long s = 0; s < 120; ++s) {
            double t = static_cast<double>(s) / rate;
            if (t < boundary)
                ++prone_count;
            else
                ++crawl_count;
        }
        CHECK(prone_count == 48);
        CHECK(crawl_count == 72);
    }
    SECTION("unannotated span yields none") {
        track.intervals = {{10.0, 20.0, "prone"}};
        CHECK_FALSE(frame_label(track, 0.0, 2.0, 52.0).has_value());
    }
    SECTION("exact tie goes to the earlier interval") {
        const double rate = 52.0;
        track.intervals = {{0.0, 60.0 / rate, "supine"}, {60.0 / rate, 100.0, "prone"}};
        auto label = frame_label(track, 0.0, 120.0 / rate, rate);
        REQUIRE(label.has_value());
        CHECK(*label == "supine");
    }
    SECTION("permutation invariance over non-overlapping intervals") {
        const double rate = 52.0;
        std::vector<Interval> ivs = {{0.0, 0.7, "prone"},
                                     {0.7, 1.1, "supine"},
                                     {1.1, 1.6, "prone"},
                                     {1.6, 2.5, "side L"}};
        track.intervals = ivs;
        auto base = frame_label(track, 0.0, 2.3, rate);
        std::vector<std::size_t> perm{2, 0, 3, 1};
        track.intervals.clear();
        for (auto i : perm) track.intervals.push_back(ivs[i]);
        auto shuffled = frame_label(track, 0.0, 2.3, rate);
        REQUIRE(base.has_value());
        REQUIRE(shuffled.has_value());
        CHECK(*base == *shuffled);
    }
}

TEST_CASE("vote_priors") {
    const auto& cs = posture_classes();
    SECTION("unanimous votes") {
        auto p = vote_priors({std::string("prone"), std::string("prone"), std::string("prone")}, cs);
        REQUIRE(p.has_value());
        CHECK((*p)[0] == 1.0);
        for (std::size_t c = 1; c < 5; ++c) CHECK((*p)[c] == 0.0);
    }
    SECTION("2/3 + 1/3 split") {
        auto p = vote_priors({std::string("prone"), std::string("prone"), std::string("supine")}, cs);
        REQUIRE(p.has_value());
        CHECK_THAT((*p)[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
        CHECK_THAT((*p)[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    }
    SECTION("three-way split") {
        auto p = vote_priors(
            {std::string("prone"), std::string("supine"), std::string("side L")}, cs);
        REQUIRE(p.has_value());
        for (std::size_t c = 0; c < 3; ++c)
            CHECK_THAT((*p)[c], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    }
    SECTION("all-abstain input is unusable") {
        CHECK_FALSE(vote_priors({std::nullopt, std::nullopt, std::nullopt}, cs).has_value());
    }
    SECTION("sum is 1 and entries are multiples of 1/K (property)") {
        std::mt19937_64 rng(4);
        for (int it = 0; it < 300; ++it) {
            std::vector<std::optional<std::string>> votes;
            int cast = 0;
            for (int k = 0; k < 3; ++k) {
                if (rng() % 4 == 0) {
                    votes.push_back(std::nullopt);
                } else {
                    votes.push_back(cs.classes[rng() % cs.size()]);
                    ++cast;
                }
            }
            auto p = vote_priors(votes, cs);
            if (cast == 0) {
                REQUIRE_FALSE(p.has_value());
                continue;
            }
            REQUIRE(p.has_value());
            REQUIRE(p->is_normalized());
            for (std::size_t c = 0; c < cs.size(); ++c) {
                const double scaled = (*p)[c] * cast;
                REQUIRE_THAT(scaled, Catch::Matchers::WithinAbs(std::round(scaled), 1e-9));
            }
        }
    }
}

TEST_CASE("usable_mask") {
    Recording rec;
    rec.sample_rate = 52.0;
    rec.resize(52 * 60);  // 60 s
    auto frames = window_frames(rec);

    SECTION("all clean") {
        auto mask = usable_mask({}, frames, rec);
        for (char u : mask) CHECK(u == 1);
    }
    SECTION("one-sample overlap with a carried interval excludes the frame") {
        AnnotationSet meta;
        meta.annotator_id = "a1";
        meta.track = Track::Meta;
        // last sample of frame 0 is sample 119 -> time 119/52
        meta.intervals = {{119.0 / 52.0, 120.0 / 52.0, "carried"}};
        auto mask = usable_mask({meta}, frames, rec);
        CHECK(mask[0] == 0);
        CHECK(mask[2] == 1);
    }
    SECTION("10 s out-of-camera interval drops exactly the overlapping frames") {
        AnnotationSet meta;
        meta.annotator_id = "a1";
        meta.track = Track::Meta;
        meta.intervals = {{20.0, 30.0, "out-of-camera"}};
        auto mask = usable_mask({meta}, frames, rec);
        // tagged samples are [1040, 1560); frame f covers [60f, 60f+120)
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const std::size_t a = frames.starts[f];
            const bool overlaps = a < 1560 && a + 120 > 1040;
            CHECK(static_cast<bool>(mask[f]) == !overlaps);
        }
    }
    SECTION("invalid samples exclude their frames") {
        rec.valid[130] = 0;
        auto mask = usable_mask({}, frames, rec);
        CHECK(mask[0] == 1);  // covers samples [0,120)
        CHECK(mask[1] == 0);  // covers [60,180)
        CHECK(mask[2] == 0);  // covers [120,240)
        CHECK(mask[3] == 1);
    }
}

TEST_CASE("annotation files round trip") {
    std::vector<AnnotationSet> sets(2);
    sets[0].annotator_id = "a1";
    sets[0].track = Track::Posture;
    sets[0].intervals = {{0.0, 1.5, "prone"}, {1.5, 4.0, "supine"}};
    sets[1].annotator_id = "a1";
    sets[1].track = Track::Meta;
    sets[1].intervals = {{2.0, 2.5, "carried"}};

    std::ostringstream out;
    write_annotations(sets, out);
    std::istringstream in(out.str());
    auto back = parse_annotations(in);

    REQUIRE(back.size() == 2);
    const auto* posture = &back[0];
    const auto* meta = &back[1];
    if (posture->track != Track::Posture) std::swap(posture, meta);
    REQUIRE(posture->intervals.size() == 2);
    CHECK(posture->intervals[1].label == "supine");
    CHECK(posture->intervals[1].start_s == 1.5);
    REQUIRE(meta->intervals.size() == 1);
    CHECK(meta->intervals[0].label == "carried");
}

TEST_CASE("annotation validation rejects overlaps and bad labels") {
    AnnotationSet set;
    set.annotator_id = "a1";
    set.track = Track::Posture;
    set.intervals = {{0.0, 2.0, "prone"}, {1.0, 3.0, "supine"}};
    CHECK_THROWS_AS(set.sort_and_validate(), FormatError);
    set.intervals = {{0.0, 2.0, "flying"}};
    CHECK_THROWS_AS(set.sort_and_validate(), FormatError);
    set.track = Track::Meta;
    set.intervals = {{0.0, 2.0, "carried"}};
    CHECK_NOTHROW(set.sort_and_validate());
}
