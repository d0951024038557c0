#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "motus/annotations.hpp"
#include "motus/channels.hpp"
#include "motus/class_set.hpp"
#include "motus/common.hpp"
#include "motus/recording.hpp"

namespace motus {

// Per-posture accelerometer gravity offsets, one (x,y,z) triple per sensor.
struct PostureRecipe {
    std::array<std::array<double, 3>, kNumSensors> accel_offset{};
};

// One oscillating component of a movement's signature.
struct OscComponent {
    std::size_t sensor = 0;
    Modality modality = Modality::Gyro;
    Axis axis = Axis::X;
    double amplitude = 0.0;
    double freq_hz = 1.0;
    double phase = 0.0;
};

struct MovementRecipe {
    std::vector<OscComponent> components;
};

// Seeded state machine over legal (posture, movement) pairs with constant
// plus-sinusoid-plus-noise channel recipes. Deliberately simple: the point
// is a controllable oracle, not biomechanics.
struct Scenario {
    double duration_s = 600.0;
    double sample_rate = 52.0;
    double dwell_min_s = 3.5;
    double dwell_max_s = 12.0;
    double accel_noise = 0.3;
    double gyro_noise = 5.0;
    bool meta_events = true;
    std::vector<PostureRecipe> posture_recipes;
    std::vector<MovementRecipe> movement_recipes;
    std::vector<std::pair<int, int>> legal_pairs;

    void validate() const {
        const auto& pc = posture_classes();
        const auto& mc = movement_classes();
        if (!(duration_s > 0) || !(sample_rate > 0))
            throw InvalidArgument("scenario: duration and rate must be positive");
        if (!(dwell_min_s * sample_rate >= 120.0))
            throw InvalidArgument("scenario: dwell must cover at least one window");
        if (!(dwell_max_s >= dwell_min_s)) throw InvalidArgument("scenario: dwell range empty");
        if (posture_recipes.size() != pc.size())
            throw InvalidArgument("scenario: need one recipe per posture class");
        if (movement_recipes.size() != mc.size())
            throw InvalidArgument("scenario: need one recipe per movement class");
        if (legal_pairs.empty()) throw InvalidArgument("scenario: no legal pairs");
        const int commando = mc.index_of("crawl commando");
        const int prone = pc.index_of("prone");
        const int crawl = pc.index_of("crawl posture");
        for (auto [p, m] : legal_pairs) {
            if (p < 0 || p >= static_cast<int>(pc.size()) || m < 0 ||
                m >= static_cast<int>(mc.size()))
                throw InvalidArgument("scenario: pair index out of range");
            if (m == commando && p != prone && p != crawl)
                throw InvalidArgument(
                    "scenario: commando crawl is only legal in prone/crawl posture");
        }
        for (const auto& r : movement_recipes)
            for (const auto& c : r.components) {
                if (c.sensor >= kNumSensors)
                    throw InvalidArgument("scenario: component sensor out of range");
                if (!(c.freq_hz > 0) || c.freq_hz >= sample_rate / 2.0)
                    throw InvalidArgument("scenario: component frequency out of band");
            }
    }

    static Scenario standard();

    nlohmann::ordered_json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
};

inline Scenario Scenario::standard() {
    Scenario s;
    const double g = 9.81;
    const auto& pc = posture_classes();
    const auto& mc = movement_classes();
    s.posture_recipes.resize(pc.size());

    auto set_posture = [&](const char* name, std::array<double, 3> arms,
                           std::array<double, 3> legs) {
        auto& r = s.posture_recipes[pc.index_of(name)];
        r.accel_offset[static_cast<std::size_t>(Sensor::LeftArm)] = arms;
        r.accel_offset[static_cast<std::size_t>(Sensor::RightArm)] = arms;
        r.accel_offset[static_cast<std::size_t>(Sensor::LeftLeg)] = legs;
        r.accel_offset[static_cast<std::size_t>(Sensor::RightLeg)] = legs;
    };
    // arm offsets are shared between prone and crawl, leg offsets between
    // side L and side R: no single sensor can separate every posture, the
    // four-sensor setup can
    set_posture("prone", {2.0, 0.0, -9.6}, {0.0, 0.0, -g});
    set_posture("supine", {0.0, 0.0, g}, {0.0, 0.0, g});
    set_posture("side L", {0.0, 8.5, 3.4}, {0.0, 4.9, -6.9});
    set_posture("side R", {0.0, -8.5, 3.4}, {0.0, 4.9, -6.9});
    set_posture("crawl posture", {2.0, 0.0, -9.6}, {6.9, 0.0, -6.9});

    s.movement_recipes.resize(mc.size());
    using S = Sensor;
    auto osc = [](S sensor, Modality mod, Axis axis, double amp, double hz,
                  double phase = 0.0) {
        return OscComponent{static_cast<std::size_t>(sensor), mod, axis, amp, hz, phase};
    };
    auto& rec = s.movement_recipes;
    // left/right pairs differ only in which limb carries the oscillation
    rec[mc.index_of("turn L")].components = {
        osc(S::LeftArm, Modality::Gyro, Axis::X, 60.0, 1.0),
        osc(S::LeftLeg, Modality::Gyro, Axis::X, 60.0, 1.0, 0.5),
        osc(S::RightArm, Modality::Gyro, Axis::X, 8.0, 1.0),
        osc(S::RightLeg, Modality::Gyro, Axis::X, 8.0, 1.0),
        osc(S::LeftArm, Modality::Accel, Axis::Y, 1.2, 1.0)};
    rec[mc.index_of("turn R")].components = {
        osc(S::RightArm, Modality::Gyro, Axis::X, 60.0, 1.0),
        osc(S::RightLeg, Modality::Gyro, Axis::X, 60.0, 1.0, 0.5),
        osc(S::LeftArm, Modality::Gyro, Axis::X, 8.0, 1.0),
        osc(S::LeftLeg, Modality::Gyro, Axis::X, 8.0, 1.0),
        osc(S::RightArm, Modality::Accel, Axis::Y, 1.2, 1.0)};
    rec[mc.index_of("pivot L")].components = {
        osc(S::LeftArm, Modality::Gyro, Axis::Z, 80.0, 2.0),
        osc(S::LeftLeg, Modality::Gyro, Axis::Z, 40.0, 2.0, 1.0),
        osc(S::RightArm, Modality::Gyro, Axis::Z, 8.0, 2.0),
        osc(S::RightLeg, Modality::Gyro, Axis::Z, 8.0, 2.0),
        osc(S::LeftArm, Modality::Accel, Axis::X, 1.2, 2.0)};
    rec[mc.index_of("pivot R")].components = {
        osc(S::RightArm, Modality::Gyro, Axis::Z, 80.0, 2.0),
        osc(S::RightLeg, Modality::Gyro, Axis::Z, 40.0, 2.0, 1.0),
        osc(S::LeftArm, Modality::Gyro, Axis::Z, 8.0, 2.0),
        osc(S::LeftLeg, Modality::Gyro, Axis::Z, 8.0, 2.0),
        osc(S::RightArm, Modality::Accel, Axis::X, 1.2, 2.0)};
    rec[mc.index_of("crawl proto")].components = {
        osc(S::LeftArm, Modality::Gyro, Axis::Y, 45.0, 2.5),
        osc(S::RightArm, Modality::Gyro, Axis::Y, 45.0, 2.5, M_PI),
        osc(S::LeftLeg, Modality::Gyro, Axis::Y, 45.0, 2.5, M_PI),
        osc(S::RightLeg, Modality::Gyro, Axis::Y, 45.0, 2.5),
        osc(S::LeftArm, Modality::Accel, Axis::Z, 1.0, 2.5),
        osc(S::RightArm, Modality::Accel, Axis::Z, 1.0, 2.5, M_PI)};
    rec[mc.index_of("crawl commando")].components = {
        osc(S::LeftArm, Modality::Gyro, Axis::Y, 65.0, 1.4),
        osc(S::RightArm, Modality::Gyro, Axis::Y, 65.0, 1.4, M_PI),
        osc(S::LeftLeg, Modality::Gyro, Axis::X, 35.0, 1.4, M_PI),
        osc(S::RightLeg, Modality::Gyro, Axis::X, 35.0, 1.4),
        osc(S::LeftArm, Modality::Accel, Axis::X, 1.5, 1.4),
        osc(S::RightArm, Modality::Accel, Axis::X, 1.5, 1.4, M_PI)};

    auto pair_of = [&](const char* p, const char* m) {
        return std::make_pair(pc.index_of(p), mc.index_of(m));
    };
    s.legal_pairs = {
        pair_of("prone", "macro still"),    pair_of("prone", "turn L"),
        pair_of("prone", "turn R"),         pair_of("prone", "pivot L"),
        pair_of("prone", "pivot R"),        pair_of("prone", "crawl proto"),
        pair_of("prone", "crawl commando"), pair_of("supine", "macro still"),
        pair_of("supine", "turn L"),        pair_of("supine", "turn R"),
        pair_of("side L", "macro still"),   pair_of("side L", "turn L"),
        pair_of("side L", "turn R"),        pair_of("side R", "macro still"),
        pair_of("side R", "turn L"),        pair_of("side R", "turn R"),
        pair_of("crawl posture", "macro still"),
        pair_of("crawl posture", "pivot L"),
        pair_of("crawl posture", "pivot R"),
        pair_of("crawl posture", "crawl proto"),
        pair_of("crawl posture", "crawl commando")};
    return s;
}

// ---- scenario JSON ----

inline nlohmann::ordered_json Scenario::to_json() const {
    nlohmann::ordered_json j;
    j["duration_s"] = duration_s;
    j["sample_rate"] = sample_rate;
    j["dwell_min_s"] = dwell_min_s;
    j["dwell_max_s"] = dwell_max_s;
    j["accel_noise"] = accel_noise;
    j["gyro_noise"] = gyro_noise;
    j["meta_events"] = meta_events;
    j["posture_recipes"] = nlohmann::ordered_json::array();
    for (const auto& r : posture_recipes) {
        nlohmann::ordered_json sensors = nlohmann::ordered_json::array();
        for (const auto& off : r.accel_offset) sensors.push_back(off);
        j["posture_recipes"].push_back({{"accel_offset", sensors}});
    }
    j["movement_recipes"] = nlohmann::ordered_json::array();
    for (const auto& r : movement_recipes) {
        nlohmann::ordered_json comps = nlohmann::ordered_json::array();
        for (const auto& c : r.components)
            comps.push_back({{"sensor", c.sensor},
                             {"modality", modality_name(c.modality)},
                             {"axis", axis_name(c.axis)},
                             {"amplitude", c.amplitude},
                             {"freq_hz", c.freq_hz},
                             {"phase", c.phase}});
        j["movement_recipes"].push_back({{"components", comps}});
    }
    j["legal_pairs"] = nlohmann::ordered_json::array();
    for (auto [p, m] : legal_pairs) j["legal_pairs"].push_back({p, m});
    return j;
}

inline Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario s;
    try {
        s.duration_s = j.at("duration_s").get<double>();
        s.sample_rate = j.at("sample_rate").get<double>();
        s.dwell_min_s = j.at("dwell_min_s").get<double>();
        s.dwell_max_s = j.at("dwell_max_s").get<double>();
        s.accel_noise = j.at("accel_noise").get<double>();
        s.gyro_noise = j.at("gyro_noise").get<double>();
        s.meta_events = j.at("meta_events").get<bool>();
        for (const auto& rj : j.at("posture_recipes")) {
            PostureRecipe r;
            const auto& sensors = rj.at("accel_offset");
            for (std::size_t sidx = 0; sidx < kNumSensors; ++sidx)
                for (std::size_t a = 0; a < 3; ++a)
                    r.accel_offset[sidx][a] = sensors.at(sidx).at(a).get<double>();
            s.posture_recipes.push_back(r);
        }
        for (const auto& rj : j.at("movement_recipes")) {
            MovementRecipe r;
            for (const auto& cj : rj.at("components")) {
                OscComponent c;
                c.sensor = cj.at("sensor").get<std::size_t>();
                const std::string mod = cj.at("modality").get<std::string>();
                c.modality = mod == "accel" ? Modality::Accel : Modality::Gyro;
                const std::string ax = cj.at("axis").get<std::string>();
                c.axis = ax == "x" ? Axis::X : ax == "y" ? Axis::Y : Axis::Z;
                c.amplitude = cj.at("amplitude").get<double>();
                c.freq_hz = cj.at("freq_hz").get<double>();
                c.phase = cj.at("phase").get<double>();
                r.components.push_back(c);
            }
            s.movement_recipes.push_back(std::move(r));
        }
        for (const auto& pj : j.at("legal_pairs"))
            s.legal_pairs.emplace_back(pj.at(0).get<int>(), pj.at(1).get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scenario schema: ") + e.what());
    }
    s.validate();
    return s;
}

// ---- generation ----

struct GeneratedInfant {
    Recording recording;
    AnnotationSet posture_truth;
    AnnotationSet movement_truth;
    AnnotationSet meta_truth;
};

inline GeneratedInfant generate_infant(const Scenario& scenario,
                                       const std::string& subject_id, std::uint64_t seed) {
    scenario.validate();
    std::mt19937_64 rng(seed);
    const double rate = scenario.sample_rate;
    const auto T = static_cast<std::size_t>(std::floor(scenario.duration_s * rate));

    GeneratedInfant out;
    out.recording.subject_id = subject_id;
    out.recording.sample_rate = rate;
    out.recording.resize(T);
    out.posture_truth = {subject_id + "-truth", Track::Posture, {}};
    out.movement_truth = {subject_id + "-truth", Track::Movement, {}};
    out.meta_truth = {subject_id + "-truth", Track::Meta, {}};

    // walk the state machine and lay out per-sample state ids
    std::uniform_real_distribution<double> dwell(scenario.dwell_min_s, scenario.dwell_max_s);
    std::uniform_real_distribution<double> phase_draw(0.0, 2.0 * M_PI);
    std::vector<int> posture_of(T), movement_of(T);
    std::vector<double> phase_of(T);
    std::size_t state = rng() % scenario.legal_pairs.size();
    double t = 0.0;
    while (t < scenario.duration_s) {
        const double end = std::min(scenario.duration_s, t + dwell(rng));
        const auto [p, m] = scenario.legal_pairs[state];
        const double segment_phase = phase_draw(rng);
        const auto a = static_cast<std::size_t>(std::ceil(t * rate - 1e-9));
        const auto b = std::min(T, static_cast<std::size_t>(std::ceil(end * rate - 1e-9)));
        for (std::size_t i = a; i < b; ++i) {
            posture_of[i] = p;
            movement_of[i] = m;
            phase_of[i] = segment_phase;
        }
        if (!out.posture_truth.intervals.empty() &&
            out.posture_truth.intervals.back().label == posture_classes().classes[p]) {
            out.posture_truth.intervals.back().end_s = end;
        } else {
            out.posture_truth.intervals.push_back({t, end, posture_classes().classes[p]});
        }
        if (!out.movement_truth.intervals.empty() &&
            out.movement_truth.intervals.back().label == movement_classes().classes[m]) {
            out.movement_truth.intervals.back().end_s = end;
        } else {
            out.movement_truth.intervals.push_back({t, end, movement_classes().classes[m]});
        }
        t = end;
        if (scenario.legal_pairs.size() > 1) {
            std::size_t next = state;
            while (next == state) next = rng() % scenario.legal_pairs.size();
            state = next;
        }
    }

    std::normal_distribution<double> accel_noise(0.0, scenario.accel_noise);
    std::normal_distribution<double> gyro_noise(0.0, scenario.gyro_noise);
    for (std::size_t i = 0; i < T; ++i) {
        const auto& posture = scenario.posture_recipes[posture_of[i]];
        const double time = static_cast<double>(i) / rate;
        for (std::size_t s = 0; s < kNumSensors; ++s)
            for (std::size_t a = 0; a < 3; ++a) {
                out.recording.at(i, s * kChannelsPerSensor + a) =
                    posture.accel_offset[s][a] + accel_noise(rng);
                out.recording.at(i, s * kChannelsPerSensor + 3 + a) = gyro_noise(rng);
            }
        for (const auto& c : scenario.movement_recipes[movement_of[i]].components) {
            const std::size_t col = c.sensor * kChannelsPerSensor +
                                    (c.modality == Modality::Gyro ? 3 : 0) +
                                    static_cast<std::size_t>(c.axis);
            out.recording.at(i, col) +=
                c.amplitude * std::sin(2.0 * M_PI * c.freq_hz * time + c.phase + phase_of[i]);
        }
    }

    if (scenario.meta_events && scenario.duration_s >= 60.0) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double carried_at = scenario.duration_s * (0.1 + 0.3 * u01(rng));
        const double camera_at = scenario.duration_s * (0.55 + 0.25 * u01(rng));
        const double drop_at = scenario.duration_s * (0.85 + 0.08 * u01(rng));
        out.meta_truth.intervals = {{carried_at, carried_at + 4.0, "carried"},
                                    {camera_at, camera_at + 3.0, "out-of-camera"},
                                    {drop_at, drop_at + 2.0, "sensor-drop"}};
        // a dropped connection really loses samples
        const auto a = static_cast<std::size_t>(drop_at * rate);
        const auto b = std::min(T, static_cast<std::size_t>((drop_at + 2.0) * rate));
        for (std::size_t i = a; i < b; ++i) {
            out.recording.valid[i] = 0;
            for (std::size_t c = 0; c < kNumChannels; ++c)
                out.recording.at(i, c) = std::numeric_limits<double>::quiet_NaN();
        }
    }

    out.posture_truth.sort_and_validate();
    out.movement_truth.sort_and_validate();
    out.meta_truth.sort_and_validate();
    return out;
}

// ---- simulated annotators ----

struct AnnotatorNoise {
    double boundary_jitter_s = 0.0;
    double confusion_rate = 0.0;  // per-interval relabel probability
    std::uint64_t seed = 0;
};

namespace detail {

inline AnnotationSet corrupt_track(const AnnotationSet& truth, const AnnotatorNoise& noise,
                                   const std::string& annotator_id, std::mt19937_64& rng) {
    const auto& cs = class_set_for(truth.track);
    AnnotationSet out;
    out.annotator_id = annotator_id;
    out.track = truth.track;
    out.intervals = truth.intervals;

    // jitter interior boundaries; each shift is capped at half the shorter
    // adjacent interval so ordering is preserved without cascading
    if (noise.boundary_jitter_s > 0.0) {
        std::normal_distribution<double> jitter(0.0, noise.boundary_jitter_s);
        for (std::size_t i = 1; i < out.intervals.size(); ++i) {
            const double left_len =
                truth.intervals[i - 1].end_s - truth.intervals[i - 1].start_s;
            const double right_len = truth.intervals[i].end_s - truth.intervals[i].start_s;
            const double cap = 0.45 * std::min(left_len, right_len);
            const double shift = std::clamp(jitter(rng), -cap, cap);
            out.intervals[i - 1].end_s += shift;
            out.intervals[i].start_s += shift;
        }
    }

    if (noise.confusion_rate > 0.0) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (auto& iv : out.intervals) {
            if (u01(rng) < noise.confusion_rate) {
                const int current = cs.index_of(iv.label);
                int other = static_cast<int>(rng() % (cs.size() - 1));
                if (other >= current) ++other;
                iv.label = cs.classes[other];
            }
        }
    }

    // merge neighbours that ended up with the same label
    std::vector<Interval> merged;
    for (const auto& iv : out.intervals) {
        if (!merged.empty() && merged.back().label == iv.label &&
            std::fabs(merged.back().end_s - iv.start_s) < 1e-9)
            merged.back().end_s = iv.end_s;
        else
            merged.push_back(iv);
    }
    out.intervals = std::move(merged);
    out.sort_and_validate();
    return out;
}

}  // namespace detail

// K independent noisy annotators over the posture and movement truth
// tracks; the meta track is copied verbatim. Zero noise reproduces truth.
inline std::vector<AnnotationSet> simulate_annotators(const GeneratedInfant& infant,
                                                      const AnnotatorNoise& noise,
                                                      std::size_t K = 3) {
    std::vector<AnnotationSet> out;
    for (std::size_t k = 0; k < K; ++k) {
        const std::string id = "a" + std::to_string(k + 1);
        std::mt19937_64 rng(mix_seed(noise.seed, k));
        out.push_back(detail::corrupt_track(infant.posture_truth, noise, id, rng));
        out.push_back(detail::corrupt_track(infant.movement_truth, noise, id, rng));
        AnnotationSet meta = infant.meta_truth;
        meta.annotator_id = id;
        out.push_back(std::move(meta));
    }
    return out;
}

}  // namespace motus
