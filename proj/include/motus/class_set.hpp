#pragma once

#include <string>
#include <vector>

#include "motus/common.hpp"

namespace motus {

enum class Track { Posture, Movement, Meta };

inline const char* track_name(Track t) {
    switch (t) {
        case Track::Posture: return "posture";
        case Track::Movement: return "movement";
        case Track::Meta: return "meta";
    }
    return "?";
}

inline Track parse_track(const std::string& s) {
    if (s == "posture") return Track::Posture;
    if (s == "movement") return Track::Movement;
    if (s == "meta") return Track::Meta;
    throw FormatError("unknown track '" + s + "'");
}

// Ordered class list for one annotation track.
struct ClassSet {
    Track track;
    std::vector<std::string> classes;

    std::size_t size() const { return classes.size(); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == name) return static_cast<int>(i);
        return -1;
    }

    const std::string& name_of(std::size_t i) const { return classes.at(i); }
};

inline const ClassSet& posture_classes() {
    static const ClassSet cs{
        Track::Posture, {"prone", "supine", "side L", "side R", "crawl posture"}};
    return cs;
}

inline const ClassSet& movement_classes() {
    static const ClassSet cs{Track::Movement,
                             {"macro still", "turn L", "turn R", "pivot L", "pivot R",
                              "crawl proto", "crawl commando"}};
    return cs;
}

inline const ClassSet& class_set_for(Track t) {
    if (t == Track::Posture) return posture_classes();
    if (t == Track::Movement) return movement_classes();
    throw InvalidArgument("meta track has no class set");
}

inline const std::vector<std::string>& meta_tags() {
    static const std::vector<std::string> tags{"carried", "out-of-camera", "sensor-drop"};
    return tags;
}

}  // namespace motus
