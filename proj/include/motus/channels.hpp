#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "motus/common.hpp"

namespace motus {

enum class Sensor { LeftArm = 0, RightArm = 1, LeftLeg = 2, RightLeg = 3 };
enum class Modality { Accel = 0, Gyro = 1 };
enum class Axis { X = 0, Y = 1, Z = 2 };

inline constexpr std::size_t kNumSensors = 4;
inline constexpr std::size_t kChannelsPerSensor = 6;  // 3 accel + 3 gyro
inline constexpr std::size_t kNumChannels = kNumSensors * kChannelsPerSensor;

// One of the 24 signal channels. The global column order is fixed:
// sensor-major, modality-middle, axis-minor.
struct ChannelId {
    Sensor sensor;
    Modality modality;
    Axis axis;

    std::size_t index() const {
        return static_cast<std::size_t>(sensor) * kChannelsPerSensor +
               static_cast<std::size_t>(modality) * 3 +
               static_cast<std::size_t>(axis);
    }

    bool operator==(const ChannelId&) const = default;
};

inline ChannelId channel_at(std::size_t index) {
    if (index >= kNumChannels) throw InvalidArgument("channel index out of range");
    return ChannelId{static_cast<Sensor>(index / kChannelsPerSensor),
                     static_cast<Modality>((index % kChannelsPerSensor) / 3),
                     static_cast<Axis>(index % 3)};
}

inline const char* sensor_name(Sensor s) {
    switch (s) {
        case Sensor::LeftArm: return "left_arm";
        case Sensor::RightArm: return "right_arm";
        case Sensor::LeftLeg: return "left_leg";
        case Sensor::RightLeg: return "right_leg";
    }
    return "?";
}

inline const char* modality_name(Modality m) {
    return m == Modality::Accel ? "accel" : "gyro";
}

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "?";
}

inline std::string channel_name(const ChannelId& c) {
    return std::string(sensor_name(c.sensor)) + "_" + modality_name(c.modality) + "_" +
           axis_name(c.axis);
}

inline std::array<std::string, kNumChannels> channel_names() {
    std::array<std::string, kNumChannels> names;
    for (std::size_t i = 0; i < kNumChannels; ++i) names[i] = channel_name(channel_at(i));
    return names;
}

}  // namespace motus
