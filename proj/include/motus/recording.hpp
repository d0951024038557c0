#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "motus/channels.hpp"
#include "motus/common.hpp"

namespace motus {

// One subject session: T samples x 24 channels plus a per-sample validity
// mask. Accelerometer channels are in m/s^2, gyroscope in deg/s.
struct Recording {
    std::string subject_id;
    double sample_rate = 52.0;
    std::size_t num_samples = 0;
    std::vector<double> samples;  // row-major T x 24
    std::vector<char> valid;      // length T

    double at(std::size_t t, std::size_t channel) const {
        return samples[t * kNumChannels + channel];
    }
    double& at(std::size_t t, std::size_t channel) {
        return samples[t * kNumChannels + channel];
    }

    double duration_seconds() const {
        return static_cast<double>(num_samples) / sample_rate;
    }

    void resize(std::size_t t) {
        num_samples = t;
        samples.assign(t * kNumChannels, 0.0);
        valid.assign(t, 1);
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// Reads the recording table format documented in docs/formats.md:
// optional `# subject:` / `# rate:` preamble, a header row naming the
// t column and all 24 channels in fixed order, then one row per sample.
inline Recording parse_recording(std::istream& in,
                                 const std::string& fallback_subject = "unknown") {
    Recording rec;
    rec.subject_id = fallback_subject;

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    long long prev_t = -1;

    std::vector<double> rows;
    std::vector<char> valid;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            std::string body = detail::trim(line.substr(1));
            if (body.rfind("subject:", 0) == 0)
                rec.subject_id = detail::trim(body.substr(8));
            else if (body.rfind("rate:", 0) == 0) {
                rec.sample_rate = std::strtod(body.substr(5).c_str(), nullptr);
                if (!(rec.sample_rate > 0))
                    throw FormatError("line " + std::to_string(line_no) +
                                      ": sample rate must be positive");
            }
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            const auto names = channel_names();
            if (fields.size() != kNumChannels + 1 || detail::trim(fields[0]) != "t") {
                // Distinguish a missing channel from a scrambled header.
                for (const auto& name : names) {
                    bool found = false;
                    for (const auto& f : fields)
                        if (detail::trim(f) == name) found = true;
                    if (!found)
                        throw FormatError("line " + std::to_string(line_no) +
                                          ": missing channel '" + name + "'");
                }
                throw FormatError("line " + std::to_string(line_no) +
                                  ": malformed header row");
            }
            for (std::size_t i = 0; i < kNumChannels; ++i) {
                if (detail::trim(fields[i + 1]) != names[i])
                    throw FormatError("line " + std::to_string(line_no) +
                                      ": expected channel '" + names[i] + "' in column " +
                                      std::to_string(i + 2) + ", found '" +
                                      detail::trim(fields[i + 1]) + "'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != kNumChannels + 1)
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(kNumChannels + 1) + " columns, found " +
                              std::to_string(fields.size()));
        char* end = nullptr;
        const std::string t_text = detail::trim(fields[0]);
        long long t = std::strtoll(t_text.c_str(), &end, 10);
        if (end == t_text.c_str() || *end != '\0')
            throw FormatError("line " + std::to_string(line_no) + ": bad sample index '" +
                              t_text + "'");
        if (t <= prev_t)
            throw FormatError("line " + std::to_string(line_no) +
                              ": non-monotone sample index");
        prev_t = t;

        bool row_valid = true;
        for (std::size_t i = 0; i < kNumChannels; ++i) {
            const std::string text = detail::trim(fields[i + 1]);
            end = nullptr;
            double v = std::strtod(text.c_str(), &end);
            if (end == text.c_str() || *end != '\0')
                throw FormatError("line " + std::to_string(line_no) + ": bad value '" +
                                  text + "' in column " + std::to_string(i + 2));
            if (std::isnan(v)) {
                v = std::numeric_limits<double>::quiet_NaN();
                row_valid = false;
            }
            rows.push_back(v);
        }
        valid.push_back(row_valid ? 1 : 0);
    }
    if (!header_seen) throw FormatError("recording has no header row");

    rec.num_samples = valid.size();
    rec.samples = std::move(rows);
    rec.valid = std::move(valid);
    return rec;
}

inline void serialize_recording(const Recording& rec, std::ostream& out) {
    out << "# subject: " << rec.subject_id << "\n";
    out << "# rate: " << round_trip_decimal(rec.sample_rate) << "\n";
    out << "t";
    for (const auto& name : channel_names()) out << "," << name;
    out << "\n";
    for (std::size_t t = 0; t < rec.num_samples; ++t) {
        out << t;
        for (std::size_t c = 0; c < kNumChannels; ++c)
            out << "," << round_trip_decimal(rec.at(t, c));
        out << "\n";
    }
}

}  // namespace motus
