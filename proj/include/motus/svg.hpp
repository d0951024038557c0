#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "motus/common.hpp"

namespace motus {

// Minimal SVG writer; enough for the report figures without pulling in a
// rendering dependency.
class SvgCanvas {
public:
    SvgCanvas(double width, double height) : width_(width), height_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none") {
        body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
              << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
              << "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
              << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
              << num(width) << "\"/>\n";
    }
    void circle(double cx, double cy, double r, const std::string& fill) {
        body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
              << "\" fill=\"" << fill << "\"/>\n";
    }
    void triangle(double cx, double cy, double r, const std::string& fill) {
        body_ << "<polygon points=\"" << num(cx) << "," << num(cy - r) << " "
              << num(cx - r) << "," << num(cy + r) << " " << num(cx + r) << ","
              << num(cy + r) << "\" fill=\"" << fill << "\"/>\n";
    }
    void cross(double cx, double cy, double r, const std::string& stroke) {
        line(cx - r, cy - r, cx + r, cy + r, stroke, 1.4);
        line(cx - r, cy + r, cx + r, cy - r, stroke, 1.4);
    }
    void text(double x, double y, const std::string& content, double size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#222") {
        body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\""
              << num(size) << "\" text-anchor=\"" << anchor
              << "\" font-family=\"sans-serif\" fill=\"" << fill << "\">" << escape(content)
              << "</text>\n";
    }

    std::string finish() const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_)
            << "\" height=\"" << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " "
            << num(height_) << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << body_.str();
        out << "</svg>\n";
        return out.str();
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
            }
        }
        return out;
    }

private:
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return buf;
    }
    double width_, height_;
    std::ostringstream body_;
};

}  // namespace motus
