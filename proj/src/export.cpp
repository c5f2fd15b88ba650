#include "topotraj/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace topotraj {

namespace {

// Shortest decimal form that parses back to the same double.
std::string number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string xmlEscape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

}  // namespace

int csvSampleCount(double max_duration) {
    return static_cast<int>(std::floor(kCsvRateHz * max_duration + 1e-9)) + 1;
}

void writeTrajectoriesCsv(std::ostream& out, const std::vector<std::string>& ids,
                          const std::vector<Trajectory>& trajs) {
    if (ids.size() != trajs.size()) {
        throw std::invalid_argument("one id per trajectory expected");
    }
    double longest = 0.0;
    for (const auto& t : trajs) {
        longest = std::max(longest, t.totalDuration());
    }
    out << "t,vehicle_id,x,y,vx,vy,ax,ay\n";
    const int rows = trajs.empty() ? 0 : csvSampleCount(longest);
    for (int j = 0; j < rows; ++j) {
        const double t = j / kCsvRateHz;
        for (std::size_t v = 0; v < trajs.size(); ++v) {
            const FlatState s = trajs[v].eval(t);
            out << number(t) << ',' << ids[v] << ',' << number(s.position.x()) << ',' << number(s.position.y())
                << ',' << number(s.velocity.x()) << ',' << number(s.velocity.y()) << ','
                << number(s.acceleration.x()) << ',' << number(s.acceleration.y()) << '\n';
        }
    }
}

void exportTrajectories(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<Trajectory>& trajs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    writeTrajectoriesCsv(out, ids, trajs);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

std::map<std::string, std::vector<SampledState>> readTrajectoriesCsv(std::istream& in) {
    std::map<std::string, std::vector<SampledState>> out;
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,vehicle_id,x,y,vx,vy,ax,ay", 0) != 0) {
        throw std::runtime_error("trajectory CSV must start with the header t,vehicle_id,x,y,vx,vy,ax,ay");
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 8) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 8 fields");
        }
        double values[7];
        for (int k = 0, f = 0; f < 8; ++f) {
            if (f == 1) {
                continue;
            }
            const auto& s = fields[f];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), values[k++]);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + s + "'");
            }
        }
        SampledState st;
        st.t = values[0];
        st.position = {values[1], values[2]};
        st.velocity = {values[3], values[4]};
        st.acceleration = {values[5], values[6]};
        out[fields[1]].push_back(st);
    }
    return out;
}

std::map<std::string, std::vector<SampledState>> loadTrajectoriesCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return readTrajectoriesCsv(in);
}

std::string renderSvg(const Scenario& sc, const std::vector<std::vector<Vec2>>& polylines) {
    constexpr double margin = 20.0;
    constexpr double line_height = 16.0;
    const double s = kSvgPixelsPerMeter;
    const double width = sc.arena.width * s + 2 * margin;
    const auto& labels = sc.pattern.entries();
    const double arena_h = sc.arena.height * s + 2 * margin;
    const double height = arena_h + line_height * static_cast<double>(labels.size());
    auto px = [&](const Vec2& p) {
        return Vec2(margin + p.x() * s, margin + (sc.arena.height - p.y()) * s);
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << number(width) << "\" height=\""
        << number(height) << "\" viewBox=\"0 0 " << number(width) << ' ' << number(height) << "\">\n";
    svg << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << number(sc.arena.width * s)
        << "\" height=\"" << number(sc.arena.height * s) << "\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& o : sc.obstacles) {
        const Vec2 c = px(o.center);
        svg << "  <circle class=\"obstacle\" cx=\"" << number(c.x()) << "\" cy=\"" << number(c.y()) << "\" r=\""
            << number(o.radius * s) << "\" fill=\"#888888\"/>\n";
    }
    for (std::size_t v = 0; v < polylines.size(); ++v) {
        const char* color = kPalette[v % std::size(kPalette)];
        svg << "  <polyline class=\"trajectory\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < polylines[v].size(); ++k) {
            const Vec2 p = px(polylines[v][k]);
            svg << (k ? " " : "") << number(p.x()) << ',' << number(p.y());
        }
        svg << "\"/>\n";
    }
    for (std::size_t v = 0; v < sc.vehicles.size(); ++v) {
        const char* color = kPalette[v % std::size(kPalette)];
        const Vec2 a = px(sc.vehicles[v].start.position);
        const Vec2 b = px(sc.vehicles[v].goal.position);
        svg << "  <circle class=\"start\" cx=\"" << number(a.x()) << "\" cy=\"" << number(a.y())
            << "\" r=\"5\" fill=\"" << color << "\"/>\n";
        svg << "  <rect class=\"goal\" x=\"" << number(b.x() - 5) << "\" y=\"" << number(b.y() - 5)
            << "\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"" << color << "\"/>\n";
        svg << "  <text x=\"" << number(a.x() + 6) << "\" y=\"" << number(a.y() - 6) << "\" font-size=\"12\">"
            << xmlEscape(sc.vehicles[v].id) << "</text>\n";
    }
    double y = arena_h;
    for (const auto& [pair, value] : labels) {
        svg << "  <text class=\"eta\" x=\"" << margin << "\" y=\"" << number(y + 12) << "\" font-size=\"12\">"
            << xmlEscape(pair.first) << " / " << xmlEscape(pair.second) << ": " << interactionName(value)
            << " (eta=" << label(value) << ")</text>\n";
        y += line_height;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string renderSvg(const Scenario& sc, const std::vector<Trajectory>& trajs) {
    std::vector<std::vector<Vec2>> lines;
    for (const auto& t : trajs) {
        std::vector<Vec2> pts;
        pts.reserve(kRenderSamples);
        for (int k = 0; k < kRenderSamples; ++k) {
            pts.push_back(t.eval(t.totalDuration() * k / (kRenderSamples - 1)).position);
        }
        lines.push_back(std::move(pts));
    }
    return renderSvg(sc, lines);
}

void writeSvg(const std::string& path, const std::string& svg) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << svg)) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
}

}  // namespace topotraj
