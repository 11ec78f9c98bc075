#pragma once

// CSV output. Floats use 17 significant digits so values round-trip exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "gaugewalk/lattice.hpp"

namespace gaugewalk {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << header << '\n';
    }

    void row(std::initializer_list<double> cells) {
        bool first = true;
        for (double v : cells) {
            if (!first) out_ << ',';
            out_ << format_double(v);
            first = false;
        }
        out_ << '\n';
    }

    void raw(const std::string& line) { out_ << line << '\n'; }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("error while writing CSV output");
    }

private:
    std::ofstream out_;
};

/// x,y,re_R,im_R,re_L,im_L, one row per site (y = 0 in 1D).
inline void write_snapshot(const std::filesystem::path& path, const WalkerState& s) {
    CsvWriter w(path, "x,y,re_R,im_R,re_L,im_L");
    const LatticeGeom& g = s.geom();
    for (std::size_t p = 0; p < g.sites(); ++p) {
        const Complex r = s.at(p, Coin::R), l = s.at(p, Coin::L);
        w.row({g.x(p), g.y(p), r.real(), r.imag(), l.real(), l.imag()});
    }
    w.close();
}

}  // namespace gaugewalk
