#pragma once

// Run configuration: a single JSON document. Expressions in A0, A1, A2 and chi
// are parsed with gaugewalk::expr; tabulated potentials are CSV files with
// header t,x,y,A0,A1,A2.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <array>
#include <map>
#include <memory>
#include <set>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gaugewalk/expr.hpp"
#include "gaugewalk/gauge.hpp"
#include "gaugewalk/walk.hpp"

namespace gaugewalk {

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class InitialKind { Gaussian, Point, Random };

struct InitialState {
    InitialKind kind = InitialKind::Gaussian;
    GaussianPacket packet;
    std::size_t site_x = 0, site_y = 0;
    Coin coin = Coin::R;
};

struct ConvergenceBlock {
    std::vector<double> eps;
    double final_time = 1.0;
    double length = 1.0;
    double reference_dt = 0.0;
    std::size_t reference_points = 0;
};

struct RunConfig {
    int dimension = 1;
    std::size_t nx = 2, ny = 1;
    double spacing = 1.0;
    std::optional<double> eps_A;
    std::optional<double> eps_m;
    double mass = 0.0;
    double charge = 1.0;
    bool continuum_family = true;
    double theta1 = 0.0, theta2 = 0.0;  // theta1 is the 1D angle
    std::string a0 = "0", a1 = "0", a2 = "0";
    std::optional<std::string> potential_table;
    std::optional<std::string> chi;
    InitialState initial;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DerivativeNormalization gauge_normalization = DerivativeNormalization::Averaged;
    std::optional<ConvergenceBlock> convergence;
    std::filesystem::path base_dir;  // relative table paths resolve against the config file

    LatticeGeom geom() const {
        return dimension == 1 ? LatticeGeom::line(nx, spacing) : LatticeGeom::plane(nx, ny, spacing);
    }
    double eps_m_value() const { return eps_m.value_or(spacing); }

    WalkParams1D params_1d() const {
        if (continuum_family) return WalkParams1D::continuum_family(mass, charge, eps_m_value());
        return WalkParams1D{theta1, mass, charge, eps_m_value()};
    }
    WalkParams2D params_2d() const {
        if (continuum_family) return WalkParams2D::continuum_family(mass, charge, eps_m_value());
        return WalkParams2D{theta1, theta2, mass, charge, eps_m_value()};
    }
};

namespace detail {

using nlohmann::json;

inline const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

inline double required_number(const json& root, const char* key) {
    const json* v = find(root, key);
    if (!v) throw ConfigError(key, "required field is missing");
    return get_number(*v, key);
}

inline std::size_t get_count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(field, "expected a non-negative integer");
    return static_cast<std::size_t>(j.get<long long>());
}

inline std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

inline void check_expression(const std::string& src, const std::string& field) {
    try {
        (void)expr::parse(src);
    } catch (const expr::SyntaxError& e) {
        throw ConfigError(field, e.what());
    }
}

inline Complex get_complex(const json& j, const std::string& field) {
    if (j.is_number()) return {get_number(j, field), 0.0};
    if (j.is_array() && j.size() == 2) return {get_number(j[0], field), get_number(j[1], field)};
    throw ConfigError(field, "expected a number or [re, im]");
}

inline InitialState parse_initial(const json& j, int dim) {
    InitialState s;
    const std::string type = find(j, "type") ? get_string(j["type"], "initial_state.type") : "gaussian";
    if (type == "gaussian") {
        s.kind = InitialKind::Gaussian;
        if (const json* c = find(j, "center")) {
            if (!c->is_array() || c->size() != static_cast<std::size_t>(dim))
                throw ConfigError("initial_state.center", "expected one coordinate per dimension");
            s.packet.center_x = get_number((*c)[0], "initial_state.center");
            if (dim == 2) s.packet.center_y = get_number((*c)[1], "initial_state.center");
        }
        if (const json* w = find(j, "width")) s.packet.width = get_number(*w, "initial_state.width");
        if (!(s.packet.width > 0.0)) throw ConfigError("initial_state.width", "must be positive");
        if (const json* k = find(j, "momentum")) {
            if (!k->is_array() || k->size() != static_cast<std::size_t>(dim))
                throw ConfigError("initial_state.momentum", "expected one component per dimension");
            s.packet.kx = get_number((*k)[0], "initial_state.momentum");
            if (dim == 2) s.packet.ky = get_number((*k)[1], "initial_state.momentum");
        }
        if (const json* p = find(j, "polarization")) {
            if (!p->is_array() || p->size() != 2)
                throw ConfigError("initial_state.polarization", "expected [R, L] amplitudes");
            s.packet.pol_r = get_complex((*p)[0], "initial_state.polarization");
            s.packet.pol_l = get_complex((*p)[1], "initial_state.polarization");
            if (std::norm(s.packet.pol_r) + std::norm(s.packet.pol_l) == 0.0)
                throw ConfigError("initial_state.polarization", "must not vanish");
        }
    } else if (type == "point") {
        s.kind = InitialKind::Point;
        const json* site = find(j, "site");
        if (!site || !site->is_array() || site->size() != static_cast<std::size_t>(dim))
            throw ConfigError("initial_state.site", "expected one lattice index per dimension");
        s.site_x = get_count((*site)[0], "initial_state.site");
        if (dim == 2) s.site_y = get_count((*site)[1], "initial_state.site");
        const std::string coin = find(j, "coin") ? get_string(j["coin"], "initial_state.coin") : "R";
        if (coin != "R" && coin != "L") throw ConfigError("initial_state.coin", "expected \"R\" or \"L\"");
        s.coin = coin == "R" ? Coin::R : Coin::L;
    } else if (type == "random") {
        s.kind = InitialKind::Random;
    } else {
        throw ConfigError("initial_state.type", "expected gaussian, point or random");
    }
    return s;
}

}  // namespace detail

/// Validates every field before returning; throws ConfigError naming the field.
inline RunConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir = {}) {
    using detail::find;
    if (!root.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    RunConfig c;
    c.base_dir = base_dir;

    const double dim = detail::required_number(root, "dimension");
    if (dim != 1.0 && dim != 2.0) throw ConfigError("dimension", "must be 1 or 2");
    c.dimension = static_cast<int>(dim);

    const nlohmann::json* ext = find(root, "extents");
    if (!ext) throw ConfigError("extents", "required field is missing");
    if (!ext->is_array() || ext->size() != static_cast<std::size_t>(c.dimension))
        throw ConfigError("extents", "expected one extent per dimension");
    c.nx = detail::get_count((*ext)[0], "extents");
    c.ny = c.dimension == 2 ? detail::get_count((*ext)[1], "extents") : 1;
    if (c.nx < 2 || (c.dimension == 2 && c.ny < 2)) throw ConfigError("extents", "every extent must be >= 2");

    c.spacing = detail::required_number(root, "spacing");
    if (!(c.spacing > 0.0)) throw ConfigError("spacing", "must be positive");
    if (const auto* v = find(root, "eps_A")) {
        c.eps_A = detail::get_number(*v, "eps_A");
        if (!(*c.eps_A > 0.0)) throw ConfigError("eps_A", "must be positive");
    }
    if (const auto* v = find(root, "eps_m")) {
        c.eps_m = detail::get_number(*v, "eps_m");
        if (!(*c.eps_m > 0.0)) throw ConfigError("eps_m", "must be positive");
    }
    c.mass = detail::required_number(root, "mass");
    c.charge = detail::required_number(root, "charge");

    if (const auto* coin = find(root, "coin")) {
        if (coin->is_string()) {
            if (coin->get<std::string>() != "continuum-family")
                throw ConfigError("coin", "expected \"continuum-family\" or explicit angles");
            c.continuum_family = true;
        } else if (coin->is_object()) {
            c.continuum_family = false;
            if (c.dimension == 1) {
                const auto* t = find(*coin, "theta");
                if (!t) throw ConfigError("coin.theta", "required for explicit 1D angles");
                c.theta1 = detail::get_number(*t, "coin.theta");
            } else {
                const auto* t1 = find(*coin, "theta1");
                const auto* t2 = find(*coin, "theta2");
                if (!t1) throw ConfigError("coin.theta1", "required for explicit 2D angles");
                if (!t2) throw ConfigError("coin.theta2", "required for explicit 2D angles");
                c.theta1 = detail::get_number(*t1, "coin.theta1");
                c.theta2 = detail::get_number(*t2, "coin.theta2");
            }
        } else {
            throw ConfigError("coin", "expected \"continuum-family\" or an object of angles");
        }
    }

    if (const auto* pot = find(root, "potential")) {
        if (!pot->is_object()) throw ConfigError("potential", "expected an object with A0, A1, A2");
        for (const char* key : {"A0", "A1", "A2"}) {
            const std::string field = std::string("potential.") + key;
            if (const auto* e = find(*pot, key)) {
                std::string src = detail::get_string(*e, field);
                detail::check_expression(src, field);
                (key[1] == '0' ? c.a0 : key[1] == '1' ? c.a1 : c.a2) = std::move(src);
            }
        }
    }
    if (const auto* tab = find(root, "potential_table")) {
        if (find(root, "potential")) throw ConfigError("potential_table", "give either potential or potential_table");
        c.potential_table = detail::get_string(*tab, "potential_table");
    }
    if (const auto* chi = find(root, "chi")) {
        c.chi = detail::get_string(*chi, "chi");
        detail::check_expression(*c.chi, "chi");
    }
    if (const auto* init = find(root, "initial_state")) {
        if (!init->is_object()) throw ConfigError("initial_state", "expected an object");
        c.initial = detail::parse_initial(*init, c.dimension);
        if (c.initial.kind == InitialKind::Point && (c.initial.site_x >= c.nx || c.initial.site_y >= c.ny))
            throw ConfigError("initial_state.site", "outside the lattice");
    }
    const auto* steps = find(root, "n_steps");
    if (!steps) throw ConfigError("n_steps", "required field is missing");
    c.n_steps = detail::get_count(*steps, "n_steps");
    if (const auto* s = find(root, "seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
            throw ConfigError("seed", "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    if (const auto* o = find(root, "output_dir")) c.output_dir = detail::get_string(*o, "output_dir");
    if (const auto* n = find(root, "gauge_normalization")) {
        const std::string v = detail::get_string(*n, "gauge_normalization");
        if (v == "averaged") c.gauge_normalization = DerivativeNormalization::Averaged;
        else if (v == "unaveraged") c.gauge_normalization = DerivativeNormalization::Unaveraged;
        else throw ConfigError("gauge_normalization", "expected \"averaged\" or \"unaveraged\"");
    }
    if (const auto* cv = find(root, "convergence")) {
        if (!cv->is_object()) throw ConfigError("convergence", "expected an object");
        ConvergenceBlock b;
        const auto* eps = find(*cv, "eps");
        if (!eps || !eps->is_array() || eps->size() < 2)
            throw ConfigError("convergence.eps", "expected at least two values");
        for (const auto& e : *eps) {
            const double v = detail::get_number(e, "convergence.eps");
            if (!(v > 0.0)) throw ConfigError("convergence.eps", "values must be positive");
            if (!b.eps.empty() && !(v < b.eps.back())) throw ConfigError("convergence.eps", "must be strictly descending");
            b.eps.push_back(v);
        }
        const auto* tf = find(*cv, "final_time");
        if (!tf) throw ConfigError("convergence.final_time", "required field is missing");
        b.final_time = detail::get_number(*tf, "convergence.final_time");
        if (!(b.final_time > 0.0)) throw ConfigError("convergence.final_time", "must be positive");
        const auto* len = find(*cv, "length");
        if (!len) throw ConfigError("convergence.length", "required field is missing");
        b.length = detail::get_number(*len, "convergence.length");
        if (!(b.length > 0.0)) throw ConfigError("convergence.length", "must be positive");
        if (const auto* dt = find(*cv, "reference_dt")) {
            b.reference_dt = detail::get_number(*dt, "convergence.reference_dt");
            if (!(b.reference_dt > 0.0)) throw ConfigError("convergence.reference_dt", "must be positive");
        }
        if (const auto* rp = find(*cv, "reference_points"))
            b.reference_points = detail::get_count(*rp, "convergence.reference_points");
        c.convergence = b;
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(root, path.parent_path());
}

/// Tabulated potential keyed by exact (t, x, y) sample points. A table with a
/// single time value is treated as static.
class PotentialTable {
public:
    static PotentialTable read(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("potential_table", "cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw ConfigError("potential_table", "empty file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != "t,x,y,A0,A1,A2") throw ConfigError("potential_table", "header must be t,x,y,A0,A1,A2");
        PotentialTable t;
        std::size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty() || line == "\r") continue;
            std::stringstream ss(line);
            std::array<double, 6> v{};
            for (int k = 0; k < 6; ++k) {
                std::string cell;
                if (!std::getline(ss, cell, ',')) throw ConfigError("potential_table", "row " + std::to_string(row) + " has fewer than 6 columns");
                try {
                    std::size_t used = 0;
                    v[k] = std::stod(cell, &used);
                } catch (const std::exception&) {
                    throw ConfigError("potential_table", "row " + std::to_string(row) + " has a non-numeric cell");
                }
                if (!std::isfinite(v[k])) throw ConfigError("potential_table", "row " + std::to_string(row) + " is not finite");
            }
            t.times_.insert(key(v[0]));
            t.values_[{key(v[0]), key(v[1]), key(v[2])}] = {v[3], v[4], v[5]};
        }
        if (t.values_.empty()) throw ConfigError("potential_table", "no data rows");
        return t;
    }

    bool static_in_time() const { return times_.size() == 1; }

    double value(int component, double t, double x, double y) const {
        const long long tk = static_in_time() ? *times_.begin() : key(t);
        const auto it = values_.find({tk, key(x), key(y)});
        if (it == values_.end())
            throw std::out_of_range("no tabulated value at t=" + std::to_string(t) + ", x=" + std::to_string(x) +
                                    ", y=" + std::to_string(y));
        return it->second[static_cast<std::size_t>(component)];
    }

private:
    static long long key(double v) { return std::llround(v * 1e9); }

    std::set<long long> times_;
    std::map<std::tuple<long long, long long, long long>, std::array<double, 3>> values_;
};

/// Potential functions for the walk and the reference solver.
inline PotentialSpec potential_spec(const RunConfig& c) {
    PotentialSpec p;
    p.charge = c.charge;
    p.eps_A = c.eps_A;
    if (c.potential_table) {
        std::filesystem::path path = *c.potential_table;
        if (path.is_relative()) path = c.base_dir / path;
        auto table = std::make_shared<const PotentialTable>(PotentialTable::read(path));
        p.a0 = [table](double t, double x, double y) { return table->value(0, t, x, y); };
        p.a1 = [table](double t, double x, double y) { return table->value(1, t, x, y); };
        p.a2 = [table](double t, double x, double y) { return table->value(2, t, x, y); };
        p.time_independent = table->static_in_time();
        return p;
    }
    const auto a0 = expr::parse(c.a0), a1 = expr::parse(c.a1), a2 = expr::parse(c.a2);
    p.a0 = a0;
    p.a1 = a1;
    p.a2 = a2;
    p.time_independent = !a0.uses(expr::Var::T) && !a1.uses(expr::Var::T) && !a2.uses(expr::Var::T);
    return p;
}

}  // namespace gaugewalk
