#pragma once

// Run configuration (JSON), history CSV and binary field snapshots.
//
// Config schema (every key except problem.kind and scheme is optional):
//   {
//     "problem": { "kind": "manufactured" | "drop_array", "preset": "desk" | "paper",
//                  "grid":   { "nx", "ny", "lx", "ly" },
//                  "params": { "m0", "beta" | "sigma", "lambda", "eta", "well_amp", "c0" },
//                  "drops":  { "count_x", "count_y", "spacing", "offset_x", "offset_y", "radius" },
//                  "dealias": false, "seed": 0 },
//     "scheme": "1a" | "1b" | "2a" | "2b" | "semi" | "sav",
//     "time":   { "t0", "tf", "dt" },
//     "output": { "dir": "out", "snapshot_every": 0, "history_every": 1 }
//   }
// well_amp defaults to beta / eta^2; lambda to 0; c0 to 1.

#include "gpav/diagnostics.hpp"
#include "gpav/errors.hpp"
#include "gpav/grid.hpp"
#include "gpav/problems.hpp"
#include "gpav/schemes.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace gpav {

struct RunConfig {
    ProblemSpec problem;
    SchemeKind scheme = SchemeKind::gpav_2a;
    std::filesystem::path output_dir = "out";
    long snapshot_every = 0; ///< 0 = never
    long history_every = 1;
    bool dealias = false;
    long seed = 0; ///< reserved; every built-in problem is deterministic
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> known)
{
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (auto k : known) {
            ok = ok || item.key() == k;
        }
        if (!ok) {
            throw ValidationError(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
        }
    }
}

inline const json* child_object(const json& obj, const char* key, const std::string& field)
{
    if (!obj.contains(key)) {
        return nullptr;
    }
    const json& c = obj.at(key);
    if (!c.is_object()) {
        throw ValidationError(field, "must be an object");
    }
    return &c;
}

template <class T>
void read_value(const json& obj, const char* key, const std::string& field, T& out)
{
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
            throw ValidationError(field, "must be a boolean");
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) {
            throw ValidationError(field, "must be an integer");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) {
            throw ValidationError(field, "must be a number");
        }
    } else {
        if (!v.is_string()) {
            throw ValidationError(field, "must be a string");
        }
    }
    out = v.get<T>();
}

inline void require(bool ok, const std::string& field, const char* what)
{
    if (!ok) {
        throw ValidationError(field, what);
    }
}

} // namespace detail

/// Parses and validates a JSON run configuration. Throws ParseError or ValidationError.
inline RunConfig parse_config(std::string_view text)
{
    using detail::json;
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ValidationError("config", "top level must be an object");
    }
    detail::reject_unknown(root, "", {"problem", "scheme", "time", "output"});

    RunConfig cfg;

    // problem
    const json* problem = detail::child_object(root, "problem", "problem");
    detail::require(problem != nullptr, "problem", "missing");
    detail::reject_unknown(*problem, "problem", {"kind", "preset", "grid", "params", "drops", "dealias", "seed"});
    std::string kind;
    detail::read_value(*problem, "kind", "problem.kind", kind);
    std::string preset = "desk";
    detail::read_value(*problem, "preset", "problem.preset", preset);
    if (kind == "manufactured") {
        detail::require(!problem->contains("preset"), "problem.preset", "only drop_array problems take a preset");
        cfg.problem = manufactured_spec();
    } else if (kind == "drop_array") {
        if (preset == "desk") {
            cfg.problem = desk_scale_drop_spec();
        } else if (preset == "paper") {
            cfg.problem = paper_drop_spec();
        } else {
            throw ValidationError("problem.preset", "expected \"desk\" or \"paper\"");
        }
    } else {
        throw ValidationError("problem.kind", "expected \"manufactured\" or \"drop_array\"");
    }
    ProblemSpec& spec = cfg.problem;

    if (const json* g = detail::child_object(*problem, "grid", "problem.grid")) {
        detail::reject_unknown(*g, "problem.grid", {"nx", "ny", "lx", "ly"});
        detail::read_value(*g, "nx", "problem.grid.nx", spec.grid.nx);
        detail::read_value(*g, "ny", "problem.grid.ny", spec.grid.ny);
        detail::read_value(*g, "lx", "problem.grid.lx", spec.grid.lx);
        detail::read_value(*g, "ly", "problem.grid.ly", spec.grid.ly);
    }
    detail::require(spec.grid.nx >= 4 && spec.grid.nx % 2 == 0, "problem.grid.nx", "must be even and >= 4");
    detail::require(spec.grid.ny >= 4 && spec.grid.ny % 2 == 0, "problem.grid.ny", "must be even and >= 4");
    detail::require(spec.grid.lx > 0.0, "problem.grid.lx", "must be positive");
    detail::require(spec.grid.ly > 0.0, "problem.grid.ly", "must be positive");
    if (spec.kind == ProblemKind::manufactured) {
        detail::require(spec.grid.lx == 2.0, "problem.grid.lx", "manufactured problem requires lx = 2");
        detail::require(spec.grid.ly == 2.0, "problem.grid.ly", "manufactured problem requires ly = 2");
        detail::require(spec.grid.nx >= 8, "problem.grid.nx", "manufactured source needs nx >= 8");
        detail::require(spec.grid.ny >= 8, "problem.grid.ny", "manufactured source needs ny >= 8");
    }

    if (const json* pj = detail::child_object(*problem, "params", "problem.params")) {
        detail::reject_unknown(*pj, "problem.params", {"m0", "beta", "sigma", "lambda", "eta", "well_amp", "c0"});
        PhysicalParams& p = spec.params;
        detail::require(!(pj->contains("beta") && pj->contains("sigma")), "problem.params.sigma",
                        "give either beta or sigma");
        detail::read_value(*pj, "m0", "problem.params.m0", p.m0);
        detail::read_value(*pj, "lambda", "problem.params.lambda", p.lambda);
        detail::read_value(*pj, "eta", "problem.params.eta", p.eta);
        detail::read_value(*pj, "c0", "problem.params.c0", p.c0);
        detail::require(p.eta > 0.0, "problem.params.eta", "must be positive");
        if (pj->contains("sigma")) {
            double sigma = 0.0;
            detail::read_value(*pj, "sigma", "problem.params.sigma", sigma);
            detail::require(sigma > 0.0, "problem.params.sigma", "must be positive");
            p.beta = sigma_to_beta(sigma, p.eta);
        }
        detail::read_value(*pj, "beta", "problem.params.beta", p.beta);
        detail::require(p.beta > 0.0, "problem.params.beta", "must be positive");
        p.well_amp = p.beta / (p.eta * p.eta);
        detail::read_value(*pj, "well_amp", "problem.params.well_amp", p.well_amp);
    }
    detail::require(spec.params.m0 > 0.0, "problem.params.m0", "must be positive");
    detail::require(spec.params.beta > 0.0, "problem.params.beta", "must be positive");
    detail::require(spec.params.lambda >= 0.0, "problem.params.lambda", "must be non-negative");
    detail::require(spec.params.well_amp >= 0.0, "problem.params.well_amp", "must be non-negative");
    detail::require(spec.params.eta > 0.0, "problem.params.eta", "must be positive");

    if (const json* d = detail::child_object(*problem, "drops", "problem.drops")) {
        detail::require(spec.kind == ProblemKind::drop_array, "problem.drops", "only valid for drop_array");
        detail::reject_unknown(*d, "problem.drops", {"count_x", "count_y", "spacing", "offset_x", "offset_y", "radius"});
        detail::read_value(*d, "count_x", "problem.drops.count_x", spec.drops.count_x);
        detail::read_value(*d, "count_y", "problem.drops.count_y", spec.drops.count_y);
        detail::read_value(*d, "spacing", "problem.drops.spacing", spec.drops.spacing);
        detail::read_value(*d, "offset_x", "problem.drops.offset_x", spec.drops.offset_x);
        detail::read_value(*d, "offset_y", "problem.drops.offset_y", spec.drops.offset_y);
        detail::read_value(*d, "radius", "problem.drops.radius", spec.drops.radius);
    }
    if (spec.kind == ProblemKind::drop_array) {
        detail::require(spec.drops.count_x >= 1, "problem.drops.count_x", "must be >= 1");
        detail::require(spec.drops.count_y >= 1, "problem.drops.count_y", "must be >= 1");
        detail::require(spec.drops.spacing > 0.0, "problem.drops.spacing", "must be positive");
        detail::require(spec.drops.radius > 0.0, "problem.drops.radius", "must be positive");
    }
    detail::read_value(*problem, "dealias", "problem.dealias", cfg.dealias);
    detail::read_value(*problem, "seed", "problem.seed", cfg.seed);

    // scheme
    detail::require(root.contains("scheme"), "scheme", "missing");
    std::string scheme;
    detail::read_value(root, "scheme", "scheme", scheme);
    const auto parsed = parse_scheme_kind(scheme);
    detail::require(parsed.has_value(), "scheme", "expected one of 1a, 1b, 2a, 2b, semi, sav");
    cfg.scheme = *parsed;

    // time
    if (const json* t = detail::child_object(root, "time", "time")) {
        detail::reject_unknown(*t, "time", {"t0", "tf", "dt"});
        detail::read_value(*t, "t0", "time.t0", spec.t0);
        detail::read_value(*t, "tf", "time.tf", spec.tf);
        detail::read_value(*t, "dt", "time.dt", spec.dt);
    }
    detail::require(spec.dt > 0.0 && std::isfinite(spec.dt), "time.dt", "must be positive");
    detail::require(spec.t0 < spec.tf, "time.tf", "must exceed t0");

    // output
    if (const json* o = detail::child_object(root, "output", "output")) {
        detail::reject_unknown(*o, "output", {"dir", "snapshot_every", "history_every"});
        std::string dir = cfg.output_dir.string();
        detail::read_value(*o, "dir", "output.dir", dir);
        detail::require(!dir.empty(), "output.dir", "must not be empty");
        cfg.output_dir = dir;
        detail::read_value(*o, "snapshot_every", "output.snapshot_every", cfg.snapshot_every);
        detail::read_value(*o, "history_every", "output.history_every", cfg.history_every);
    }
    detail::require(cfg.snapshot_every >= 0, "output.snapshot_every", "must be >= 0");
    detail::require(cfg.history_every >= 1, "output.history_every", "must be >= 1");
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// --- history CSV ----------------------------------------------------------------------------

inline constexpr std::string_view history_header = "step,t,mass,energy,r,xi,sav_r,h2,dissipation,linf_err,l2_err";

/// Shortest-exact-enough decimal form: 17 significant digits.
inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_history_row(const HistoryRecord& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    std::string row = std::to_string(r.step);
    for (const std::string& cell : {format_real(r.t), format_real(r.mass), format_real(r.energy), opt(r.r),
                                    opt(r.xi), opt(r.sav_r), format_real(r.h2), format_real(r.dissipation),
                                    opt(r.linf_err), opt(r.l2_err)}) {
        row += ',';
        row += cell;
    }
    return row;
}

/// Streams history rows, flushing each so a later failure keeps every earlier row.
class HistoryCsvWriter {
public:
    explicit HistoryCsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc)
    {
        if (!out_) {
            throw IoError("cannot open " + path.string() + " for writing");
        }
        out_ << history_header << '\n';
        check();
    }

    void write(const HistoryRecord& r)
    {
        out_ << format_history_row(r) << '\n';
        out_.flush();
        check();
    }

private:
    void check()
    {
        if (!out_) {
            throw IoError("write to history file failed");
        }
    }

    std::ofstream out_;
};

inline void write_history_csv(std::span<const HistoryRecord> records, const std::filesystem::path& path)
{
    HistoryCsvWriter w(path);
    for (const auto& r : records) {
        w.write(r);
    }
}

inline std::vector<HistoryRecord> read_history_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != history_header) {
        throw ParseError("history file lacks the expected header");
    }
    auto parse_real = [](const std::string& cell) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size()) {
            throw ParseError("bad number '" + cell + "' in history file");
        }
        return v;
    };
    auto parse_opt = [&](const std::string& cell) -> std::optional<double> {
        if (cell.empty()) {
            return std::nullopt;
        }
        return parse_real(cell);
    };
    std::vector<HistoryRecord> out;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (cells.size() != 11) {
            throw ParseError("history row has " + std::to_string(cells.size()) + " cells, expected 11");
        }
        HistoryRecord r;
        char* end = nullptr;
        r.step = std::strtol(cells[0].c_str(), &end, 10);
        if (cells[0].empty() || *end != '\0') {
            throw ParseError("bad step '" + cells[0] + "' in history file");
        }
        r.t = parse_real(cells[1]);
        r.mass = parse_real(cells[2]);
        r.energy = parse_real(cells[3]);
        r.r = parse_opt(cells[4]);
        r.xi = parse_opt(cells[5]);
        r.sav_r = parse_opt(cells[6]);
        r.h2 = parse_real(cells[7]);
        r.dissipation = parse_real(cells[8]);
        r.linf_err = parse_opt(cells[9]);
        r.l2_err = parse_opt(cells[10]);
        out.push_back(r);
    }
    return out;
}

// --- snapshots ------------------------------------------------------------------------------
// Text header "nx <int>\nny <int>\nlx <float>\nly <float>\nt <float>\n\n", then nx*ny
// little-endian IEEE-754 doubles in row-major order.

struct Snapshot {
    RealField phi;
    double t = 0.0;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int b = 0; b < 8; ++b) {
            r = (r << 8) | ((v >> (8 * b)) & 0xffu);
        }
        return r;
    } else {
        return v;
    }
}

} // namespace detail

inline void write_snapshot(const RealField& phi, double t, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const GridSpec& g = phi.grid();
    out << "nx " << g.nx << "\nny " << g.ny << "\nlx " << format_real(g.lx) << "\nly " << format_real(g.ly)
        << "\nt " << format_real(t) << "\n\n";
    for (double v : phi.values()) {
        const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) {
        throw IoError("write to snapshot " + path.string() + " failed");
    }
}

inline Snapshot read_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    auto header = [&](const char* key) {
        std::string line;
        if (!std::getline(in, line) || line.rfind(std::string(key) + " ", 0) != 0) {
            throw ParseError(std::string("snapshot header lacks '") + key + "'");
        }
        return line.substr(std::strlen(key) + 1);
    };
    GridSpec g;
    g.nx = std::stoi(header("nx"));
    g.ny = std::stoi(header("ny"));
    g.lx = std::stod(header("lx"));
    g.ly = std::stod(header("ly"));
    const double t = std::stod(header("t"));
    std::string blank;
    if (!std::getline(in, blank) || !blank.empty()) {
        throw ParseError("snapshot header must end with a blank line");
    }
    g.validate();
    RealField phi(g);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        std::uint64_t bits = 0;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
            throw ParseError("snapshot payload is truncated");
        }
        phi[k] = std::bit_cast<double>(detail::to_little_endian(bits));
    }
    return {std::move(phi), t};
}

} // namespace gpav
