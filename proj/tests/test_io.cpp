#include "gpav/io.hpp"
#include "gpav/simulation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

using namespace gpav;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("gpav_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* minimal_manufactured = R"({"problem": {"kind": "manufactured"}, "scheme": "2a"})";

std::string field_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<no error>";
}

HistoryRecord sample_record()
{
    HistoryRecord r;
    r.step = 12;
    r.t = 0.1 + 12 * 0.01;
    r.mass = -1.0 / 3.0;
    r.energy = 123.456789012345678;
    r.r = std::sqrt(123.4);
    r.xi = 0.99999999999999989;
    r.h2 = 1e-300;
    r.dissipation = 5e300;
    r.l2_err = std::nextafter(1.0, 2.0);
    return r;
}

} // namespace

// --- config --------------------------------------------------------------------------------

TEST(ParseConfig, MinimalManufacturedFillsDefaults)
{
    const auto cfg = parse_config(minimal_manufactured);
    EXPECT_EQ(cfg.scheme, SchemeKind::gpav_2a);
    EXPECT_EQ(cfg.problem.kind, ProblemKind::manufactured);
    EXPECT_EQ(cfg.problem.grid, (GridSpec{20, 20, 2.0, 2.0}));
    EXPECT_EQ(cfg.problem.params.c0, 1.0);
    EXPECT_EQ(cfg.problem.params.lambda, 0.0);
    EXPECT_FALSE(cfg.dealias);
    EXPECT_EQ(cfg.history_every, 1);
    EXPECT_EQ(cfg.snapshot_every, 0);
    EXPECT_EQ(cfg.output_dir, fs::path("out"));
    EXPECT_EQ(cfg.problem.t0, 0.1);
    EXPECT_EQ(cfg.problem.tf, 1.1);
}

TEST(ParseConfig, UnknownSchemeNamesTheField)
{
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "3c"})"), "scheme");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}})"), "scheme");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": 2})"), "scheme");
}

TEST(ParseConfig, NegativeDtNamesTheField)
{
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"dt": -0.1}})"), "time.dt");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"dt": 0}})"), "time.dt");
}

TEST(ParseConfig, OtherConstraints)
{
    EXPECT_EQ(field_of(R"({"scheme": "1a"})"), "problem");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "spinodal"}, "scheme": "1a"})"), "problem.kind");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "extra": 1})"), "extra");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured", "grid": {"nx": 21}}, "scheme": "1a"})"),
              "problem.grid.nx");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured", "grid": {"lx": 3}}, "scheme": "1a"})"),
              "problem.grid.lx");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured", "params": {"m0": -1}}, "scheme": "1a"})"),
              "problem.params.m0");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"t0": 2, "tf": 1}})"),
              "time.tf");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "output": {"history_every": 0}})"),
              "output.history_every");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "drop_array", "preset": "huge"}, "scheme": "1a"})"), "problem.preset");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "drop_array", "params": {"beta": 1, "sigma": 2}}, "scheme": "1a"})"),
              "problem.params.sigma");
    EXPECT_EQ(field_of(R"({"problem": {"kind": "manufactured", "drops": {}}, "scheme": "1a"})"), "problem.drops");
}

TEST(ParseConfig, ValidationMessageNamesTheField)
{
    try {
        parse_config(R"({"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"dt": -0.1}})");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("time.dt"), std::string::npos);
    }
}

TEST(ParseConfig, MalformedJson)
{
    EXPECT_THROW(parse_config("{\"problem\": "), ParseError);
    EXPECT_THROW(parse_config(""), ParseError);
}

TEST(ParseConfig, DropPresetsAndOverrides)
{
    const auto desk = parse_config(R"({"problem": {"kind": "drop_array"}, "scheme": "sav"})");
    EXPECT_EQ(desk.problem.grid.nx, 128);
    EXPECT_EQ(desk.scheme, SchemeKind::sav2);

    const auto paper = parse_config(R"({"problem": {"kind": "drop_array", "preset": "paper"}, "scheme": "semi"})");
    EXPECT_EQ(paper.problem.grid.nx, 512);
    EXPECT_EQ(paper.problem.drops.count(), 361);

    const auto custom = parse_config(R"({
        "problem": {"kind": "drop_array", "grid": {"nx": 64, "ny": 32},
                    "params": {"sigma": 10, "eta": 0.05, "c0": 3},
                    "drops": {"count_x": 2, "radius": 0.1}, "dealias": true},
        "scheme": "2b", "time": {"dt": 0.01, "tf": 0.5},
        "output": {"dir": "runs/a", "snapshot_every": 10, "history_every": 5}})");
    EXPECT_EQ(custom.problem.grid, (GridSpec{64, 32, 2.0, 2.0}));
    EXPECT_NEAR(custom.problem.params.beta, sigma_to_beta(10.0, 0.05), 1e-15);
    EXPECT_NEAR(custom.problem.params.well_amp, custom.problem.params.beta / 0.0025, 1e-12);
    EXPECT_EQ(custom.problem.params.c0, 3.0);
    EXPECT_EQ(custom.problem.drops.count_x, 2);
    EXPECT_EQ(custom.problem.drops.count_y, 5);
    EXPECT_EQ(custom.problem.drops.radius, 0.1);
    EXPECT_TRUE(custom.dealias);
    EXPECT_EQ(custom.problem.steps(), 50);
    EXPECT_EQ(custom.output_dir, fs::path("runs/a"));
    EXPECT_EQ(custom.snapshot_every, 10);
    EXPECT_EQ(custom.history_every, 5);
}

TEST(LoadConfig, MissingFile)
{
    EXPECT_THROW(load_config("/nonexistent/gpav/config.json"), IoError);
}

TEST(LoadConfig, ReadsFile)
{
    TempDir dir;
    std::ofstream(dir.path() / "c.json") << minimal_manufactured;
    EXPECT_EQ(load_config(dir.path() / "c.json").scheme, SchemeKind::gpav_2a);
}

// --- history CSV ---------------------------------------------------------------------------

TEST(HistoryCsv, EmptyHistoryIsHeaderOnly)
{
    TempDir dir;
    write_history_csv({}, dir.path() / "h.csv");
    EXPECT_EQ(slurp(dir.path() / "h.csv"), "step,t,mass,energy,r,xi,sav_r,h2,dissipation,linf_err,l2_err\n");
}

TEST(HistoryCsv, SingleRecordIsTwoLines)
{
    TempDir dir;
    const std::vector<HistoryRecord> rec{sample_record()};
    write_history_csv(rec, dir.path() / "h.csv");
    const std::string text = slurp(dir.path() / "h.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    // Absent sav_r and linf_err are empty cells.
    const std::string row = text.substr(text.find('\n') + 1);
    EXPECT_NE(row.find(",,"), std::string::npos);
    EXPECT_EQ(row.rfind("12,", 0), 0u);
}

TEST(HistoryCsv, SeventeenSignificantDigits)
{
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(1.0), "1");
    EXPECT_EQ(format_real(-1.0 / 3.0), "-0.33333333333333331");
}

TEST(HistoryCsv, ValuesRoundTripExactly)
{
    TempDir dir;
    std::vector<HistoryRecord> recs{sample_record(), sample_record()};
    recs[1].step = 13;
    recs[1].sav_r = -0.5;
    recs[1].r.reset();
    write_history_csv(recs, dir.path() / "h.csv");
    EXPECT_EQ(read_history_csv(dir.path() / "h.csv"), recs);
}

TEST(HistoryCsv, RewritingAParsedFileIsByteIdentical)
{
    TempDir dir;
    const auto spec = manufactured_spec(0.05);
    RunOptions opts;
    opts.history_csv = dir.path() / "a.csv";
    simulate(spec, SchemeKind::gpav_2b, opts);
    const auto parsed = read_history_csv(dir.path() / "a.csv");
    ASSERT_EQ(parsed.size(), 21u);
    write_history_csv(parsed, dir.path() / "b.csv");
    EXPECT_EQ(slurp(dir.path() / "a.csv"), slurp(dir.path() / "b.csv"));
}

TEST(HistoryCsv, RejectsForeignFiles)
{
    TempDir dir;
    std::ofstream(dir.path() / "x.csv") << "a,b\n1,2\n";
    EXPECT_THROW(read_history_csv(dir.path() / "x.csv"), ParseError);
    EXPECT_THROW(read_history_csv(dir.path() / "missing.csv"), IoError);
    EXPECT_THROW(write_history_csv({}, dir.path() / "no" / "such" / "dir.csv"), IoError);
}

// --- snapshots -----------------------------------------------------------------------------

TEST(Snapshot, ZeroFieldLayout)
{
    TempDir dir;
    const GridSpec g{4, 4, 1.0, 2.0};
    write_snapshot(RealField(g), 0.5, dir.path() / "s.bin");
    const std::string bytes = slurp(dir.path() / "s.bin");
    const std::string header = "nx 4\nny 4\nlx 1\nly 2\nt 0.5\n\n";
    ASSERT_EQ(bytes.size(), header.size() + 128);
    EXPECT_EQ(bytes.substr(0, header.size()), header);
    EXPECT_EQ(std::count(bytes.begin(), bytes.begin() + static_cast<long>(header.size()), '\n'), 6);
    EXPECT_EQ(bytes.substr(header.size()), std::string(128, '\0'));
}

TEST(Snapshot, LittleEndianPayload)
{
    TempDir dir;
    const GridSpec g{4, 4, 1.0, 1.0};
    RealField f(g);
    f[0] = 1.0; // 0x3FF0000000000000
    write_snapshot(f, 0.0, dir.path() / "s.bin");
    const std::string bytes = slurp(dir.path() / "s.bin");
    const std::string payload = bytes.substr(bytes.size() - 128, 8);
    EXPECT_EQ(static_cast<unsigned char>(payload[7]), 0x3Fu);
    EXPECT_EQ(static_cast<unsigned char>(payload[6]), 0xF0u);
    EXPECT_EQ(payload.substr(0, 6), std::string(6, '\0'));
}

TEST(Snapshot, ReadBackIsBitExact)
{
    TempDir dir;
    const auto spec = desk_scale_drop_spec();
    RealField f = initial_field(spec);
    f[5] = -0.0;
    f[6] = std::numeric_limits<double>::denorm_min();
    const double t = 0.1 + 0.2;
    write_snapshot(f, t, dir.path() / "s.bin");
    const auto snap = read_snapshot(dir.path() / "s.bin");
    EXPECT_EQ(snap.t, t);
    EXPECT_EQ(snap.phi.grid(), f.grid());
    EXPECT_EQ(std::memcmp(snap.phi.values().data(), f.values().data(), f.size() * sizeof(double)), 0);
}

TEST(Snapshot, Errors)
{
    TempDir dir;
    EXPECT_THROW(write_snapshot(RealField(GridSpec{4, 4, 1, 1}), 0.0, dir.path() / "no" / "s.bin"), IoError);
    EXPECT_THROW(read_snapshot(dir.path() / "missing.bin"), IoError);
    std::ofstream(dir.path() / "bad.bin") << "nx 4\nny 4\nlx 1\nly 1\nt 0\n\nshort";
    EXPECT_THROW(read_snapshot(dir.path() / "bad.bin"), ParseError);
}

// --- simulation driver ---------------------------------------------------------------------

TEST(Simulate, IdenticalRunsGiveIdenticalFiles)
{
    TempDir dir;
    auto spec = desk_scale_drop_spec(0.01);
    spec.grid = {32, 32, 2.0, 2.0};
    RunOptions opts;
    opts.steps = 25;
    opts.history_csv = dir.path() / "a.csv";
    simulate(spec, SchemeKind::gpav_1b, opts);
    opts.history_csv = dir.path() / "b.csv";
    simulate(spec, SchemeKind::gpav_1b, opts);
    const auto a = slurp(dir.path() / "a.csv");
    EXPECT_GT(a.size(), 100u);
    EXPECT_EQ(a, slurp(dir.path() / "b.csv"));
}

TEST(Simulate, HistoryCadenceAndSnapshots)
{
    TempDir dir;
    const auto spec = manufactured_spec(0.05); // 20 steps
    RunOptions opts;
    opts.history_every = 6;
    opts.snapshot_every = 10;
    opts.snapshot_dir = dir.path();
    const auto res = simulate(spec, SchemeKind::gpav_1a, opts);
    std::vector<long> steps;
    for (const auto& r : res.history) {
        steps.push_back(r.step);
    }
    EXPECT_EQ(steps, (std::vector<long>{0, 6, 12, 18, 20}));
    EXPECT_TRUE(fs::exists(dir.path() / "snapshot_0.bin"));
    EXPECT_TRUE(fs::exists(dir.path() / "snapshot_10.bin"));
    EXPECT_TRUE(fs::exists(dir.path() / "snapshot_20.bin"));
    EXPECT_FALSE(fs::exists(dir.path() / "snapshot_5.bin"));
    EXPECT_NEAR(res.history.back().t, 1.1, 1e-12);
    EXPECT_FALSE(res.diverged);
    EXPECT_EQ(read_snapshot(dir.path() / "snapshot_20.bin").phi.values()[3], res.final_state.phi_cur[3]);
}

TEST(Simulate, DivergedBaselineKeepsEveryEarlierRow)
{
    TempDir dir;
    auto spec = desk_scale_drop_spec(0.5);
    spec.grid = {32, 32, 2.0, 2.0};
    RunOptions opts;
    opts.steps = 400;
    opts.history_csv = dir.path() / "semi.csv";
    const auto res = simulate(spec, SchemeKind::semi_implicit2, opts);
    ASSERT_TRUE(res.diverged);
    const auto rows = read_history_csv(dir.path() / "semi.csv");
    ASSERT_EQ(rows.size(), res.history.size());
    EXPECT_EQ(rows.back().step, res.diverged->step - 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].step, static_cast<long>(k));
    }
}

TEST(Simulate, ManufacturedErrorColumns)
{
    const auto res = simulate(manufactured_spec(0.1), SchemeKind::gpav_2a);
    ASSERT_TRUE(res.history.front().l2_err);
    EXPECT_EQ(*res.history.front().l2_err, 0.0);
    EXPECT_GT(*res.history.back().l2_err, 0.0);
    EXPECT_LT(*res.history.back().l2_err, 1e-2);
}

TEST(Simulate, RejectsBadCadence)
{
    RunOptions opts;
    opts.history_every = 0;
    EXPECT_THROW(simulate(manufactured_spec(0.1), SchemeKind::gpav_2a, opts), InvalidArgument);
}
