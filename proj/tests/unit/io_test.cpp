#include <rsph/io/checkpoint.hpp>
#include <rsph/io/cli.hpp>
#include <rsph/io/config_file.hpp>
#include <rsph/io/csv.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace rsph;
using namespace rsph::io;

namespace {

TEST(Config, DefaultsDependOnScenario) {
    const ScenarioConfig d = parse_config("scenario:\n  name: dambreak\n");
    EXPECT_EQ(d, ScenarioConfig{});
    const ScenarioConfig g = parse_config("scenario:\n  name: gresho\n");
    EXPECT_EQ(g, defaults_for("gresho"));
    EXPECT_DOUBLE_EQ(g.rho0, 1.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("physics:\n  viscosity: 1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("nonsense:\n  a: 1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("physics:\n  c: fast\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("integrator:\n  dt_factor: 0\n"), std::invalid_argument);
}

TEST(Config, RenderParseRoundTrip) {
    ScenarioConfig c = defaults_for("gresho");
    c.dr = 0.0125;
    c.isc = true;
    c.arrangement = Arrangement::vogel;
    EXPECT_EQ(parse_config(render_config(c)), c);
    ScenarioConfig d;
    d.reverse_at = 0.25;
    EXPECT_EQ(parse_config(render_config(d)), d);
    d.reverse_at = 0.25 + 1e-6; // not a whole number of steps
    EXPECT_THROW(parse_config(render_config(d)), std::invalid_argument);
}

TEST(Config, OverridesAndHash) {
    ScenarioConfig c;
    apply_override(c, "integrator.arithmetic=flopa");
    apply_override(c, "physics.g=0");
    EXPECT_EQ(c.arithmetic, Arithmetic::flopa);
    EXPECT_EQ(c.g, 0.0);
    EXPECT_THROW(apply_override(c, "physics.g"), std::invalid_argument);
    ScenarioConfig d = c;
    d.threads = 4;
    d.output_dir = "elsewhere";
    EXPECT_EQ(config_hash(c), config_hash(d));
    d.dr = 0.01;
    EXPECT_NE(config_hash(c), config_hash(d));
}

template <class Arith>
SimState<Arith> sample_state() {
    ParticleSystem ps;
    ps.add(ParticleKind::fluid, {0.1, 0.2}, {-1.5, 0.25}, 0.1);
    ps.add(ParticleKind::wall_lj, {-0.05, 0.0}, {}, 0.1);
    ps.add(ParticleKind::wall_dummy, {0.3, -0.1}, {}, 0.2);
    ps.density = {1000.5, 1000.0, 999.25};
    ps.offset = {1.0 / 3.0, 0.0, -2.0};
    SimState<Arith> s = make_state<Arith>(ps);
    s.step = 42;
    s.dissipated = 0.125;
    return s;
}

template <class Arith>
void expect_round_trip() {
    const auto s = sample_state<Arith>();
    const auto bytes = serialize_checkpoint(s, Scheme::std, 1.5, 0xdeadbeef);
    CheckpointHeader h;
    const auto r = deserialize_checkpoint<Arith>(bytes, &h);
    EXPECT_EQ(h.count, 3u);
    EXPECT_EQ(h.step, 42u);
    EXPECT_EQ(h.time, 1.5);
    EXPECT_EQ(h.scheme, Scheme::std);
    EXPECT_EQ(h.config_hash, 0xdeadbeefu);
    EXPECT_EQ(r.position, s.position);
    EXPECT_EQ(r.velocity, s.velocity);
    EXPECT_EQ(r.ps.density, s.ps.density);
    EXPECT_EQ(r.ps.offset, s.ps.offset);
    EXPECT_EQ(r.ps.kind, s.ps.kind);
    EXPECT_EQ(serialize_checkpoint(r, Scheme::std, 1.5, 0xdeadbeef), bytes);
}

TEST(Checkpoint, FixedRoundTripIsBitwise) { expect_round_trip<FixedArithmetic>(); }
TEST(Checkpoint, FloatRoundTripIsBitwise) { expect_round_trip<FloatArithmetic>(); }

TEST(Checkpoint, DetectsCorruptionTruncationAndModeMismatch) {
    auto bytes = serialize_checkpoint(sample_state<FixedArithmetic>(), Scheme::sym, 0.0, 1);
    EXPECT_EQ(bytes.size(), 52u + 3u * 57u + 4u);
    EXPECT_THROW(deserialize_checkpoint<FloatArithmetic>(bytes), CheckpointError);
    auto corrupt = bytes;
    corrupt[60] ^= 0x01;
    EXPECT_THROW(deserialize_checkpoint<FixedArithmetic>(corrupt), CheckpointError);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 10);
    EXPECT_THROW(deserialize_checkpoint<FixedArithmetic>(truncated), CheckpointError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(deserialize_checkpoint<FixedArithmetic>(magic), CheckpointError);
}

TEST(Checkpoint, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "rsph_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "c.bin").string();
    const auto s = sample_state<FixedArithmetic>();
    write_checkpoint(path, s, Scheme::sym, 0.5, 7);
    EXPECT_EQ(read_checkpoint<FixedArithmetic>(path).position, s.position);
    EXPECT_THROW(read_checkpoint<FixedArithmetic>((dir / "missing.bin").string()), Error);
    std::filesystem::remove_all(dir);
}

TEST(Csv, DiagnosticsRowMatchesHeader) {
    DiagnosticsRecord r;
    r.t = 0.1;
    std::ostringstream os;
    write_diagnostics(os, std::span<const DiagnosticsRecord>(&r, 1));
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    EXPECT_EQ(header, kDiagnosticsHeader);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
    EXPECT_NE(row.find("0.10000000000000001"), std::string::npos);
}

TEST(Cli, UnknownSubcommandFailsWithUsage) {
    std::ostringstream out, err;
    EXPECT_NE(cli_main({"rsph", "frobnicate"}, out, err), 0);
    EXPECT_NE((out.str() + err.str()).find("run"), std::string::npos);
}

TEST(Cli, HelpSucceeds) {
    std::ostringstream out, err;
    EXPECT_EQ(cli_main({"rsph", "--help"}, out, err), 0);
    EXPECT_NE(out.str().find("reverse-check"), std::string::npos);
}

TEST(Cli, BadOptionValueIsUsageError) {
    std::ostringstream out, err;
    EXPECT_EQ(cli_main({"rsph", "run", "--arith", "decimal"}, out, err), 2);
}

} // namespace
