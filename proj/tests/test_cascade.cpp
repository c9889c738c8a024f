#include <charconv>
#include <filesystem>
#include <fstream>

#include "core/cascade.hpp"
#include "core/errors.hpp"
#include "core/guidance.hpp"
#include "core/image_io.hpp"
#include "core/metrics.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace hiflow;
using namespace testsupport;

namespace {

const char* kSmallCascade = R"(
# two-stage coarse2fine cascade at desk scale
base.height = 16
base.width = 16
base.channels = 1
base.steps = 10
base.seed = 5
mode = hiflow
out_dir = out
field.kind = coarse2fine
field.target = rings
field.blur0 = 2.0

[stage.1]
scale = 2
guidance.tau = 0.6
guidance.cutoff = 0.4
guidance.order = 4
field.texture_amp = 0.2
field.texture_seed = 9
)";

}  // namespace

TEST_CASE("config documents round trip and support dotted overrides") {
    Config config = Config::from_string(kSmallCascade);
    CHECK(config.get("base.steps") == std::string("10"));
    CHECK(config.get("stage.1.guidance.tau") == std::string("0.6"));
    CHECK_FALSE(config.get("stage.1.guidance.nope").has_value());

    config.set("stage.1.guidance.tau", "1.0");
    CHECK(config.get("stage.1.guidance.tau") == std::string("1.0"));
    config.set("base.seed", "77");
    Config reparsed = Config::from_string(config.to_string());
    CHECK(reparsed.get("base.seed") == std::string("77"));
    CHECK(reparsed.get("stage.1.guidance.tau") == std::string("1.0"));
}

TEST_CASE("config floats round trip bit-exactly through shortest decimals") {
    Config config = Config::from_string("");
    const double values[] = {0.6, 0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, 5e-324};
    for (double v : values) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        config.set("field.sigma0", std::string(buf, res.ptr));
        Config back = Config::from_string(config.to_string());
        back.set("field.kind", "gaussian");
        const CascadeSpec spec = resolve_config(back);
        CHECK(spec.field.sigma0 == v);
    }
}

TEST_CASE("unknown keys are rejected by name") {
    Config config = Config::from_string(kSmallCascade);
    config.set("base.stepz", "3");
    try {
        resolve_config(config);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("base.stepz") != std::string::npos);
    }

    Config config2 = Config::from_string(kSmallCascade);
    config2.set("stage.1.guidance.gamma", "3");
    try {
        resolve_config(config2);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage.1.guidance.gamma") != std::string::npos);
    }
}

TEST_CASE("config validation catches contract violations") {
    Config bad_scale = Config::from_string(kSmallCascade);
    bad_scale.set("stage.1.scale", "1");
    CHECK_THROWS_AS(resolve_config(bad_scale), Error);

    Config bad_tau = Config::from_string(kSmallCascade);
    bad_tau.set("stage.1.guidance.tau", "1.5");
    CHECK_THROWS_AS(resolve_config(bad_tau), Error);

    Config bad_steps = Config::from_string(kSmallCascade);
    bad_steps.set("stage.1.steps", "12");
    CHECK_THROWS_AS(resolve_config(bad_steps), Error);

    Config bad_channels = Config::from_string(kSmallCascade);
    bad_channels.set("base.channels", "2");
    CHECK_THROWS_AS(resolve_config(bad_channels), Error);
}

TEST_CASE("stage defaults: tau ladder, seeds, blur scaling") {
    Config config = Config::from_string(R"(
base.steps = 10
field.kind = coarse2fine
field.blur0 = 2.0
[stage.1]
scale = 2
[stage.2]
scale = 2
[stage.3]
scale = 2
)");
    const CascadeSpec spec = resolve_config(config);
    REQUIRE(spec.stages.size() == 3);
    CHECK(spec.stages[0].guidance.tau == 0.6);
    CHECK(spec.stages[1].guidance.tau == 0.3);
    CHECK(spec.stages[2].guidance.tau == 0.3);
    CHECK(spec.stage_seed(1) == spec.base_seed);
    CHECK(spec.stage_field_spec(1).blur0 == doctest::Approx(4.0));
    CHECK(spec.stage_field_spec(2).blur0 == doctest::Approx(8.0));
    CHECK(spec.stage_height(3) == 64 * 8);
}

TEST_CASE("single stage in mode none reproduces the plain sampler") {
    Config config = Config::from_string(R"(
base.height = 8
base.width = 8
base.steps = 6
base.seed = 21
mode = none
field.kind = gaussian
field.mu0 = 0.2
field.sigma0 = 0.8
)");
    const CascadeSpec spec = resolve_config(config);
    RunOptions options;
    options.write_files = false;
    CascadeResult result = run_cascade(spec, options);
    REQUIRE(result.stages.size() == 1);

    GaussianField field(0.2, 0.8, 1, 8, 8);
    TimeSchedule schedule = make_schedule(6);
    Trajectory direct = sample(field, schedule, sample_noise(NoiseSpec{21, 0}, 1, 8, 8), 1.0);
    CHECK(bit_equal(result.stages[0].terminal, direct.terminal));
}

TEST_CASE("two-stage anchored cascade with matching targets is a fixed point") {
    // Both resolutions want the same image (the upsampled low target), so
    // hiflow guidance should settle on it.
    const std::string dir = temp_dir("anchored_fixed_point");
    ImageGrid target_low = render_target(TargetKind::Blobs, 1, 8, 8);
    write_ppm(target_low, dir + "/target.ppm");

    Config config = Config::from_string(R"(
base.height = 8
base.width = 8
base.channels = 3
base.steps = 10
base.seed = 31
mode = hiflow
field.kind = anchored
[stage.1]
scale = 2
guidance.tau = 0.6
)");
    config.set("field.target", "image:" + dir + "/target.ppm");
    const CascadeSpec spec = resolve_config(config);
    RunOptions options;
    options.write_files = false;
    CascadeResult result = run_cascade(spec, options);
    REQUIRE(result.stages.size() == 2);

    // The stage-1 anchored field upsamples the same 8x8 image to 16x16, so
    // the guided run and the reference agree on the destination.
    ImageGrid stored = read_image(dir + "/target.ppm");
    ImageGrid expected = upsample(stored, 2, Interp::Bicubic);
    CHECK(max_abs_diff(result.stages[1].terminal, expected) < 1e-6);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cascade smoke run emits images, dumps and metrics") {
    Config config = Config::from_string(kSmallCascade);
    config.set("stage.1.scale", "2");
    Config with_stage2 = Config::from_string(config.to_string() + R"(
[stage.2]
scale = 2
guidance.tau = 0.3
)");
    const CascadeSpec spec = resolve_config(with_stage2);
    const std::string dir = temp_dir("smoke");
    RunOptions options;
    options.out_dir = dir;
    options.dump_trajectories = true;
    CascadeResult result = run_cascade(spec, options);
    REQUIRE(result.stages.size() == 3);
    CHECK(result.stages[2].terminal.height() == 64);

    for (const char* name : {"stage0.ppm", "stage1.ppm", "stage2.ppm", "stage0.hft",
                             "stage1.hft", "stage2.hft", "stage1.hfr", "stage2.hfr",
                             "metrics.csv"})
        CHECK(std::filesystem::exists(std::filesystem::path(dir) / name));

    std::ifstream csv(std::filesystem::path(dir) / "metrics.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // header + one row per stage
    std::filesystem::remove_all(dir);
}

TEST_CASE("cascade reruns are bit-identical") {
    Config config = Config::from_string(kSmallCascade);
    const CascadeSpec spec = resolve_config(config);
    RunOptions options;
    options.write_files = false;
    CascadeResult a = run_cascade(spec, options);
    CascadeResult b = run_cascade(spec, options);
    REQUIRE(a.stages.size() == b.stages.size());
    for (std::size_t i = 0; i < a.stages.size(); ++i)
        CHECK(bit_equal(a.stages[i].terminal, b.stages[i].terminal));
}

TEST_CASE("stage boundaries are pure: dump reload resumes bit-identically") {
    Config config = Config::from_string(kSmallCascade);
    const CascadeSpec spec = resolve_config(config);
    RunOptions options;
    options.write_files = false;
    CascadeResult full = run_cascade(spec, options);

    // Save stage 0, reload it, rebuild stage 1 from the loaded dump.
    const std::string dir = temp_dir("purity");
    save_trajectory(full.stages[0].trajectory, dir + "/stage0.hft");
    Trajectory reloaded = load_trajectory(dir + "/stage0.hft");
    ReferenceFlow reference = build_reference(reloaded, 32, 32, Interp::Bicubic);

    auto field = make_field(spec.stage_field_spec(1), 1, 32, 32);
    TimeSchedule schedule = make_schedule(spec.base_steps);
    Trajectory resumed = guided_sample(*field, schedule, reference, spec.stages[0].guidance,
                                       NoiseSpec{spec.stage_seed(1), 1}, true);
    CHECK(bit_equal(resumed.terminal, full.stages[1].terminal));
    std::filesystem::remove_all(dir);
}

TEST_CASE("constant-anchor cascade runs and differs from hiflow early on") {
    Config config = Config::from_string(kSmallCascade);
    const CascadeSpec hiflow_spec = resolve_config(config);
    config.set("mode", "constant_anchor");
    const CascadeSpec anchor_spec = resolve_config(config);

    RunOptions options;
    options.write_files = false;
    CascadeResult hiflow_run = run_cascade(hiflow_spec, options);
    CascadeResult anchor_run = run_cascade(anchor_spec, options);

    // Same seeds, different fusion source: the per-step aligned predictions
    // must diverge at early steps where the reference still moves.
    const Trajectory& ht = hiflow_run.stages[1].trajectory;
    const Trajectory& at = anchor_run.stages[1].trajectory;
    REQUIRE(ht.steps.size() == at.steps.size());
    double early_gap = 0.0;
    for (std::size_t i = 0; i < 3 && i < ht.steps.size(); ++i)
        early_gap += max_abs_diff(ht.steps[i].x0, at.steps[i].x0);
    CHECK(early_gap > 1e-6);
}

TEST_CASE("compare results do not depend on the worker count") {
    Config config = Config::from_string(kSmallCascade);
    config.set("compare.seeds", "3");
    const CascadeSpec spec = resolve_config(config);
    RunOptions options;
    options.write_files = false;

    setenv("HIFLOW_THREADS", "1", 1);
    CompareResult serial = run_compare(spec, options);
    setenv("HIFLOW_THREADS", "4", 1);
    CompareResult parallel = run_compare(spec, options);
    unsetenv("HIFLOW_THREADS");

    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].config == parallel.rows[i].config);
        CHECK(serial.rows[i].seed == parallel.rows[i].seed);
        CHECK(serial.rows[i].hash == parallel.rows[i].hash);
        CHECK(serial.rows[i].lowband_mse == parallel.rows[i].lowband_mse);
    }
}

TEST_CASE("compare emits a sorted, complete ablation grid") {
    Config config = Config::from_string(kSmallCascade);
    config.set("compare.seeds", "2");
    const CascadeSpec spec = resolve_config(config);
    const std::string dir = temp_dir("compare");
    RunOptions options;
    options.out_dir = dir;
    CompareResult result = run_compare(spec, options);
    REQUIRE(result.rows.size() == 8);

    const char* order[4] = {"none", "gi", "gi+gd", "gi+gd+ga"};
    for (int a = 0; a < 4; ++a)
        for (int j = 0; j < 2; ++j) {
            const CompareRow& row = result.rows[static_cast<std::size_t>(a) * 2 + j];
            CHECK(row.config == order[a]);
            CHECK(row.seed == spec.base_seed + static_cast<std::uint64_t>(j));
        }

    // The all-off configuration is the vanilla sampler in disguise.
    auto field = make_field(spec.stage_field_spec(1), 1, 32, 32);
    TimeSchedule schedule = make_schedule(spec.base_steps);
    ImageGrid noise = sample_noise(NoiseSpec{spec.base_seed, 1}, 1, 32, 32);
    Trajectory vanilla = sample(*field, schedule, noise, 1.0, false);
    CHECK(result.rows[0].hash == grid_hash(vanilla.terminal));

    // Full alignment keeps the low band closest to the reference, per seed.
    for (int j = 0; j < 2; ++j) {
        const double full = result.rows[static_cast<std::size_t>(3) * 2 + j].lowband_mse;
        for (int a = 0; a < 3; ++a)
            CHECK(full <= result.rows[static_cast<std::size_t>(a) * 2 + j].lowband_mse);
        CHECK(full < result.rows[static_cast<std::size_t>(0) * 2 + j].lowband_mse);
    }

    CHECK(std::filesystem::exists(result.csv_path));
    std::filesystem::remove_all(dir);
}
