#include <cmath>
#include <filesystem>
#include <random>

#include "core/errors.hpp"
#include "core/field.hpp"
#include "core/reference.hpp"
#include "core/sampler.hpp"
#include "core/schedule.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace hiflow;
using namespace testsupport;

namespace {

Trajectory low_gaussian_run(int steps, int size, std::uint64_t seed) {
    GaussianField field(0.4, 0.6, 1, size, size);
    TimeSchedule schedule = make_schedule(steps);
    ImageGrid init = sample_noise(NoiseSpec{seed, 0}, 1, size, size);
    return sample(field, schedule, init, 1.0);
}

}  // namespace

TEST_CASE("factor-1 nearest reference mirrors the low trajectory bit for bit") {
    Trajectory low = low_gaussian_run(6, 5, 3);
    ReferenceFlow ref = build_reference(low, 5, 5, Interp::Nearest);
    REQUIRE(ref.count() == 6);
    for (int i = 0; i < ref.count(); ++i) {
        CHECK(ref.time(i) == low.steps[static_cast<std::size_t>(i)].t);
        CHECK(bit_equal(ref.clean(i), low.steps[static_cast<std::size_t>(i)].x0));
    }
    CHECK(bit_equal(ref.anchor(), low.terminal));
}

TEST_CASE("anchored low runs give constant reference entries") {
    std::mt19937_64 rng(5);
    ImageGrid target = random_grid(rng, 1, 4, 4);
    AnchoredField field(target);
    TimeSchedule schedule = make_schedule(5);
    Trajectory low = sample(field, schedule, sample_noise(NoiseSpec{7, 0}, 1, 4, 4), 1.0);
    ReferenceFlow ref = build_reference(low, 8, 8, Interp::Bilinear);
    for (int i = 1; i < ref.count(); ++i)
        CHECK(max_abs_diff(ref.clean(i), ref.clean(0)) < 1e-9);
    ImageGrid expected = upsample(target, 2, Interp::Bilinear);
    CHECK(max_abs_diff(ref.clean(0), expected) < 1e-9);
}

TEST_CASE("reference entries equal componentwise upsampling") {
    Trajectory low = low_gaussian_run(2, 4, 11);
    ReferenceFlow ref = build_reference(low, 8, 8, Interp::Bilinear);
    for (int i = 0; i < ref.count(); ++i) {
        ImageGrid expected = upsample(low.steps[static_cast<std::size_t>(i)].x0, 2, Interp::Bilinear);
        CHECK(bit_equal(ref.clean(i), expected));
    }
}

TEST_CASE("build_reference rejects non-integer scale factors") {
    Trajectory low = low_gaussian_run(3, 4, 13);
    CHECK_THROWS_AS(build_reference(low, 10, 10, Interp::Nearest), Error);
    CHECK_THROWS_AS(build_reference(low, 8, 12, Interp::Nearest), Error);
    CHECK_THROWS_AS(build_reference(Trajectory{}, 8, 8, Interp::Nearest), Error);
}

TEST_CASE("velocity delta of a constant reference is zero") {
    std::mt19937_64 rng(17);
    ImageGrid target = random_grid(rng, 1, 4, 4);
    AnchoredField field(target);
    TimeSchedule schedule = make_schedule(5);
    Trajectory low = sample(field, schedule, sample_noise(NoiseSpec{19, 0}, 1, 4, 4), 1.0);
    ReferenceFlow ref = build_reference(low, 4, 4, Interp::Nearest);
    for (int i = 1; i < ref.count(); ++i)
        CHECK(ref.velocity_delta(i).max_abs() < 1e-9);
}

TEST_CASE("velocity delta arithmetic on scalar entries") {
    // Entries 0.9 at t=0.5 and 0.8 at t=0.25: -(0.8 - 0.9)/0.25 = +0.4.
    std::vector<double> times = {0.5, 0.25};
    std::vector<ImageGrid> clean;
    clean.emplace_back(1, 1, 1, 0.9);
    clean.emplace_back(1, 1, 1, 0.8);
    ReferenceFlow ref(std::move(times), std::move(clean), ImageGrid(1, 1, 1, 0.8),
                      Interp::Nearest);
    CHECK(ref.velocity_delta(1).at(0, 0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(ref.velocity_delta(0), Error);
}

TEST_CASE("velocity delta refuses t = 0 entries") {
    std::vector<double> times = {0.5, 0.0};
    std::vector<ImageGrid> clean;
    clean.emplace_back(1, 1, 1, 0.9);
    clean.emplace_back(1, 1, 1, 0.8);
    ReferenceFlow ref(std::move(times), std::move(clean), ImageGrid(1, 1, 1, 0.8),
                      Interp::Nearest);
    CHECK_THROWS_AS(ref.velocity_delta(1), Error);
}

TEST_CASE("virtual-state cancellation: explicit reference velocities agree") {
    // Draw arbitrary virtual noisy states, push them through one Euler step of
    // the reference flow, and difference the explicit velocities; the virtual
    // state must cancel against the stored formula.
    std::mt19937_64 rng(23);
    Trajectory low = low_gaussian_run(10, 4, 29);
    ReferenceFlow ref = build_reference(low, 8, 8, Interp::Bicubic);
    for (int trial = 0; trial < 100; ++trial) {
        const int i = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(ref.count() - 1));
        const double t_prev = ref.time(i - 1);
        const double t_cur = ref.time(i);
        ImageGrid virt = random_grid(rng, 1, 8, 8, -3.0, 3.0);

        ImageGrid v_prev = virt;
        v_prev -= ref.clean(i - 1);
        v_prev *= 1.0 / t_prev;

        ImageGrid virt_next = euler_step(virt, v_prev, t_prev, t_cur);
        ImageGrid v_cur = virt_next;
        v_cur -= ref.clean(i);
        v_cur *= 1.0 / t_cur;

        ImageGrid explicit_delta = v_cur - v_prev;
        CHECK(max_abs_diff(explicit_delta, ref.velocity_delta(i)) < 1e-9);
    }
}

TEST_CASE("velocity delta is linear in the reference entries") {
    std::mt19937_64 rng(31);
    std::vector<double> times = {0.8, 0.6, 0.4};
    std::vector<ImageGrid> a_entries, b_entries, sum_entries;
    for (int i = 0; i < 3; ++i) {
        ImageGrid a = random_grid(rng, 1, 3, 3);
        ImageGrid b = random_grid(rng, 1, 3, 3);
        sum_entries.push_back(a + b);
        a_entries.push_back(std::move(a));
        b_entries.push_back(std::move(b));
    }
    ReferenceFlow ra(times, a_entries, ImageGrid(1, 3, 3, 0.0), Interp::Nearest);
    ReferenceFlow rb(times, b_entries, ImageGrid(1, 3, 3, 0.0), Interp::Nearest);
    ReferenceFlow rs(times, sum_entries, ImageGrid(1, 3, 3, 0.0), Interp::Nearest);
    for (int i = 1; i < 3; ++i) {
        ImageGrid want = ra.velocity_delta(i) + rb.velocity_delta(i);
        CHECK(max_abs_diff(rs.velocity_delta(i), want) < 1e-12);
    }
}

TEST_CASE("reference dump round trip") {
    Trajectory low = low_gaussian_run(7, 4, 37);
    ReferenceFlow ref = build_reference(low, 8, 8, Interp::Bicubic);
    const std::string dir = temp_dir("ref");
    const std::string path = dir + "/ref.hfr";
    save_reference(ref, path);
    ReferenceFlow back = load_reference(path);
    REQUIRE(back.count() == ref.count());
    CHECK(back.method() == ref.method());
    for (int i = 0; i < ref.count(); ++i) {
        CHECK(back.time(i) == ref.time(i));
        CHECK(bit_equal(back.clean(i), quantize_f32(ref.clean(i))));
    }
    CHECK(bit_equal(back.anchor(), quantize_f32(ref.anchor())));
    std::filesystem::remove_all(dir);
}
