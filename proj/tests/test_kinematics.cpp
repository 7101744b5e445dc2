#include "handval/errors.hpp"
#include "handval/kinematics.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

using namespace handval;

namespace {

LandmarkFrame frame_with(double d_wrist, double z_im, const JointId& joint = joints::IFT) {
    LandmarkFrame f;
    f.t = 0.0;
    f.intrinsics = {600.0, 600.0, 640.0, 360.0};
    f.d_wrist_mm = d_wrist;
    f.landmarks.push_back({joints::WRIST, 640.0, 360.0, 0.0});
    f.landmarks.push_back({joint, 650.0, 350.0, z_im});
    return f;
}

JointTrajectory traj_of(const JointId& joint, const std::vector<Vec3>& points, double fps = 30.0) {
    JointTrajectory t;
    t.joint = joint;
    t.system = TrackingSystem::reference();
    t.fps = fps;
    for (std::size_t i = 0; i < points.size(); ++i)
        t.samples.push_back({static_cast<double>(i) / fps, points[i]});
    return t;
}

Eigen::Isometry3d random_isometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_real_distribution<double> shift(-500.0, 500.0);
    std::normal_distribution<double> axis(0.0, 1.0);
    Vec3 ax(axis(rng), axis(rng), axis(rng));
    ax.normalize();
    Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
    iso.linear() = Eigen::AngleAxisd(angle(rng), ax).toRotationMatrix();
    iso.translation() = Vec3(shift(rng), shift(rng), shift(rng));
    return iso;
}

DistanceSeries constant_series(DistanceLabel label, double value, std::size_t n = 8) {
    DistanceSeries s;
    s.label = label;
    s.system = TrackingSystem::reference();
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back({static_cast<double>(i) / 30.0, value});
    return s;
}

} // namespace

TEST_CASE("depth fusion reproduces the wrist-anchored formula") {
    CHECK(fuse_depth(frame_with(600.0, 0.0), joints::IFT) == doctest::Approx(600.0).epsilon(1e-14));
    CHECK(fuse_depth(frame_with(500.0, 0.1), joints::IFT) == doctest::Approx(550.0).epsilon(1e-14));
    // wrist itself sits at the relative-depth origin
    CHECK(fuse_depth(frame_with(712.5, 0.3), joints::WRIST) == doctest::Approx(712.5));
}

TEST_CASE("depth fusion error paths") {
    CHECK_THROWS_AS(fuse_depth(frame_with(600.0, -1.05), joints::IFT), NonPhysicalDepthError);
    CHECK_THROWS_AS(fuse_depth(frame_with(600.0, 0.0), joints::PT), MissingJointError);
    LandmarkFrame hole = frame_with(600.0, 0.0);
    hole.d_wrist_mm.reset();
    CHECK_THROWS_AS(fuse_depth(hole, joints::IFT), DepthHoleError);
}

TEST_CASE("depth fusion is linear in the wrist depth") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> depth(200.0, 1500.0);
    std::uniform_real_distribution<double> zim(-0.5, 0.5);
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double d = depth(rng), z = zim(rng), k = scale(rng);
        const double lhs = fuse_depth(frame_with(k * d, z), joints::IFT);
        const double rhs = k * fuse_depth(frame_with(d, z), joints::IFT);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("pinhole back-projection") {
    const CameraIntrinsics k{600.0, 600.0, 640.0, 360.0};
    CHECK((backproject(640.0, 360.0, 700.0, k) - Vec3(0, 0, 700)).norm() == doctest::Approx(0.0));
    CHECK((backproject(640.0 + 600.0, 360.0, 500.0, k) - Vec3(500, 0, 500)).norm() ==
          doctest::Approx(0.0));
    // frozen by hand from ((u-cx)*d/fx, (v-cy)*d/fy, d) with fx = fy = 600
    CHECK((backproject(740.0, 310.0, 600.0, k) - Vec3(100.0, -50.0, 600.0)).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(backproject(0, 0, 100.0, CameraIntrinsics{0.0, 600.0, 0, 0}),
                    InvalidIntrinsicsError);
    CHECK_THROWS_AS(backproject(0, 0, -5.0, k), NonPhysicalDepthError);
}

TEST_CASE("project then uplift recovers random hands") {
    const CameraIntrinsics k{525.5, 531.25, 640.0, 360.0};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lateral(-120.0, 120.0);
    std::uniform_real_distribution<double> depth(550.0, 1050.0);
    const JointId hand_joints[] = {joints::WRIST, joints::TT, joints::IFT, joints::MT,
                                   joints::RFT,   joints::PT};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<JointId, Vec3>> hand;
        const double base_depth = depth(rng);
        for (const auto& joint : hand_joints)
            hand.emplace_back(joint,
                              Vec3(lateral(rng), lateral(rng), base_depth + lateral(rng) * 0.5));
        const LandmarkFrame frame = make_landmark_frame(0.0, hand, joints::WRIST, k);
        CHECK(frame.find(joints::WRIST)->z_im == doctest::Approx(0.0).epsilon(1e-15));
        const auto lifted = uplift_frame(frame);
        REQUIRE(lifted.size() == hand.size());
        for (std::size_t i = 0; i < hand.size(); ++i) {
            CHECK(lifted[i].first == hand[i].first);
            CHECK((lifted[i].second - hand[i].second).norm() < 1e-6);
        }
    }
}

TEST_CASE("uplift fails frame-level only on a wrist depth hole") {
    LandmarkFrame f = frame_with(600.0, 0.05);
    CHECK(uplift_frame(f).size() == 2);
    f.d_wrist_mm.reset();
    CHECK_THROWS_AS(uplift_frame(f), DepthHoleError);
    // a non-wrist landmark with impossible depth propagates its own error
    LandmarkFrame bad = frame_with(600.0, -1.2);
    CHECK_THROWS_AS(uplift_frame(bad), NonPhysicalDepthError);
}

TEST_CASE("wrist midpoint derivation") {
    auto wib = traj_of(joints::WIB, {{0, 0, 0}, {1, 2, 3}});
    auto wob = traj_of(joints::WOB, {{2, 0, 0}, {3, 6, 9}});
    const auto wb = derive_wb(wib, wob);
    CHECK(wb.joint == joints::WB);
    CHECK((wb.samples[0].p - Vec3(1, 0, 0)).norm() == doctest::Approx(0.0));
    CHECK((wb.samples[1].p - Vec3(2, 4, 6)).norm() == doctest::Approx(0.0));

    auto coincident = derive_wb(wib, wib);
    for (std::size_t i = 0; i < wib.samples.size(); ++i)
        CHECK((coincident.samples[i].p - wib.samples[i].p).norm() == doctest::Approx(0.0));

    auto off_grid = traj_of(joints::WOB, {{2, 0, 0}, {3, 6, 9}});
    off_grid.samples[1].t += 0.5;
    CHECK_THROWS_AS(derive_wb(wib, off_grid), GridMismatchError);
}

TEST_CASE("midpoint commutes with rigid transforms") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(-200.0, 200.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto iso = random_isometry(rng);
        std::vector<Vec3> a{{coord(rng), coord(rng), coord(rng)}, {coord(rng), coord(rng), coord(rng)}};
        std::vector<Vec3> b{{coord(rng), coord(rng), coord(rng)}, {coord(rng), coord(rng), coord(rng)}};
        std::vector<Vec3> ta, tb;
        for (const auto& p : a) ta.push_back(iso * p);
        for (const auto& p : b) tb.push_back(iso * p);
        const auto mid = derive_wb(traj_of(joints::WIB, a), traj_of(joints::WOB, b));
        const auto mid_t = derive_wb(traj_of(joints::WIB, ta), traj_of(joints::WOB, tb));
        for (std::size_t i = 0; i < mid.samples.size(); ++i)
            CHECK((iso * mid.samples[i].p - mid_t.samples[i].p).norm() < 1e-9);
    }
}

TEST_CASE("distance series basics") {
    auto a = traj_of(joints::IFT, {{0, 0, 0}, {0, 0, 0}});
    auto b = traj_of(joints::TT, {{3, 4, 0}, {3, 4, 0}});
    const auto d = distance_series(a, b, DistanceLabel::IFT_TT);
    CHECK(d.label == DistanceLabel::IFT_TT);
    for (const auto& s : d.samples) CHECK(s.d == doctest::Approx(5.0));

    const auto zero = distance_series(a, a, DistanceLabel::IFT_TT);
    for (const auto& s : zero.samples) CHECK(s.d == doctest::Approx(0.0));
}

TEST_CASE("distance series is invariant under common rigid transforms") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-300.0, 300.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto iso = random_isometry(rng);
        std::vector<Vec3> pa, pb, ta, tb;
        for (int i = 0; i < 40; ++i) {
            pa.emplace_back(coord(rng), coord(rng), coord(rng));
            pb.emplace_back(coord(rng), coord(rng), coord(rng));
            ta.push_back(iso * pa.back());
            tb.push_back(iso * pb.back());
        }
        const auto d0 = distance_series(traj_of(joints::IFT, pa), traj_of(joints::TT, pb),
                                        DistanceLabel::IFT_TT);
        const auto d1 = distance_series(traj_of(joints::IFT, ta), traj_of(joints::TT, tb),
                                        DistanceLabel::IFT_TT);
        for (std::size_t i = 0; i < d0.samples.size(); ++i)
            CHECK(std::abs(d0.samples[i].d - d1.samples[i].d) < 1e-9);
    }
}

TEST_CASE("composite thumb distance") {
    auto i = constant_series(DistanceLabel::IFT_TT, 1.0);
    auto m = constant_series(DistanceLabel::MT_TT, 1.0);
    auto r = constant_series(DistanceLabel::RFT_TT, 1.0);
    auto p = constant_series(DistanceLabel::PT_TT, 1.0);
    const auto sum = tt_all(i, m, r, p);
    CHECK(sum.label == DistanceLabel::TT_ALL);
    for (const auto& s : sum.samples) CHECK(s.d == doctest::Approx(4.0));

    SUBCASE("three zero components pass the fourth through") {
        auto zi = constant_series(DistanceLabel::IFT_TT, 0.0);
        auto zm = constant_series(DistanceLabel::MT_TT, 0.0);
        auto zr = constant_series(DistanceLabel::RFT_TT, 0.0);
        auto sp = constant_series(DistanceLabel::PT_TT, 0.0);
        for (std::size_t k = 0; k < sp.samples.size(); ++k)
            sp.samples[k].d = 10.0 + static_cast<double>(k);
        const auto relabelled = tt_all(zi, zm, zr, sp);
        for (std::size_t k = 0; k < sp.samples.size(); ++k)
            CHECK(relabelled.samples[k].d == doctest::Approx(sp.samples[k].d));
    }

    SUBCASE("sample-wise sum of sinusoids, and pointwise dominance") {
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> amp(1.0, 40.0);
        DistanceSeries parts[4] = {constant_series(DistanceLabel::IFT_TT, 0, 128),
                                   constant_series(DistanceLabel::MT_TT, 0, 128),
                                   constant_series(DistanceLabel::RFT_TT, 0, 128),
                                   constant_series(DistanceLabel::PT_TT, 0, 128)};
        for (auto& part : parts) {
            const double a = amp(rng), f = amp(rng) / 20.0;
            for (auto& s : part.samples) s.d = 50.0 + a * std::sin(2 * M_PI * f * s.t);
        }
        const auto composite = tt_all(parts[0], parts[1], parts[2], parts[3]);
        for (std::size_t k = 0; k < composite.samples.size(); ++k) {
            const double expected = parts[0].samples[k].d + parts[1].samples[k].d +
                                    parts[2].samples[k].d + parts[3].samples[k].d;
            CHECK(std::abs(composite.samples[k].d - expected) < 1e-12);
            for (const auto& part : parts)
                CHECK(composite.samples[k].d >= part.samples[k].d - 1e-12);
        }
    }

    SUBCASE("label checks") {
        CHECK_THROWS_AS(tt_all(m, i, r, p), WrongLabelsError);
        auto short_p = constant_series(DistanceLabel::PT_TT, 1.0, 4);
        CHECK_THROWS_AS(tt_all(i, m, r, short_p), GridMismatchError);
    }
}

TEST_CASE("hand length from a static hold") {
    std::vector<Vec3> mt, wb;
    for (int i = 0; i < 60; ++i) {
        mt.emplace_back(180.0, 0.0, 0.0);
        wb.emplace_back(0.0, 0.0, 0.0);
    }
    CHECK(hand_length_cm(traj_of(joints::MT, mt), traj_of(joints::WB, wb)) == doctest::Approx(18.0));

    SUBCASE("arithmetic mean of varying samples") {
        std::vector<Vec3> mt3, wb3;
        const double dists[3] = {178.0, 180.0, 182.0};
        for (int rep = 0; rep < 20; ++rep)
            for (double d : dists) {
                mt3.emplace_back(d, 0.0, 0.0);
                wb3.emplace_back(0.0, 0.0, 0.0);
            }
        CHECK(hand_length_cm(traj_of(joints::MT, mt3), traj_of(joints::WB, wb3)) ==
              doctest::Approx(18.0).epsilon(1e-12));
    }

    SUBCASE("plausibility warning outside the adult band") {
        std::vector<Vec3> far, origin;
        for (int i = 0; i < 60; ++i) {
            far.emplace_back(300.0, 0.0, 0.0);
            origin.emplace_back(0.0, 0.0, 0.0);
        }
        std::vector<std::string> warnings;
        CHECK(hand_length_cm(traj_of(joints::MT, far), traj_of(joints::WB, origin), &warnings) ==
              doctest::Approx(30.0));
        REQUIRE(warnings.size() == 1);
    }

    SUBCASE("too few samples") {
        std::vector<Vec3> brief{{180, 0, 0}, {180, 0, 0}};
        CHECK_THROWS_AS(hand_length_cm(traj_of(joints::MT, brief), traj_of(joints::WB, brief)),
                        TooFewSamplesError);
    }
}

TEST_CASE("grid intersection drops unmatched timestamps") {
    auto a = traj_of(joints::IFT, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    auto b = traj_of(joints::TT, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    b.samples.erase(b.samples.begin() + 1);
    const std::size_t dropped = intersect_grids(a, b);
    CHECK(dropped == 1);
    CHECK(a.samples.size() == 3);
    CHECK(same_grid(a, b));
}

TEST_CASE("trajectory validation") {
    auto good = traj_of(joints::IFT, {{0, 0, 0}, {1, 0, 0}});
    CHECK_NOTHROW(validate_trajectory(good));
    auto bad = good;
    bad.samples[1].t = bad.samples[0].t;
    CHECK_THROWS_AS(validate_trajectory(bad), Error);
    auto nan = good;
    nan.samples[0].p.x() = std::nan("");
    CHECK_THROWS_AS(validate_trajectory(nan), Error);

    auto gappy = traj_of(joints::IFT, {{0, 0, 0}, {1.0 / 30, 0, 0}, {2.0 / 30, 0, 0}});
    gappy.samples[2].t += 0.02; // 60% over the nominal period
    CHECK(spacing_warnings(gappy).size() == 1);
    CHECK(spacing_warnings(good).empty());
}
