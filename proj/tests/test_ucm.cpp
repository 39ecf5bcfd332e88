#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "stseg/common.hpp"
#include "stseg/ucm.hpp"
#include "stseg/video_volume.hpp"
#include "stseg/watershed3d.hpp"

using namespace stseg;

namespace {

BasinLabeling line_basins() {
    // One row of six voxels in three two-voxel basins: 0 0 | 1 1 | 2 2.
    BasinLabeling b;
    b.frames = 1;
    b.height = 1;
    b.width = 6;
    b.basin_count = 3;
    b.labels = {0, 0, 1, 1, 2, 2};
    return b;
}

OrientedBoundaryVolume line_obv() {
    OrientedBoundaryVolume obv(1, 1, 6);
    obv.channel[0].at(0, 0, 1) = 0.3f;
    obv.channel[0].at(0, 0, 2) = 0.3f;
    obv.channel[0].at(0, 0, 3) = 0.7f;
    obv.channel[0].at(0, 0, 4) = 0.7f;
    return obv;
}

struct RandomInstance {
    BasinLabeling basins;
    ArcSet arcs;
    UcmHierarchy hierarchy;
    std::vector<double> face_values;
};

RandomInstance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    VolumeField surface(3, 10, 10);
    for (float& v : surface.v)
        v = static_cast<float>(rng.uniform_int(0, 7)) / 8.0f;
    RandomInstance inst;
    inst.basins = watershed3d(surface);
    inst.arcs = collect_arcs(inst.basins);
    OrientedBoundaryVolume obv(3, 10, 10);
    for (VolumeField& ch : obv.channel)
        for (float& v : ch.v) v = static_cast<float>(rng.uniform());
    arc_weights(inst.arcs, inst.basins, obv, &inst.face_values);
    inst.hierarchy = build_ucm(inst.basins, inst.arcs);
    return inst;
}

// Basin pair of a face, read from the adjacent voxels.
std::pair<std::int32_t, std::int32_t> face_pair(const BasinLabeling& b, const Face& f) {
    const std::int32_t la = b.at(f.t, f.y, f.x);
    const std::int32_t lb = f.axis == 0   ? b.at(f.t + 1, f.y, f.x)
                            : f.axis == 1 ? b.at(f.t, f.y + 1, f.x)
                                          : b.at(f.t, f.y, f.x + 1);
    return {std::min(la, lb), std::max(la, lb)};
}

}  // namespace

TEST_CASE("arc collection groups boundary faces by basin pair", "[ucm]") {
    const BasinLabeling b = line_basins();
    const ArcSet arcs = collect_arcs(b);
    REQUIRE(arcs.arcs.size() == 2);
    REQUIRE(arcs.faces.size() == 2);
    CHECK(arcs.arcs[0].a == 0);
    CHECK(arcs.arcs[0].b == 1);
    CHECK(arcs.arcs[1].a == 1);
    CHECK(arcs.arcs[1].b == 2);
    CHECK(arcs.faces[arcs.arcs[0].begin].x == 1);
    CHECK(arcs.faces[arcs.arcs[0].begin].axis == 2);
    CHECK(arcs.faces[arcs.arcs[1].begin].x == 3);
}

TEST_CASE("arc weights average the oriented response across the face", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    std::vector<double> face_values;
    arc_weights(arcs, b, line_obv(), &face_values);
    REQUIRE(face_values.size() == 2);
    CHECK(arcs.arcs[0].weight == Catch::Approx(0.3).margin(1e-7));
    CHECK(arcs.arcs[1].weight == Catch::Approx(0.7).margin(1e-7));
    CHECK(face_values[0] == Catch::Approx(0.3).margin(1e-7));
    CHECK(face_values[1] == Catch::Approx(0.7).margin(1e-7));
}

TEST_CASE("temporal faces read the temporal channel at the earlier frame", "[ucm]") {
    BasinLabeling b;
    b.frames = 2;
    b.height = 1;
    b.width = 1;
    b.basin_count = 2;
    b.labels = {0, 1};
    ArcSet arcs = collect_arcs(b);
    REQUIRE(arcs.faces.size() == 1);
    CHECK(arcs.faces[0].axis == 0);
    OrientedBoundaryVolume obv(2, 1, 1);
    obv.channel[OrientedBoundaryVolume::kSpatial].at(0, 0, 0) = 0.45f;
    arc_weights(arcs, b, obv);
    CHECK(arcs.arcs[0].weight == Catch::Approx(0.45).margin(1e-7));
}

TEST_CASE("greedy agglomeration follows the hand-traced merge order", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    arc_weights(arcs, b, line_obv());
    const UcmHierarchy h = build_ucm(b, arcs);

    REQUIRE(h.tree.leaves == 3);
    REQUIRE(h.tree.nodes.size() == 2);
    CHECK(h.tree.nodes[0].left == 0);
    CHECK(h.tree.nodes[0].right == 1);
    CHECK(h.tree.nodes[0].saliency == Catch::Approx(0.3).margin(1e-7));
    CHECK(h.tree.nodes[1].left == 2);
    CHECK(h.tree.nodes[1].right == 3);  // entity 3 = first merge result
    CHECK(h.tree.nodes[1].saliency == Catch::Approx(0.7).margin(1e-7));
    REQUIRE(h.face_saliency.size() == 2);
    CHECK(h.face_saliency[0] == Catch::Approx(0.3).margin(1e-7));
    CHECK(h.face_saliency[1] == Catch::Approx(0.7).margin(1e-7));

    CHECK(merge_level(h.tree, 0, 0) == 0.0);
    CHECK(merge_level(h.tree, 0, 1) == Catch::Approx(0.3).margin(1e-7));
    CHECK(merge_level(h.tree, 0, 2) == Catch::Approx(0.7).margin(1e-7));
    CHECK(merge_level(h.tree, 1, 2) == Catch::Approx(0.7).margin(1e-7));
}

TEST_CASE("threshold cuts are strict and reproduce the extremes", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    arc_weights(arcs, b, line_obv());
    const UcmHierarchy h = build_ucm(b, arcs);

    const SegmentationVolume at0 = threshold_segmentation(h.tree, b, 0.0);
    CHECK(at0.region_count == 3);
    CHECK(at0.labels == std::vector<std::int32_t>{0, 0, 1, 1, 2, 2});
    CHECK(at0.threshold == 0.0);

    // Strictly-below semantics: a cut exactly at a merge level keeps it split.
    const double w0 = h.tree.nodes[0].saliency;
    CHECK(threshold_segmentation(h.tree, b, w0).region_count == 3);

    const SegmentationVolume mid = threshold_segmentation(h.tree, b, w0 + 1e-9);
    CHECK(mid.region_count == 2);
    CHECK(mid.labels == std::vector<std::int32_t>{0, 0, 0, 0, 1, 1});

    const SegmentationVolume top =
        threshold_segmentation(h.tree, b, h.tree.max_saliency() + 1e-9);
    CHECK(top.region_count == 1);
}

TEST_CASE("saliency normalization lands the top level just below one", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    arc_weights(arcs, b, line_obv());
    UcmHierarchy h = build_ucm(b, arcs);
    const double factor = normalize_saliencies(h);
    // The max saliency is the float-rounded 0.7 stored in the boundary field.
    const double top_w = static_cast<double>(0.7f);
    CHECK(factor == Catch::Approx(1.0 / (top_w * (1.0 + 1e-6))).epsilon(1e-9));
    CHECK(h.tree.max_saliency() < 1.0);
    CHECK(h.tree.max_saliency() == Catch::Approx(1.0).margin(1e-5));
    CHECK(h.face_saliency[1] == Catch::Approx(h.tree.max_saliency()).margin(1e-12));
    // With the normalized tree, level 1.0 of a [0,1] grid merges everything.
    CHECK(threshold_segmentation(h.tree, b, 1.0).region_count == 1);
    CHECK(threshold_segmentation(h.tree, b, 0.0).region_count == 3);
}

TEST_CASE("rasterization places faces on the doubled grid", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    arc_weights(arcs, b, line_obv());
    const UcmHierarchy h = build_ucm(b, arcs);
    const UcmRaster r = rasterize_ucm(h.tree, b, arcs, h.face_saliency);

    REQUIRE(r.spatial.frames == 1);
    REQUIRE(r.spatial.height == 2);
    REQUIRE(r.spatial.width == 12);
    CHECK(r.spatial.at(0, 0, 3) == Catch::Approx(0.3).margin(1e-7));
    CHECK(r.spatial.at(0, 0, 7) == Catch::Approx(0.7).margin(1e-7));
    // Junction pixels inherit the max of their adjacent face pixels.
    CHECK(r.spatial.at(0, 1, 3) == Catch::Approx(0.3).margin(1e-7));
    CHECK(r.spatial.at(0, 1, 7) == Catch::Approx(0.7).margin(1e-7));
    for (int x : {0, 1, 2, 4, 5, 6, 8, 9, 10, 11}) CHECK(r.spatial.at(0, 0, x) == 0.0f);
    for (float v : r.temporal.v) CHECK(v == 0.0f);

    // A temporal face lands in the temporal raster at the earlier frame.
    BasinLabeling tb;
    tb.frames = 2;
    tb.height = 1;
    tb.width = 1;
    tb.basin_count = 2;
    tb.labels = {0, 1};
    ArcSet tarcs = collect_arcs(tb);
    OrientedBoundaryVolume tobv(2, 1, 1);
    tobv.channel[OrientedBoundaryVolume::kSpatial].at(0, 0, 0) = 0.45f;
    arc_weights(tarcs, tb, tobv);
    const UcmHierarchy th = build_ucm(tb, tarcs);
    const UcmRaster tr = rasterize_ucm(th.tree, tb, tarcs, th.face_saliency);
    CHECK(tr.temporal.at(0, 0, 0) == Catch::Approx(0.45).margin(1e-7));
    CHECK(tr.temporal.at(1, 0, 0) == 0.0f);
}

TEST_CASE("random hierarchies satisfy the ultrametric invariants", "[ucm]") {
    for (std::uint64_t seed : {11u, 23u, 31u, 47u}) {
        const RandomInstance inst = random_instance(seed);
        const MergeTree& tree = inst.hierarchy.tree;
        REQUIRE(tree.leaves == inst.basins.basin_count);
        REQUIRE(static_cast<std::int32_t>(tree.nodes.size()) == tree.leaves - 1);

        // Monotone saliencies.
        for (std::size_t i = 1; i < tree.nodes.size(); ++i)
            REQUIRE(tree.nodes[i].saliency >= tree.nodes[i - 1].saliency);

        // Face saliency equals the merge level of the face's basin pair.
        for (std::size_t f = 0; f < inst.arcs.faces.size(); ++f) {
            const auto [la, lb] = face_pair(inst.basins, inst.arcs.faces[f]);
            REQUIRE(inst.hierarchy.face_saliency[f] ==
                    Catch::Approx(merge_level(tree, la, lb)).margin(1e-12));
        }

        // Ultrametric triangle inequality on sampled triples.
        Rng rng(seed * 7 + 1);
        for (int trial = 0; trial < 50; ++trial) {
            const auto a = static_cast<std::int32_t>(rng.uniform_int(0, tree.leaves - 1));
            const auto b = static_cast<std::int32_t>(rng.uniform_int(0, tree.leaves - 1));
            const auto c = static_cast<std::int32_t>(rng.uniform_int(0, tree.leaves - 1));
            if (a == b || b == c || a == c) continue;
            const double ab = merge_level(tree, a, b);
            const double bc = merge_level(tree, b, c);
            const double ac = merge_level(tree, a, c);
            REQUIRE(ac <= std::max(ab, bc) + 1e-12);
        }
    }
}

TEST_CASE("threshold segmentations nest across levels", "[ucm]") {
    RandomInstance inst = random_instance(5);
    normalize_saliencies(inst.hierarchy);
    std::vector<SegmentationVolume> segs;
    for (int i = 0; i <= 10; ++i)
        segs.push_back(threshold_segmentation(inst.hierarchy.tree, inst.basins, i / 10.0));

    CHECK(segs.front().region_count == inst.basins.basin_count);
    CHECK(segs.back().region_count == 1);
    for (std::size_t i = 1; i < segs.size(); ++i) {
        REQUIRE(segs[i].region_count <= segs[i - 1].region_count);
        // Every fine region maps into exactly one coarse region.
        std::map<std::int32_t, std::int32_t> to_coarse;
        for (std::size_t p = 0; p < segs[i].labels.size(); ++p) {
            const auto fine = segs[i - 1].labels[p];
            const auto coarse = segs[i].labels[p];
            auto it = to_coarse.find(fine);
            if (it == to_coarse.end())
                to_coarse.emplace(fine, coarse);
            else
                REQUIRE(it->second == coarse);
        }
    }
}

TEST_CASE("disconnected adjacency is reported", "[ucm]") {
    BasinLabeling b;
    b.frames = 1;
    b.height = 1;
    b.width = 2;
    b.basin_count = 2;
    b.labels = {0, 1};
    const ArcSet empty;  // no arcs although two basins exist
    CHECK_THROWS_AS(build_ucm(b, empty), NumericError);

    // A single basin needs no merges at all.
    BasinLabeling solo;
    solo.frames = 1;
    solo.height = 1;
    solo.width = 2;
    solo.basin_count = 1;
    solo.labels = {0, 0};
    const UcmHierarchy h = build_ucm(solo, empty);
    CHECK(h.tree.nodes.empty());
    CHECK(threshold_segmentation(h.tree, solo, 0.5).region_count == 1);
}

TEST_CASE("merge tree serializes with entity ids", "[ucm]") {
    const BasinLabeling b = line_basins();
    ArcSet arcs = collect_arcs(b);
    arc_weights(arcs, b, line_obv());
    const UcmHierarchy h = build_ucm(b, arcs);
    const nlohmann::json j = merge_tree_json(h.tree);
    CHECK(j["leaves"] == 3);
    REQUIRE(j["nodes"].size() == 2);
    CHECK(j["nodes"][0]["id"] == 3);
    CHECK(j["nodes"][1]["id"] == 4);
    CHECK(j["nodes"][0]["children"][0] == 0);
    CHECK(j["nodes"][0]["children"][1] == 1);
    CHECK(j["nodes"][1]["children"][0] == 2);
    CHECK(j["nodes"][1]["children"][1] == 3);
}
