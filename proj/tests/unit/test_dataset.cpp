#include <doctest.h>

#include "callfuse/dataset.hpp"

#include <algorithm>

using namespace callfuse;

namespace {

StaticMetricsRow row(const std::string& file, std::uint32_t line, const std::string& name, std::int64_t loc = 10)
{
    StaticMetricsRow r;
    r.id = {file, line, 1};
    r.name = name;
    r.loc = loc;
    r.lloc = loc - 1;
    r.nos = loc / 2;
    r.mccc = 2;
    r.cd = 0.25;
    r.nii = 3;
    r.noi = 4;
    return r;
}

Patch patch_of(const std::string& file, std::vector<LineRange> ranges)
{
    return {"Bug-1", {{file, std::move(ranges)}}};
}

}  // namespace

TEST_CASE("closed-interval overlap boundaries")
{
    const std::vector<FunctionSpan> spans{{{"a.js", 10, 1}, 20}};
    const std::vector<StaticMetricsRow> rows{row("a.js", 10, "f")};
    auto hits = [&](LineRange r) { return map_patch_to_functions(patch_of("a.js", {r}), spans, rows).size(); };
    CHECK(hits({15, 15}) == 1);
    CHECK(hits({25, 25}) == 0);
    CHECK(hits({20, 22}) == 1);
    CHECK(hits({5, 10}) == 1);
    CHECK(hits({21, 21}) == 0);
    CHECK(hits({9, 9}) == 0);
    CHECK(hits({1, 30}) == 1);
}

TEST_CASE("matches are limited to the patched file and to known rows")
{
    const std::vector<FunctionSpan> spans{{{"a.js", 1, 1}, 50}, {{"a.js", 5, 3}, 8}, {{"b.js", 1, 1}, 50}};
    const std::vector<StaticMetricsRow> rows{row("a.js", 1, "outer"), row("b.js", 1, "other")};
    auto ids = map_patch_to_functions(patch_of("a.js", {{6, 6}}), spans, rows);
    CHECK(ids == std::set<SourcePosition>{{"a.js", 1, 1}});

    Diagnostics diagnostics;
    CHECK(map_patch_to_functions(patch_of("c.js", {{1, 1}}), spans, rows, &diagnostics).empty());
    CHECK(diagnostics.size() == 1);
}

TEST_CASE("one bug touching one of four functions")
{
    ReferenceSnapshot ref{"v2", {row("a.js", 1, "f"), row("a.js", 10, "g"), row("a.js", 20, "h"), row("b.js", 1, "k")}, {}};
    BugSnapshot bug{"Bug-1", {{"a.js", 12, 1}}, {row("a.js", 2, "f"), row("a.js", 12, "g", 33)}, {}};
    auto records = compose_dataset(std::span(&bug, 1), ref);
    REQUIRE(records.size() == 4);
    CHECK(records[0].label == Label::Buggy);
    CHECK(records[0].metrics.name == "g");
    CHECK(records[0].metrics.loc == 33);
    CHECK(records[0].source == "Bug-1");
    const auto buggy = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.label == Label::Buggy; });
    CHECK(buggy == 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        CHECK(records[i].label == Label::NonBuggy);
        CHECK(records[i].source == "v2");
        CHECK(records[i].metrics.name != "g");
    }
}

TEST_CASE("repeated buggy function is kept once with the first snapshot")
{
    ReferenceSnapshot ref{"ref", {row("a.js", 1, "f"), row("a.js", 10, "g")}, {}};
    std::vector<BugSnapshot> bugs{
        {"Bug-1", {{"a.js", 10, 1}}, {row("a.js", 10, "g", 40)}, {}},
        {"Bug-2", {{"a.js", 10, 1}}, {row("a.js", 10, "g", 50)}, {}},
    };
    auto records = compose_dataset(bugs, ref);
    REQUIRE(records.size() == 2);
    CHECK(records[0].source == "Bug-1");
    CHECK(records[0].metrics.loc == 40);
    CHECK(records[1].metrics.name == "f");
}

TEST_CASE("missing metrics drop the match with a diagnostic and counts join by position")
{
    ReferenceSnapshot ref{"ref", {row("a.js", 1, "f"), row("a.js", 10, "g")}, {{{"a.js", 1, 1}, false, false, 7, 2}}};
    BugSnapshot bug{"Bug-1", {{"a.js", 10, 1}, {"a.js", 99, 1}}, {row("a.js", 10, "g")}, {{{"a.js", 10, 1}, false, false, 5, 6}}};
    Diagnostics diagnostics;
    auto records = compose_dataset(std::span(&bug, 1), ref, &diagnostics);
    CHECK(diagnostics.size() == 1);
    REQUIRE(records.size() == 2);
    CHECK(records[0].hnii == 5);
    CHECK(records[0].hnoi == 6);
    CHECK(records[1].hnii == 7);
    CHECK(records[1].hnoi == 2);
}

TEST_CASE("feature set columns")
{
    auto has = [](const std::vector<std::string>& cols, const char* name) {
        return std::find(cols.begin(), cols.end(), name) != cols.end();
    };
    auto s = feature_columns(FeatureSetVariant::S);
    auto h = feature_columns(FeatureSetVariant::H);
    auto sh = feature_columns(FeatureSetVariant::SH);
    CHECK(s.size() == 10);
    CHECK(h.size() == 10);
    CHECK(sh.size() == 12);
    CHECK_FALSE(has(s, "HNII"));
    CHECK_FALSE(has(s, "HNOI"));
    CHECK(has(h, "HNII"));
    CHECK_FALSE(has(h, "NII"));
    CHECK_FALSE(has(h, "NOI"));
    for (const auto& c : s)
        CHECK(has(sh, c.c_str()));
    CHECK(has(sh, "HNII"));
    CHECK(has(sh, "HNOI"));
}

TEST_CASE("feature matrix values and csv round-trip")
{
    std::vector<FunctionRecord> records{
        {row("a.js", 1, "f", 12), 3, 1, Label::Buggy, "Bug-1"},
        {row("a.js", 9, "g", 7), 0, 5, Label::NonBuggy, "ref"},
    };
    records[1].metrics.cd = 0.1;
    auto m = build_feature_matrix(records, FeatureSetVariant::SH);
    CHECK(m.x.rows() == 2);
    CHECK(m.x(0, 0) == 12);
    CHECK(m.x(1, 5) == 0.1);
    CHECK(m.x(0, 10) == 3);
    CHECK(m.x(1, 11) == 5);
    CHECK(m.y == ml::Labels{1, 0});

    for (auto v : kAllVariants) {
        const auto csv = export_dataset(records, v);
        CHECK(import_dataset(csv) == build_feature_matrix(records, v));
    }
    CHECK(export_dataset(records, FeatureSetVariant::S).starts_with("LOC,LLOC,NOS,McCC,NL,CD,CLOC,DLOC,NII,NOI,label\n"));
    CHECK_THROWS_AS(import_dataset("a,b\n1,2\n"), ParseError);
    CHECK_THROWS_AS(build_feature_matrix({}, FeatureSetVariant::S), Error);
}

TEST_CASE("dataset file names")
{
    CHECK(dataset_file_name(0.0, FeatureSetVariant::S) == "0_00_s.csv");
    CHECK(dataset_file_name(0.0, FeatureSetVariant::H) == "0_00_h.csv");
    CHECK(dataset_file_name(0.3, FeatureSetVariant::SH) == "0_30_s+h.csv");
    CHECK(parse_variant("S+H") == FeatureSetVariant::SH);
    CHECK(parse_variant("h") == FeatureSetVariant::H);
    CHECK_THROWS_AS(parse_variant("x"), Error);
}
