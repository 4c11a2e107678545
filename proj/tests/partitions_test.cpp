#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "pathnet/io.hpp"
#include "pathnet/partitions.hpp"
#include "pathnet/rng.hpp"

using namespace pathnet;
namespace fs = std::filesystem;

namespace {

const fs::path kRepo = PATHNET_REPO_DIR;

fs::path temp_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "pathnet_partitions_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_scheme_file(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    write_text_file(p, content);
    return p;
}

}  // namespace

TEST(Partitions, LoadYeo7Fixture) {
    const PartitionScheme s = load_scheme(kRepo / "schemes" / "yeo7.csv");
    EXPECT_EQ(s.num_communities, 7);
    EXPECT_EQ(s.num_rois, 28);
    EXPECT_EQ(num_paths(s.num_communities), 21);
}

TEST(Partitions, LoadSchaefer100Fixture) {
    const PartitionScheme s = load_scheme(kRepo / "schemes" / "schaefer100_10.csv");
    EXPECT_EQ(s.num_rois, 100);
    EXPECT_EQ(s.num_communities, 10);
}

TEST(Partitions, Yeo17SizesSumToRoiCount) {
    const PartitionScheme s = load_scheme(kRepo / "schemes" / "yeo17.csv");
    EXPECT_EQ(s.num_communities, 17);
    const auto sizes = s.community_sizes();
    EXPECT_EQ(sizes.size(), 17u);
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), 0), s.num_rois);
    for (int sz : sizes) EXPECT_GT(sz, 0);
}

TEST(Partitions, EmptyCommunityIsRejected) {
    const auto p = write_scheme_file("empty_comm.csv",
                                     "name,bad\nnum_rois,2\nnum_communities,2\n"
                                     "roi,community\n0,0\n1,0\n");
    try {
        load_scheme(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("community 1"), std::string::npos);
    }
}

TEST(Partitions, DuplicateRoiIsRejected) {
    const auto p = write_scheme_file("dup_roi.csv",
                                     "name,bad\nnum_rois,3\nnum_communities,2\n"
                                     "roi,community\n0,0\n1,1\n1,0\n");
    try {
        load_scheme(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("ROI 1"), std::string::npos);
    }
}

TEST(Partitions, OutOfRangeCommunityIsRejected) {
    const auto p = write_scheme_file("range.csv",
                                     "name,bad\nnum_rois,2\nnum_communities,2\n"
                                     "roi,community\n0,0\n1,5\n");
    EXPECT_THROW(load_scheme(p), DataError);
}

TEST(Partitions, CommunitySizes) {
    PartitionScheme s;
    s.name = "t";
    s.num_rois = 3;
    s.num_communities = 2;
    s.assignment = {0, 0, 1};
    s.validate();
    const auto sizes = s.community_sizes();
    ASSERT_EQ(sizes.size(), 2u);
    EXPECT_EQ(sizes[0], 2);
    EXPECT_EQ(sizes[1], 1);
}

TEST(Partitions, SingletonCommunitySizes) {
    PartitionScheme s;
    s.name = "t";
    s.num_rois = 9;
    s.num_communities = 2;
    s.assignment.assign(9, 0);
    s.assignment[8] = 1;
    const auto sizes = s.community_sizes();
    EXPECT_EQ(sizes[0], 8);
    EXPECT_EQ(sizes[1], 1);
}

TEST(Partitions, RowOrderDoesNotMatter) {
    const std::string header = "name,perm\nnum_rois,4\nnum_communities,2\nroi,community\n";
    const auto a = write_scheme_file("order_a.csv", header + "0,0\n1,1\n2,0\n3,1\n");
    const auto b = write_scheme_file("order_b.csv", header + "3,1\n0,0\n2,0\n1,1\n");
    const PartitionScheme sa = load_scheme(a);
    const PartitionScheme sb = load_scheme(b);
    EXPECT_EQ(sa.assignment, sb.assignment);
    EXPECT_EQ(sa.name, sb.name);
}

TEST(PathIndex, FirstPairIsZero) {
    EXPECT_EQ(path_index(0, 1, 7), 0);
}

TEST(PathIndex, SevenCommunitiesGiveTwentyOnePaths) {
    EXPECT_EQ(num_paths(7), 21);
    EXPECT_EQ(path_index(5, 6, 7), 20);
}

TEST(PathIndex, InvalidOrderIsContractError) {
    EXPECT_THROW(path_index(2, 2, 5), ContractError);
    EXPECT_THROW(path_index(3, 1, 5), ContractError);
}

TEST(PathIndex, RoundTripBijectionUpToTwenty) {
    // exhaustive enumeration oracle for N in 2..20
    for (int n = 2; n <= 20; ++n) {
        int expected = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const int idx = path_index(i, j, n);
                EXPECT_EQ(idx, expected);
                const auto [pi, pj] = path_pair(idx, n);
                EXPECT_EQ(pi, i);
                EXPECT_EQ(pj, j);
                ++expected;
            }
        }
        EXPECT_EQ(expected, num_paths(n));
    }
}

TEST(Partitions, SaveLoadRoundTrip) {
    const PartitionScheme s = load_scheme(kRepo / "schemes" / "yeo7.csv");
    const fs::path p = temp_dir() / "roundtrip.csv";
    save_scheme(p, s);
    const PartitionScheme s2 = load_scheme(p);
    EXPECT_EQ(s.assignment, s2.assignment);
    EXPECT_EQ(s.name, s2.name);
    EXPECT_EQ(s.num_communities, s2.num_communities);
}
