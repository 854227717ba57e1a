// Copyright 2026 The gibbsprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gibbsprobe/blackbox.h"
#include "gibbsprobe/errors.h"
#include "gibbsprobe/rng.h"
#include "gibbsprobe/sampler.h"

namespace gp = gibbsprobe;
namespace fs = std::filesystem;

namespace {

class Blackbox : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("gibbsprobe_blackbox_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }

    std::string script(const std::string &name, const std::string &body) {
        const auto path = dir_ / name;
        std::ofstream(path) << "#!/bin/sh\n" << body;
        fs::permissions(path, fs::perms::owner_all);
        return path.string();
    }

    fs::path dir_;
};

const gp::GibbsModel kModel(3, {{{0}, 0.2}, {{0, 1}, 0.4}, {{1, 2}, -0.3}});

}  // namespace

TEST_F(Blackbox, ShimLoopbackEqualsInternalSampler) {
    gp::NoiseSpec noise = gp::NoiseSpec::uniform(3, 2.0);
    noise.h_sd = {0.1, 0.0, 0.2};
    const auto noise_path = (dir_ / "noise.json").string();
    gp::write_noise(noise, noise_path);

    const uint64_t seed = 99;
    const auto got = gp::blackbox_collect({GIBBSPROBE_CLI, {"shim", "--noise", noise_path}, true},
                                          kModel, {5000}, seed);
    const auto expected = gp::sample_noisy(kModel, noise, 5000, gp::derive_seed(seed, 0));
    EXPECT_EQ(got.records(), expected.records());
    EXPECT_EQ(got.meta.at("batches"), "1");
    EXPECT_EQ(got.meta.at("model_fingerprint"), gp::model_fingerprint(kModel));
}

TEST_F(Blackbox, BatchingRecordsProvenance) {
    const gp::BlackboxCommand cmd{GIBBSPROBE_CLI, {"shim"}, true};
    const auto batches = gp::split_batches(3000, 1000);
    ASSERT_EQ(batches, (std::vector<uint64_t>{1000, 1000, 1000}));
    const auto three = gp::blackbox_collect(cmd, kModel, batches, 4);
    const auto one = gp::blackbox_collect(cmd, kModel, {3000}, 4);
    EXPECT_EQ(three.total(), 3000u);
    EXPECT_EQ(one.total(), 3000u);
    EXPECT_EQ(three.meta.at("batches"), "3");
    EXPECT_EQ(three.meta.at("batch_sizes"), "1000,1000,1000");
    EXPECT_EQ(three.meta.at("batch_seeds"), std::to_string(gp::derive_seed(4, 0)) + "," +
                                                std::to_string(gp::derive_seed(4, 1)) + "," +
                                                std::to_string(gp::derive_seed(4, 2)));
    EXPECT_EQ(one.meta.at("batches"), "1");
}

TEST_F(Blackbox, SplitBatchesRemainder) {
    EXPECT_EQ(gp::split_batches(2500, 1000), (std::vector<uint64_t>{1000, 1000, 500}));
    EXPECT_THROW(gp::split_batches(0, 10), gp::InvariantError);
}

TEST_F(Blackbox, WrongSpinCountRejected) {
    const auto prog = script("wrong_n.sh",
                             "while [ $# -gt 0 ]; do\n"
                             "  case \"$1\" in --out) out=\"$2\"; shift;; --num-reads) k=\"$2\"; shift;; esac\n"
                             "  shift\n"
                             "done\n"
                             "printf 'spins=2 total=%s\\n++ %s\\n' \"$k\" \"$k\" > \"$out\"\n");
    EXPECT_THROW(gp::blackbox_collect({prog, {}, false}, kModel, {10}, 1), gp::BlackboxError);
}

TEST_F(Blackbox, CountMismatchRejected) {
    const auto prog = script("short.sh",
                             "while [ $# -gt 0 ]; do\n"
                             "  case \"$1\" in --out) out=\"$2\"; shift;; esac\n"
                             "  shift\n"
                             "done\n"
                             "printf 'spins=3 total=1\\n+++ 1\\n' > \"$out\"\n");
    EXPECT_THROW(gp::blackbox_collect({prog, {}, false}, kModel, {10}, 1), gp::BlackboxError);
}

TEST_F(Blackbox, MalformedOutputRejected) {
    const auto prog = script("garbage.sh",
                             "while [ $# -gt 0 ]; do\n"
                             "  case \"$1\" in --out) out=\"$2\"; shift;; esac\n"
                             "  shift\n"
                             "done\n"
                             "echo 'spins=3 total=1' > \"$out\"\necho '+x+ 1' >> \"$out\"\n");
    EXPECT_THROW(gp::blackbox_collect({prog, {}, false}, kModel, {1}, 1), gp::BlackboxError);
}

TEST_F(Blackbox, NonzeroExitRejected) {
    const auto prog = script("fail.sh", "exit 3\n");
    try {
        gp::blackbox_collect({prog, {}, false}, kModel, {1}, 1);
        FAIL();
    } catch (const gp::BlackboxError &e) {
        EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos) << e.what();
    }
}

TEST_F(Blackbox, MissingProgramRejected) {
    EXPECT_THROW(gp::blackbox_collect({(dir_ / "absent").string(), {}, false}, kModel, {1}, 1),
                 gp::BlackboxError);
}
