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

#include "gibbsprobe/blackbox.h"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/rng.h"

extern char **environ;

namespace gibbsprobe {

namespace {

namespace fs = std::filesystem;

int run_process(const std::vector<std::string> &args) {
    std::vector<char *> argv;
    for (const auto &a : args) {
        argv.push_back(const_cast<char *>(a.c_str()));
    }
    argv.push_back(nullptr);
    pid_t pid;
    if (posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
        throw BlackboxError("cannot launch black-box command '" + args[0] + "'");
    }
    int status = 0;
    if (waitpid(pid, &status, 0) < 0) {
        throw BlackboxError("waiting for black-box command failed");
    }
    if (!WIFEXITED(status)) {
        return -1;
    }
    return WEXITSTATUS(status);
}

fs::path make_work_dir() {
    static std::atomic<int> counter{0};
    auto dir = fs::temp_directory_path() /
               ("gibbsprobe-bb-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

}  // namespace

std::vector<uint64_t> split_batches(uint64_t total, uint64_t batch_size) {
    if (total == 0 || batch_size == 0) {
        throw InvariantError("total and batch size must be positive");
    }
    std::vector<uint64_t> batches;
    for (uint64_t done = 0; done < total; done += batch_size) {
        batches.push_back(std::min(batch_size, total - done));
    }
    return batches;
}

SampleSet blackbox_collect(const BlackboxCommand &command, const GibbsModel &input,
                           const std::vector<uint64_t> &batch_sizes, uint64_t seed) {
    if (batch_sizes.empty()) {
        throw InvariantError("at least one batch is required");
    }
    const fs::path dir = make_work_dir();
    const std::string model_path = (dir / "model.json").string();
    write_model(input, model_path);

    std::vector<SampleRecord> merged;
    std::string seeds, sizes;
    try {
        for (size_t b = 0; b < batch_sizes.size(); b++) {
            if (batch_sizes[b] == 0) {
                throw InvariantError("batch sizes must be positive");
            }
            const uint64_t batch_seed = derive_seed(seed, b);
            const std::string out_path = (dir / ("batch" + std::to_string(b) + ".txt")).string();
            std::vector<std::string> args{command.program};
            args.insert(args.end(), command.extra_args.begin(), command.extra_args.end());
            args.insert(args.end(), {"--model", model_path, "--num-reads",
                                     std::to_string(batch_sizes[b]), "--out", out_path});
            if (command.pass_seed) {
                args.insert(args.end(), {"--seed", std::to_string(batch_seed)});
            }
            const int code = run_process(args);
            if (code != 0) {
                throw BlackboxError("black-box command exited with status " +
                                    std::to_string(code) + " on batch " + std::to_string(b));
            }
            SampleSet batch = [&] {
                try {
                    return read_samples(out_path);
                } catch (const ParseError &e) {
                    throw BlackboxError(std::string("malformed black-box output: ") + e.what());
                }
            }();
            if (batch.n_spins() != input.n_spins()) {
                throw BlackboxError("black-box output has " + std::to_string(batch.n_spins()) +
                                    " spins, model has " + std::to_string(input.n_spins()));
            }
            if (batch.total() != batch_sizes[b]) {
                throw BlackboxError("black-box batch " + std::to_string(b) + " returned " +
                                    std::to_string(batch.total()) + " samples, requested " +
                                    std::to_string(batch_sizes[b]));
            }
            merged.insert(merged.end(), batch.records().begin(), batch.records().end());
            seeds += (b ? "," : "") + std::to_string(batch_seed);
            sizes += (b ? "," : "") + std::to_string(batch_sizes[b]);
        }
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(dir, ignored);
        throw;
    }
    std::error_code ignored;
    fs::remove_all(dir, ignored);

    SampleSet out(input.n_spins(), std::move(merged));
    std::string cmdline = command.program;
    for (const auto &a : command.extra_args) {
        cmdline += " " + a;
    }
    out.meta["source"] = "blackbox";
    out.meta["command"] = cmdline;
    out.meta["batches"] = std::to_string(batch_sizes.size());
    out.meta["batch_sizes"] = sizes;
    out.meta["batch_seeds"] = seeds;
    out.meta["master_seed"] = std::to_string(seed);
    out.meta["model_fingerprint"] = model_fingerprint(input);
    return out;
}

}  // namespace gibbsprobe
