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

#include <fstream>
#include <sstream>

#include "gibbsprobe/errors.h"
#include "gibbsprobe/sampler.h"

namespace gibbsprobe {

namespace {

std::string trim(const std::string &s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

uint64_t parse_sign_string(const std::string &token, int n_spins, const std::string &source,
                           int line) {
    if (static_cast<int>(token.size()) != n_spins) {
        throw ParseError(source, line,
                         "configuration has " + std::to_string(token.size()) +
                             " spins, expected " + std::to_string(n_spins));
    }
    uint64_t bits = 0;
    for (int i = 0; i < n_spins; i++) {
        if (token[i] == '+') {
            bits |= uint64_t{1} << i;
        } else if (token[i] != '-') {
            throw ParseError(source, line, "configuration characters must be '+' or '-'");
        }
    }
    return bits;
}

uint64_t parse_count(const std::string &token, const std::string &source, int line) {
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(source, line, "count must be a positive integer, got '" + token + "'");
    }
    uint64_t value;
    try {
        value = std::stoull(token);
    } catch (const std::exception &) {
        throw ParseError(source, line, "count out of range");
    }
    if (value == 0) {
        throw ParseError(source, line, "count must be >= 1");
    }
    return value;
}

bool is_sign_string(const std::string &s) {
    return !s.empty() && s.find_first_not_of("+-") == std::string::npos;
}

}  // namespace

SampleSet parse_samples(const std::string &text, const std::string &source) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    int n_spins = 0;
    uint64_t declared_total = 0;
    bool counted = false;
    bool first = true;
    std::map<std::string, std::string> meta;
    std::vector<SampleRecord> records;

    while (std::getline(in, raw)) {
        line++;
        const std::string content = trim(raw);
        if (content.empty()) {
            continue;
        }
        if (content[0] == '#') {
            const std::string body = trim(content.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
            }
            continue;
        }
        std::istringstream fields(content);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;) {
            tokens.push_back(t);
        }
        if (first) {
            first = false;
            if (tokens[0].rfind("spins=", 0) == 0) {
                counted = true;
                if (tokens.size() != 2 || tokens[1].rfind("total=", 0) != 0) {
                    throw ParseError(source, line, "header must read 'spins=<n> total=<M>'");
                }
                try {
                    n_spins = std::stoi(tokens[0].substr(6));
                } catch (const std::exception &) {
                    throw ParseError(source, line, "bad spins= value");
                }
                if (n_spins < 1 || n_spins > kMaxSpins) {
                    throw ParseError(source, line, "spins= out of range");
                }
                declared_total = parse_count(tokens[1].substr(6), source, line);
                continue;
            }
            n_spins = is_sign_string(tokens[0]) && tokens.size() == 1
                          ? static_cast<int>(tokens[0].size())
                          : static_cast<int>(tokens.size());
            if (n_spins < 1 || n_spins > kMaxSpins) {
                throw ParseError(source, line, "configuration length out of range");
            }
        }
        if (counted) {
            if (tokens.size() != 2) {
                throw ParseError(source, line, "expected '<configuration> <count>'");
            }
            records.push_back({parse_sign_string(tokens[0], n_spins, source, line),
                               parse_count(tokens[1], source, line)});
        } else if (tokens.size() == 1 && is_sign_string(tokens[0])) {
            records.push_back({parse_sign_string(tokens[0], n_spins, source, line), 1});
        } else {
            if (static_cast<int>(tokens.size()) != n_spins) {
                throw ParseError(source, line,
                                 "configuration has " + std::to_string(tokens.size()) +
                                     " spins, expected " + std::to_string(n_spins));
            }
            uint64_t bits = 0;
            for (int i = 0; i < n_spins; i++) {
                if (tokens[i] == "1" || tokens[i] == "+1") {
                    bits |= uint64_t{1} << i;
                } else if (tokens[i] != "-1") {
                    throw ParseError(source, line, "spin values must be +1 or -1");
                }
            }
            records.push_back({bits, 1});
        }
    }
    if (first) {
        throw ParseError(source, 0, "no samples");
    }
    if (records.empty()) {
        throw ParseError(source, 0, "no sample records");
    }
    SampleSet samples(n_spins, std::move(records));
    if (counted && samples.total() != declared_total) {
        throw ParseError(source, 0,
                         "header declares total=" + std::to_string(declared_total) +
                             " but records sum to " + std::to_string(samples.total()));
    }
    samples.meta = std::move(meta);
    return samples;
}

std::string samples_to_text(const SampleSet &samples) {
    std::ostringstream out;
    out << "spins=" << samples.n_spins() << " total=" << samples.total() << "\n";
    for (const auto &[key, value] : samples.meta) {
        out << "# " << key << "=" << value << "\n";
    }
    std::string config(samples.n_spins(), '-');
    for (const auto &r : samples.records()) {
        for (int i = 0; i < samples.n_spins(); i++) {
            config[i] = ((r.bits >> i) & 1) ? '+' : '-';
        }
        out << config << " " << r.count << "\n";
    }
    return out.str();
}

SampleSet read_samples(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open sample file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_samples(buffer.str(), path);
}

void write_samples(const SampleSet &samples, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write sample file " + path);
    }
    out << samples_to_text(samples);
}

}  // namespace gibbsprobe
