// Copyright 2026 The sybilscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sybilscope/sources.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iterator>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "lines.hpp"
#include "sybilscope/error.hpp"

namespace sybilscope {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void read_path(const fs::path& path, std::vector<Document>& out) {
  const std::string name = path.filename().string();
  if (ends_with(name, ".tar.xz") || ends_with(name, ".txz")) {
    auto docs = read_tar(xz_decompress(read_file(path)), path.string());
    std::move(docs.begin(), docs.end(), std::back_inserter(out));
  } else if (ends_with(name, ".tar")) {
    auto docs = read_tar(read_file(path), path.string());
    std::move(docs.begin(), docs.end(), std::back_inserter(out));
  } else if (ends_with(name, ".xz")) {
    out.push_back({path.string(), xz_decompress(read_file(path))});
  } else {
    out.push_back({path.string(), read_file(path)});
  }
}

struct Parsed {
  std::optional<Consensus> consensus;
  std::vector<RouterDescriptor> descriptors;
  std::optional<std::string> problem;
  bool unrecognised = false;
};

Parsed parse_document(const Document& doc) {
  Parsed p;
  try {
    switch (sniff_document(doc.text)) {
      case DocumentKind::Consensus:
        p.consensus = parse_consensus(doc.text);
        break;
      case DocumentKind::Descriptors:
        p.descriptors = parse_descriptors(doc.text);
        break;
      case DocumentKind::Unknown:
        p.unrecognised = true;
        break;
    }
  } catch (const MalformedDocument& e) {
    p.problem = doc.origin + ": " + e.what();
  }
  return p;
}

}  // namespace

DocumentKind sniff_document(std::string_view text) {
  detail::LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (line.starts_with("@type ")) {
      if (line.find("network-status-consensus-3") != std::string_view::npos) {
        return DocumentKind::Consensus;
      }
      if (line.find("server-descriptor") != std::string_view::npos) {
        return DocumentKind::Descriptors;
      }
      return DocumentKind::Unknown;
    }
    if (line.front() == '@') continue;
    line = detail::strip_opt(line);
    if (line.starts_with("network-status-version") || line.starts_with("valid-after")) {
      return DocumentKind::Consensus;
    }
    if (line.starts_with("router ")) return DocumentKind::Descriptors;
    return DocumentKind::Unknown;
  }
  return DocumentKind::Unknown;
}

std::vector<Document> read_documents(const std::vector<fs::path>& inputs) {
  std::vector<Document> out;
  for (const fs::path& input : inputs) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::recursive_directory_iterator(input)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) read_path(file, out);
    } else if (fs::is_regular_file(input, ec)) {
      read_path(input, out);
    } else {
      throw Error("no such input: " + input.string());
    }
  }
  return out;
}

Corpus load_corpus(const std::vector<Document>& documents, unsigned threads) {
  std::vector<Parsed> parsed(documents.size());
  const std::size_t workers =
      std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::max<std::size_t>(documents.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < documents.size(); ++i) parsed[i] = parse_document(documents[i]);
  } else {
    // Strided partition; each slot is written by exactly one worker.
    std::vector<std::future<void>> tasks;
    for (std::size_t w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < documents.size(); i += workers) {
          parsed[i] = parse_document(documents[i]);
        }
      }));
    }
    for (auto& t : tasks) t.get();
  }

  Corpus corpus;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    Parsed& p = parsed[i];
    if (p.unrecognised) {
      spdlog::debug("ignoring {}: not a directory document", documents[i].origin);
      corpus.ignored.push_back(documents[i].origin);
      continue;
    }
    if (p.problem) {
      spdlog::warn("skipping {}", *p.problem);
      corpus.problems.push_back(std::move(*p.problem));
      ++corpus.skipped_documents;
      continue;
    }
    if (p.consensus) corpus.consensuses.push_back(std::move(*p.consensus));
    for (RouterDescriptor& d : p.descriptors) {
      auto it = corpus.descriptors.find(d.fingerprint);
      if (it == corpus.descriptors.end()) {
        corpus.descriptors.emplace(d.fingerprint, std::move(d));
      } else if (d.published > it->second.published) {
        it->second = std::move(d);
      }
    }
  }
  std::stable_sort(corpus.consensuses.begin(), corpus.consensuses.end(),
                   [](const Consensus& a, const Consensus& b) {
                     return a.valid_after() < b.valid_after();
                   });
  auto last = std::unique(corpus.consensuses.begin(), corpus.consensuses.end(),
                          [](const Consensus& a, const Consensus& b) {
                            return a.valid_after() == b.valid_after();
                          });
  if (last != corpus.consensuses.end()) {
    spdlog::warn("dropping {} consensus(es) with repeated valid-after",
                 std::distance(last, corpus.consensuses.end()));
    corpus.consensuses.erase(last, corpus.consensuses.end());
  }
  return corpus;
}

}  // namespace sybilscope
