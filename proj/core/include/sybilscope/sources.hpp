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

#pragma once

// Reading directory documents from files, directory trees and CollecTor tar
// archives, and turning them into a time-ordered consensus stream.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sybilscope/dirdata.hpp"

namespace sybilscope {

/// Raw document text plus where it came from ("path" or "archive.tar:member").
struct Document {
  std::string origin;
  std::string text;
};

enum class DocumentKind { Consensus, Descriptors, Unknown };

/// Classifies by the optional "@type" annotation, falling back to the first
/// keyword line.
DocumentKind sniff_document(std::string_view text);

/// Expands inputs: plain files are read as-is, directories recursively in
/// lexicographic path order, and *.tar / *.tar.xz files member by member.
/// Unreadable paths throw Error.
std::vector<Document> read_documents(const std::vector<std::filesystem::path>& inputs);

/// Members of an uncompressed ustar archive, regular files only.
std::vector<Document> read_tar(std::string_view bytes, const std::string& origin);

/// Decompresses an .xz stream. Throws Error on corrupt input.
std::string xz_decompress(std::string_view bytes);

struct Corpus {
  /// Sorted by valid_after; a repeated valid_after keeps the first document.
  std::vector<Consensus> consensuses;
  /// Most recently published descriptor per fingerprint.
  std::map<Fingerprint, RouterDescriptor> descriptors;
  std::size_t skipped_documents = 0;
  std::vector<std::string> problems;
  /// Files that are not directory documents at all (CSV, notes); not errors.
  std::vector<std::string> ignored;
};

/// Parses documents on up to `threads` workers. Corrupt documents are skipped
/// and reported in `problems`, unrecognised ones listed in `ignored`; the
/// result does not depend on `threads`.
Corpus load_corpus(const std::vector<Document>& documents, unsigned threads = 1);

}  // namespace sybilscope
