// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_PROMPT_HPP_
#define GKD_PROMPT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gkd/graph.hpp"

namespace gkd::prompt {

using graph::NodeId;

struct PromptConfig {
  std::size_t k = 3;
  std::size_t theta = 2;
  // Token cap; approximated as 0.75 * s_max whitespace-delimited words.
  std::size_t s_max = 512;
  std::string graph_type = "graph";
  std::vector<std::string> categories;
  std::optional<std::string> criteria;
  std::uint64_t seed = 0;

  std::size_t word_budget() const { return s_max * 3 / 4; }
  void validate() const;
};

struct InstructionPrompt {
  NodeId center = 0;
  std::size_t hop = 0;
  std::size_t prompt_index = 0;
  std::string instruction;
  std::string structure;
  std::string query;
  std::string full_text;  // instruction + " " + structure + " " + query
  std::string target;
};

// One exported JSONL line.
struct PromptRecord {
  std::uint64_t node = 0;
  std::uint64_t hop = 0;
  std::uint64_t prompt_index = 0;
  std::string text;
  std::string target;

  bool operator==(const PromptRecord&) const = default;
};

std::size_t count_words(std::string_view text);

// Line breaks and tabs become single spaces.
std::string sanitize_attribute(std::string_view text);
// "(node_{id}, {degree}, {attribute})"
std::string node_tuple(const graph::TextAttributedGraph& g, NodeId v);

std::string render_instruction(const PromptConfig& config);
std::string render_query(const graph::TextAttributedGraph& g, NodeId center);

inline constexpr std::size_t kUnlimitedWords = std::numeric_limits<std::size_t>::max();

// Natural-language rendering of hop `hop` of the subgraph. Hop 0 is the bare
// center tuple. Trailing frontier tuples (and their paths) are dropped whole
// until the text fits `word_budget`; at least one neighbor is always kept.
std::string encode_structure(const graph::NeighborSubgraph& sub, const graph::TextAttributedGraph& g,
                             std::size_t hop, std::size_t word_budget = kUnlimitedWords);

// Renders hop `hop` listing only `members` (a subset of that frontier, in the
// given order).
std::string encode_structure_members(const graph::NeighborSubgraph& sub,
                                     const graph::TextAttributedGraph& g, std::size_t hop,
                                     std::span<const NodeId> members);

std::vector<InstructionPrompt> build_prompt_set(const graph::TextAttributedGraph& g, NodeId center,
                                                const PromptConfig& config);

PromptRecord to_record(const InstructionPrompt& prompt);
std::string to_jsonl_line(const PromptRecord& record);
void export_jsonl(std::span<const InstructionPrompt> prompts, const std::filesystem::path& path);
void export_records(std::span<const PromptRecord> records, const std::filesystem::path& path);
std::vector<PromptRecord> parse_jsonl(const std::filesystem::path& path);

}  // namespace gkd::prompt

#endif  // GKD_PROMPT_HPP_
