// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "gkd/error.hpp"
#include "gkd/rng.hpp"

namespace gkd::prompt {
namespace {

constexpr const char* kArrow = " \xE2\x86\x92 ";  // " → "

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string render_path(const std::vector<NodeId>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += kArrow;
    out += "node_" + std::to_string(path[i]);
  }
  return out;
}

std::string connected_prefix(const graph::TextAttributedGraph& g, NodeId center, std::size_t hop) {
  return node_tuple(g, center) + " is connected within " + std::to_string(hop) + " hops to ";
}

constexpr const char* kPathClause = " through paths that may involve ";

}  // namespace

void PromptConfig::validate() const {
  if (theta < 1) throw ValidationError("prompt.theta must be at least 1");
  if (s_max < 1) throw ValidationError("prompt.s_max must be positive");
  if (categories.empty()) throw ValidationError("prompt.categories must not be empty");
  for (const auto& c : categories) {
    if (c.empty()) throw ValidationError("prompt.categories contains an empty name");
  }
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::string sanitize_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out.push_back(ch == '\n' || ch == '\r' || ch == '\t' ? ' ' : ch);
  }
  return out;
}

std::string node_tuple(const graph::TextAttributedGraph& g, NodeId v) {
  return "(node_" + std::to_string(v) + ", " + std::to_string(g.degree(v)) + ", " +
         sanitize_attribute(g.attribute(v)) + ")";
}

std::string render_instruction(const PromptConfig& config) {
  config.validate();
  std::string text = "Implement a node classification system for " + config.graph_type +
                     ", representing nodes as tuples (node_{id}, {degree}, {attribute}). "
                     "Classify nodes into [" +
                     join(config.categories, ", ") + "] based on attributes and link relations.";
  if (config.criteria && !config.criteria->empty()) {
    std::string criteria = sanitize_attribute(*config.criteria);
    text += " " + criteria;
    if (criteria.back() != '.') text += ".";
  }
  return text;
}

std::string render_query(const graph::TextAttributedGraph& g, NodeId center) {
  if (!g.contains(center)) throw ContractError("render_query: node out of range");
  return "Which category should " + node_tuple(g, center) + " be classified as?";
}

std::string encode_structure_members(const graph::NeighborSubgraph& sub,
                                     const graph::TextAttributedGraph& g, std::size_t hop,
                                     std::span<const NodeId> members) {
  if (hop > sub.hops()) throw ContractError("encode_structure: hop beyond subgraph depth");
  if (hop == 0) return node_tuple(g, sub.center);
  if (members.empty()) {
    const std::string l = std::to_string(hop);
    return connected_prefix(g, sub.center, hop) + "no nodes, as it has no neighbors at hop " + l + ".";
  }
  std::vector<std::string> tuples, paths;
  for (NodeId v : members) {
    tuples.push_back(node_tuple(g, v));
    paths.push_back(render_path(sub.path_to(v)));
  }
  return connected_prefix(g, sub.center, hop) + join(tuples, ", ") + kPathClause + join(paths, ", ") + ".";
}

namespace {

// Words contributed by a neighbor's tuple and path; the ", " separators and
// the final "." attach to existing words.
std::size_t member_words(const graph::NeighborSubgraph& sub, const graph::TextAttributedGraph& g,
                         NodeId v) {
  return count_words(node_tuple(g, v)) + count_words(render_path(sub.path_to(v)));
}

std::size_t frame_words(const graph::TextAttributedGraph& g, NodeId center, std::size_t hop) {
  return count_words(connected_prefix(g, center, hop)) + count_words(kPathClause);
}

// Longest prefix of `order` whose rendering fits; never shorter than one.
std::size_t fitting_prefix(const graph::NeighborSubgraph& sub, const graph::TextAttributedGraph& g,
                           std::size_t hop, std::span<const NodeId> order, std::size_t budget) {
  std::size_t words = frame_words(g, sub.center, hop);
  std::size_t count = 0;
  for (NodeId v : order) {
    const std::size_t w = member_words(sub, g, v);
    if (budget != kUnlimitedWords && words + w > budget && count > 0) break;
    words += w;
    ++count;
  }
  return count;
}

}  // namespace

std::string encode_structure(const graph::NeighborSubgraph& sub, const graph::TextAttributedGraph& g,
                             std::size_t hop, std::size_t word_budget) {
  if (hop > sub.hops()) throw ContractError("encode_structure: hop beyond subgraph depth");
  if (hop == 0) return node_tuple(g, sub.center);
  const auto& frontier = sub.frontiers[hop];
  const std::size_t keep = fitting_prefix(sub, g, hop, frontier, word_budget);
  return encode_structure_members(sub, g, hop, std::span<const NodeId>(frontier).first(keep));
}

std::vector<InstructionPrompt> build_prompt_set(const graph::TextAttributedGraph& g, NodeId center,
                                                const PromptConfig& config) {
  if (!g.contains(center)) throw ContractError("build_prompt_set: node out of range");
  const std::string instruction = render_instruction(config);
  const std::string query = render_query(g, center);
  const graph::NeighborSubgraph sub = graph::khop_subgraph(g, center, config.k);
  const std::size_t fixed = count_words(instruction) + count_words(query);
  const std::size_t budget = config.word_budget() > fixed ? config.word_budget() - fixed : 0;
  const int y = g.label(center);
  const std::string target = static_cast<std::size_t>(y) < config.categories.size()
                                 ? config.categories[static_cast<std::size_t>(y)]
                                 : "class_" + std::to_string(y);

  std::vector<InstructionPrompt> out;
  auto emit = [&](std::size_t hop, std::size_t index, std::string structure) {
    InstructionPrompt p;
    p.center = center;
    p.hop = hop;
    p.prompt_index = index;
    p.instruction = instruction;
    p.structure = std::move(structure);
    p.query = query;
    p.full_text = p.instruction + " " + p.structure + " " + p.query;
    p.target = target;
    out.push_back(std::move(p));
  };

  for (std::size_t hop = 0; hop <= config.k; ++hop) {
    const auto& frontier = sub.frontiers[hop];
    if (hop == 0 || frontier.empty() ||
        fitting_prefix(sub, g, hop, frontier, budget) == frontier.size()) {
      emit(hop, 0, encode_structure_members(sub, g, hop, frontier));
      continue;
    }
    // Frontier exceeds the budget: up to theta distinct random subsets.
    Rng rng(derive_seed(config.seed, {stream::kPrompts, center, hop}));
    std::set<std::vector<NodeId>> seen;
    std::size_t index = 0;
    for (std::size_t attempt = 0; index < config.theta && attempt < 4 * config.theta; ++attempt) {
      std::vector<NodeId> order = frontier;
      rng.shuffle(order);
      order.resize(fitting_prefix(sub, g, hop, order, budget));
      std::sort(order.begin(), order.end());
      if (!seen.insert(order).second) continue;
      emit(hop, index++, encode_structure_members(sub, g, hop, order));
    }
  }
  return out;
}

PromptRecord to_record(const InstructionPrompt& prompt) {
  return PromptRecord{prompt.center, prompt.hop, prompt.prompt_index, prompt.full_text, prompt.target};
}

std::string to_jsonl_line(const PromptRecord& record) {
  nlohmann::ordered_json j;
  j["node"] = record.node;
  j["hop"] = record.hop;
  j["prompt_index"] = record.prompt_index;
  j["text"] = record.text;
  j["target"] = record.target;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

void export_records(std::span<const PromptRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw ContractError("export_jsonl: no prompts to export");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write prompt file " + path.string());
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for prompt file " + path.string());
}

void export_jsonl(std::span<const InstructionPrompt> prompts, const std::filesystem::path& path) {
  std::vector<PromptRecord> records;
  records.reserve(prompts.size());
  for (const auto& p : prompts) records.push_back(to_record(p));
  export_records(records, path);
}

std::vector<PromptRecord> parse_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prompt file " + path.string());
  std::vector<PromptRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PromptRecord r;
      r.node = j.at("node").get<std::uint64_t>();
      r.hop = j.at("hop").get<std::uint64_t>();
      r.prompt_index = j.at("prompt_index").get<std::uint64_t>();
      r.text = j.at("text").get<std::string>();
      r.target = j.at("target").get<std::string>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gkd::prompt
