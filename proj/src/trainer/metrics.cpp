// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "gkd/error.hpp"
#include "gkd/trainer.hpp"

namespace gkd::train {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

void select_best(RunMetrics& m) {
  bool have = false;
  for (const EpochRecord& r : m.epochs) {
    if (!have || r.val_acc > m.best_val_acc) {
      have = true;
      m.best_epoch = r.epoch;
      m.best_val_acc = r.val_acc;
      m.best_val_f1 = r.val_f1;
      m.test_acc_at_best = r.test_acc;
      m.test_f1_at_best = r.test_f1;
    }
  }
}

}  // namespace

std::optional<std::size_t> RunMetrics::epochs_to_threshold(double target) const {
  for (const EpochRecord& r : epochs) {
    if (r.val_acc >= target) return r.epoch;
  }
  return std::nullopt;
}

const EpochRecord& RunMetrics::final_epoch() const {
  if (epochs.empty()) throw ContractError("run has no recorded epochs");
  return epochs.back();
}

std::string metrics_header(std::size_t max_hop) {
  std::string h = "epoch,loss_total,loss_cls,loss_distill,val_acc,val_f1,test_acc,test_f1";
  for (std::size_t l = 0; l <= max_hop; ++l) h += ",gamma_" + std::to_string(l);
  return h + ",alpha,beta";
}

std::string metrics_row(const EpochRecord& r) {
  std::string row = std::to_string(r.epoch);
  for (double v : {r.loss_total, r.loss_cls, r.loss_distill, r.val_acc, r.val_f1, r.test_acc, r.test_f1}) {
    row += "," + fmt(v);
  }
  for (double g : r.gamma) row += "," + fmt(g);
  row += "," + fmt(r.alpha) + "," + fmt(r.beta);
  return row;
}

void write_metrics_csv(const RunMetrics& metrics, std::size_t max_hop, const std::filesystem::path& path) {
  MetricsWriter w(path, max_hop);
  for (const EpochRecord& r : metrics.epochs) w.append(r);
}

RunMetrics read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  const auto header = split_commas(line);
  if (header.size() < 11 || header.front() != "epoch" || header[header.size() - 2] != "alpha" ||
      header.back() != "beta") {
    throw FormatError(path.string() + ":1: unexpected header");
  }
  const std::size_t gammas = header.size() - 10;
  if (metrics_header(gammas - 1) != line) throw FormatError(path.string() + ":1: unexpected header");
  RunMetrics m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    EpochRecord r;
    r.epoch = static_cast<std::size_t>(parse_double(f[0], path, line_no));
    if (!m.epochs.empty() && r.epoch <= m.epochs.back().epoch) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": epochs must increase");
    }
    r.loss_total = parse_double(f[1], path, line_no);
    r.loss_cls = parse_double(f[2], path, line_no);
    r.loss_distill = parse_double(f[3], path, line_no);
    r.val_acc = parse_double(f[4], path, line_no);
    r.val_f1 = parse_double(f[5], path, line_no);
    r.test_acc = parse_double(f[6], path, line_no);
    r.test_f1 = parse_double(f[7], path, line_no);
    for (std::size_t j = 0; j < gammas; ++j) r.gamma.push_back(parse_double(f[8 + j], path, line_no));
    r.alpha = parse_double(f[8 + gammas], path, line_no);
    r.beta = parse_double(f[9 + gammas], path, line_no);
    m.epochs.push_back(std::move(r));
  }
  select_best(m);
  return m;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::size_t max_hop)
    : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot write metrics file " + path.string());
  out_ << metrics_header(max_hop) << '\n';
  out_.flush();
}

void MetricsWriter::append(const EpochRecord& record) {
  out_ << metrics_row(record) << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

}  // namespace gkd::train
