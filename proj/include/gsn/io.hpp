#pragma once

#include <string>
#include <vector>

#include "gsn/grid.hpp"
#include "gsn/trial.hpp"

namespace gsn {

// ---- ATNM v1 ---------------------------------------------------------------
// Attention-stack container: magic "ATNM", little-endian u32 version = 1,
// u32 H, W, N, then H*W*N little-endian IEEE-754 doubles in row-major
// (i, then j, then n) order. Round-trips are bit-exact.

std::vector<unsigned char> encode_atnm(const AttentionStack& stack);
AttentionStack decode_atnm(const std::vector<unsigned char>& bytes);
void write_atnm(const std::string& path, const AttentionStack& stack);
AttentionStack read_atnm(const std::string& path);

// ---- CSV / JSON ------------------------------------------------------------

// Header exactly: step,intensity,variance,iou,com_distance,sym_kl,cc
std::string metrics_csv(const std::vector<MetricRecord>& rows);
std::vector<MetricRecord> parse_metrics_csv(const std::string& text);

// {"seed":..., "success":..., "formed":[...], "steps":...}
std::string summary_json(const TrialRecord& rec);

// Writes metrics.csv, final.atnm and summary.json under
// <out_dir>/trial_<seed>/.
void write_trial_outputs(const std::string& out_dir, const TrialRecord& rec);

// Rebuilds a TrialRecord from a trial_<seed> directory.
TrialRecord read_trial_dir(const std::string& trial_dir);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);

}  // namespace gsn
