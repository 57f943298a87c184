#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ucm/core.hpp"
#include "ucm/inference.hpp"

namespace ucm {

/// Malformed input file; line is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class FewerThanTwoColumnsError : public ParseError {
 public:
  explicit FewerThanTwoColumnsError(std::size_t line)
      : ParseError("record has fewer than two columns", line) {}
};

class EmptyAfterFilteringError : public Error {
 public:
  using Error::Error;
};

enum class GroundTruth { x_to_y, y_to_x, unknown };

std::string to_string(GroundTruth truth);
GroundTruth ground_truth_from_string(const std::string& name);

struct LoadOptions {
  std::optional<char> delimiter;   // auto-detect tab/comma/whitespace when unset
  std::string missing_sentinel = "?";
  int bin_x = 0;  // equal-frequency bins for a numeric X column; 0 = off
  int bin_y = 0;
};

/// Maps "tab", "comma", "space"/"ws", "auto" or a single character to a
/// LoadOptions delimiter (' ' selects whitespace-run splitting).
std::optional<char> delimiter_from_name(const std::string& name);

/// One cause-effect pair: labelled contingency table plus evaluation metadata.
struct PairDataset {
  std::string name;
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  ContingencyTable table;
  GroundTruth ground_truth = GroundTruth::unknown;
  bool x_cyclic = false;
  bool y_cyclic = false;
};

/// Reads a two-column text file of (x, y) records: tallies co-occurrences,
/// builds label dictionaries in first-appearance order, drops records with a
/// missing field (empty or equal to the sentinel), and prunes categories that
/// end up with zero count. Extra columns beyond the first two are ignored.
PairDataset load_pair(const std::string& path, const LoadOptions& options = {});

/// Inverse of load_pair for integer-count tables: one "x<TAB>y" record per
/// observation. Reloading the written file reproduces the table.
void write_pair(const PairDataset& pair, const std::string& path);

struct SyntheticRow {
  std::size_t nx;
  std::size_t ny;
  std::size_t n;
  int trials;
  double accuracy;
};

struct PairRow {
  std::string name;
  std::string status;  // "ok", "independent", or "skipped: <reason>"
  GroundTruth truth = GroundTruth::unknown;
  std::optional<Verdict> verdict;
  double p_xy = 0.0;
  double p_yx = 0.0;
  double g2_xy = 0.0;
  double g2_yx = 0.0;
  double p_independence = 0.0;
  bool counted = false;  // participates in the accuracy denominator
  bool correct = false;
  double runtime_seconds = 0.0;
};

/// Experiment results. The machine-readable forms (JSON, TSV) are
/// byte-identical across runs for identical inputs, config and seed; wall
/// times therefore appear only in the human-readable text form.
struct BenchmarkReport {
  nlohmann::json config;
  std::vector<SyntheticRow> synthetic_rows;
  std::vector<PairRow> pair_rows;
  std::optional<double> accuracy;

  nlohmann::json to_json() const;
  std::string to_tsv() const;
  std::string to_text() const;
};

struct GridCell {
  std::size_t nx;
  std::size_t ny;
};

/// Direction-identification accuracy on synthetic data: for every grid cell
/// and sample size, draws `trials` random models with ground truth X->Y,
/// samples n points each, and applies the forced-choice decision. Trials run
/// concurrently; per-trial seeds derive from (seed, cell, n, trial), so the
/// report does not depend on scheduling.
BenchmarkReport run_synthetic_experiment(const std::vector<GridCell>& grid,
                                         const std::vector<std::size_t>& ns,
                                         int trials, PermutationKind kind,
                                         std::uint64_t seed);

struct CorpusEntry {
  std::string path;
  std::string name;  // defaults to the file stem
  GroundTruth truth = GroundTruth::unknown;
  bool x_cyclic = false;
  bool y_cyclic = false;
  LoadOptions load{};
};

/// Evaluates a corpus of pair files: each pair first passes a G2 independence
/// pre-filter at `independence_alpha` (pairs not rejecting independence are
/// marked and excluded from the accuracy denominator), then receives a
/// decision. Undecided outcomes count as wrong; pairs with unknown ground
/// truth are reported but not scored. Load failures become skipped rows.
BenchmarkReport run_corpus(const std::vector<CorpusEntry>& entries,
                           const DecisionConfig& config,
                           double independence_alpha = 0.05);

/// Manifest document: an array (or {"pairs": [...]}) of entries
/// {path, truth, x_cyclic, y_cyclic, name?, delimiter?, missing?, bin_x?,
/// bin_y?}. Relative paths resolve against the manifest's directory.
std::vector<CorpusEntry> load_manifest(const std::string& path);

/// Adapter for pairmeta-style ground-truth listings: lines of
/// "<id> <cause first> <cause last> <effect first> <effect last> [weight]".
/// Only single-column cause/effect pairs are usable here; others are skipped.
/// Data files are expected at <data_dir>/pair<id>.txt.
std::vector<CorpusEntry> pairmeta_entries(const std::string& pairmeta_path,
                                          const std::string& data_dir);

}  // namespace ucm
