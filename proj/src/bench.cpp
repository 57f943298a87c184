#include "ucm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ucm/rng.hpp"
#include "ucm/synthetic.hpp"
#include "ucm/testing.hpp"

namespace ucm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line,
                                      std::optional<char> delimiter) {
  std::vector<std::string> fields;
  if (!delimiter || *delimiter == ' ') {
    // Whitespace mode: any run of blanks separates fields.
    std::istringstream stream(line);
    std::string token;
    while (stream >> token) fields.push_back(token);
    return fields;
  }
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, *delimiter)) {
    fields.push_back(trim(token));
  }
  return fields;
}

std::optional<char> detect_delimiter(const std::string& first_data_line) {
  if (first_data_line.find('\t') != std::string::npos) return '\t';
  if (first_data_line.find(',') != std::string::npos) return ',';
  return std::nullopt;  // whitespace mode
}

double parse_number(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("cannot parse number '" + t + "'", line);
  }
  return value;
}

/// Equal-frequency binning of a numeric column: cut points at the k-quantile
/// positions, identical values always landing in the same bin. Labels are
/// "q<bin>".
std::vector<std::string> bin_column(const std::vector<std::string>& values,
                                    const std::vector<std::size_t>& lines,
                                    int bins) {
  std::vector<double> numeric(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    numeric[i] = parse_number(values[i], lines[i]);
  }
  std::vector<double> sorted = numeric;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int j = 1; j < bins; ++j) {
    cuts.push_back(sorted[(static_cast<std::size_t>(j) * sorted.size()) / bins]);
  }
  std::vector<std::string> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t bin = static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), numeric[i]) - cuts.begin());
    labels[i] = "q" + std::to_string(bin);
  }
  return labels;
}

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

/// Runs fn(0..count-1) across hardware threads. Each index owns its output
/// slot, so results do not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string verdict_cell(const std::optional<Verdict>& verdict) {
  return verdict ? to_string(*verdict) : "-";
}

}  // namespace

std::string to_string(GroundTruth truth) {
  switch (truth) {
    case GroundTruth::x_to_y:
      return "x_to_y";
    case GroundTruth::y_to_x:
      return "y_to_x";
    case GroundTruth::unknown:
      return "unknown";
  }
  throw Error("unknown ground truth value");
}

GroundTruth ground_truth_from_string(const std::string& name) {
  if (name == "x_to_y" || name == "x->y") return GroundTruth::x_to_y;
  if (name == "y_to_x" || name == "y->x") return GroundTruth::y_to_x;
  if (name == "unknown" || name.empty()) return GroundTruth::unknown;
  throw Error("unknown ground truth label: " + name);
}

PairDataset load_pair(const std::string& path, const LoadOptions& options) {
  std::ifstream file(path);
  if (!file) {
    throw Error("cannot open " + path);
  }
  std::vector<std::string> xs;
  std::vector<std::string> ys;
  std::vector<std::size_t> lines;  // source line of each kept record
  std::optional<char> delimiter = options.delimiter;
  bool delimiter_fixed = options.delimiter.has_value();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!delimiter_fixed) {
      delimiter = detect_delimiter(line);
      delimiter_fixed = true;
    }
    const std::vector<std::string> fields = split_fields(line, delimiter);
    if (fields.size() < 2) {
      throw FewerThanTwoColumnsError(line_no);
    }
    const std::string& x = fields[0];
    const std::string& y = fields[1];
    if (x.empty() || y.empty() || x == options.missing_sentinel ||
        y == options.missing_sentinel) {
      continue;  // record with a missing value
    }
    xs.push_back(x);
    ys.push_back(y);
    lines.push_back(line_no);
  }
  if (xs.empty()) {
    throw EmptyAfterFilteringError("no usable records in " + path);
  }
  if (options.bin_x > 0) xs = bin_column(xs, lines, options.bin_x);
  if (options.bin_y > 0) ys = bin_column(ys, lines, options.bin_y);

  std::unordered_map<std::string, std::size_t> x_index;
  std::unordered_map<std::string, std::size_t> y_index;
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  std::vector<std::vector<double>> counts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto [xit, x_new] = x_index.try_emplace(xs[i], x_labels.size());
    if (x_new) {
      x_labels.push_back(xs[i]);
      counts.emplace_back(y_labels.size(), 0.0);
    }
    auto [yit, y_new] = y_index.try_emplace(ys[i], y_labels.size());
    if (y_new) {
      y_labels.push_back(ys[i]);
      for (auto& row : counts) row.push_back(0.0);
    }
    counts[xit->second][yit->second] += 1.0;
  }

  PrunedTable pruned = prune_zero_support(ContingencyTable(std::move(counts)));
  std::vector<std::string> kept_x;
  std::vector<std::string> kept_y;
  for (std::size_t i : pruned.kept_rows) kept_x.push_back(x_labels[i]);
  for (std::size_t j : pruned.kept_cols) kept_y.push_back(y_labels[j]);

  return PairDataset{std::filesystem::path(path).stem().string(),
                     std::move(kept_x),
                     std::move(kept_y),
                     std::move(pruned.table),
                     GroundTruth::unknown,
                     false,
                     false};
}

void write_pair(const PairDataset& pair, const std::string& path) {
  const ContingencyTable& table = pair.table;
  std::vector<std::vector<long long>> remaining(table.rows());
  for (std::size_t x = 0; x < table.rows(); ++x) {
    remaining[x].resize(table.cols());
    for (std::size_t y = 0; y < table.cols(); ++y) {
      const double c = table.at(x, y);
      const double r = std::llround(c);
      if (std::abs(c - r) > 1e-9) {
        throw Error("write_pair needs integer counts");
      }
      remaining[x][y] = static_cast<long long>(r);
    }
  }
  std::ofstream file(path);
  if (!file) {
    throw Error("cannot write " + path);
  }
  // Emission must introduce labels in dictionary order so that reloading
  // reproduces the same table. Grow an introduced prefix box (a, b); flush
  // everything inside it, then introduce the next row or column label with a
  // single record.
  std::size_t a = 0;  // x labels introduced: indices < a
  std::size_t b = 0;  // y labels introduced: indices < b
  auto emit = [&](std::size_t x, std::size_t y, long long times) {
    for (long long i = 0; i < times; ++i) {
      file << pair.x_labels[x] << '\t' << pair.y_labels[y] << '\n';
    }
    remaining[x][y] -= times;
  };
  long long left = 0;
  for (const auto& row : remaining) {
    for (long long c : row) left += c;
  }
  while (left > 0) {
    bool progressed = false;
    for (std::size_t x = 0; x < a; ++x) {
      for (std::size_t y = 0; y < b; ++y) {
        if (remaining[x][y] > 0) {
          left -= remaining[x][y];
          emit(x, y, remaining[x][y]);
          progressed = true;
        }
      }
    }
    if (left == 0) break;
    // Introduce the next label along either (or both) axes.
    std::optional<std::pair<std::size_t, std::size_t>> intro;
    if (a < table.rows()) {
      for (std::size_t y = 0; y < b && !intro; ++y) {
        if (remaining[a][y] > 0) intro = {a, y};
      }
    }
    if (!intro && b < table.cols()) {
      for (std::size_t x = 0; x < a && !intro; ++x) {
        if (remaining[x][b] > 0) intro = {x, b};
      }
    }
    if (!intro && a < table.rows() && b < table.cols() &&
        remaining[a][b] > 0) {
      intro = {a, b};
    }
    if (intro) {
      a = std::max(a, intro->first + 1);
      b = std::max(b, intro->second + 1);
      emit(intro->first, intro->second, 1);
      --left;
      progressed = true;
    }
    if (!progressed) {
      throw Error("table counts cannot reproduce the label order");
    }
  }
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json doc;
  doc["config"] = config;
  if (!synthetic_rows.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : synthetic_rows) {
      rows.push_back({{"nx", r.nx},
                      {"ny", r.ny},
                      {"n", r.n},
                      {"trials", r.trials},
                      {"accuracy", r.accuracy}});
    }
    doc["synthetic"] = rows;
  }
  if (!pair_rows.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : pair_rows) {
      nlohmann::json row{{"name", r.name},
                         {"status", r.status},
                         {"truth", to_string(r.truth)},
                         {"p_xy", r.p_xy},
                         {"p_yx", r.p_yx},
                         {"g2_xy", r.g2_xy},
                         {"g2_yx", r.g2_yx},
                         {"p_independence", r.p_independence},
                         {"counted", r.counted},
                         {"correct", r.correct}};
      row["verdict"] =
          r.verdict ? nlohmann::json(to_string(*r.verdict)) : nlohmann::json();
      rows.push_back(std::move(row));
    }
    doc["pairs"] = rows;
  }
  doc["accuracy"] = accuracy ? nlohmann::json(*accuracy) : nlohmann::json();
  return doc;
}

std::string BenchmarkReport::to_tsv() const {
  std::ostringstream out;
  if (!synthetic_rows.empty()) {
    out << "nx\tny\tn\ttrials\taccuracy\n";
    for (const auto& r : synthetic_rows) {
      out << r.nx << '\t' << r.ny << '\t' << r.n << '\t' << r.trials << '\t'
          << fmt_double(r.accuracy) << '\n';
    }
  }
  if (!pair_rows.empty()) {
    out << "name\tstatus\ttruth\tverdict\tp_xy\tp_yx\tg2_xy\tg2_yx\t"
           "p_independence\tcounted\tcorrect\n";
    for (const auto& r : pair_rows) {
      out << r.name << '\t' << r.status << '\t' << to_string(r.truth) << '\t'
          << verdict_cell(r.verdict) << '\t' << fmt_double(r.p_xy) << '\t'
          << fmt_double(r.p_yx) << '\t' << fmt_double(r.g2_xy) << '\t'
          << fmt_double(r.g2_yx) << '\t' << fmt_double(r.p_independence)
          << '\t' << (r.counted ? 1 : 0) << '\t' << (r.correct ? 1 : 0)
          << '\n';
    }
  }
  return out.str();
}

std::string BenchmarkReport::to_text() const {
  std::ostringstream out;
  if (!synthetic_rows.empty()) {
    out << "  support      n  trials  accuracy\n";
    char buf[96];
    for (const auto& r : synthetic_rows) {
      std::snprintf(buf, sizeof(buf), "  %zux%zu %10zu  %6d  %8.4f\n", r.nx,
                    r.ny, r.n, r.trials, r.accuracy);
      out << buf;
    }
  }
  if (!pair_rows.empty()) {
    out << "  pair                         verdict                   p_xy"
           "      p_yx   status          time\n";
    char buf[192];
    for (const auto& r : pair_rows) {
      std::snprintf(buf, sizeof(buf),
                    "  %-28s %-22s %9.4g %9.4g   %-12s %5.0f ms\n",
                    r.name.c_str(), verdict_cell(r.verdict).c_str(), r.p_xy,
                    r.p_yx, r.status.c_str(), r.runtime_seconds * 1e3);
      out << buf;
    }
  }
  if (accuracy) {
    std::size_t counted = 0;
    std::size_t correct = 0;
    for (const auto& r : pair_rows) {
      counted += r.counted ? 1 : 0;
      correct += (r.counted && r.correct) ? 1 : 0;
    }
    char buf[96];
    if (counted > 0) {
      std::snprintf(buf, sizeof(buf), "  accuracy: %.4f (%zu/%zu counted)\n",
                    *accuracy, correct, counted);
    } else {
      std::snprintf(buf, sizeof(buf), "  accuracy: %.4f\n", *accuracy);
    }
    out << buf;
  } else if (!pair_rows.empty()) {
    out << "  accuracy: n/a (no scored pairs)\n";
  }
  return out.str();
}

BenchmarkReport run_synthetic_experiment(const std::vector<GridCell>& grid,
                                         const std::vector<std::size_t>& ns,
                                         int trials, PermutationKind kind,
                                         std::uint64_t seed) {
  if (trials < 1) {
    throw Error("need at least one trial");
  }
  BenchmarkReport report;
  nlohmann::json grid_json = nlohmann::json::array();
  for (const auto& cell : grid) grid_json.push_back({cell.nx, cell.ny});
  report.config = {{"command", "simulate"}, {"grid", grid_json},
                   {"ns", ns},              {"trials", trials},
                   {"kind", to_string(kind)}, {"seed", seed},
                   {"rng", "splitmix64 (Steele-Lea-Flood 2014 constants, 53-bit doubles)"}};
  const bool cyclic = kind == PermutationKind::cyclic;
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      std::vector<char> correct(static_cast<std::size_t>(trials), 0);
      parallel_for(correct.size(), [&](std::size_t ti) {
        SplitMix64 stream = SplitMix64::derive(seed, ci, ni, ti);
        const std::uint64_t spec_seed = stream.next();
        const std::uint64_t sample_seed = stream.next();
        const std::uint64_t estimation_seed = stream.next();
        const UcmSpec spec =
            random_ucm(grid[ci].nx, grid[ci].ny, kind, spec_seed);
        const ContingencyTable table = sample(spec, ns[ni], sample_seed);
        DecisionConfig config;
        config.forced = true;
        config.x_cyclic = cyclic;
        config.y_cyclic = cyclic;
        config.estimation.rng_seed = estimation_seed;
        try {
          correct[ti] = decide(table, config).verdict == Verdict::x_to_y;
        } catch (const DegenerateTableError&) {
          correct[ti] = 0;  // a category vanished at tiny n; count as wrong
        }
      });
      const double hits =
          static_cast<double>(std::count(correct.begin(), correct.end(), 1));
      report.synthetic_rows.push_back(SyntheticRow{
          grid[ci].nx, grid[ci].ny, ns[ni], trials, hits / trials});
    }
  }
  return report;
}

BenchmarkReport run_corpus(const std::vector<CorpusEntry>& entries,
                           const DecisionConfig& config,
                           double independence_alpha) {
  BenchmarkReport report;
  report.config = {{"command", "benchmark"},
                   {"alpha", config.alpha},
                   {"forced", config.forced},
                   {"independence_alpha", independence_alpha},
                   {"smoothing", config.estimation.smoothing},
                   {"cuc_restarts", config.estimation.cuc_restarts},
                   {"cuc_max_iters", config.estimation.cuc_max_iters},
                   {"seed", config.estimation.rng_seed},
                   {"rng", "splitmix64 (Steele-Lea-Flood 2014 constants, 53-bit doubles)"}};
  report.pair_rows.resize(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const CorpusEntry& entry = entries[i];
    PairRow row;
    row.name = entry.name.empty()
                   ? std::filesystem::path(entry.path).stem().string()
                   : entry.name;
    row.truth = entry.truth;
    const auto start = std::chrono::steady_clock::now();
    try {
      PairDataset pair = load_pair(entry.path, entry.load);
      pair.ground_truth = entry.truth;
      pair.x_cyclic = entry.x_cyclic;
      pair.y_cyclic = entry.y_cyclic;
      const TestResult indep = independence_test(pair.table);
      row.p_independence = indep.p_value;
      if (indep.p_value >= independence_alpha) {
        row.status = "independent";
      } else {
        DecisionConfig dc = config;
        dc.x_cyclic = entry.x_cyclic;
        dc.y_cyclic = entry.y_cyclic;
        const Decision decision = decide(pair.table, dc);
        row.status = "ok";
        row.verdict = decision.verdict;
        row.p_xy = decision.p_xy;
        row.p_yx = decision.p_yx;
        row.g2_xy = decision.g2_xy;
        row.g2_yx = decision.g2_yx;
        if (entry.truth != GroundTruth::unknown) {
          row.counted = true;
          row.correct = (decision.verdict == Verdict::x_to_y &&
                         entry.truth == GroundTruth::x_to_y) ||
                        (decision.verdict == Verdict::y_to_x &&
                         entry.truth == GroundTruth::y_to_x);
        }
      }
    } catch (const Error& e) {
      row.status = std::string("skipped: ") + e.what();
    }
    row.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report.pair_rows[i] = std::move(row);
  });
  std::size_t counted = 0;
  std::size_t correct = 0;
  for (const auto& row : report.pair_rows) {
    counted += row.counted ? 1 : 0;
    correct += (row.counted && row.correct) ? 1 : 0;
  }
  if (counted > 0) {
    report.accuracy = static_cast<double>(correct) / counted;
  }
  return report;
}

std::optional<char> delimiter_from_name(const std::string& name) {
  if (name.empty() || name == "auto") return std::nullopt;
  if (name == "tab" || name == "\t") return '\t';
  if (name == "comma" || name == ",") return ',';
  if (name == "space" || name == "whitespace" || name == "ws" || name == " ") {
    return ' ';
  }
  if (name.size() == 1) return name[0];
  throw Error("unknown delimiter: " + name);
}

std::vector<CorpusEntry> load_manifest(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw Error("cannot open manifest " + path);
  }
  nlohmann::json doc;
  try {
    file >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("manifest " + path + ": " + e.what());
  }
  const nlohmann::json& list = doc.is_array() ? doc : doc.at("pairs");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<CorpusEntry> entries;
  for (const auto& item : list) {
    CorpusEntry entry;
    std::filesystem::path p(item.at("path").get<std::string>());
    entry.path = p.is_absolute() ? p.string() : (base / p).string();
    entry.name = item.value("name", std::string());
    entry.truth = ground_truth_from_string(item.value("truth", std::string()));
    entry.x_cyclic = item.value("x_cyclic", false);
    entry.y_cyclic = item.value("y_cyclic", false);
    entry.load.delimiter =
        delimiter_from_name(item.value("delimiter", std::string()));
    entry.load.missing_sentinel = item.value("missing", std::string("?"));
    entry.load.bin_x = item.value("bin_x", 0);
    entry.load.bin_y = item.value("bin_y", 0);
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<CorpusEntry> pairmeta_entries(const std::string& pairmeta_path,
                                          const std::string& data_dir) {
  std::ifstream file(pairmeta_path);
  if (!file) {
    throw Error("cannot open " + pairmeta_path);
  }
  std::vector<CorpusEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const std::vector<std::string> tokens = split_fields(line, std::nullopt);
    if (tokens.empty()) continue;
    if (tokens.size() < 5) {
      throw ParseError("pairmeta record needs at least five fields", line_no);
    }
    const double cs = parse_number(tokens[1], line_no);
    const double ce = parse_number(tokens[2], line_no);
    const double es = parse_number(tokens[3], line_no);
    const double ee = parse_number(tokens[4], line_no);
    if (cs != ce || es != ee) continue;  // multi-column pair, not loadable here
    GroundTruth truth;
    if (cs == 1 && es == 2) {
      truth = GroundTruth::x_to_y;
    } else if (cs == 2 && es == 1) {
      truth = GroundTruth::y_to_x;
    } else {
      continue;
    }
    CorpusEntry entry;
    entry.name = "pair" + tokens[0];
    entry.path =
        (std::filesystem::path(data_dir) / ("pair" + tokens[0] + ".txt"))
            .string();
    entry.truth = truth;
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace ucm
