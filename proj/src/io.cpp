#include "marginforge/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace marginforge {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view s, std::size_t line) {
  // from_chars rejects a leading '+', which LIBSVM labels use
  if (s.size() > 1 && s.front() == '+' && s[1] != '-') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(line, "not a finite number: '" + std::string(s) + "'");
  }
  return v;
}

int to_label(std::string_view s, std::size_t line) {
  const double v = to_double(s, line);
  if (v == 1.0) return 1;
  if (v == -1.0 || v == 0.0) return -1;
  fail(line, "label must be -1, +1, 0 or 1, got '" + std::string(s) + "'");
}

// Splits into lines, keeping 1-based numbers, skipping blank lines.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty()) out.emplace_back(number, line);
    start = end + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

DataFormat parse_format(std::string_view name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "libsvm") return DataFormat::libsvm;
  throw ConfigError("unknown format '" + std::string(name) + "' (csv or libsvm)");
}

Dataset parse_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw InputError("empty csv");
  const auto header = split(lines.front().second, ',');
  if (header.size() < 2 || header.back() != "label") {
    fail(lines.front().first, "header must end with a column named 'label'");
  }
  const std::size_t p = header.size() - 1;
  std::vector<double> features;
  std::vector<int> labels;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto [number, line] = lines[r];
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      fail(number, "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < p; ++j) features.push_back(to_double(cells[j], number));
    labels.push_back(to_label(cells.back(), number));
  }
  if (labels.empty()) throw InputError("csv has no data rows");
  return Dataset(std::move(features), p, std::move(labels));
}

Dataset parse_libsvm(std::string_view text) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<int> labels;
  std::size_t p = 0;
  for (const auto& [number, raw] : lines_of(text)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    std::vector<std::string_view> tokens;
    for (auto tok : split(line, ' ')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
    labels.push_back(to_label(tokens.front(), number));
    auto& row = rows.emplace_back();
    std::size_t last = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos) fail(number, "expected idx:val, got '" + std::string(tokens[k]) + "'");
      const std::string_view idx_text = tokens[k].substr(0, colon);
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size() || idx == 0) {
        fail(number, "bad feature index '" + std::string(idx_text) + "'");
      }
      if (idx <= last) fail(number, "feature indices must be increasing");
      last = idx;
      row.emplace_back(idx - 1, to_double(tokens[k].substr(colon + 1), number));
      p = std::max(p, idx);
    }
  }
  if (labels.empty()) throw InputError("libsvm file has no data rows");
  if (p == 0) throw InputError("libsvm file has no features");
  std::vector<double> features(labels.size() * p, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) features[i * p + j] = v;
  }
  return Dataset(std::move(features), p, std::move(labels));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  const std::string text = read_file(path);
  try {
    return format == DataFormat::csv ? parse_csv(text) : parse_libsvm(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string to_csv(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < data.feature_count(); ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.label(i) << '\n';
  }
  return out.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string model_to_json(const TrainedModel& model) {
  json hyps = json::array();
  for (const auto& h : model.hypotheses) {
    hyps.push_back({{"feature", h.feature}, {"threshold", h.threshold}, {"polarity", h.polarity}});
  }
  json doc;
  doc["hypotheses"] = std::move(hyps);
  doc["weights"] = model.weights;
  doc["objectives"] = {{"soft_margin", model.soft_margin}, {"smoothed", model.smoothed}};
  doc["converged"] = model.converged;
  doc["num_features"] = model.feature_count;
  doc["config"] = {{"algo", model.algo},
                   {"eps", model.eps},
                   {"nu", model.nu},
                   {"max_iterations", model.max_iterations},
                   {"seed", model.seed}};
  return doc.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  TrainedModel model;
  try {
    const json doc = json::parse(text);
    for (const auto& h : doc.at("hypotheses")) {
      StumpHypothesis s;
      s.feature = h.at("feature").get<std::size_t>();
      s.threshold = h.at("threshold").get<double>();
      s.polarity = h.at("polarity").get<int>();
      if (s.polarity != 1 && s.polarity != -1) throw InputError("polarity must be +-1");
      model.hypotheses.push_back(s);
    }
    model.weights = doc.at("weights").get<Vector>();
    model.soft_margin = doc.at("objectives").at("soft_margin").get<double>();
    model.smoothed = doc.at("objectives").at("smoothed").get<double>();
    model.converged = doc.at("converged").get<bool>();
    model.feature_count = doc.at("num_features").get<std::size_t>();
    if (doc.contains("config")) {
      const json& c = doc["config"];
      model.algo = c.value("algo", std::string{});
      model.eps = c.value("eps", 0.0);
      model.nu = c.value("nu", 0.0);
      model.max_iterations = c.value("max_iterations", std::size_t{0});
      model.seed = c.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model json: ") + e.what());
  }
  if (model.weights.size() != model.hypotheses.size()) {
    throw InputError("model has " + std::to_string(model.hypotheses.size()) + " hypotheses but " +
                     std::to_string(model.weights.size()) + " weights");
  }
  for (const auto& h : model.hypotheses) {
    if (h.feature >= model.feature_count) throw InputError("hypothesis feature out of range");
  }
  return model;
}

TrainedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

std::string records_to_jsonl(const std::vector<IterationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json line = {{"t", r.t},
                 {"edge_new", r.edge_new},
                 {"min_edge", r.min_edge},
                 {"smoothed_obj", r.smoothed_obj},
                 {"soft_margin_obj", r.soft_margin_obj},
                 {"eps_t", r.eps_t},
                 {"rule", std::string(to_string(r.rule))},
                 {"lambda", r.lambda},
                 {"good_step", r.good_step},
                 {"wall_time_ns", r.wall_time_ns}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

Dataset two_gaussians(const SyntheticSpec& spec) {
  if (spec.examples == 0 || spec.features == 0) throw ConfigError("synthetic data needs m, p >= 1");
  if (!(spec.flip >= 0.0 && spec.flip <= 1.0)) throw ConfigError("flip must be in [0, 1]");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double offset = 0.5 * spec.separation / std::sqrt(static_cast<double>(spec.features));

  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(spec.examples * spec.features);
  for (std::size_t i = 0; i < spec.examples; ++i) {
    // alternate classes so both are always present
    const int y = i % 2 == 0 ? 1 : -1;
    for (std::size_t j = 0; j < spec.features; ++j) features.push_back(y * offset + noise(rng));
    labels.push_back(coin(rng) < spec.flip ? -y : y);
  }
  return Dataset(std::move(features), spec.features, std::move(labels));
}

}  // namespace marginforge
