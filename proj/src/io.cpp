#include "roman/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "roman/errors.hpp"
#include "roman/version.hpp"

namespace roman::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return s.substr(s.size());
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Splits `text` into lines, keeping 1-based line numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    ++line_no;
    fn(line_no, line, pos);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
}

bool parse_bool(std::string_view value, std::size_t line, std::size_t column) {
  const auto v = lower(value);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(ErrorKind::parse_error, line, column,
                   "expected true or false, got '" + std::string(value) + "'");
}

// Parses one value; `?` and NaN spellings are missing values.
double parse_value(std::string_view token, std::size_t line, std::size_t column, std::size_t& nan_count) {
  token = trim(token);
  if (token == "?" || lower(token) == "nan") {
    ++nan_count;
    return kNaN;
  }
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(ErrorKind::parse_error, line, column,
                     "invalid numeric value '" + std::string(token) + "'");
  }
  if (std::isnan(value)) ++nan_count;
  return value;
}

bool numeric_label(const std::string& s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Numeric labels sort by value, everything else lexicographically.
std::vector<std::string> sorted_classes(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const bool all_numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) {
    double v;
    return numeric_label(s, v);
  });
  if (all_numeric) {
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
      double x, y;
      numeric_label(a, x);
      numeric_label(b, y);
      return x < y;
    });
  }
  return names;
}

int label_index(const std::vector<std::string>& classes, std::string_view label, std::size_t line,
                std::size_t column) {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) {
    throw ParseError(ErrorKind::unknown_class_label, line, column,
                     "class label '" + std::string(label) + "' is not declared");
  }
  return static_cast<int>(it - classes.begin());
}

void remap_classes(TimeSeriesDataset& ds, const std::vector<std::string>& classes) {
  for (auto& label : ds.labels) {
    const auto& name = ds.class_names[static_cast<std::size_t>(label)];
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) {
      throw Error(ErrorKind::unknown_class_label,
                  "dataset '" + ds.id + "': class '" + name + "' is not in the reference vocabulary");
    }
    label = static_cast<int>(it - classes.begin());
  }
  ds.class_names = classes;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "?";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

// -- .ts ---------------------------------------------------------------------

TimeSeriesDataset parse_ts(std::string_view text, std::string id) {
  TimeSeriesDataset ds;
  ds.id = std::move(id);
  bool in_data = false;
  bool has_labels = false;
  bool labels_declared = false;
  std::size_t declared_length = 0;
  std::size_t dims = 0;
  std::size_t length = 0;
  std::size_t nan_count = 0;

  for_each_line(text, [&](std::size_t line_no, std::string_view raw, std::size_t) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    if (!in_data) {
      if (line.front() != '@') {
        throw ParseError(ErrorKind::parse_error, line_no, 1, "expected a header line or @data");
      }
      const auto space = line.find_first_of(" \t");
      const auto key = lower(line.substr(1, space == std::string_view::npos ? line.size() - 1 : space - 1));
      const auto rest = space == std::string_view::npos ? line.substr(line.size()) : trim(line.substr(space));
      const std::size_t value_col = static_cast<std::size_t>(rest.data() - raw.data()) + 1;
      if (key == "data") {
        if (!labels_declared) {
          throw ParseError(ErrorKind::parse_error, line_no, 1, "@classLabel must precede @data");
        }
        in_data = true;
      } else if (key == "problemname") {
        if (ds.id.empty()) ds.id = std::string(rest);
      } else if (key == "timestamps") {
        if (parse_bool(rest, line_no, value_col)) {
          throw ParseError(ErrorKind::parse_error, line_no, value_col, "time-stamped series are not supported");
        }
      } else if (key == "equallength") {
        if (!parse_bool(rest, line_no, value_col)) {
          throw ParseError(ErrorKind::unequal_length, line_no, value_col,
                           "unequal-length datasets are not supported");
        }
      } else if (key == "missing" || key == "univariate") {
        (void)parse_bool(rest, line_no, value_col);
      } else if (key == "serieslength" || key == "dimensions") {
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
        if (ec != std::errc{} || ptr != rest.data() + rest.size() || n == 0) {
          throw ParseError(ErrorKind::parse_error, line_no, value_col, "expected a positive integer");
        }
        if (key == "serieslength") declared_length = n;
      } else if (key == "classlabel") {
        std::istringstream tokens{std::string(rest)};
        std::string flag;
        tokens >> flag;
        has_labels = parse_bool(flag, line_no, value_col);
        std::string name;
        while (tokens >> name) ds.class_names.push_back(name);
        if (has_labels && ds.class_names.empty()) {
          throw ParseError(ErrorKind::parse_error, line_no, value_col, "@classLabel true needs class names");
        }
        labels_declared = true;
      } else if (key == "targetlabel") {
        throw ParseError(ErrorKind::parse_error, line_no, 1, "regression targets are not supported");
      } else {
        throw ParseError(ErrorKind::parse_error, line_no, 2, "unknown header key '@" + key + "'");
      }
      return;
    }

    // Data line: dim_1 : dim_2 : ... [: label]
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto colon = line.find(':', start);
      fields.push_back(line.substr(start, colon == std::string_view::npos ? line.size() - start : colon - start));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    const auto column_of = [&](std::string_view piece) {
      return static_cast<std::size_t>(piece.data() - raw.data()) + 1;
    };
    int label = 0;
    if (has_labels) {
      if (fields.size() < 2) {
        throw ParseError(ErrorKind::parse_error, line_no, 0, "missing class label");
      }
      const auto label_text = trim(fields.back());
      label = label_index(ds.class_names, label_text, line_no, column_of(fields.back()));
      fields.pop_back();
    }
    if (dims == 0) dims = fields.size();
    if (fields.size() != dims) {
      throw ParseError(ErrorKind::parse_error, line_no, 0,
                       "expected " + std::to_string(dims) + " dimensions, found " +
                           std::to_string(fields.size()));
    }
    std::vector<double> values;
    std::size_t row_length = 0;
    for (std::size_t d = 0; d < fields.size(); ++d) {
      std::size_t count = 0;
      std::size_t pos = 0;
      const auto field = fields[d];
      while (true) {
        const auto comma = field.find(',', pos);
        const auto token = field.substr(pos, comma == std::string_view::npos ? field.size() - pos : comma - pos);
        values.push_back(parse_value(token, line_no, column_of(token), nan_count));
        ++count;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      if (d == 0) row_length = count;
      if (count != row_length) {
        throw ParseError(ErrorKind::unequal_length, line_no, column_of(field),
                         "dimension " + std::to_string(d + 1) + " has " + std::to_string(count) +
                             " values, expected " + std::to_string(row_length));
      }
    }
    if (length == 0) length = row_length;
    if (row_length != length || (declared_length != 0 && row_length != declared_length)) {
      throw ParseError(ErrorKind::unequal_length, line_no, 0,
                       "series has " + std::to_string(row_length) + " values, expected " +
                           std::to_string(declared_length ? declared_length : length));
    }
    ds.series.emplace_back(dims, row_length, std::move(values));
    if (has_labels) ds.labels.push_back(label);
  });

  if (!in_data) throw ParseError(ErrorKind::parse_error, 0, 0, "no @data section");
  ds.provenance.nan_count = nan_count;
  ds.validate();
  return ds;
}

TimeSeriesDataset parse_tsv(std::string_view text, std::string id) {
  TimeSeriesDataset ds;
  ds.id = std::move(id);
  std::vector<std::string> raw_labels;
  std::size_t nan_count = 0;
  std::size_t length = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw, std::size_t) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
    std::vector<double> values;
    std::size_t pos = 0;
    bool first = true;
    while (true) {
      const auto cut = line.find(sep, pos);
      const auto token = line.substr(pos, cut == std::string_view::npos ? line.size() - pos : cut - pos);
      const std::size_t column = static_cast<std::size_t>(token.data() - raw.data()) + 1;
      if (first) {
        const auto label = trim(token);
        if (label.empty()) throw ParseError(ErrorKind::parse_error, line_no, column, "empty class label");
        raw_labels.emplace_back(label);
        first = false;
      } else {
        values.push_back(parse_value(token, line_no, column, nan_count));
      }
      if (cut == std::string_view::npos) break;
      pos = cut + 1;
    }
    if (values.empty()) throw ParseError(ErrorKind::parse_error, line_no, 0, "row has no values");
    if (length == 0) length = values.size();
    if (values.size() != length) {
      throw ParseError(ErrorKind::unequal_length, line_no, 0,
                       "row has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(length));
    }
    ds.series.push_back(Series::univariate(std::move(values)));
  });
  ds.class_names = sorted_classes(raw_labels);
  for (const auto& label : raw_labels) {
    ds.labels.push_back(static_cast<int>(
        std::find(ds.class_names.begin(), ds.class_names.end(), label) - ds.class_names.begin()));
  }
  ds.provenance.nan_count = nan_count;
  ds.validate();
  return ds;
}

TimeSeriesDataset load_ts(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto ext = lower(path.extension().string());
  if (ext == ".ts") {
    auto ds = parse_ts(text);
    if (ds.id.empty()) ds.id = path.stem().string();
    return ds;
  }
  return parse_tsv(text, path.stem().string());
}

TimeSeriesDataset load_ts(const std::filesystem::path& path, const std::vector<std::string>& class_names) {
  auto ds = load_ts(path);
  if (!ds.labels.empty()) remap_classes(ds, class_names);
  return ds;
}

void write_ts(std::ostream& out, const TimeSeriesDataset& ds) {
  bool missing = false;
  for (const auto& s : ds.series) missing = missing || !s.all_finite();
  out << "# written by roman " << kVersion << "\n";
  out << "@problemName " << (ds.id.empty() ? "dataset" : ds.id) << "\n";
  out << "@timeStamps false\n";
  out << "@missing " << (missing ? "true" : "false") << "\n";
  out << "@univariate " << (ds.channels() <= 1 ? "true" : "false") << "\n";
  if (ds.channels() > 1) out << "@dimensions " << ds.channels() << "\n";
  out << "@equalLength true\n";
  out << "@seriesLength " << ds.length() << "\n";
  if (ds.labels.empty()) {
    out << "@classLabel false\n";
  } else {
    out << "@classLabel true";
    for (const auto& name : ds.class_names) out << ' ' << name;
    out << "\n";
  }
  out << "@data\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.series[i];
    for (std::size_t c = 0; c < s.channels(); ++c) {
      if (c) out << ':';
      const auto row = s.channel(c);
      for (std::size_t t = 0; t < row.size(); ++t) {
        if (t) out << ',';
        out << format_double(row[t]);
      }
    }
    if (!ds.labels.empty()) out << ':' << ds.class_names[static_cast<std::size_t>(ds.labels[i])];
    out << "\n";
  }
}

void save_ts(const std::filesystem::path& path, const TimeSeriesDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  write_ts(out, ds);
}

// -- preprocessing -------------------------------------------------------------

void znormalize(std::span<double> row) noexcept {
  if (row.empty()) return;
  const bool constant = std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; });
  if (constant) {
    std::fill(row.begin(), row.end(), 0.0);
    return;
  }
  const double n = static_cast<double>(row.size());
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : row) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    std::fill(row.begin(), row.end(), 0.0);
    return;
  }
  for (double& v : row) v = (v - mean) / sd;
}

void preprocess_series(Series& series) {
  for (std::size_t c = 0; c < series.channels(); ++c) {
    auto row = series.channel(c);
    double sum = 0.0;
    std::size_t finite = 0;
    for (double v : row) {
      if (std::isfinite(v)) {
        sum += v;
        ++finite;
      }
    }
    const double fill = finite ? sum / static_cast<double>(finite) : 0.0;
    for (double& v : row) {
      if (!std::isfinite(v)) v = fill;
    }
    znormalize(row);
  }
}

TimeSeriesDataset preprocess(TimeSeriesDataset ds) {
  for (auto& s : ds.series) preprocess_series(s);
  ds.provenance.normalized = true;
  ds.provenance.nan_policy = std::string(kNanPolicy);
  return ds;
}

// -- tensors -------------------------------------------------------------------

std::uint64_t payload_checksum(std::span<const double> data) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (double v : data) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      hash ^= bits & 0xFFu;
      hash *= 0x100000001b3ull;
      bits >>= 8;
    }
  }
  return hash;
}

namespace {

std::filesystem::path tensor_stem(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".bin" || ext == ".json") {
    auto stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::size_t count = 1;
  for (auto d : tensor.dims) count *= d;
  if (count != tensor.data.size()) {
    throw Error(ErrorKind::shape_mismatch, "tensor dims do not match the payload size");
  }
  const auto stem = tensor_stem(path);
  {
    std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) throw Error(ErrorKind::io_error, "cannot write " + with_suffix(stem, ".bin").string());
    std::vector<unsigned char> bytes(tensor.data.size() * 8);
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(tensor.data[i]);
      for (int b = 0; b < 8; ++b) {
        bytes[i * 8 + b] = static_cast<unsigned char>(bits & 0xFFu);
        bits >>= 8;
      }
    }
    bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  nlohmann::json header = {
      {"format", "roman-tensor"},
      {"version", kTensorFormatVersion},
      {"dtype", "float64"},
      {"byte_order", "little"},
      {"dims", tensor.dims},
      {"checksum", "fnv1a64:" + hex64(payload_checksum(tensor.data))},
      {"producer", "roman " + std::string(kVersion)},
      {"metadata", tensor.metadata},
  };
  std::ofstream json(with_suffix(stem, ".json"));
  if (!json) throw Error(ErrorKind::io_error, "cannot write " + with_suffix(stem, ".json").string());
  json << header.dump(2) << "\n";
}

Tensor load_tensor(const std::filesystem::path& path) {
  const auto stem = tensor_stem(path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_file(with_suffix(stem, ".json")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io_error, "malformed tensor header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "roman-tensor") {
    throw Error(ErrorKind::io_error, "not a roman tensor header");
  }
  if (header.value("version", -1) != kTensorFormatVersion) {
    throw Error(ErrorKind::version_mismatch,
                "tensor format version " + header["version"].dump() + " is not supported (expected " +
                    std::to_string(kTensorFormatVersion) + ")");
  }
  Tensor tensor;
  tensor.dims = header.at("dims").get<std::vector<std::size_t>>();
  tensor.metadata = header.value("metadata", nlohmann::json::object());
  std::size_t count = 1;
  for (auto d : tensor.dims) count *= d;
  const auto bytes = read_file(with_suffix(stem, ".bin"));
  if (bytes.size() != count * 8) {
    throw Error(ErrorKind::checksum_mismatch,
                "payload holds " + std::to_string(bytes.size()) + " bytes but the header dims need " +
                    std::to_string(count * 8));
  }
  tensor.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 8 + b]);
    tensor.data[i] = std::bit_cast<double>(bits);
  }
  const auto expected = header.value("checksum", "");
  if (expected != "fnv1a64:" + hex64(payload_checksum(tensor.data))) {
    throw Error(ErrorKind::checksum_mismatch, "payload checksum does not match the header");
  }
  return tensor;
}

nlohmann::json plan_to_json(const RoutingPlan& plan) {
  nlohmann::json order = nlohmann::json::array();
  for (const auto& p : plan.order) order.push_back({p.scale, p.window, p.channel});
  return {
      {"channel_count", plan.channel_count},
      {"base_length", plan.base_length},
      {"alpha", plan.alpha},
      {"scales", plan.scales()},
      {"level_lengths", plan.level_lengths},
      {"window_counts", plan.window_counts},
      {"starts", plan.starts},
      {"total_pseudochannels", plan.total_pseudochannels()},
      {"pseudochannels", order},
  };
}

RoutingPlan plan_from_json(const nlohmann::json& j) {
  RoutingPlan plan;
  plan.channel_count = j.at("channel_count").get<std::size_t>();
  plan.base_length = j.at("base_length").get<std::size_t>();
  plan.alpha = j.at("alpha").get<double>();
  plan.level_lengths = j.at("level_lengths").get<std::vector<std::size_t>>();
  plan.window_counts = j.at("window_counts").get<std::vector<std::size_t>>();
  plan.starts = j.at("starts").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& p : j.at("pseudochannels")) {
    plan.order.push_back({p.at(0).get<int>(), p.at(1).get<std::size_t>(), p.at(2).get<std::size_t>()});
  }
  return plan;
}

Tensor routed_tensor(const RoutedRepresentation& routed, const RomanConfig& config) {
  Tensor tensor;
  tensor.dims = {routed.tensor.channels(), routed.tensor.length()};
  tensor.data.assign(routed.tensor.values().begin(), routed.tensor.values().end());
  nlohmann::json depth;
  if (const auto* d = std::get_if<ExplicitDepth>(&config.depth)) {
    depth = {{"scales", d->scales}};
  } else {
    depth = {{"min_base_length", std::get<MinBaseLength>(config.depth).length}};
  }
  tensor.metadata = {{"config", {{"depth", depth}, {"alpha", config.alpha}}},
                     {"plan", plan_to_json(routed.plan)}};
  return tensor;
}

}  // namespace roman::io
