#include "ewclab/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ewclab/errors.hpp"

namespace ewclab {
namespace {

constexpr std::string_view kImportanceMagic = "EWCIMAP1";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_real(std::string_view field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw UsageError("malformed real '" + std::string(field) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw UsageError("malformed integer '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::vector<std::string_view>> parse_table(std::string_view text,
                                                       std::string_view header,
                                                       std::size_t columns) {
  const auto ls = lines(text);
  if (ls.empty() || ls.front() != header) {
    throw UsageError("CSV header mismatch, expected '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    auto fields = split(ls[i], ',');
    if (fields.size() != columns) {
      throw UsageError("CSV line " + std::to_string(i + 1) + ": expected " +
                       std::to_string(columns) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string display_name(const MethodRef& m) {
  return m.squared ? "squared " + std::string(method_name(m.method))
                   : std::string(method_name(m.method));
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw UsageError("importance map: truncated at byte " + std::to_string(pos_));
    }
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw UsageError("importance map: truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string transform_name(const MethodPair& pair) {
  if (pair.a.squared && pair.b.squared) return "square_both";
  if (pair.a.squared) return "square_a";
  if (pair.b.squared) return "square_b";
  return "none";
}

std::string surface_file_stem(const MethodPair& pair) {
  auto part = [](const MethodRef& m) {
    std::string s(method_name(m.method));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (m.squared) s += "_squared";
    return s;
  };
  return part(pair.a) + "_vs_" + part(pair.b);
}

std::vector<SurfaceRow> surface_rows(const CorrelationSurface& surface) {
  std::vector<SurfaceRow> rows;
  const std::string a(method_name(surface.pair.a.method));
  const std::string b(method_name(surface.pair.b.method));
  const std::string transform = transform_name(surface.pair);
  for (std::size_t l = 0; l < surface.layer_count(); ++l) {
    for (std::size_t t = 0; t < surface.task_count; ++t) {
      rows.push_back(SurfaceRow{a, b, transform, l + 1, t, surface.at(l, t)});
    }
  }
  return rows;
}

std::string surface_csv(const CorrelationSurface& surface) {
  std::string out = surface.kind == CorrelationKind::kPearson
                        ? "method_a,method_b,transform,layer,task_index,pearson_r\n"
                        : "method_a,method_b,transform,layer,task_index,spearman_r\n";
  for (const SurfaceRow& row : surface_rows(surface)) {
    out += fmt::format("{},{},{},{},{},", row.method_a, row.method_b, row.transform,
                       row.layer, row.task_index);
    if (row.r) out += fmt::format("{}", *row.r);
    out += '\n';
  }
  return out;
}

std::vector<SurfaceRow> parse_surface_csv(std::string_view text) {
  const auto ls = lines(text);
  if (ls.empty()) throw UsageError("surface CSV is empty");
  const std::string_view header = ls.front();
  if (header != "method_a,method_b,transform,layer,task_index,pearson_r" &&
      header != "method_a,method_b,transform,layer,task_index,spearman_r") {
    throw UsageError("surface CSV header mismatch");
  }
  std::vector<SurfaceRow> rows;
  for (const auto& f : parse_table(text, header, 6)) {
    SurfaceRow row{std::string(f[0]), std::string(f[1]), std::string(f[2]),
                   parse_index(f[3]), parse_index(f[4]), std::nullopt};
    if (!f[5].empty()) row.r = parse_real(f[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string accuracy_csv(const std::vector<std::vector<double>>& accuracy) {
  std::string out = "after_task,eval_task,accuracy\n";
  for (std::size_t i = 0; i < accuracy.size(); ++i) {
    for (std::size_t j = 0; j < accuracy[i].size(); ++j) {
      out += fmt::format("{},{},{}\n", i, j, accuracy[i][j]);
    }
  }
  return out;
}

std::vector<std::vector<double>> parse_accuracy_csv(std::string_view text) {
  std::vector<std::vector<double>> acc;
  for (const auto& f : parse_table(text, "after_task,eval_task,accuracy", 3)) {
    const std::size_t i = parse_index(f[0]);
    const std::size_t j = parse_index(f[1]);
    if (i >= acc.size()) acc.resize(i + 1);
    if (j >= acc[i].size()) acc[i].resize(j + 1, 0.0);
    acc[i][j] = parse_real(f[2]);
  }
  return acc;
}

std::string task_log_csv(const std::vector<TaskLog>& logs) {
  std::string out = "task_index,epoch,train_loss,penalty,test_accuracy\n";
  for (const TaskLog& log : logs) {
    for (const EpochLog& e : log.epochs) {
      out += fmt::format("{},{},{},{},", log.task_index, e.epoch, e.train_loss,
                         e.penalty);
      if (e.test_accuracy) out += fmt::format("{}", *e.test_accuracy);
      out += '\n';
    }
  }
  return out;
}

std::string lambda_csv(const std::vector<LambdaTrial>& table) {
  std::string out = "lambda,mean_accuracy\n";
  for (const LambdaTrial& t : table) {
    out += fmt::format("{},{}\n", t.lambda, t.mean_accuracy);
  }
  return out;
}

std::vector<LambdaTrial> parse_lambda_csv(std::string_view text) {
  std::vector<LambdaTrial> table;
  for (const auto& f : parse_table(text, "lambda,mean_accuracy", 2)) {
    table.push_back({parse_real(f[0]), parse_real(f[1])});
  }
  return table;
}

std::string serialize_importance(const ImportanceMap& map) {
  std::string out(kImportanceMagic);
  out.push_back(static_cast<char>(map.method));
  out.push_back(static_cast<char>(map.squared ? 1 : 0));
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.task_index));
  const auto widths = map.values.architecture();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(widths.size()));
  for (std::size_t w : widths) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  out.reserve(out.size() + 8 * map.values.parameter_count());
  for (auto block : map.values.blocks()) {
    for (double v : block) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ImportanceMap deserialize_importance(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(kImportanceMagic.size()) != kImportanceMagic) {
    throw UsageError("importance map: bad magic");
  }
  const auto method = in.get<std::uint8_t>();
  if (method > static_cast<std::uint8_t>(Method::kSig)) {
    throw UsageError("importance map: unknown method code");
  }
  const auto squared = in.get<std::uint8_t>();
  in.get<std::uint16_t>();
  ImportanceMap map;
  map.method = static_cast<Method>(method);
  map.squared = squared != 0;
  map.task_index = in.get<std::uint32_t>();
  const std::uint32_t count = in.get<std::uint32_t>();
  std::vector<std::size_t> widths;
  for (std::uint32_t i = 0; i < count; ++i) widths.push_back(in.get<std::uint32_t>());
  map.values = NetworkParams::zeros(widths);
  for (auto block : map.values.blocks()) {
    for (double& v : block) v = std::bit_cast<double>(in.get<std::uint64_t>());
  }
  if (!in.done()) throw UsageError("importance map: trailing bytes");
  return map;
}

Rgb diverging_color(double r) {
  const double t = std::min(1.0, std::abs(r));
  const Rgb end = r >= 0.0 ? kPositiveColor : kNegativeColor;
  auto blend = [t](int from, int to) {
    return static_cast<int>(std::lround(from + t * (to - from)));
  };
  return {blend(kNeutralColor.r, end.r), blend(kNeutralColor.g, end.g),
          blend(kNeutralColor.b, end.b)};
}

std::string hex_color(Rgb c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

std::string heatmap_svg(const CorrelationSurface& surface) {
  if (surface.layer_count() == 0 || surface.task_count == 0) {
    throw UsageError("heatmap: surface is empty");
  }
  constexpr int kCellW = 56;
  constexpr int kCellH = 40;
  constexpr int kLeft = 80;
  constexpr int kTop = 56;
  constexpr int kLegendW = 16;
  const int grid_w = kCellW * static_cast<int>(surface.task_count);
  const int grid_h = kCellH * static_cast<int>(surface.layer_count());
  const int width = kLeft + grid_w + 90;
  const int height = kTop + grid_h + 48;

  const std::string title = fmt::format(
      "{} between {} and {} importances",
      surface.kind == CorrelationKind::kPearson ? "Correlation" : "Spearman correlation",
      display_name(surface.pair.a), display_name(surface.pair.b));

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" "
      "height=\"{1}\" viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n",
      width, height);
  svg += fmt::format("<title>{}</title>\n", xml_escape(title));
  svg +=
      "<defs>\n"
      "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" "
      "height=\"8\" patternTransform=\"rotate(45)\">\n"
      "<rect width=\"8\" height=\"8\" fill=\"#ffffff\"/>\n"
      "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#999999\" "
      "stroke-width=\"3\"/>\n"
      "</pattern>\n"
      "<linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double r = -1.0 + 0.5 * i;
    svg += fmt::format("<stop offset=\"{}\" stop-color=\"{}\"/>\n", 0.25 * i,
                       hex_color(diverging_color(r)));
  }
  svg += "</linearGradient>\n</defs>\n";
  svg += fmt::format(
      "<text class=\"title\" x=\"{}\" y=\"28\" font-size=\"15\" "
      "text-anchor=\"middle\">{}</text>\n",
      width / 2, xml_escape(title));

  for (std::size_t l = 0; l < surface.layer_count(); ++l) {
    const int y = kTop + kCellH * static_cast<int>(l);
    svg += fmt::format(
        "<text class=\"layer-label\" x=\"{}\" y=\"{}\" font-size=\"12\" "
        "text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
        kLeft - 8, y + kCellH / 2, xml_escape(surface.layer_names.at(l)));
    for (std::size_t t = 0; t < surface.task_count; ++t) {
      const int x = kLeft + kCellW * static_cast<int>(t);
      const Correlation& c = surface.at(l, t);
      if (c) {
        svg += fmt::format(
            "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
            "fill=\"{}\" data-layer=\"{}\" data-task=\"{}\" data-r=\"{}\"/>\n",
            x, y, kCellW, kCellH, hex_color(diverging_color(*c)), l + 1, t + 1, *c);
        svg += fmt::format(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" "
            "dominant-baseline=\"middle\">{:.2f}</text>\n",
            x + kCellW / 2, y + kCellH / 2, *c);
      } else {
        svg += fmt::format(
            "<rect class=\"cell undefined\" x=\"{}\" y=\"{}\" width=\"{}\" "
            "height=\"{}\" fill=\"url(#hatch)\" data-layer=\"{}\" "
            "data-task=\"{}\"/>\n",
            x, y, kCellW, kCellH, l + 1, t + 1);
      }
    }
  }
  for (std::size_t t = 0; t < surface.task_count; ++t) {
    svg += fmt::format(
        "<text class=\"task-label\" x=\"{}\" y=\"{}\" font-size=\"12\" "
        "text-anchor=\"middle\">task {}</text>\n",
        kLeft + kCellW * static_cast<int>(t) + kCellW / 2, kTop + grid_h + 20, t + 1);
  }

  const int lx = kLeft + grid_w + 24;
  svg += fmt::format(
      "<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
      "fill=\"url(#scale)\" stroke=\"#333333\"/>\n",
      lx, kTop, kLegendW, grid_h);
  const std::pair<const char*, int> ticks[] = {
      {"1", kTop}, {"0", kTop + grid_h / 2}, {"-1", kTop + grid_h}};
  for (const auto& [label, y] : ticks) {
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" dominant-baseline=\"middle\">{}"
        "</text>\n",
        lx + kLegendW + 6, y, label);
  }
  svg += "</svg>\n";
  return svg;
}

void render_heatmap(const CorrelationSurface& surface,
                    const std::filesystem::path& out_path) {
  write_file(out_path, heatmap_svg(surface));
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace ewclab
