#pragma once

// Artifact formats.
//
// Surface CSV (one file per method pair):
//   method_a,method_b,transform,layer,task_index,pearson_r
//   MAS,FIS,none,1,0,0.93...
// `transform` is one of none, square_a, square_b, square_both. `layer` counts
// from 1 (input-side layer first), `task_index` from 0 (first task trained).
// An undefined coefficient (zero-variance layer) leaves the last field empty.
// Spearman surfaces use the same layout with the last column named
// spearman_r.
//
// Accuracy CSV:  after_task,eval_task,accuracy
// Task log CSV:  task_index,epoch,train_loss,penalty,test_accuracy
// Lambda CSV:    lambda,mean_accuracy
// Reals are written in shortest round-trip form.
//
// Importance map binary (.bin), all integers and reals little-endian:
//   offset 0   8 bytes  magic "EWCIMAP1"
//          8   u8       method: 0 FIS, 1 MAS, 2 SI, 3 SIG
//          9   u8       squared flag (0/1)
//         10   u16      reserved, 0
//         12   u32      task_index
//         16   u32      W, number of layer widths
//         20   W x u32  widths (architecture)
//   then for each layer l: widths[l] * widths[l+1] f64 weights in row-major
//   (fan_in x fan_out) order, followed by widths[l+1] f64 biases.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ewclab/analysis.hpp"
#include "ewclab/continual.hpp"
#include "ewclab/importance.hpp"

namespace ewclab {

struct SurfaceRow {
  std::string method_a;
  std::string method_b;
  std::string transform;
  std::size_t layer = 0;
  std::size_t task_index = 0;
  std::optional<double> r;

  bool operator==(const SurfaceRow&) const = default;
};

std::string transform_name(const MethodPair& pair);
// "mas_vs_fis", "fis_vs_mas_squared", ...
std::string surface_file_stem(const MethodPair& pair);

std::vector<SurfaceRow> surface_rows(const CorrelationSurface& surface);
std::string surface_csv(const CorrelationSurface& surface);
// Throws UsageError on a malformed document.
std::vector<SurfaceRow> parse_surface_csv(std::string_view text);

std::string accuracy_csv(const std::vector<std::vector<double>>& accuracy);
std::vector<std::vector<double>> parse_accuracy_csv(std::string_view text);

std::string task_log_csv(const std::vector<TaskLog>& logs);

std::string lambda_csv(const std::vector<LambdaTrial>& table);
std::vector<LambdaTrial> parse_lambda_csv(std::string_view text);

std::string serialize_importance(const ImportanceMap& map);
ImportanceMap deserialize_importance(std::string_view bytes);

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;

  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kNeutralColor{247, 247, 247};
inline constexpr Rgb kPositiveColor{178, 24, 43};
inline constexpr Rgb kNegativeColor{33, 102, 172};

// Linear blend from kNeutralColor at r = 0 to kPositiveColor at r = +1 or
// kNegativeColor at r = -1; |r| is clamped to 1. Channels are rounded to the
// nearest integer.
Rgb diverging_color(double r);
std::string hex_color(Rgb c);  // "#rrggbb"

// SVG 1.1 heatmap: layers top to bottom, tasks left to right, undefined cells
// hatched.
std::string heatmap_svg(const CorrelationSurface& surface);
void render_heatmap(const CorrelationSurface& surface,
                    const std::filesystem::path& out_path);

// Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file_text(const std::filesystem::path& path);

}  // namespace ewclab
