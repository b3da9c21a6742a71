#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "marginforge/boosters.hpp"
#include "marginforge/core.hpp"

namespace marginforge {

enum class DataFormat { csv, libsvm };

DataFormat parse_format(std::string_view name);

/// CSV: header row, last column named "label" with values in {-1,+1} or
/// {0,1} (0 maps to -1). LIBSVM: "label idx:val ..." with 1-based indices,
/// densified to the largest index seen. Errors carry the line number.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
Dataset parse_csv(std::string_view text);
Dataset parse_libsvm(std::string_view text);

std::string to_csv(const Dataset& data);

/// Whole-file write through a temporary sibling and rename.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
TrainedModel load_model(const std::filesystem::path& path);

/// One JSON object per line with the keys t, edge_new, min_edge,
/// smoothed_obj, soft_margin_obj, eps_t, rule, lambda, good_step, wall_time_ns.
std::string records_to_jsonl(const std::vector<IterationRecord>& records);

/// Two isotropic Gaussian classes in `features` dimensions with means
/// +-separation/2 along the diagonal and `flip` fraction of labels flipped.
struct SyntheticSpec {
  std::size_t examples = 200;
  std::size_t features = 5;
  double separation = 1.5;
  double flip = 0.05;
  std::uint64_t seed = 0;
};

Dataset two_gaussians(const SyntheticSpec& spec);

}  // namespace marginforge
