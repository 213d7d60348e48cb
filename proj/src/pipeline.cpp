#include "sead/pipeline.hpp"

#include <cstdio>
#include <sstream>

namespace sead {

namespace {
const std::vector<std::string> kModeNames = {"greedy", "beam", "eg-cs",
                                             "eg-acs"};
}

std::optional<DecodeMode> decode_mode_from_name(const std::string& name) {
  for (size_t i = 0; i < kModeNames.size(); ++i)
    if (kModeNames[i] == name) return static_cast<DecodeMode>(i);
  return std::nullopt;
}

const std::string& decode_mode_name(DecodeMode mode) {
  return kModeNames[static_cast<size_t>(mode)];
}

std::vector<AblationRow> default_ablation_rows() {
  std::vector<AblationRow> rows;

  AblationRow s2s{"s2s", false, NoiseConfig::none()};
  rows.push_back(s2s);

  AblationRow ptr{"s2s_ptr", true, NoiseConfig::none()};
  rows.push_back(ptr);

  AblationRow infill{"s2s_ptr_infill", true, NoiseConfig::none()};
  infill.noise.infilling_enabled = true;
  rows.push_back(infill);

  AblationRow shuffle{"shuffle_only", true, NoiseConfig{}};
  shuffle.noise.erosion_enabled = false;
  shuffle.noise.infilling_enabled = false;
  rows.push_back(shuffle);

  AblationRow erosion{"erosion_only", true, NoiseConfig{}};
  erosion.noise.shuffle_enabled = false;
  erosion.noise.p_shuffle = 0.0;
  erosion.noise.infilling_enabled = false;
  rows.push_back(erosion);

  AblationRow full{"full", true, NoiseConfig{}};
  full.noise.infilling_enabled = false;
  rows.push_back(full);

  return rows;
}

std::string ablation_table(const std::vector<AblationResult>& rows) {
  std::ostringstream out;
  out << "row              acc_lf  acc_ex  seeds\n";
  for (const auto& r : rows) {
    char line[128];
    if (!r.error.empty()) {
      out << r.name << "  FAILED: " << r.error << "\n";
      continue;
    }
    std::snprintf(line, sizeof(line), "%-16s %6.1f  %6.1f  %zu\n",
                  r.name.c_str(), r.mean_lf * 100.0, r.mean_ex * 100.0,
                  r.cells.size());
    out << line;
  }
  return out.str();
}

}  // namespace sead
