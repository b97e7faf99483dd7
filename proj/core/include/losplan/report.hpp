#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "losplan/bit_matrix.hpp"
#include "losplan/los_engine.hpp"
#include "losplan/network_planner.hpp"
#include "losplan/placement.hpp"

namespace losplan {

std::string sha256_hex(std::string_view data);

/// Binary PGM (P5): one row per ground row i, 255 = LoS, 0 = NLoS.
std::string to_pgm(const BitMatrix& bits);
BitMatrix parse_pgm(std::string_view data);

/// Row-major 0/1 matrix, comma separated, one row per line.
std::string to_csv(const BitMatrix& bits);
BitMatrix parse_csv_matrix(std::string_view data);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view field);

/// Header wall_seconds,eval_count,best_objective.
std::string convergence_csv(const std::vector<TracePoint>& trace);

std::string placement_yaml(const PlacementState& state, double coverage_percent, std::string_view algorithm);
std::string plan_yaml(const ClusterPlan& plan, const GroundNodeSet& nodes, std::string_view algorithm,
                      std::uint64_t eval_count);

/// Writes artifacts atomically (temp file + rename) into one directory and
/// records their SHA-256 digests for the manifest.
class ReportWriter {
 public:
  struct Entry {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
    std::string digest_scope;  // "full" or a description of the hashed part
  };

  explicit ReportWriter(std::filesystem::path out_dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void write(const std::string& name, std::string_view content);
  /// Records a digest over `digest_content` instead of the file bytes.
  void write(const std::string& name, std::string_view content, std::string_view digest_content,
             const std::string& digest_scope);

  void write_coverage(const std::string& stem, const BitMatrix& bits);
  /// Wall-clock times vary between runs, so only the eval/objective columns are hashed.
  void write_convergence(const std::string& name, const std::vector<TracePoint>& trace);

  /// manifest.json with every artifact written so far plus `metadata` (a JSON object text).
  std::string write_manifest(std::string_view metadata_json = "{}");

 private:
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
};

/// Writes `content` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace losplan
