#include "losplan/report.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "losplan/scenario.hpp"

namespace losplan {

namespace {

void emit_point(YAML::Emitter& out, const Point3& p) {
  out << YAML::Flow << YAML::BeginSeq << format_double(p.x) << format_double(p.y) << format_double(p.z)
      << YAML::EndSeq;
}

std::size_t skip_space_and_comments(std::string_view d, std::size_t pos) {
  while (pos < d.size()) {
    if (d[pos] == '#') {
      while (pos < d.size() && d[pos] != '\n') ++pos;
    } else if (d[pos] == ' ' || d[pos] == '\t' || d[pos] == '\r' || d[pos] == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

long parse_header_int(std::string_view d, std::size_t& pos) {
  pos = skip_space_and_comments(d, pos);
  long v = 0;
  const std::size_t start = pos;
  while (pos < d.size() && d[pos] >= '0' && d[pos] <= '9') v = v * 10 + (d[pos++] - '0');
  if (pos == start) throw std::invalid_argument("pgm: malformed header");
  return v;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += kHex[md[k] >> 4];
    out += kHex[md[k] & 15];
  }
  return out;
}

std::string to_pgm(const BitMatrix& bits) {
  std::string out = "P5\n" + std::to_string(bits.cols()) + " " + std::to_string(bits.rows()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + bits.size());
  std::size_t k = header;
  for (int r = 0; r < bits.rows(); ++r) {
    for (int c = 0; c < bits.cols(); ++c) out[k++] = bits.get(r, c) ? static_cast<char>(255) : '\0';
  }
  return out;
}

BitMatrix parse_pgm(std::string_view d) {
  if (d.substr(0, 2) != "P5") throw std::invalid_argument("pgm: not a binary PGM");
  std::size_t pos = 2;
  const long cols = parse_header_int(d, pos);
  const long rows = parse_header_int(d, pos);
  const long maxval = parse_header_int(d, pos);
  if (maxval != 255 || pos >= d.size()) throw std::invalid_argument("pgm: expected maxval 255");
  ++pos;  // single whitespace after maxval
  if (d.size() - pos != static_cast<std::size_t>(rows * cols)) throw std::invalid_argument("pgm: size mismatch");
  BitMatrix bits(static_cast<int>(rows), static_cast<int>(cols));
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) bits.set(static_cast<int>(r), static_cast<int>(c), d[pos++] != '\0');
  }
  return bits;
}

std::string to_csv(const BitMatrix& bits) {
  std::string out;
  out.reserve(bits.size() * 2);
  for (int r = 0; r < bits.rows(); ++r) {
    for (int c = 0; c < bits.cols(); ++c) {
      if (c) out += ',';
      out += bits.get(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

BitMatrix parse_csv_matrix(std::string_view d) {
  std::vector<std::vector<bool>> rows;
  std::size_t pos = 0;
  while (pos < d.size()) {
    std::size_t eol = d.find('\n', pos);
    if (eol == std::string_view::npos) eol = d.size();
    std::string_view line = d.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<bool> row;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == ',') continue;
      if (line[k] != '0' && line[k] != '1') throw std::invalid_argument("csv: expected 0/1 entries");
      row.push_back(line[k] == '1');
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw std::invalid_argument("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  BitMatrix bits(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) bits.set(static_cast<int>(r), static_cast<int>(c), rows[r][c]);
  }
  return bits;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string convergence_csv(const std::vector<TracePoint>& trace) {
  std::string out = "wall_seconds,eval_count,best_objective\n";
  for (const TracePoint& p : trace) {
    out += format_double(p.wall_seconds) + "," + std::to_string(p.eval_count) + "," +
           format_double(p.best_objective) + "\n";
  }
  return out;
}

std::string placement_yaml(const PlacementState& state, double coverage_percent, std::string_view algorithm) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "algorithm" << YAML::Value << std::string(algorithm);
  out << YAML::Key << "objective" << YAML::Value << format_double(state.objective);
  out << YAML::Key << "coverage_percent" << YAML::Value << format_double(coverage_percent);
  out << YAML::Key << "nlos_percent" << YAML::Value << format_double(100.0 - coverage_percent);
  out << YAML::Key << "eval_count" << YAML::Value << state.eval_count;
  out << YAML::Key << "uavs" << YAML::Value << YAML::BeginSeq;
  for (std::size_t n = 0; n < state.cells.size(); ++n) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "cell" << YAML::Value << YAML::Flow << YAML::BeginSeq << state.cells[n].i
        << state.cells[n].j << YAML::EndSeq;
    out << YAML::Key << "position" << YAML::Value;
    emit_point(out, state.positions.at(n));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string plan_yaml(const ClusterPlan& plan, const GroundNodeSet& nodes, std::string_view algorithm,
                      std::uint64_t eval_count) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "algorithm" << YAML::Value << std::string(algorithm);
  out << YAML::Key << "avg_capacity" << YAML::Value << format_double(plan.avg_capacity);
  out << YAML::Key << "all_los" << YAML::Value << plan.all_los;
  out << YAML::Key << "eval_count" << YAML::Value << eval_count;
  if (plan.failed_node) out << YAML::Key << "failed_node" << YAML::Value << *plan.failed_node;
  if (plan.failed_cluster) out << YAML::Key << "failed_cluster" << YAML::Value << *plan.failed_cluster;
  out << YAML::Key << "uavs" << YAML::Value << YAML::BeginSeq;
  for (const Point3& u : plan.uav_positions) emit_point(out, u);
  out << YAML::EndSeq;
  if (!plan.centroids.empty()) {
    out << YAML::Key << "centroids" << YAML::Value << YAML::BeginSeq;
    for (const Point3& c : plan.centroids) emit_point(out, c);
    out << YAML::EndSeq;
  }
  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "position" << YAML::Value;
    emit_point(out, nodes.positions[k]);
    out << YAML::Key << "uav" << YAML::Value << plan.assignment.at(k);
    out << YAML::Key << "los" << YAML::Value << static_cast<bool>(plan.node_los.at(k));
    out << YAML::Key << "capacity" << YAML::Value << format_double(plan.node_capacity.at(k));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ReportWriter::ReportWriter(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create " + dir_.string() + ": " + ec.message());
}

void ReportWriter::write(const std::string& name, std::string_view content) {
  write(name, content, content, "full");
}

void ReportWriter::write(const std::string& name, std::string_view content, std::string_view digest_content,
                         const std::string& digest_scope) {
  write_file_atomic(dir_ / name, content);
  entries_.push_back({name, sha256_hex(digest_content), digest_content.size(), digest_scope});
}

void ReportWriter::write_coverage(const std::string& stem, const BitMatrix& bits) {
  write(stem + ".pgm", to_pgm(bits));
  write(stem + ".csv", to_csv(bits));
}

void ReportWriter::write_convergence(const std::string& name, const std::vector<TracePoint>& trace) {
  std::string stable = "eval_count,best_objective\n";
  for (const TracePoint& p : trace) stable += std::to_string(p.eval_count) + "," + format_double(p.best_objective) + "\n";
  write(name, convergence_csv(trace), stable, "eval_count,best_objective");
}

std::string ReportWriter::write_manifest(std::string_view metadata_json) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "losplan-report/1";
  manifest["metadata"] = nlohmann::ordered_json::parse(metadata_json);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const Entry& e : entries_) {
    list.push_back({{"name", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}, {"digest_scope", e.digest_scope}});
  }
  manifest["artifacts"] = std::move(list);
  const std::string text = manifest.dump(2) + "\n";
  write_file_atomic(dir_ / "manifest.json", text);
  return text;
}

}  // namespace losplan
