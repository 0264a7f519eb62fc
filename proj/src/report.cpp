#include "pathwise/report.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pathwise {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string version_string() {
#ifdef PATHWISE_VERSION
  return PATHWISE_VERSION;
#else
  return "unknown";
#endif
}

void write_csv(const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& footer_lines) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  for (const auto& line : footer_lines) out << line << "\n";
  if (!out) throw std::runtime_error("failed writing '" + file + "'");
}

void write_path_csv(const std::string& file, const SampledPath& p) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
  out << "t,value\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    out << format_double(p.time_at(i)) << "," << format_double(p.value_at(i)) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + file + "'");
}

SampledPath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open '" + file + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0)
    throw validation_error("path csv must start with a 't,value' header");
  std::vector<double> times, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw validation_error("malformed path csv row: " + line);
    times.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return SampledPath::with_times(std::move(times), std::move(values));
}

namespace {

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void write_tpth(const std::string& file, const PathBatch& batch) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
  out.write("TPTH", 4);
  put(out, (std::uint32_t)1);
  put(out, (std::uint32_t)batch.count());
  put(out, (std::uint32_t)batch.steps);
  put(out, batch.horizon);
  for (const auto& row : batch.values) {
    if (row.size() != batch.steps + 1)
      throw validation_error("batch row length does not match steps + 1");
    out.write(reinterpret_cast<const char*>(row.data()),
              (std::streamsize)(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing '" + file + "'");
}

PathBatch read_tpth(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + file + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TPTH", 4) != 0)
    throw validation_error("not a TPTH file: bad magic");
  std::uint32_t version = 0, count = 0, steps = 0;
  get(in, version);
  get(in, count);
  get(in, steps);
  if (!in || version != 1)
    throw validation_error("unsupported TPTH version");
  PathBatch b;
  get(in, b.horizon);
  b.steps = steps;
  b.seed = 0;
  b.generator_tag = "file";
  b.values.assign(count, std::vector<double>((std::size_t)steps + 1, 0.0));
  for (auto& row : b.values) {
    in.read(reinterpret_cast<char*>(row.data()),
            (std::streamsize)(row.size() * sizeof(double)));
    if (!in) throw validation_error("truncated TPTH file");
  }
  return b;
}

void write_meta_sidecar(const std::string& data_file, const std::string& config_json,
                        double wall_seconds) {
  nlohmann::json j = nlohmann::json::parse(config_json);
  j["version"] = version_string();
  j["wall_seconds"] = wall_seconds;
  std::ofstream out(data_file + ".meta.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write meta sidecar for '" + data_file + "'");
  out << j.dump(2) << "\n";
}

}  // namespace pathwise
