#ifndef BPGMF_TRACE_IO_HPP_
#define BPGMF_TRACE_IO_HPP_

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpgmf/matrix.hpp"
#include "bpgmf/optimizers.hpp"

namespace bpgmf {

inline constexpr const char* kTraceHeader = "iter,elapsed_sec,objective,step,inertia,lbar,lunder,test_rmse";

namespace detail {

inline std::string opt_field(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

inline std::optional<double> parse_opt(const std::string& tok, const std::string& where) {
  if (tok.empty()) return std::nullopt;
  return parse_real(tok, where);
}

}  // namespace detail

/// Trace CSV with the fixed header; inapplicable columns are left empty.
inline void write_trace_csv(std::ostream& out, const Trace& tr) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : tr.records) {
    out << r.iter << ',' << detail::opt_field(r.elapsed_sec) << ',' << format_real(r.objective) << ','
        << detail::opt_field(r.step) << ',' << format_real(r.inertia) << ',' << detail::opt_field(r.lbar) << ','
        << detail::opt_field(r.lunder) << ',' << detail::opt_field(r.test_rmse) << '\n';
  }
}

inline std::string trace_csv(const Trace& tr) {
  std::ostringstream os;
  write_trace_csv(os, tr);
  return os.str();
}

inline std::vector<TraceRecord> read_trace_csv(std::istream& in, const std::string& name = "trace") {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(name + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error(name + ":1: unexpected header '" + line + "'");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      f.push_back(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (f.size() != 8) throw std::runtime_error(where + ": expected 8 columns, got " + std::to_string(f.size()));
    TraceRecord r;
    r.iter = static_cast<std::size_t>(parse_real(f[0], where));
    r.elapsed_sec = detail::parse_opt(f[1], where);
    r.objective = parse_real(f[2], where);
    r.step = detail::parse_opt(f[3], where);
    r.inertia = parse_real(f[4], where);
    r.lbar = detail::parse_opt(f[5], where);
    r.lunder = detail::parse_opt(f[6], where);
    r.test_rmse = detail::parse_opt(f[7], where);
    out.push_back(r);
  }
  return out;
}

inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace_csv(in, path);
}

/// Writes to a sibling temporary file and renames it over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace bpgmf

#endif  // BPGMF_TRACE_IO_HPP_
