#include "bsfgrow/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "bsfgrow/errors.hpp"

namespace bsfgrow {

namespace {

// %.17g round-trips every double exactly.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, const std::string& path, std::size_t line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    std::ostringstream os;
    os << path << ":" << line_no << ": not a number: \"" << s << "\"";
    throw ConfigError(os.str());
  }
  return v;
}

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& expected_header)
      : path_(path), in_(path) {
    if (!in_) throw ConfigError("cannot open file: " + path);
    std::string header;
    if (!std::getline(in_, header)) {
      throw ConfigError(path + ": empty file");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header) {
      throw ConfigError(path + ": unexpected header \"" + header + "\" (expected \"" +
                        expected_header + "\")");
    }
    line_no_ = 1;
  }

  bool next_row(std::size_t n_fields, std::vector<double>* out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line == "\r") continue;
      const auto fields = split(line);
      if (fields.size() != n_fields) {
        std::ostringstream os;
        os << path_ << ":" << line_no_ << ": expected " << n_fields
           << " fields, found " << fields.size();
        throw ConfigError(os.str());
      }
      out->clear();
      for (const auto& f : fields) out->push_back(parse_number(f, path_, line_no_));
      return true;
    }
    return false;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,x1,x2,x3,y1,y2,u1,u2,d\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << num(traj.t[i]) << ',' << num(traj.x[i].x1) << ',' << num(traj.x[i].x2)
        << ',' << num(traj.x[i].x3) << ',' << num(traj.y[i].y1) << ','
        << num(traj.y[i].y2) << ',' << num(traj.u1[i]) << ',' << num(traj.u2[i])
        << ',' << num(traj.d[i]) << '\n';
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  CsvReader reader(path, "t,x1,x2,x3,y1,y2,u1,u2,d");
  Trajectory traj;
  traj.method = "file";
  std::vector<double> row;
  while (reader.next_row(9, &row)) {
    traj.t.push_back(row[0]);
    traj.x.push_back({row[1], row[2], row[3]});
    traj.y.push_back({row[4], row[5]});
    traj.u1.push_back(row[6]);
    traj.u2.push_back(row[7]);
    traj.d.push_back(row[8]);
  }
  if (traj.size() >= 2) traj.dt = traj.t[1] - traj.t[0];
  return traj;
}

void write_measurements_csv(const std::string& path, const MeasurementSeries& m) {
  auto out = open_out(path);
  out << "t,y1,y2,u1,u2,d\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << num(m.t[i]) << ',' << num(m.y1[i]) << ',' << num(m.y2[i]) << ','
        << num(m.u1[i]) << ',' << num(m.u2[i]) << ',' << num(m.d[i]) << '\n';
  }
}

MeasurementSeries read_measurements_csv(const std::string& path) {
  CsvReader reader(path, "t,y1,y2,u1,u2,d");
  MeasurementSeries m;
  std::vector<double> row;
  while (reader.next_row(6, &row)) {
    m.t.push_back(row[0]);
    m.y1.push_back(row[1]);
    m.y2.push_back(row[2]);
    m.u1.push_back(row[3]);
    m.u2.push_back(row[4]);
    m.d.push_back(row[5]);
  }
  return m;
}

void write_curve_csv(const std::string& path, const CurveTrace& trace) {
  auto out = open_out(path);
  out << "x1,omega1,omega2\n";
  for (const auto& pt : trace.points) {
    out << num(pt.x1) << ',' << num(pt.omega1) << ',' << num(pt.omega2) << '\n';
  }
}

void write_estimates_csv(const std::string& path, const EstimateSeries& est) {
  auto out = open_out(path);
  out << "t,x1_est,cand_lo,cand_hi,v1,v2,flags\n";
  for (const auto& s : est.samples) {
    out << num(s.t) << ',' << num(s.x1_estimate) << ',' << num(s.cand_lo) << ','
        << num(s.cand_hi) << ',' << num(s.v1) << ',' << num(s.v2) << ','
        << flag_tokens(s.flags) << '\n';
  }
}

}  // namespace bsfgrow
