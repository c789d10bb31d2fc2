#include "nlfs/csv.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nlfs {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, long line_no) {
  const std::string t = trim(s);
  if (t.empty()) throw parse_error("empty numeric field", line_no);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw parse_error("bad numeric field '" + t + "'", line_no);
  return v;
}

std::string meta_get(const Metadata& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw parse_error("draws file missing metadata key '" + key + "'");
  return it->second;
}

double meta_double(const Metadata& meta, const std::string& key) {
  return std::strtod(meta_get(meta, key).c_str(), nullptr);
}

long meta_long(const Metadata& meta, const std::string& key) {
  return std::strtol(meta_get(meta, key).c_str(), nullptr, 10);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw parse_error("empty file '" + path + "'", 1);
  ++line_no;
  auto header = split(line, ',');
  if (header.size() != 2 || trim(header[0]) != "x" || trim(header[1]) != "y")
    throw parse_error("expected header 'x,y'", line_no);

  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 2) throw parse_error("expected two fields", line_no);
    xs.push_back(parse_double(fields[0], line_no));
    ys.push_back(parse_double(fields[1], line_no));
  }
  if (xs.empty()) throw parse_error("no data rows in '" + path + "'", line_no);
  Dataset data;
  data.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return data;
}

void write_draws_csv(const std::string& path, const FitResult& fit, const Metadata& extra) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "# nlfs_draws_v1\n";

  Metadata meta = extra;
  switch (fit.family) {
    case FitFamily::spline: meta["family"] = "spline"; break;
    case FitFamily::parametric: meta["family"] = "parametric"; break;
    case FitFamily::parametric_spline: meta["family"] = "parametric_spline"; break;
  }
  meta["space"] = fit.space.members.empty() ? "none" : fit.space.name();
  if (fit.has_spline()) {
    meta["basis_order"] = std::to_string(fit.basis.knots.order);
    meta["basis_internal_knots"] = std::to_string(fit.basis.knots.n_internal());
    meta["basis_drop_intercept"] = fit.basis.drop_intercept ? "1" : "0";
    meta["basis_lo"] = format_double(fit.basis.knots.lo());
    meta["basis_hi"] = format_double(fit.basis.knots.hi());
  }
  meta["burn_in"] = std::to_string(fit.draws.burn_in);
  meta["rows"] = std::to_string(fit.draws.n_draws());
  meta["cols"] = std::to_string(fit.draws.names.size());
  for (const auto& [name, rate] : fit.draws.acceptance)
    meta["rate_" + name] = format_double(rate);

  for (const auto& [key, value] : meta) out << "# " << key << "=" << value << "\n";

  out << "iteration";
  for (const auto& name : fit.draws.names) out << "," << name;
  out << "\n";
  for (Eigen::Index m = 0; m < fit.draws.n_draws(); ++m) {
    out << (fit.draws.burn_in + m + 1);
    for (Eigen::Index c = 0; c < fit.draws.samples.cols(); ++c)
      out << "," << format_double(fit.draws.samples(m, c));
    out << "\n";
  }
  if (!out) throw parse_error("write failed on '" + path + "'");
}

FitResult read_draws_csv(const std::string& path, Metadata& meta_out) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line) || trim(line) != "# nlfs_draws_v1")
    throw parse_error("not an nlfs draws file (missing signature)", 1);
  ++line_no;

  Metadata meta;
  std::string header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw parse_error("bad metadata line", line_no);
      meta[trim(line.substr(2, eq - 2))] = trim(line.substr(eq + 1));
    } else {
      header = line;
      break;
    }
  }
  if (header.empty()) throw parse_error("draws file has no column header", line_no);

  auto cols = split(header, ',');
  if (cols.empty() || trim(cols[0]) != "iteration")
    throw parse_error("first column must be 'iteration'", line_no);

  FitResult fit;
  const std::string family = meta_get(meta, "family");
  if (family == "spline") fit.family = FitFamily::spline;
  else if (family == "parametric") fit.family = FitFamily::parametric;
  else if (family == "parametric_spline") fit.family = FitFamily::parametric_spline;
  else throw parse_error("unknown family '" + family + "'");

  const std::string space = meta_get(meta, "space");
  if (space == "hill") fit.space = FunctionSpace::hill();
  else if (space == "power") fit.space = FunctionSpace::power();
  else if (space == "hill+power") fit.space = FunctionSpace::hill_power();
  else if (space != "none") throw parse_error("unknown space '" + space + "'");

  if (fit.has_spline()) {
    fit.basis.knots = make_knots(static_cast<int>(meta_long(meta, "basis_internal_knots")),
                                 static_cast<int>(meta_long(meta, "basis_order")),
                                 {meta_double(meta, "basis_lo"), meta_double(meta, "basis_hi")});
    fit.basis.drop_intercept = meta_long(meta, "basis_drop_intercept") != 0;
  }
  fit.draws.burn_in = static_cast<int>(meta_long(meta, "burn_in"));
  for (std::size_t c = 1; c < cols.size(); ++c) fit.draws.names.push_back(trim(cols[c]));
  for (const auto& [key, value] : meta)
    if (key.rfind("rate_", 0) == 0)
      fit.draws.acceptance.emplace_back(key.substr(5), std::strtod(value.c_str(), nullptr));

  const long rows = meta_long(meta, "rows");
  const long ncols = meta_long(meta, "cols");
  if (ncols != static_cast<long>(fit.draws.names.size()))
    throw parse_error("column count mismatch with metadata", line_no);

  fit.draws.samples.resize(rows, ncols);
  long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (row >= rows) throw parse_error("more data rows than metadata 'rows'", line_no);
    auto fields = split(line, ',');
    if (static_cast<long>(fields.size()) != ncols + 1)
      throw parse_error("wrong field count", line_no);
    for (long c = 0; c < ncols; ++c)
      fit.draws.samples(row, c) = parse_double(fields[static_cast<std::size_t>(c + 1)], line_no);
    ++row;
  }
  if (row != rows) throw parse_error("fewer data rows than metadata 'rows' (file truncated?)");
  meta_out = meta;
  return fit;
}

void write_summary_curve(const std::string& path, const PosteriorSummary& summary) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "x,mean,lower,upper\n";
  for (Eigen::Index i = 0; i < summary.grid.size(); ++i)
    out << format_double(summary.grid[i]) << "," << format_double(summary.curve_mean[i]) << ","
        << format_double(summary.curve_lower[i]) << "," << format_double(summary.curve_upper[i])
        << "\n";
}

void write_summary_params(const std::string& path, const PosteriorSummary& summary,
                          const std::vector<std::pair<std::string, double>>& acceptance) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "name,mean,sd,median,lower,upper,ess\n";
  for (const auto& p : summary.params) {
    out << p.name << "," << format_double(p.mean) << "," << format_double(p.sd) << ","
        << format_double(p.median) << "," << format_double(p.lower) << ","
        << format_double(p.upper) << "," << format_double(p.ess_value);
    if (p.ess_degenerate) out << " (degenerate)";
    out << "\n";
  }
  for (const auto& [name, rate] : acceptance)
    out << name << "," << format_double(rate) << ",,,,,\n";
}

void write_trace(const std::string& path, const std::string& name, const ChainDraws& draws) {
  const int c = draws.col(name);
  if (c < 0) throw std::invalid_argument("write_trace: no column '" + name + "'");
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "iteration," << name << "\n";
  for (Eigen::Index m = 0; m < draws.n_draws(); ++m)
    out << (draws.burn_in + m + 1) << "," << format_double(draws.samples(m, c)) << "\n";
}

}  // namespace nlfs
